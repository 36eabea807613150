#include "stars/rng.hpp"

#include <cmath>

namespace stars {

namespace {

constexpr std::uint64_t kAbsorbInit = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

// Absorb a sequence of words into a 256-bit key.
std::array<std::uint64_t, 4> absorb(const std::uint64_t* words, std::size_t n) {
    std::uint64_t x = kAbsorbInit;
    for (std::size_t i = 0; i < n; ++i) {
        x ^= words[i];
        (void)splitmix64(x);
    }
    std::array<std::uint64_t, 4> key;
    for (auto& w : key) w = splitmix64(x);
    return key;
}

} // namespace

RngStream::RngStream(const std::array<std::uint64_t, 4>& key) : key_(key) {
    std::uint64_t x = key_[0] ^ rotl(key_[1], 13) ^ rotl(key_[2], 29) ^ rotl(key_[3], 47);
    for (auto& s : state_) s = splitmix64(x);
    // xoshiro forbids the all-zero state; unreachable in practice.
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

RngStream RngStream::from_key(std::uint64_t k0, std::uint64_t k1,
                              std::uint64_t k2, std::uint64_t k3) {
    const std::uint64_t words[4] = {k0, k1, k2, k3};
    return RngStream(absorb(words, 4));
}

RngStream RngStream::derive(std::uint64_t tag) const {
    const std::uint64_t words[5] = {key_[0], key_[1], key_[2], key_[3], tag};
    return RngStream(absorb(words, 5));
}

RngStream RngStream::derive(std::string_view tag) const {
    return derive(hash_bytes(tag.data(), tag.size()));
}

std::uint64_t RngStream::next_u64() {
    // xoshiro256++
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RngStream::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

std::uint64_t RngStream::below(std::uint64_t n) {
    const std::uint64_t threshold = (~n + 1) % n; // = 2^64 mod n
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) return r % n;
    }
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    // u1 in (0,1] keeps the log finite.
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_normal_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

double RngStream::rademacher() {
    return (next_u64() >> 63) ? 1.0 : -1.0;
}

std::uint64_t RngStream::key_fingerprint() const {
    std::uint64_t x = key_[0] ^ rotl(key_[1], 17) ^ rotl(key_[2], 31) ^ rotl(key_[3], 49);
    return splitmix64(x);
}

std::uint64_t hash_bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace stars
