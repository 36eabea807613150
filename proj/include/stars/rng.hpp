#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace stars {

/// Counter-keyed, splittable random stream.
///
/// A stream is identified by an immutable 256-bit key; `derive()` produces an
/// independent child stream as a pure function of (key, tag), never of the
/// consumed state. All generation algorithms (xoshiro256++, SplitMix64 key
/// expansion, Box-Muller) are fixed here so that sequences are bit-identical
/// across platforms and builds, independent of the C++ standard library.
class RngStream {
public:
    RngStream() : RngStream(from_key(0)) {}

    static RngStream from_key(std::uint64_t k0, std::uint64_t k1 = 0,
                              std::uint64_t k2 = 0, std::uint64_t k3 = 0);

    /// Independent child stream; depends only on this stream's key and `tag`.
    RngStream derive(std::uint64_t tag) const;
    RngStream derive(std::string_view tag) const;

    std::uint64_t next_u64();

    /// Uniform on [0,1), 53-bit resolution.
    double uniform01();

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi);

    /// Uniform integer in [0, n), rejection-sampled (no modulo bias).
    std::uint64_t below(std::uint64_t n);

    /// Standard normal via Box-Muller; the paired variate is cached.
    double normal();

    /// +1 or -1 with equal probability.
    double rademacher();

    /// 64-bit digest of the key, for trace labelling.
    std::uint64_t key_fingerprint() const;

private:
    RngStream(const std::array<std::uint64_t, 4>& key);

    std::array<std::uint64_t, 4> key_;
    std::array<std::uint64_t, 4> state_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// FNV-1a over arbitrary bytes; used to tag streams by point coordinates.
std::uint64_t hash_bytes(const void* data, std::size_t len);

} // namespace stars
