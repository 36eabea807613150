#include "stars/oracle.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "stars/errors.hpp"

namespace stars {

const char* to_string(NoiseForm form) {
    return form == NoiseForm::additive ? "additive" : "multiplicative";
}

const char* to_string(NoiseDist dist) {
    return dist == NoiseDist::gaussian ? "normal" : "uniform";
}

NoiseForm noise_form_from_string(const std::string& s) {
    if (s == "additive" || s == "add") return NoiseForm::additive;
    if (s == "multiplicative" || s == "mult") return NoiseForm::multiplicative;
    throw ConfigError("unknown noise form '" + s + "' (expected add|mult)");
}

NoiseDist noise_dist_from_string(const std::string& s) {
    if (s == "normal" || s == "gaussian") return NoiseDist::gaussian;
    if (s == "uniform") return NoiseDist::uniform;
    throw ConfigError("unknown noise distribution '" + s + "' (expected normal|uniform)");
}

void NoiseModel::validate() const {
    if (sigma < 0.0) throw ConfigError("noise sigma must be nonnegative");
}

double NoiseModel::draw_theta(RngStream& rng) const {
    if (sigma == 0.0) return 0.0;
    if (dist == NoiseDist::gaussian) return sigma * rng.normal();
    const double half_width = sigma * 1.7320508075688772935; // sqrt(3) sigma
    return rng.uniform(-half_width, half_width);
}

double NoiseModel::corrupt(double f, double theta) const {
    return form == NoiseForm::additive ? f + theta : f * (1.0 + theta);
}

double SampleCache::Entry::variance() const {
    if (count < 2) return 0.0;
    const double m = mean();
    const double n = static_cast<double>(count);
    return std::max(0.0, (sum_sq - n * m * m) / (n - 1.0));
}

std::string SampleCache::key_of(const Eigen::VectorXd& x) {
    std::string key(static_cast<std::size_t>(x.size()) * sizeof(double), '\0');
    std::memcpy(key.data(), x.data(), key.size());
    return key;
}

SampleCache::Entry* SampleCache::find(const Eigen::VectorXd& x) {
    auto it = entries_.find(key_of(x));
    return it == entries_.end() ? nullptr : &it->second;
}

const SampleCache::Entry* SampleCache::find(const Eigen::VectorXd& x) const {
    auto it = entries_.find(key_of(x));
    return it == entries_.end() ? nullptr : &it->second;
}

SampleCache::Entry& SampleCache::create(const Eigen::VectorXd& x, double f_true, RngStream noise) {
    Entry entry;
    entry.f_true = f_true;
    entry.noise = noise;
    return entries_.emplace(key_of(x), std::move(entry)).first->second;
}

NoisyProblem::NoisyProblem(std::function<double(const Eigen::VectorXd&)> objective, int dim,
                           NoiseModel noise, RngStream noise_stream, bool retain_raw)
    : objective_(std::move(objective)), dim_(dim), noise_(noise),
      noise_stream_(noise_stream), cache_(retain_raw) {
    noise_.validate();
}

double NoisyProblem::true_value(const Eigen::VectorXd& x) const {
    const double f = objective_(x);
    if (!std::isfinite(f)) {
        std::ostringstream msg;
        msg << "objective is non-finite at x = [" << x.transpose() << "]";
        throw EvaluationError(msg.str());
    }
    return f;
}

SampleCache::Entry& NoisyProblem::touch(const Eigen::VectorXd& x) {
    if (x.size() != dim_) throw std::invalid_argument("oracle: point dimension mismatch");
    if (!x.allFinite()) throw std::invalid_argument("oracle: non-finite point");
    if (auto* entry = cache_.find(x)) return *entry;
    const double f = true_value(x);
    const std::string key = SampleCache::key_of(x);
    return cache_.create(x, f, noise_stream_.derive(hash_bytes(key.data(), key.size())));
}

void NoisyProblem::draw_into(SampleCache::Entry& entry, long long count) {
    for (long long i = 0; i < count; ++i) {
        const double value = noise_.corrupt(entry.f_true, noise_.draw_theta(entry.noise));
        entry.sum += value;
        entry.sum_sq += value * value;
        entry.count += 1;
        if (cache_.retain_raw()) entry.raw.push_back(value);
    }
    evaluations_ += count;
}

double NoisyProblem::sample(const Eigen::VectorXd& x) {
    auto& entry = touch(x);
    const double value = noise_.corrupt(entry.f_true, noise_.draw_theta(entry.noise));
    entry.sum += value;
    entry.sum_sq += value * value;
    entry.count += 1;
    if (cache_.retain_raw()) entry.raw.push_back(value);
    evaluations_ += 1;
    return value;
}

std::pair<double, long long> NoisyProblem::estimate(const Eigen::VectorXd& x, long long n_target) {
    if (n_target < 1) throw std::invalid_argument("estimate: n_target must be >= 1");
    auto& entry = touch(x);
    if (entry.count < n_target) draw_into(entry, n_target - entry.count);
    return {entry.mean(), entry.count};
}

EstimatePair NoisyProblem::estimate_pair(const Eigen::VectorXd& x0, const Eigen::VectorXd& xs,
                                         long long n_target) {
    EstimatePair pair;
    pair.x0 = x0;
    pair.xs = xs;
    std::tie(pair.f0, pair.n0) = estimate(x0, n_target);
    std::tie(pair.fs, pair.ns) = estimate(xs, n_target);
    return pair;
}

} // namespace stars
