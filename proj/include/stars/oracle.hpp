#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "stars/rng.hpp"

namespace stars {

enum class NoiseForm { additive, multiplicative };
enum class NoiseDist { gaussian, uniform };

const char* to_string(NoiseForm form);
const char* to_string(NoiseDist dist);
NoiseForm noise_form_from_string(const std::string& s);
NoiseDist noise_dist_from_string(const std::string& s);

/// Centered noise theta with standard deviation sigma; the uniform variant
/// draws from [-sqrt(3) sigma, sqrt(3) sigma] so that sd(theta) = sigma.
struct NoiseModel {
    NoiseForm form = NoiseForm::additive;
    NoiseDist dist = NoiseDist::gaussian;
    double sigma = 0.0;

    void validate() const;
    double draw_theta(RngStream& rng) const;
    double corrupt(double f, double theta) const;
};

/// Sufficient statistics of the samples drawn at each visited point.
/// Points are keyed by the exact bit pattern of their coordinates; fuzzy
/// matching would reuse samples across genuinely different points.
class SampleCache {
public:
    struct Entry {
        double sum = 0.0;
        double sum_sq = 0.0;
        long long count = 0;
        double f_true = 0.0;     // deterministic objective at the point
        RngStream noise;         // per-point noise stream
        std::vector<double> raw; // populated only when retain_raw is set

        double mean() const { return sum / static_cast<double>(count); }
        double variance() const;
    };

    explicit SampleCache(bool retain_raw = false) : retain_raw_(retain_raw) {}

    Entry* find(const Eigen::VectorXd& x);
    const Entry* find(const Eigen::VectorXd& x) const;
    Entry& create(const Eigen::VectorXd& x, double f_true, RngStream noise);
    std::size_t size() const { return entries_.size(); }
    bool retain_raw() const { return retain_raw_; }

    static std::string key_of(const Eigen::VectorXd& x);

private:
    std::unordered_map<std::string, Entry> entries_;
    bool retain_raw_;
};

/// The two candidate-point estimates compared by the acceptance ratio.
struct EstimatePair {
    double f0 = 0.0;
    double fs = 0.0;
    long long n0 = 0;
    long long ns = 0;
    Eigen::VectorXd x0;
    Eigen::VectorXd xs;
};

/// A deterministic objective wrapped with stochastic noise, an evaluation
/// counter, and the sample cache that makes reuse possible.
///
/// Noise draws at a point come from a per-point stream derived from the
/// noise stream bound at construction, so the sample sequence observed at a
/// fixed point depends only on (noise key, point) and never on visit order.
/// Solver variants sharing a noise key therefore see identical noise at
/// identical points. One instance per run; not shared across threads.
class NoisyProblem {
public:
    NoisyProblem(std::function<double(const Eigen::VectorXd&)> objective, int dim,
                 NoiseModel noise, RngStream noise_stream, bool retain_raw = false);

    int dim() const { return dim_; }
    const NoiseModel& noise() const { return noise_; }
    long long evaluations() const { return evaluations_; }
    SampleCache& cache() { return cache_; }
    const SampleCache& cache() const { return cache_; }

    /// Noiseless objective value; benchmark scoring only, not counted.
    double true_value(const Eigen::VectorXd& x) const;

    /// Optional analytic gradient of the underlying objective (diagnostics).
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;

    /// One noisy draw; counts one evaluation and feeds the cache.
    double sample(const Eigen::VectorXd& x);

    /// Mean over max(cached, n_target) samples at x, drawing only the
    /// shortfall. Returns (mean, count actually averaged).
    std::pair<double, long long> estimate(const Eigen::VectorXd& x, long long n_target);

    EstimatePair estimate_pair(const Eigen::VectorXd& x0, const Eigen::VectorXd& xs,
                               long long n_target);

private:
    SampleCache::Entry& touch(const Eigen::VectorXd& x);
    void draw_into(SampleCache::Entry& entry, long long count);

    std::function<double(const Eigen::VectorXd&)> objective_;
    int dim_;
    NoiseModel noise_;
    RngStream noise_stream_;
    SampleCache cache_;
    long long evaluations_ = 0;
};

} // namespace stars
