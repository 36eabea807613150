#include "stars/sketch.hpp"

#include <cmath>
#include <vector>

#include "stars/errors.hpp"

namespace stars {

const char* to_string(EnsembleKind kind) {
    switch (kind) {
    case EnsembleKind::gaussian: return "gaussian";
    case EnsembleKind::hashing: return "hashing";
    case EnsembleKind::identity: return "identity";
    }
    return "?";
}

EnsembleKind ensemble_kind_from_string(const std::string& s) {
    if (s == "gaussian") return EnsembleKind::gaussian;
    if (s == "hashing") return EnsembleKind::hashing;
    if (s == "identity") return EnsembleKind::identity;
    throw ConfigError("unknown ensemble '" + s + "' (expected gaussian|hashing|identity)");
}

SketchEnsemble SketchEnsemble::gaussian(int n, int p) {
    SketchEnsemble e{EnsembleKind::gaussian, n, p, 1};
    e.validate();
    return e;
}

SketchEnsemble SketchEnsemble::hashing(int n, int p, int r) {
    SketchEnsemble e{EnsembleKind::hashing, n, p, r};
    e.validate();
    return e;
}

SketchEnsemble SketchEnsemble::identity(int n) {
    SketchEnsemble e{EnsembleKind::identity, n, n, 1};
    e.validate();
    return e;
}

void SketchEnsemble::validate() const {
    if (ambient_dim < 1) throw ConfigError("ensemble: ambient dimension n must be positive");
    if (subspace_dim < 1) throw ConfigError("ensemble: subspace dimension p must be positive");
    if (subspace_dim > ambient_dim) throw ConfigError("ensemble: p must satisfy p <= n");
    if (kind == EnsembleKind::identity && subspace_dim != ambient_dim)
        throw ConfigError("identity ensemble requires p == n");
    if (kind == EnsembleKind::hashing && (hash_nonzeros < 1 || hash_nonzeros > subspace_dim))
        throw ConfigError("hashing ensemble requires 1 <= r <= p");
}

AlignmentParams::AlignmentParams(double epsilon_, double beta_)
    : epsilon(epsilon_), beta(beta_) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw ConfigError("alignment: epsilon must lie strictly in (0,1)");
    if (!(beta > 0.0 && beta < 1.0))
        throw ConfigError("alignment: beta must lie strictly in (0,1)");
}

SketchMatrix::SketchMatrix(Eigen::MatrixXd entries, SketchEnsemble ensemble, std::string seed_tag)
    : entries_(std::move(entries)), ensemble_(ensemble), seed_tag_(std::move(seed_tag)) {
    if (entries_.rows() != ensemble_.ambient_dim || entries_.cols() != ensemble_.subspace_dim)
        throw ConfigError("sketch matrix shape does not match its ensemble");
}

double SketchMatrix::spectral_norm() const {
    const Eigen::MatrixXd gram = entries_.transpose() * entries_;
    const int p = static_cast<int>(gram.rows());
    // Deterministic start vector; orthogonality to the top eigenvector of a
    // random Gram matrix is a measure-zero event.
    Eigen::VectorXd v = Eigen::VectorXd::Ones(p);
    for (int i = 0; i < p; ++i) v[i] += 1e-3 * static_cast<double>(i % 7);
    v /= v.norm();
    double lambda = 0.0;
    for (int it = 0; it < 50; ++it) {
        Eigen::VectorXd w = gram * v;
        const double norm = w.norm();
        if (norm == 0.0) { lambda = 0.0; break; }
        const double next = v.dot(w);
        v = w / norm;
        if (std::abs(next - lambda) <= 1e-8 * std::max(1.0, std::abs(next))) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return std::sqrt(std::max(lambda, 0.0));
}

int gaussian_min_dim(double epsilon, double beta) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::domain_error("gaussian_min_dim: epsilon must lie in (0,1)");
    if (!(beta > 0.0 && beta < 1.0))
        throw std::domain_error("gaussian_min_dim: beta must lie in (0,1)");
    const double bound = 4.0 / (epsilon * epsilon) * std::log(1.0 / beta);
    const double p = std::ceil(bound);
    return p < 1.0 ? 1 : static_cast<int>(p);
}

SketchMatrix draw_sketch(const SketchEnsemble& ensemble, RngStream& rng) {
    ensemble.validate();
    const int n = ensemble.ambient_dim;
    const int p = ensemble.subspace_dim;
    std::string tag = std::to_string(rng.key_fingerprint());
    Eigen::MatrixXd q;

    switch (ensemble.kind) {
    case EnsembleKind::identity:
        q = Eigen::MatrixXd::Identity(n, n);
        break;
    case EnsembleKind::gaussian: {
        q.resize(n, p);
        const double scale = 1.0 / std::sqrt(static_cast<double>(p));
        // Row-major fill order: entry (i,j) corresponds to draw i*p + j.
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < p; ++j)
                q(i, j) = scale * rng.normal();
        break;
    }
    case EnsembleKind::hashing: {
        q = Eigen::MatrixXd::Zero(n, p);
        const int r = ensemble.hash_nonzeros;
        const double mag = 1.0 / std::sqrt(static_cast<double>(r));
        std::vector<int> idx(static_cast<std::size_t>(p));
        for (int i = 0; i < n; ++i) {
            // r distinct column positions via partial Fisher-Yates.
            for (int j = 0; j < p; ++j) idx[static_cast<std::size_t>(j)] = j;
            for (int k = 0; k < r; ++k) {
                const int pick = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(p - k)));
                std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(pick)]);
                q(i, idx[static_cast<std::size_t>(k)]) = mag * rng.rademacher();
            }
        }
        break;
    }
    }
    return SketchMatrix(std::move(q), ensemble, std::move(tag));
}

Eigen::VectorXd apply_transpose(const SketchMatrix& q, const Eigen::VectorXd& v) {
    if (v.size() != q.rows())
        throw std::invalid_argument("apply_transpose: vector length does not match n");
    return q.entries().transpose() * v;
}

Eigen::VectorXd lift(const SketchMatrix& q, const Eigen::VectorXd& s) {
    if (s.size() != q.cols())
        throw std::invalid_argument("lift: vector length does not match p");
    return q.entries() * s;
}

double empirical_alignment(const SketchEnsemble& ensemble, const Eigen::VectorXd& v,
                           long trials, const AlignmentParams& params, RngStream& rng) {
    if (trials < 1) throw std::invalid_argument("empirical_alignment: trials must be >= 1");
    const double vnorm = v.norm();
    if (vnorm == 0.0) throw std::invalid_argument("empirical_alignment: v must be nonzero");
    if (v.size() != ensemble.ambient_dim)
        throw std::invalid_argument("empirical_alignment: vector length does not match n");

    const double threshold = params.alpha_q() * vnorm;
    long hits = 0;
    for (long t = 0; t < trials; ++t) {
        const SketchMatrix q = draw_sketch(ensemble, rng);
        if ((q.entries().transpose() * v).norm() >= threshold) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
}

} // namespace stars
