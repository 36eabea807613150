#pragma once

#include <Eigen/Dense>

#include <string>

#include "stars/rng.hpp"

namespace stars {

enum class EnsembleKind { gaussian, hashing, identity };

const char* to_string(EnsembleKind kind);
EnsembleKind ensemble_kind_from_string(const std::string& s);

/// Distribution family for the subspace maps Q in R^{n x p}.
///
/// gaussian: dense entries N(0, 1/p).
/// hashing:  every row of Q holds exactly r entries equal to +-1/sqrt(r),
///           positions chosen uniformly without replacement, signs Rademacher.
/// identity: p == n and Q = I.
struct SketchEnsemble {
    EnsembleKind kind = EnsembleKind::identity;
    int ambient_dim = 1;  // n
    int subspace_dim = 1; // p
    int hash_nonzeros = 1; // r, hashing only

    static SketchEnsemble gaussian(int n, int p);
    static SketchEnsemble hashing(int n, int p, int r);
    static SketchEnsemble identity(int n);

    /// Throws ConfigError unless p <= n, identity has p == n, and 1 <= r <= p.
    void validate() const;
};

/// Alignment target: a draw is well aligned for v when |Q^T v| >= alpha_q |v|,
/// required to hold with probability at least 1 - beta_q.
struct AlignmentParams {
    double epsilon; // in (0,1)
    double beta;    // in (0,1)

    AlignmentParams(double epsilon_, double beta_);
    double alpha_q() const { return 1.0 - epsilon; }
    double beta_q() const { return beta; }
};

/// One realization of a subspace map, immutable after construction.
class SketchMatrix {
public:
    SketchMatrix(Eigen::MatrixXd entries, SketchEnsemble ensemble, std::string seed_tag);

    const Eigen::MatrixXd& entries() const { return entries_; }
    const SketchEnsemble& ensemble() const { return ensemble_; }
    const std::string& seed_tag() const { return seed_tag_; }
    int rows() const { return static_cast<int>(entries_.rows()); }
    int cols() const { return static_cast<int>(entries_.cols()); }

    /// Spectral norm estimate (power iteration on Q^T Q, 50 steps, tol 1e-8).
    /// The matrix norm is not enforced, only logged by the solver per draw.
    double spectral_norm() const;

private:
    Eigen::MatrixXd entries_;
    SketchEnsemble ensemble_;
    std::string seed_tag_;
};

/// Smallest integer p with p >= 4 eps^-2 ln(1/beta); at least 1.
int gaussian_min_dim(double epsilon, double beta);

/// Draw one matrix from the ensemble. Deterministic given the stream state.
SketchMatrix draw_sketch(const SketchEnsemble& ensemble, RngStream& rng);

/// Q^T v (length p).
Eigen::VectorXd apply_transpose(const SketchMatrix& q, const Eigen::VectorXd& v);

/// Q s (length n).
Eigen::VectorXd lift(const SketchMatrix& q, const Eigen::VectorXd& s);

/// Fraction of `trials` fresh draws with |Q^T v| >= alpha_q |v|.
double empirical_alignment(const SketchEnsemble& ensemble, const Eigen::VectorXd& v,
                           long trials, const AlignmentParams& params, RngStream& rng);

} // namespace stars
