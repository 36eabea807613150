#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "stars/sketch.hpp"

namespace stars {

/// Low-dimensional trust-region model m(s) = value + g^T s + 1/2 s^T H s.
/// An empty `hessian` stands for the zero matrix (the linear case).
struct SubspaceModel {
    double value = 0.0;         // f_k
    Eigen::VectorXd gradient;   // g_k, length p
    Eigen::MatrixXd hessian;    // H_k, p x p or empty
    double radius = 0.0;        // delta_k the model was built for
    double fd_step = 0.0;       // forward-difference h, 0 for interpolation builds

    bool has_hessian() const { return hessian.size() > 0; }
    double eval(const Eigen::VectorXd& s) const;

    /// Spectral norm of H (0 when empty).
    double hessian_norm() const;

    /// Throws ContractViolation unless H is symmetric to 1e-12 and |H| <= kappa_h.
    void validate(double kappa_h) const;
};

/// Shared model-quality constants. kappa_ef / kappa_eg are filled by
/// fully_linear_constants() when the Lipschitz data is known; they are
/// diagnostic and never steer the solver.
struct FullyLinearConstants {
    double kappa_ef = 0.0;
    double kappa_eg = 0.0;
    double kappa_fcd = 1.0; // in (0,1]
    double kappa_h = 1.0;   // >= 1
    double c1 = 1.0;        // >= 1
    double delta_max = 5.0;
    std::optional<double> lipschitz_g; // L_g, unknown unless user-supplied
    std::optional<double> q_max;       // |Q| bound, unknown unless supplied

    void validate() const;
};

/// Affinely independent sample set {s_0 = 0, s_1, ..., s_p} in R^p with its
/// scaled basis matrix L = (1/rho) [s_1 ... s_p].
struct InterpolationSet {
    std::vector<Eigen::VectorXd> points;
    double diameter = 0.0;     // rho = max_i |s_i|
    Eigen::MatrixXd basis;     // L, p x p
    double condition = 0.0;    // cond_2(L), logged

    /// Validates s_0 == 0, finiteness, and (optionally) |s_i| <= max_norm.
    static InterpolationSet build(std::vector<Eigen::VectorXd> pts,
                                  std::optional<double> max_norm = std::nullopt);

    int dim() const { return points.empty() ? 0 : static_cast<int>(points[0].size()); }
};

/// Point-estimate source used when building models from noisy data: returns
/// the Monte Carlo mean at a point.
using EstimateSource = std::function<double(const Eigen::VectorXd&)>;

/// Linear model from forward differences along the columns of Q, with
/// h = min(h_opt, delta). Requests exactly p+1 evaluation points.
SubspaceModel forward_fd_model(const EstimateSource& estimates, const Eigen::VectorXd& x,
                               const SketchMatrix& q, double delta, double h_opt);

/// Affine interpolant of `values` (length p+1, ordered like set.points).
/// The gradient solves the reduced p x p system rho L^T a = df.
/// Throws DegenerateGeometry when cond(L) exceeds 1e12.
SubspaceModel interpolate_linear(const Eigen::VectorXd& values, const InterpolationSet& set);

/// Model error constants
///   kappa_ef = 1/2 (1 + 1/2 c1^2 delta_max + 2 c1 sqrt(p) |L^-1|) L_g Qmax^2
///   kappa_eg = (1 + c1 sqrt(p) |L^-1|) L_g Qmax^2.
/// Returns nullopt when L_g or Qmax is unknown.
std::optional<std::pair<double, double>>
fully_linear_constants(const InterpolationSet& set, const FullyLinearConstants& consts, int p);

/// Per-point Monte Carlo sample count sufficient for beta_m-probably fully
/// linear models: ceil of 16 V_f / (c1^2 L_g^2 Qmax^4 rho^2 min(d^2,d^4)
/// (1 - beta_m^{1/(p+1)})), at least 1.
long long sample_size_bound(double v_f, double rho, double delta, double beta_m, int p,
                            const FullyLinearConstants& consts);

struct TrStep {
    Eigen::VectorXd step;
    double predicted_decrease = 0.0;
    double kappa_fcd = 1.0; // decrease fraction guaranteed by the routine
};

/// Exact minimizer -delta g/|g| for linear models (kappa_fcd = 1); Cauchy
/// point along -g clipped to the ball otherwise (kappa_fcd = 1/2).
TrStep solve_tr_subproblem(const SubspaceModel& model, double delta);

/// Right-hand side of the sufficient-decrease requirement
///   kappa_fcd/2 |g| min(delta, |g| / max(|H|, 1)).
double cauchy_decrease_bound(const SubspaceModel& model, double delta, double kappa_fcd);

} // namespace stars
