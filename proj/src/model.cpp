#include "stars/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "stars/errors.hpp"

namespace stars {

namespace {

constexpr double kDegenerateCondition = 1e12;

} // namespace

double SubspaceModel::eval(const Eigen::VectorXd& s) const {
    double out = value + gradient.dot(s);
    if (has_hessian()) out += 0.5 * s.dot(hessian * s);
    return out;
}

double SubspaceModel::hessian_norm() const {
    if (!has_hessian()) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hessian, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

void SubspaceModel::validate(double kappa_h) const {
    if (!has_hessian()) return;
    const double asym = (hessian - hessian.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12)
        throw ContractViolation("model Hessian is not symmetric (max asymmetry " +
                                std::to_string(asym) + ")");
    const double norm = hessian_norm();
    if (norm > kappa_h)
        throw ContractViolation("model Hessian norm " + std::to_string(norm) +
                                " exceeds kappa_h = " + std::to_string(kappa_h));
}

void FullyLinearConstants::validate() const {
    if (!(kappa_fcd > 0.0 && kappa_fcd <= 1.0))
        throw ConfigError("kappa_fcd must lie in (0,1]");
    if (kappa_h < 1.0) throw ConfigError("kappa_h must be >= 1");
    if (c1 < 1.0) throw ConfigError("c1 must be >= 1");
    if (delta_max <= 0.0) throw ConfigError("delta_max must be positive");
    if (lipschitz_g && *lipschitz_g <= 0.0) throw ConfigError("L_g must be positive");
    if (q_max && *q_max <= 0.0) throw ConfigError("Q_max must be positive");
}

InterpolationSet InterpolationSet::build(std::vector<Eigen::VectorXd> pts,
                                         std::optional<double> max_norm) {
    if (pts.empty()) throw std::invalid_argument("interpolation set: no points");
    const int p = static_cast<int>(pts[0].size());
    if (static_cast<int>(pts.size()) != p + 1)
        throw std::invalid_argument("interpolation set: expected p+1 points in R^p");
    if (pts[0].cwiseAbs().maxCoeff() != 0.0)
        throw std::invalid_argument("interpolation set: s_0 must be the zero vector");

    InterpolationSet set;
    set.diameter = 0.0;
    for (const auto& s : pts) {
        if (static_cast<int>(s.size()) != p)
            throw std::invalid_argument("interpolation set: inconsistent point dimensions");
        if (!s.allFinite())
            throw std::invalid_argument("interpolation set: non-finite point");
        const double norm = s.norm();
        if (max_norm && norm > *max_norm * (1.0 + 1e-12))
            throw std::invalid_argument("interpolation set: point norm exceeds the sample ball");
        set.diameter = std::max(set.diameter, norm);
    }
    if (set.diameter <= 0.0)
        throw std::invalid_argument("interpolation set: all points coincide with the origin");

    set.basis.resize(p, p);
    for (int i = 0; i < p; ++i) set.basis.col(i) = pts[static_cast<std::size_t>(i) + 1] / set.diameter;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(set.basis);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    set.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    set.points = std::move(pts);
    return set;
}

SubspaceModel forward_fd_model(const EstimateSource& estimates, const Eigen::VectorXd& x,
                               const SketchMatrix& q, double delta, double h_opt) {
    if (!(delta > 0.0)) throw std::invalid_argument("forward_fd_model: delta must be positive");
    if (!(h_opt > 0.0)) throw std::invalid_argument("forward_fd_model: h_opt must be positive");
    if (x.size() != q.rows())
        throw std::invalid_argument("forward_fd_model: point dimension does not match Q");

    const double h = std::min(h_opt, delta);
    const int p = q.cols();

    SubspaceModel model;
    model.value = estimates(x);
    model.gradient.resize(p);
    for (int i = 0; i < p; ++i) {
        const Eigen::VectorXd xi = x + h * q.entries().col(i);
        model.gradient[i] = (estimates(xi) - model.value) / h;
    }
    model.radius = delta;
    model.fd_step = h;
    return model;
}

SubspaceModel interpolate_linear(const Eigen::VectorXd& values, const InterpolationSet& set) {
    const int p = set.dim();
    if (values.size() != p + 1)
        throw std::invalid_argument("interpolate_linear: expected p+1 values");
    if (!values.allFinite())
        throw std::invalid_argument("interpolate_linear: non-finite values");
    if (!(set.condition < kDegenerateCondition)) {
        std::ostringstream msg;
        msg << "interpolation set is degenerate: cond(L) = " << set.condition;
        throw DegenerateGeometry(msg.str());
    }

    Eigen::VectorXd df(p);
    for (int i = 0; i < p; ++i) df[i] = values[i + 1] - values[0];

    SubspaceModel model;
    model.value = values[0]; // a_0: the interpolant at s_0 = 0
    model.gradient = (set.diameter * set.basis.transpose()).partialPivLu().solve(df);
    model.radius = set.diameter;
    return model;
}

std::optional<std::pair<double, double>>
fully_linear_constants(const InterpolationSet& set, const FullyLinearConstants& consts, int p) {
    if (!consts.lipschitz_g || !consts.q_max) return std::nullopt;
    const double lg = *consts.lipschitz_g;
    const double qmax2 = *consts.q_max * *consts.q_max;
    // |L^-1|_2 = 1 / sigma_min(L)
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(set.basis);
    const double smin = svd.singularValues().minCoeff();
    if (!(smin > 0.0)) throw DegenerateGeometry("fully_linear_constants: singular basis");
    const double inv_norm = 1.0 / smin;
    const double root_p = std::sqrt(static_cast<double>(p));
    const double kappa_eg = (1.0 + consts.c1 * root_p * inv_norm) * lg * qmax2;
    const double kappa_ef = 0.5 *
        (1.0 + 0.5 * consts.c1 * consts.c1 * consts.delta_max + 2.0 * consts.c1 * root_p * inv_norm) *
        lg * qmax2;
    return std::make_pair(kappa_ef, kappa_eg);
}

long long sample_size_bound(double v_f, double rho, double delta, double beta_m, int p,
                            const FullyLinearConstants& consts) {
    if (v_f < 0.0) throw std::domain_error("sample_size_bound: V_f must be nonnegative");
    if (!(rho > 0.0) || !(delta > 0.0))
        throw std::domain_error("sample_size_bound: rho and delta must be positive");
    if (!(beta_m > 0.0 && beta_m < 1.0))
        throw std::domain_error("sample_size_bound: beta_m in (0,1) required; beta_m = 1 "
                                "demands infinitely many samples");
    if (!consts.lipschitz_g || !consts.q_max)
        throw std::invalid_argument("sample_size_bound: L_g and Q_max must be known");
    if (v_f == 0.0) return 1;

    const double lg = *consts.lipschitz_g;
    const double qmax = *consts.q_max;
    const double tail = 1.0 - std::pow(beta_m, 1.0 / static_cast<double>(p + 1));
    const double denom = consts.c1 * consts.c1 * lg * lg * qmax * qmax * qmax * qmax *
                         rho * rho * std::min(delta * delta, std::pow(delta, 4)) * tail;
    const double bound = 16.0 * v_f / denom;
    if (!(bound < 9.2e18)) return std::numeric_limits<long long>::max();
    return std::max<long long>(1, static_cast<long long>(std::ceil(bound)));
}

TrStep solve_tr_subproblem(const SubspaceModel& model, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("solve_tr_subproblem: delta must be positive");
    const double gnorm = model.gradient.norm();

    TrStep out;
    out.step = Eigen::VectorXd::Zero(model.gradient.size());
    if (gnorm == 0.0) {
        out.kappa_fcd = model.has_hessian() ? 0.5 : 1.0;
        return out;
    }

    if (!model.has_hessian()) {
        // Exact solution of the linear subproblem.
        out.step = -(delta / gnorm) * model.gradient;
        const double snorm = out.step.norm();
        if (snorm > delta) out.step *= delta / snorm;
        out.predicted_decrease = -model.gradient.dot(out.step);
        out.kappa_fcd = 1.0;
        return out;
    }

    // Cauchy point: minimize along -g, clipped to the ball.
    const double ghg = model.gradient.dot(model.hessian * model.gradient);
    double t = delta / gnorm;
    if (ghg > 0.0) t = std::min(t, gnorm * gnorm / ghg);
    out.step = -t * model.gradient;
    const double snorm = out.step.norm();
    if (snorm > delta) out.step *= delta / snorm;
    out.predicted_decrease = model.eval(Eigen::VectorXd::Zero(model.gradient.size())) -
                             model.eval(out.step);
    out.kappa_fcd = 0.5;
    return out;
}

double cauchy_decrease_bound(const SubspaceModel& model, double delta, double kappa_fcd) {
    const double gnorm = model.gradient.norm();
    const double curvature = std::max(model.hessian_norm(), 1.0);
    return 0.5 * kappa_fcd * gnorm * std::min(delta, gnorm / curvature);
}

} // namespace stars
