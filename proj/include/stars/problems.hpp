#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "stars/oracle.hpp"

namespace stars {

/// A deterministic sums-of-squares benchmark: f(x) = sum_i r_i(x)^2.
///
/// Residual formulas follow the standard More-Garbow-Hillstrom / CUTEr
/// definitions at n = 100; the analytic gradient exists for diagnostics only
/// and is never consumed by the solver path.
struct ProblemDef {
    std::string name;
    int dim = 0;            // n
    int residual_count = 0; // m
    double h_opt = 0.0;     // forward-difference step recommendation
    Eigen::VectorXd start;  // x_0

    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> residuals;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;

    /// sum_i r_i(x)^2; throws EvaluationError on non-finite intermediates.
    double objective(const Eigen::VectorXd& x) const;
};

/// The implemented benchmark subset, with catalog metadata
/// (name, n, m, h_opt): SROSENBR (100, 100, 4e-5), BROYDN3D (100, 100, 4e-5),
/// INTEGREQ (100, 100, 1e-5), VARDIMNE (100, 102, 1e-4),
/// Penalty2 (100, 200, 5e-5), ARWHDNE (100, 198, 1e-4),
/// FREUROTH (100, 198, 2e-4), CHEBYQAD (100, 100, 4e-6).
const std::vector<ProblemDef>& catalog();

/// Lookup by name; throws ConfigError listing the known names.
const ProblemDef& find_problem(const std::string& name);

/// Wrap a catalog problem with a noise model for a solver run.
NoisyProblem make_noisy(const ProblemDef& def, NoiseModel noise, RngStream noise_stream,
                        bool retain_raw = false);

} // namespace stars
