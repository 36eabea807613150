#pragma once

#include <Eigen/Dense>

#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "stars/errors.hpp"
#include "stars/model.hpp"
#include "stars/oracle.hpp"
#include "stars/sketch.hpp"

namespace stars {

/// Solver parameters. Defaults follow the standard experimental setup:
/// gamma = 2, eta1 = 0.01, eta2 = 0.9, delta0 = 1, delta_max = 5, c1 = 1,
/// n_samples = 25.
struct SolverConfig {
    double gamma = 2.0;
    double eta1 = 0.01;
    double eta2 = 0.9;
    double delta0 = 1.0;
    double delta_max = 5.0;
    double c1 = 1.0;
    SketchEnsemble ensemble;
    long long n_samples = 25;   // n_k per Monte Carlo estimate
    long long budget = 0;       // noisy-evaluation budget, required
    double h_opt = 1e-5;
    Eigen::VectorXd x0;

    // Safety valves, off by default; budget exhaustion is the primary stop.
    long long max_iterations = 0; // 0 = unlimited
    double radius_floor = 0.0;    // 0 = disabled

    bool track_true_best = true;  // score the incumbent-by-estimate with true f
    bool log_alignment = false;   // per-iteration |Q^T grad f| / |grad f|
    double eps_f_diag = 1.0;      // epsilon_f for the logged accuracy flag

    /// delta_max as gamma^j_max delta0; the cap value itself is what the
    /// updates use, so a direct delta_max is equally valid.
    void set_delta_max_from_exponent(int j_max);

    void validate(int problem_dim) const;
};

struct IterationRecord {
    long long k = 0;
    double delta = 0.0;          // delta_k at the start of the iteration
    double gnorm = 0.0;          // |g_k|
    double rho = 0.0;            // acceptance ratio; NaN when undefined
    bool rho_defined = false;
    bool success = false;
    long long evals_cum = 0;     // nondecreasing in k
    double best_f_estimate = 0.0;
    int x_snapshot = 0;          // index into RunTrace::snapshots
    double fd_step = 0.0;        // h actually used
    double step_norm = 0.0;      // |s_k|
    double pred_decrease = 0.0;  // m(0) - m(s_k)
    double kappa_fcd = 1.0;
    double q_norm = 0.0;         // spectral norm estimate of Q_k
    double alignment = 0.0;      // |Q^T grad f| / |grad f|; NaN unless logged
    double est_err0 = 0.0;       // |f_k^0 - f(x_k)|; NaN unless true values tracked
    bool eps_f_ok = false;       // est_err0 <= eps_f delta_k^2 (diagnostic only)
};

enum class StopReason { budget, max_iterations, radius_floor };

const char* to_string(StopReason reason);

struct RunTrace {
    std::string config_json; // echo of the owning configuration
    std::vector<IterationRecord> records;
    std::vector<Eigen::VectorXd> snapshots;                    // incumbents, id 0 = x0
    std::vector<std::pair<long long, double>> best_true_history; // (evals, best true f)
    StopReason reason = StopReason::budget;
    long long total_evaluations = 0;
    double final_best_estimate = 0.0;
    Eigen::VectorXd final_best_point;
};

/// CSV rows: k, delta_k, gnorm, rho, success, evals, true_f_best (RFC 4180).
void write_trace_csv(const RunTrace& trace, std::ostream& out);

/// JSON summary with the config echo, counters, and termination reason.
void write_trace_summary(const RunTrace& trace, std::ostream& out);

struct SolverState {
    Eigen::VectorXd x;
    double delta = 0.0;
    long long k = 0;
    RngStream sketch_base;   // iteration k draws from sketch_base.derive(k)
    double best_estimate = 0.0;
    Eigen::VectorXd best_point;
    bool best_initialized = false;
    bool best_changed = false; // since the previous iteration
    int snapshot_count = 0;
};

SolverState init_state(const NoisyProblem& problem, const SolverConfig& config,
                       RngStream sketch_base);

/// One full iteration: sketch draw, model, step, estimates, ratio test,
/// update. Returns nullopt without touching anything when the worst-case
/// evaluation need (p+2) n_k would exceed the remaining budget.
std::optional<IterationRecord> step_once(SolverState& state, NoisyProblem& problem,
                                         const SolverConfig& config);

/// Run to the evaluation budget. Contract violations (sufficient decrease,
/// degenerate geometry, oracle failure) abort with an exception carrying the
/// partial trace.
RunTrace run(NoisyProblem& problem, const SolverConfig& config, RngStream sketch_base);

/// A contract violation or oracle failure mid-run; `trace` holds everything
/// recorded up to the failing iteration.
struct SolverError : ContractViolation {
    SolverError(const std::string& what, RunTrace partial)
        : ContractViolation(what), trace(std::move(partial)) {}
    RunTrace trace;
};

struct DeltaSeriesDiagnostics {
    std::vector<double> partial_sums; // partial_sums[K] = sum_{k<=K} delta_k^2
    bool tail_below_tenth = false;    // delta_k < delta_0/10 on the final 10%
};

DeltaSeriesDiagnostics diagnostics_delta_series(const RunTrace& trace);

} // namespace stars
