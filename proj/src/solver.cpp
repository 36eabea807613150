#include "stars/solver.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stars/errors.hpp"

namespace stars {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void track_best(SolverState& state, const Eigen::VectorXd& point, double estimate) {
    if (!state.best_initialized || estimate < state.best_estimate) {
        state.best_estimate = estimate;
        state.best_point = point;
        state.best_initialized = true;
        state.best_changed = true;
    }
}

} // namespace

void SolverConfig::set_delta_max_from_exponent(int j_max) {
    delta_max = std::pow(gamma, j_max) * delta0;
}

void SolverConfig::validate(int problem_dim) const {
    if (!(gamma > 1.0)) throw ConfigError("gamma must be > 1");
    if (!(eta1 > 0.0 && eta1 < 1.0)) throw ConfigError("eta1 must lie in (0,1)");
    if (!(eta2 > 0.0)) throw ConfigError("eta2 must be > 0");
    if (!(delta0 > 0.0)) throw ConfigError("delta0 must be positive");
    if (!(delta_max >= delta0)) throw ConfigError("delta_max must be >= delta0");
    if (!(c1 >= 1.0)) throw ConfigError("c1 must be >= 1");
    if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
    if (budget < 1) throw ConfigError("budget must be >= 1");
    if (!(h_opt > 0.0)) throw ConfigError("h_opt must be positive");
    ensemble.validate();
    if (ensemble.ambient_dim != problem_dim)
        throw ConfigError("ensemble ambient dimension does not match the problem");
    if (x0.size() != problem_dim) throw ConfigError("x0 dimension does not match the problem");
}

const char* to_string(StopReason reason) {
    switch (reason) {
    case StopReason::budget: return "budget";
    case StopReason::max_iterations: return "max_iter";
    case StopReason::radius_floor: return "radius_floor";
    }
    return "?";
}

SolverState init_state(const NoisyProblem& problem, const SolverConfig& config,
                       RngStream sketch_base) {
    config.validate(problem.dim());
    SolverState state;
    state.x = config.x0;
    state.delta = config.delta0;
    state.k = 0;
    state.sketch_base = sketch_base;
    state.best_point = config.x0;
    return state;
}

std::optional<IterationRecord> step_once(SolverState& state, NoisyProblem& problem,
                                         const SolverConfig& config) {
    const int p = config.ensemble.subspace_dim;
    const long long worst_case = (static_cast<long long>(p) + 2) * config.n_samples;
    if (problem.evaluations() + worst_case > config.budget) return std::nullopt;

    state.best_changed = false;
    IterationRecord rec;
    rec.k = state.k;
    rec.delta = state.delta;
    rec.alignment = kNaN;
    rec.est_err0 = kNaN;
    rec.rho = kNaN;

    // [1] subspace selection and model construction
    RngStream sketch_rng = state.sketch_base.derive(static_cast<std::uint64_t>(state.k));
    const SketchMatrix q = draw_sketch(config.ensemble, sketch_rng);
    rec.q_norm = q.spectral_norm();

    const auto estimates = [&](const Eigen::VectorXd& pt) {
        const auto [mean, count] = problem.estimate(pt, config.n_samples);
        (void)count;
        track_best(state, pt, mean);
        return mean;
    };
    const SubspaceModel model =
        forward_fd_model(estimates, state.x, q, state.delta, config.h_opt);
    rec.fd_step = model.fd_step;
    rec.gnorm = model.gradient.norm();

    if (config.log_alignment && problem.gradient) {
        const Eigen::VectorXd grad = problem.gradient(state.x);
        const double gn = grad.norm();
        if (gn > 0.0) rec.alignment = (q.entries().transpose() * grad).norm() / gn;
    }

    // [2] step calculation with the sufficient-decrease guarantee
    const TrStep tr = solve_tr_subproblem(model, state.delta);
    rec.step_norm = tr.step.norm();
    rec.pred_decrease = tr.predicted_decrease;
    rec.kappa_fcd = tr.kappa_fcd;
    const double bound = cauchy_decrease_bound(model, state.delta, tr.kappa_fcd);
    if (tr.predicted_decrease + 1e-12 * (1.0 + std::abs(tr.predicted_decrease)) < bound) {
        std::ostringstream msg;
        msg << "sufficient-decrease violation at k = " << state.k
            << ": predicted " << tr.predicted_decrease << " < bound " << bound;
        throw ContractViolation(msg.str());
    }

    // [3] estimates at the incumbent and trial points (incumbent hits the cache)
    const Eigen::VectorXd trial = state.x + q.entries() * tr.step;
    const EstimatePair pair = problem.estimate_pair(state.x, trial, config.n_samples);
    track_best(state, pair.x0, pair.f0);
    track_best(state, pair.xs, pair.fs);

    if (config.track_true_best) {
        rec.est_err0 = std::abs(pair.f0 - problem.true_value(state.x));
        rec.eps_f_ok = rec.est_err0 <= config.eps_f_diag * state.delta * state.delta;
    }

    // [4] ratio test and updates
    bool success = false;
    if (tr.predicted_decrease > 0.0) {
        rec.rho = (pair.f0 - pair.fs) / tr.predicted_decrease;
        rec.rho_defined = true;
        success = rec.rho >= config.eta1 && rec.gnorm >= config.eta2 * state.delta;
    }
    rec.success = success;

    if (success) {
        state.x = trial;
        state.delta = std::min(config.gamma * state.delta, config.delta_max);
        state.snapshot_count += 1;
    } else {
        state.delta = state.delta / config.gamma;
    }
    rec.x_snapshot = state.snapshot_count;
    rec.evals_cum = problem.evaluations();
    rec.best_f_estimate = state.best_estimate;
    state.k += 1;
    return rec;
}

RunTrace run(NoisyProblem& problem, const SolverConfig& config, RngStream sketch_base) {
    SolverState state = init_state(problem, config, sketch_base);
    RunTrace trace;
    trace.snapshots.push_back(state.x);
    double best_true = 0.0;
    if (config.track_true_best) {
        best_true = problem.true_value(state.x);
        trace.best_true_history.emplace_back(0, best_true);
    }

    trace.reason = StopReason::budget;
    for (;;) {
        if (config.max_iterations > 0 && state.k >= config.max_iterations) {
            trace.reason = StopReason::max_iterations;
            break;
        }
        // delta = 0 is the hardware radius floor: after enough consecutive
        // failures the halving underflows, and no positive FD step remains.
        if (state.delta == 0.0 ||
            (config.radius_floor > 0.0 && state.delta < config.radius_floor)) {
            trace.reason = StopReason::radius_floor;
            break;
        }
        std::optional<IterationRecord> rec;
        try {
            rec = step_once(state, problem, config);
        } catch (const ContractViolation& e) {
            trace.total_evaluations = problem.evaluations();
            trace.final_best_estimate = state.best_estimate;
            trace.final_best_point = state.best_point;
            throw SolverError(e.what(), std::move(trace));
        } catch (const EvaluationError& e) {
            trace.total_evaluations = problem.evaluations();
            trace.final_best_estimate = state.best_estimate;
            trace.final_best_point = state.best_point;
            throw SolverError(e.what(), std::move(trace));
        }
        if (!rec) break; // next iteration would exceed the budget
        if (rec->success) trace.snapshots.push_back(state.x);
        if (config.track_true_best && state.best_changed) {
            best_true = std::min(best_true, problem.true_value(state.best_point));
            trace.best_true_history.emplace_back(rec->evals_cum, best_true);
        }
        trace.records.push_back(std::move(*rec));
    }

    trace.total_evaluations = problem.evaluations();
    trace.final_best_estimate = state.best_estimate;
    trace.final_best_point = state.best_point;
    return trace;
}

void write_trace_csv(const RunTrace& trace, std::ostream& out) {
    out << "k,delta,gnorm,rho,success,evals,true_f_best\r\n";
    std::size_t hist = 0;
    double true_best = kNaN;
    for (const auto& rec : trace.records) {
        while (hist < trace.best_true_history.size() &&
               trace.best_true_history[hist].first <= rec.evals_cum) {
            true_best = trace.best_true_history[hist].second;
            ++hist;
        }
        out << rec.k << ',' << format_double(rec.delta) << ',' << format_double(rec.gnorm)
            << ',' << format_double(rec.rho) << ',' << (rec.success ? 1 : 0) << ','
            << rec.evals_cum << ',' << format_double(true_best) << "\r\n";
    }
}

void write_trace_summary(const RunTrace& trace, std::ostream& out) {
    nlohmann::json j;
    if (!trace.config_json.empty()) j["config"] = nlohmann::json::parse(trace.config_json);
    j["iterations"] = trace.records.size();
    j["evaluations"] = trace.total_evaluations;
    j["termination"] = to_string(trace.reason);
    j["final_best_estimate"] = trace.final_best_estimate;
    long long successes = 0;
    for (const auto& rec : trace.records) successes += rec.success ? 1 : 0;
    j["successful_iterations"] = successes;
    if (!trace.best_true_history.empty())
        j["final_best_true_f"] = trace.best_true_history.back().second;
    if (!trace.records.empty()) {
        const auto diag = diagnostics_delta_series(trace);
        j["delta_sq_partial_sum"] = diag.partial_sums.back();
        j["delta_tail_below_tenth"] = diag.tail_below_tenth;
    }
    out << j.dump(2) << '\n';
}

DeltaSeriesDiagnostics diagnostics_delta_series(const RunTrace& trace) {
    if (trace.records.empty())
        throw std::invalid_argument("diagnostics_delta_series: empty trace");
    DeltaSeriesDiagnostics diag;
    diag.partial_sums.reserve(trace.records.size());
    double sum = 0.0;
    for (const auto& rec : trace.records) {
        sum += rec.delta * rec.delta;
        diag.partial_sums.push_back(sum);
    }
    const double delta0 = trace.records.front().delta;
    const std::size_t n = trace.records.size();
    const std::size_t tail_start = n - std::max<std::size_t>(1, n / 10);
    diag.tail_below_tenth = true;
    for (std::size_t i = tail_start; i < n; ++i)
        if (!(trace.records[i].delta < delta0 / 10.0)) diag.tail_below_tenth = false;
    return diag;
}

} // namespace stars
