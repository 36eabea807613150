#pragma once

// Shared checks of the per-iteration update laws, used by the solver tests
// and the acceptance suite.

#include <algorithm>
#include <cmath>

#include "stars/solver.hpp"

namespace stars::testing {

struct LawViolations {
    int radius = 0;
    int iterate = 0;
    int budget = 0;
    int cauchy = 0;

    int total() const { return radius + iterate + budget + cauchy; }
};

inline LawViolations verify_laws(const RunTrace& trace, const SolverConfig& config) {
    LawViolations v;
    const long long per_iter_cap =
        (static_cast<long long>(config.ensemble.subspace_dim) + 3) * config.n_samples;

    long long prev_evals = 0;
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        const auto& rec = trace.records[i];

        // radius law: delta_{k+1} is exactly one of the two updates
        if (i + 1 < trace.records.size()) {
            const double next = trace.records[i + 1].delta;
            const double grow = std::min(config.gamma * rec.delta, config.delta_max);
            const double shrink = rec.delta / config.gamma;
            if (rec.success ? (next != grow) : (next != shrink)) ++v.radius;
        }

        // iterate law: the incumbent moves exactly on success, by at most delta
        const int prev_snapshot = i > 0 ? trace.records[i - 1].x_snapshot : 0;
        if (rec.x_snapshot - prev_snapshot != (rec.success ? 1 : 0)) ++v.iterate;
        if (rec.success && rec.step_norm > rec.delta * (1.0 + 1e-12)) ++v.iterate;

        // budget law
        if (rec.evals_cum > config.budget) ++v.budget;
        if (rec.evals_cum - prev_evals > per_iter_cap) ++v.budget;
        if (rec.evals_cum < prev_evals) ++v.budget;
        prev_evals = rec.evals_cum;

        // sufficient decrease with the recorded kappa_fcd (linear models: |H| = 0)
        const double bound =
            0.5 * rec.kappa_fcd * rec.gnorm * std::min(rec.delta, rec.gnorm);
        if (rec.pred_decrease + 1e-12 * (1.0 + std::abs(rec.pred_decrease)) < bound)
            ++v.cauchy;
    }
    return v;
}

} // namespace stars::testing
