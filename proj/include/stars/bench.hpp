#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stars/oracle.hpp"
#include "stars/solver.hpp"

namespace stars {

/// One solver variant in the comparison, e.g. G-STARS-2 or I-STARS-n.
/// p == 0 selects the conventional dimension: n for identity, min(n, 100)
/// for gaussian and hashing.
struct BenchVariant {
    std::string label;
    EnsembleKind kind = EnsembleKind::gaussian;
    int p = 0;
    int r = 1;

    int resolve_p(int n) const;
};

struct ExperimentGrid {
    std::vector<std::string> problems;
    std::vector<NoiseForm> noise_forms{NoiseForm::additive, NoiseForm::multiplicative};
    std::vector<NoiseDist> distributions{NoiseDist::gaussian, NoiseDist::uniform};
    double sigma = 1e-3;
    int replications = 20;
    std::vector<BenchVariant> variants;
    long long budget_mult = 1500;       // budget = budget_mult * (n+1)
    std::vector<double> taus{1e-2};
    long long n_samples = 25;
    std::uint64_t master_seed = 0;
    int jobs = 0;                       // 0 = hardware concurrency

    void validate() const;
};

/// Identifies a problem instance; the same replication id shares its noise
/// streams across variants.
struct InstanceId {
    std::string problem;
    NoiseForm form = NoiseForm::additive;
    NoiseDist dist = NoiseDist::gaussian;
    int replication = 0;

    std::string str() const;
};

/// Convergence history of one (instance, variant) run: the running best true
/// objective value, keyed by cumulative noisy evaluations. Row 0 is always
/// (0, f(x_0)).
struct ConvergenceRecord {
    InstanceId instance;
    std::string variant;
    std::vector<std::pair<long long, double>> history;
    bool ok = false;
    std::string error;

    double f_x0() const { return history.front().second; }
    double final_best() const { return history.back().second; }
};

struct GridRunStats {
    int computed = 0;
    int loaded = 0;
    int failed = 0;
};

/// Execute the full grid with a bounded worker pool, persisting one CSV per
/// (instance, variant) under out_dir/records plus a manifest; existing record
/// files are loaded instead of recomputed. Refuses to resume into an output
/// directory whose manifest hash does not match the grid.
std::vector<ConvergenceRecord> run_grid(const ExperimentGrid& grid,
                                        const std::filesystem::path& out_dir,
                                        GridRunStats* stats = nullptr);

/// Fraction of instances solved per variant as a function of the budget in
/// units of (n+1); index u of `solved_fraction` is budget u*(n+1).
struct DataProfile {
    std::string variant;
    std::vector<double> solved_fraction;
};

/// More-Wild data profiles at tolerance tau: an instance counts as solved at
/// budget N when its running best satisfies f <= f* + tau (f(x0) - f*), with
/// f* the least value any variant reached on that instance. Instances with a
/// failed run are excluded with a warning; a missing (instance, variant)
/// combination is an error.
std::vector<DataProfile> compute_profile(const std::vector<ConvergenceRecord>& records,
                                         double tau, long long budget_mult);

/// Self-contained SVG with one monotone step curve per variant.
void emit_profile_svg(const std::vector<DataProfile>& profiles, const std::string& title,
                      const std::filesystem::path& path);

// Record (de)serialization, exposed for the resume path and tests.
void write_record_csv(const ConvergenceRecord& record, std::ostream& out);
ConvergenceRecord read_record_csv(std::istream& in, InstanceId instance, std::string variant);

/// Stable hash of the grid definition used to guard resumes.
std::uint64_t grid_hash(const ExperimentGrid& grid);

} // namespace stars
