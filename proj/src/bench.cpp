#include "stars/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "stars/errors.hpp"
#include "stars/problems.hpp"

namespace stars {

namespace fs = std::filesystem;

namespace {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) throw ConfigError("record CSV: bad number '" + std::string(s) + "'");
    return v;
}

std::string sanitize(std::string s) {
    for (auto& c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) c = '_';
    return s;
}

} // namespace

int BenchVariant::resolve_p(int n) const {
    if (p > 0) return p;
    return kind == EnsembleKind::identity ? n : std::min(n, 100);
}

void ExperimentGrid::validate() const {
    if (problems.empty()) throw ConfigError("grid: no problems selected");
    if (noise_forms.empty()) throw ConfigError("grid: no noise forms selected");
    if (distributions.empty()) throw ConfigError("grid: no noise distributions selected");
    if (sigma < 0.0) throw ConfigError("grid: sigma must be nonnegative");
    if (replications < 1) throw ConfigError("grid: replications must be >= 1");
    if (variants.empty()) throw ConfigError("grid: no variants");
    if (budget_mult < 1) throw ConfigError("grid: budget multiplier must be >= 1");
    if (n_samples < 1) throw ConfigError("grid: n_samples must be >= 1");
    for (const auto& tau : taus)
        if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("grid: tau must lie in [0,1]");
    std::vector<std::string> labels;
    for (const auto& v : variants) {
        if (v.label.empty()) throw ConfigError("grid: variant label must not be empty");
        if (std::find(labels.begin(), labels.end(), v.label) != labels.end())
            throw ConfigError("grid: duplicate variant label '" + v.label + "'");
        labels.push_back(v.label);
    }
    for (const auto& name : problems) (void)find_problem(name);
}

std::string InstanceId::str() const {
    std::ostringstream out;
    out << problem << '|' << to_string(form) << '|' << to_string(dist) << "|rep"
        << replication;
    return out.str();
}

namespace {

nlohmann::json grid_echo(const ExperimentGrid& grid) {
    nlohmann::json j;
    j["problems"] = grid.problems;
    nlohmann::json forms = nlohmann::json::array();
    for (const auto& f : grid.noise_forms) forms.push_back(to_string(f));
    j["noise_forms"] = forms;
    nlohmann::json dists = nlohmann::json::array();
    for (const auto& d : grid.distributions) dists.push_back(to_string(d));
    j["distributions"] = dists;
    j["sigma"] = grid.sigma;
    j["replications"] = grid.replications;
    j["budget_mult"] = grid.budget_mult;
    j["taus"] = grid.taus;
    j["n_samples"] = grid.n_samples;
    j["master_seed"] = grid.master_seed;
    nlohmann::json variants = nlohmann::json::array();
    for (const auto& v : grid.variants)
        variants.push_back({{"label", v.label},
                            {"ensemble", to_string(v.kind)},
                            {"p", v.p},
                            {"r", v.r}});
    j["variants"] = variants;
    return j;
}

} // namespace

std::uint64_t grid_hash(const ExperimentGrid& grid) {
    std::ostringstream out;
    for (const auto& p : grid.problems) out << p << ';';
    for (const auto& f : grid.noise_forms) out << to_string(f) << ';';
    for (const auto& d : grid.distributions) out << to_string(d) << ';';
    out << grid.sigma << ';' << grid.replications << ';' << grid.budget_mult << ';'
        << grid.n_samples << ';' << grid.master_seed << ';';
    for (const auto& v : grid.variants)
        out << v.label << ',' << to_string(v.kind) << ',' << v.p << ',' << v.r << ';';
    const std::string s = out.str();
    return hash_bytes(s.data(), s.size());
}

void write_record_csv(const ConvergenceRecord& record, std::ostream& out) {
    out << "evals,best_true_f\r\n";
    for (const auto& [evals, value] : record.history)
        out << evals << ',' << format_double(value) << "\r\n";
}

ConvergenceRecord read_record_csv(std::istream& in, InstanceId instance, std::string variant) {
    ConvergenceRecord record;
    record.instance = std::move(instance);
    record.variant = std::move(variant);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("record CSV: empty file");
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("record CSV: malformed row '" + line + "'");
        long long evals = 0;
        auto res = std::from_chars(line.data(), line.data() + comma, evals);
        if (res.ec != std::errc{}) throw ConfigError("record CSV: bad eval count '" + line + "'");
        record.history.emplace_back(evals, parse_double(std::string_view(line).substr(comma + 1)));
    }
    if (record.history.empty()) throw ConfigError("record CSV: no rows");
    record.ok = true;
    return record;
}

namespace {

struct GridTask {
    InstanceId instance;
    BenchVariant variant;
    fs::path record_path;
    fs::path error_path;
};

ConvergenceRecord execute_task(const ExperimentGrid& grid, const GridTask& task) {
    ConvergenceRecord record;
    record.instance = task.instance;
    record.variant = task.variant.label;
    try {
        const ProblemDef& def = find_problem(task.instance.problem);
        NoiseModel noise{task.instance.form, task.instance.dist, grid.sigma};

        // Noise streams are keyed by (master, instance) only, so every variant
        // sees the same noise at the same point; sketch streams add the label.
        RngStream master = RngStream::from_key(grid.master_seed);
        RngStream noise_stream = master.derive("noise").derive(task.instance.str());
        RngStream sketch_stream =
            master.derive("sketch").derive(task.instance.str()).derive(task.variant.label);

        SolverConfig config;
        config.h_opt = def.h_opt;
        config.x0 = def.start;
        config.n_samples = grid.n_samples;
        config.budget = grid.budget_mult * (def.dim + 1);
        const int p = task.variant.resolve_p(def.dim);
        switch (task.variant.kind) {
        case EnsembleKind::gaussian: config.ensemble = SketchEnsemble::gaussian(def.dim, p); break;
        case EnsembleKind::hashing:
            config.ensemble = SketchEnsemble::hashing(def.dim, p, task.variant.r);
            break;
        case EnsembleKind::identity: config.ensemble = SketchEnsemble::identity(def.dim); break;
        }

        NoisyProblem problem = make_noisy(def, noise, noise_stream);
        const RunTrace trace = run(problem, config, sketch_stream);
        record.history = trace.best_true_history;
        record.ok = true;
    } catch (const std::exception& e) {
        record.ok = false;
        record.error = e.what();
    }
    return record;
}

void persist_record(const ConvergenceRecord& record, const GridTask& task) {
    if (record.ok) {
        const fs::path tmp = task.record_path.string() + ".tmp";
        std::ofstream out(tmp, std::ios::binary);
        write_record_csv(record, out);
        out.close();
        fs::rename(tmp, task.record_path);
    } else {
        std::ofstream out(task.error_path);
        out << record.error << '\n';
    }
}

} // namespace

std::vector<ConvergenceRecord> run_grid(const ExperimentGrid& grid, const fs::path& out_dir,
                                        GridRunStats* stats) {
    grid.validate();
    const fs::path records_dir = out_dir / "records";
    fs::create_directories(records_dir);

    // Manifest guards resumption: a differing grid must not silently mix records.
    const fs::path manifest_path = out_dir / "manifest.json";
    const std::uint64_t hash = grid_hash(grid);
    if (fs::exists(manifest_path)) {
        nlohmann::json manifest;
        try {
            std::ifstream in(manifest_path);
            manifest = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("unreadable manifest " + manifest_path.string() + ": " + e.what());
        }
        if (manifest.value("grid_hash", std::string{}) != std::to_string(hash))
            throw ConfigError("output directory holds records for a different grid; "
                              "delete " + out_dir.string() + " or choose another --out");
    } else {
        nlohmann::json manifest;
        manifest["schema_version"] = 1;
        manifest["grid_hash"] = std::to_string(hash);
        manifest["grid"] = grid_echo(grid);
        manifest["status"] = "running";
        std::ofstream out(manifest_path);
        out << manifest.dump(2) << '\n';
    }

    std::vector<GridTask> tasks;
    for (const auto& name : grid.problems)
        for (const auto& form : grid.noise_forms)
            for (const auto& dist : grid.distributions)
                for (int rep = 0; rep < grid.replications; ++rep)
                    for (const auto& variant : grid.variants) {
                        GridTask task;
                        task.instance = InstanceId{name, form, dist, rep};
                        task.variant = variant;
                        const std::string base =
                            sanitize(task.instance.str()) + "__" + sanitize(variant.label);
                        task.record_path = records_dir / (base + ".csv");
                        task.error_path = records_dir / (base + ".error.txt");
                        tasks.push_back(std::move(task));
                    }

    std::vector<ConvergenceRecord> records(tasks.size());
    GridRunStats local_stats;
    std::atomic<std::size_t> next{0};
    std::atomic<int> computed{0}, loaded{0}, failed{0};

    const auto try_load = [&](const GridTask& task, ConvergenceRecord& out) {
        if (fs::exists(task.record_path)) {
            try {
                std::ifstream in(task.record_path, std::ios::binary);
                out = read_record_csv(in, task.instance, task.variant.label);
                return true;
            } catch (const std::exception&) {
                fs::remove(task.record_path); // unreadable record: recompute
                return false;
            }
        }
        if (fs::exists(task.error_path)) {
            out.instance = task.instance;
            out.variant = task.variant.label;
            out.ok = false;
            std::ifstream in(task.error_path);
            std::getline(in, out.error);
            return true;
        }
        return false;
    };

    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const GridTask& task = tasks[i];
            if (try_load(task, records[i])) {
                loaded.fetch_add(1);
            } else {
                records[i] = execute_task(grid, task);
                persist_record(records[i], task);
                computed.fetch_add(1);
            }
            if (!records[i].ok) failed.fetch_add(1);
        }
    };

    int jobs = grid.jobs > 0 ? grid.jobs
                             : static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;
    jobs = std::min<std::size_t>(jobs, tasks.size());
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    local_stats.computed = computed.load();
    local_stats.loaded = loaded.load();
    local_stats.failed = failed.load();
    if (stats) *stats = local_stats;

    {
        nlohmann::json manifest;
        manifest["schema_version"] = 1;
        manifest["grid_hash"] = std::to_string(hash);
        manifest["grid"] = grid_echo(grid);
        manifest["status"] = "complete";
        manifest["records"] = tasks.size();
        manifest["failed"] = local_stats.failed;
        std::ofstream out(manifest_path);
        out << manifest.dump(2) << '\n';
    }
    return records;
}

std::vector<DataProfile> compute_profile(const std::vector<ConvergenceRecord>& records,
                                         double tau, long long budget_mult) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in [0,1]");

    // Variant labels in first-appearance order.
    std::vector<std::string> variants;
    for (const auto& rec : records)
        if (std::find(variants.begin(), variants.end(), rec.variant) == variants.end())
            variants.push_back(rec.variant);

    std::map<std::string, std::vector<const ConvergenceRecord*>> instances;
    for (const auto& rec : records) instances[rec.instance.str()].push_back(&rec);

    // Drop instances with failed runs; demand completeness otherwise.
    std::vector<std::vector<const ConvergenceRecord*>> usable;
    for (const auto& [key, group] : instances) {
        if (std::any_of(group.begin(), group.end(),
                        [](const ConvergenceRecord* r) { return !r->ok; })) {
            std::cerr << "warning: excluding instance " << key << " (failed run)\n";
            continue;
        }
        if (group.size() != variants.size())
            throw ConfigError("incomplete grid: instance " + key + " has " +
                              std::to_string(group.size()) + " of " +
                              std::to_string(variants.size()) + " variants");
        usable.push_back(group);
    }

    std::vector<DataProfile> profiles;
    for (const auto& label : variants) {
        DataProfile profile;
        profile.variant = label;
        profile.solved_fraction.assign(static_cast<std::size_t>(budget_mult) + 1, 0.0);
        profiles.push_back(std::move(profile));
    }
    if (usable.empty()) return profiles;

    for (const auto& group : usable) {
        const double fx0 = group.front()->f_x0();
        double f_star = group.front()->final_best();
        for (const auto* rec : group) {
            if (std::abs(rec->f_x0() - fx0) > 1e-9 * (1.0 + std::abs(fx0)))
                throw ConfigError("instance " + rec->instance.str() +
                                  ": f(x0) differs across variants");
            f_star = std::min(f_star, rec->final_best());
        }
        const double threshold = f_star + tau * (fx0 - f_star);
        const int n_plus_1 = find_problem(group.front()->instance.problem).dim + 1;

        for (const auto* rec : group) {
            const std::size_t v = static_cast<std::size_t>(
                std::find(variants.begin(), variants.end(), rec->variant) - variants.begin());
            // Earliest evaluation count at which the running best meets the test.
            long long solve_evals = -1;
            for (const auto& [evals, value] : rec->history) {
                if (value <= threshold) {
                    solve_evals = evals;
                    break;
                }
            }
            if (solve_evals < 0) continue;
            const long long unit =
                (solve_evals + n_plus_1 - 1) / n_plus_1; // ceil(N / (n+1))
            if (unit <= budget_mult)
                for (std::size_t u = static_cast<std::size_t>(unit);
                     u < profiles[v].solved_fraction.size(); ++u)
                    profiles[v].solved_fraction[u] += 1.0;
        }
    }

    const double total = static_cast<double>(usable.size());
    for (auto& profile : profiles)
        for (auto& value : profile.solved_fraction) value /= total;
    return profiles;
}

void emit_profile_svg(const std::vector<DataProfile>& profiles, const std::string& title,
                      const fs::path& path) {
    constexpr int width = 760, height = 520;
    constexpr int left = 70, right = 24, top = 44, bottom = 58;
    const int plot_w = width - left - right;
    const int plot_h = height - top - bottom;
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};

    std::size_t max_units = 1;
    for (const auto& profile : profiles)
        max_units = std::max(max_units, profile.solved_fraction.size() > 0
                                            ? profile.solved_fraction.size() - 1
                                            : std::size_t{1});

    const auto x_of = [&](double u) { return left + plot_w * u / static_cast<double>(max_units); };
    const auto y_of = [&](double frac) { return top + plot_h * (1.0 - frac); };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

    // axes
    out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
        << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << top + plot_h << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double frac = i / 5.0;
        out << "<text x=\"" << left - 8 << "\" y=\"" << y_of(frac) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << format_double(frac) << "</text>\n";
        const double u = max_units * frac;
        out << "<text x=\"" << x_of(u) << "\" y=\"" << top + plot_h + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << static_cast<long long>(std::llround(u)) << "</text>\n";
    }
    out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 14
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << "Number of noisy evaluations / (n+1)</text>\n";
    out << "<text x=\"18\" y=\"" << top + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << top + plot_h / 2
        << ")\">Fraction of instances solved</text>\n";

    for (std::size_t v = 0; v < profiles.size(); ++v) {
        const auto& frac = profiles[v].solved_fraction;
        if (frac.empty()) continue;
        const char* color = palette[v % 6];
        std::ostringstream pts;
        pts << x_of(0) << ',' << y_of(frac[0]);
        for (std::size_t u = 1; u < frac.size(); ++u) {
            // step curve: horizontal to u, then vertical to the new level
            pts << ' ' << x_of(static_cast<double>(u)) << ',' << y_of(frac[u - 1]);
            pts << ' ' << x_of(static_cast<double>(u)) << ',' << y_of(frac[u]);
        }
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\""
            << pts.str() << "\"/>\n";
        const double ly = top + 16 + 18 * static_cast<double>(v);
        out << "<line x1=\"" << left + plot_w - 150 << "\" y1=\"" << ly << "\" x2=\""
            << left + plot_w - 120 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"1.6\"/>\n";
        out << "<text x=\"" << left + plot_w - 112 << "\" y=\"" << ly + 4
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << profiles[v].variant
            << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace stars
