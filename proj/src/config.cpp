#include "stars/config.hpp"

#include <fstream>
#include <set>

#include "stars/errors.hpp"
#include "stars/problems.hpp"

namespace stars {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!allowed.count(key))
            throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

json noise_to_json(const NoiseModel& noise) {
    return json{{"form", to_string(noise.form)},
                {"dist", to_string(noise.dist)},
                {"sigma", noise.sigma}};
}

NoiseModel noise_from_json(const json& j, const std::string& where) {
    check_keys(j, {"form", "dist", "sigma"}, where);
    NoiseModel noise;
    noise.form = noise_form_from_string(get_or<std::string>(j, "form", "additive"));
    noise.dist = noise_dist_from_string(get_or<std::string>(j, "dist", "normal"));
    noise.sigma = get_or<double>(j, "sigma", 1e-3);
    noise.validate();
    return noise;
}

} // namespace

RunConfigFile RunConfigFile::from_json(const json& j) {
    check_keys(j, {"schema_version", "seed", "output_dir", "solve", "solver", "bench"},
               "top level");
    RunConfigFile config;
    config.schema_version = get_or<int>(j, "schema_version", 0);
    if (config.schema_version != 1)
        throw ConfigError("config: schema_version must be 1 (got " +
                          std::to_string(config.schema_version) + ")");
    config.seed = get_or<std::uint64_t>(j, "seed", 0);
    config.output_dir = get_or<std::string>(j, "output_dir", "out");

    if (j.contains("solver")) {
        const json& s = j.at("solver");
        check_keys(s,
                   {"gamma", "eta1", "eta2", "delta0", "delta_max", "c1", "n_samples",
                    "log_alignment", "max_iterations", "radius_floor"},
                   "solver");
        config.solver.gamma = get_or<double>(s, "gamma", config.solver.gamma);
        config.solver.eta1 = get_or<double>(s, "eta1", config.solver.eta1);
        config.solver.eta2 = get_or<double>(s, "eta2", config.solver.eta2);
        config.solver.delta0 = get_or<double>(s, "delta0", config.solver.delta0);
        config.solver.delta_max = get_or<double>(s, "delta_max", config.solver.delta_max);
        config.solver.c1 = get_or<double>(s, "c1", config.solver.c1);
        config.solver.n_samples = get_or<long long>(s, "n_samples", config.solver.n_samples);
        config.solver.log_alignment = get_or<bool>(s, "log_alignment", false);
        config.solver.max_iterations = get_or<long long>(s, "max_iterations", 0);
        config.solver.radius_floor = get_or<double>(s, "radius_floor", 0.0);
    }

    if (j.contains("solve")) {
        const json& s = j.at("solve");
        check_keys(s, {"problem", "ensemble", "p", "r", "noise", "budget_mult", "h_opt"},
                   "solve");
        config.problem = get_or<std::string>(s, "problem", "");
        config.ensemble =
            ensemble_kind_from_string(get_or<std::string>(s, "ensemble", "gaussian"));
        config.p = get_or<int>(s, "p", 0);
        config.r = get_or<int>(s, "r", 1);
        if (s.contains("noise")) config.noise = noise_from_json(s.at("noise"), "solve.noise");
        config.budget_mult = get_or<long long>(s, "budget_mult", 1500);
        config.h_opt_override = get_or<double>(s, "h_opt", 0.0);
    }

    if (j.contains("bench")) {
        const json& b = j.at("bench");
        check_keys(b,
                   {"problems", "noise_forms", "distributions", "sigma", "replications",
                    "variants", "budget_mult", "taus", "n_samples", "jobs"},
                   "bench");
        config.has_grid = true;
        ExperimentGrid& grid = config.grid;
        grid.problems = get_or<std::vector<std::string>>(b, "problems", {});
        if (b.contains("noise_forms")) {
            grid.noise_forms.clear();
            for (const auto& f : b.at("noise_forms"))
                grid.noise_forms.push_back(noise_form_from_string(f.get<std::string>()));
        }
        if (b.contains("distributions")) {
            grid.distributions.clear();
            for (const auto& d : b.at("distributions"))
                grid.distributions.push_back(noise_dist_from_string(d.get<std::string>()));
        }
        grid.sigma = get_or<double>(b, "sigma", grid.sigma);
        grid.replications = get_or<int>(b, "replications", grid.replications);
        grid.budget_mult = get_or<long long>(b, "budget_mult", grid.budget_mult);
        grid.taus = get_or<std::vector<double>>(b, "taus", grid.taus);
        grid.n_samples = get_or<long long>(b, "n_samples", grid.n_samples);
        grid.jobs = get_or<int>(b, "jobs", 0);
        grid.master_seed = config.seed;
        if (b.contains("variants")) {
            grid.variants.clear();
            for (const auto& v : b.at("variants")) {
                check_keys(v, {"label", "ensemble", "p", "r"}, "bench.variants");
                BenchVariant variant;
                variant.label = get_or<std::string>(v, "label", "");
                variant.kind =
                    ensemble_kind_from_string(get_or<std::string>(v, "ensemble", "gaussian"));
                variant.p = get_or<int>(v, "p", 0);
                variant.r = get_or<int>(v, "r", 1);
                grid.variants.push_back(std::move(variant));
            }
        }
    }
    return config;
}

RunConfigFile RunConfigFile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        // nlohmann reports the byte offset; surface it as-is.
        throw ConfigError("config: " + std::string(e.what()));
    }
    return from_json(j);
}

nlohmann::json RunConfigFile::to_json() const {
    json j;
    j["schema_version"] = schema_version;
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    j["solver"] = {{"gamma", solver.gamma},
                   {"eta1", solver.eta1},
                   {"eta2", solver.eta2},
                   {"delta0", solver.delta0},
                   {"delta_max", solver.delta_max},
                   {"c1", solver.c1},
                   {"n_samples", solver.n_samples},
                   {"log_alignment", solver.log_alignment},
                   {"max_iterations", solver.max_iterations},
                   {"radius_floor", solver.radius_floor}};
    json s;
    s["problem"] = problem;
    s["ensemble"] = to_string(ensemble);
    s["p"] = p;
    s["r"] = r;
    s["noise"] = noise_to_json(noise);
    s["budget_mult"] = budget_mult;
    s["h_opt"] = h_opt_override;
    j["solve"] = s;
    if (has_grid) {
        json b;
        b["problems"] = grid.problems;
        json forms = json::array();
        for (const auto& f : grid.noise_forms) forms.push_back(to_string(f));
        b["noise_forms"] = forms;
        json dists = json::array();
        for (const auto& d : grid.distributions) dists.push_back(to_string(d));
        b["distributions"] = dists;
        b["sigma"] = grid.sigma;
        b["replications"] = grid.replications;
        b["budget_mult"] = grid.budget_mult;
        b["taus"] = grid.taus;
        b["n_samples"] = grid.n_samples;
        b["jobs"] = grid.jobs;
        json variants = json::array();
        for (const auto& v : grid.variants)
            variants.push_back({{"label", v.label},
                                {"ensemble", to_string(v.kind)},
                                {"p", v.p},
                                {"r", v.r}});
        b["variants"] = variants;
        j["bench"] = b;
    }
    return j;
}

nlohmann::json default_config_json() {
    RunConfigFile config;
    config.seed = 12345;
    config.problem = "SROSENBR";
    config.ensemble = EnsembleKind::gaussian;
    config.p = 5;
    config.noise = NoiseModel{NoiseForm::additive, NoiseDist::gaussian, 1e-3};
    config.has_grid = true;
    config.grid.problems = {"SROSENBR", "BROYDN3D", "INTEGREQ", "VARDIMNE",
                            "Penalty2", "ARWHDNE", "FREUROTH", "CHEBYQAD"};
    config.grid.replications = 5;
    config.grid.variants = {{"G-STARS-2", EnsembleKind::gaussian, 2, 1},
                            {"G-STARS-5", EnsembleKind::gaussian, 5, 1},
                            {"I-STARS-n", EnsembleKind::identity, 0, 1}};
    return config.to_json();
}

} // namespace stars
