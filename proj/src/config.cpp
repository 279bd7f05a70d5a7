#include "bistab/config.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

namespace bistab {

namespace {

std::vector<double> parse_numbers(const std::string& key, const std::string& value) {
    std::istringstream vs(value);
    std::vector<double> nums;
    double x;
    while (vs >> x) nums.push_back(x);
    std::string rest;
    if (vs.clear(), vs >> rest)
        throw ConfigError("config: non-numeric token in '" + key + "'");
    if (nums.empty()) throw ConfigError("config: empty value for '" + key + "'");
    return nums;
}

double parse_one(const std::string& key, const std::string& value) {
    const auto nums = parse_numbers(key, value);
    if (nums.size() != 1) throw ConfigError("config: '" + key + "' expects a single number");
    return nums[0];
}

}  // namespace

ModelSpec RunConfig::model_spec() const {
    if (model != "custom") {
        try {
            return catalog_spec(model, truncation);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    if (mu_table.empty()) throw ConfigError("config: model=custom requires mu_table");
    ModelSpec spec;
    if (kind == "dirichlet") spec.kind = ModelKind::dirichlet_heat;
    else if (kind == "neumann") spec.kind = ModelKind::neumann_heat;
    else if (kind == "varcoeff") spec.kind = ModelKind::variable_coeff_heat;
    else if (kind == "radial") spec.kind = ModelKind::radial_ball_3d;
    else throw ConfigError("config: unknown kind '" + kind + "'");
    spec.truncation = truncation;
    try {
        spec.mu = load_potential_table(mu_table);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

Eigen::VectorXd RunConfig::initial_deviation() const {
    Eigen::VectorXd v0 = Eigen::VectorXd::Zero(truncation);
    if (!perturbation.empty()) {
        if (static_cast<int>(perturbation.size()) != truncation)
            throw ConfigError("config: perturbation length must equal truncation");
        for (int i = 0; i < truncation; ++i) v0[i] = perturbation[i];
        return v0;
    }
    if (perturbation_radius > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int i = 0; i < truncation; ++i) v0[i] = gauss(rng);
        v0 *= perturbation_radius / v0.norm();
    }
    return v0;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw ConfigError("config: malformed line " + std::to_string(lineno) +
                                  " (expected key = value)");
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config: empty key or value on line " + std::to_string(lineno));

        if (key == "model") cfg.model = value;
        else if (key == "mu_table") cfg.mu_table = value;
        else if (key == "kind") cfg.kind = value;
        else if (key == "truncation") cfg.truncation = static_cast<int>(parse_one(key, value));
        else if (key == "window") cfg.window = parse_one(key, value);
        else if (key == "windows") cfg.windows = static_cast<int>(parse_one(key, value));
        else if (key == "perturbation") cfg.perturbation = parse_numbers(key, value);
        else if (key == "perturbation_radius") cfg.perturbation_radius = parse_one(key, value);
        else if (key == "seed") cfg.seed = static_cast<unsigned>(parse_one(key, value));
        else if (key == "steps") cfg.steps = static_cast<int>(parse_one(key, value));
        else if (key == "precision") {
            if (value == "double") cfg.precision = Precision::double_precision;
            else if (value == "extended") cfg.precision = Precision::extended;
            else throw ConfigError("config: precision must be 'double' or 'extended'");
        }
        else if (key == "family_tol") cfg.family_tol = parse_one(key, value);
        else if (key == "floor") cfg.floor = parse_one(key, value);
        else if (key == "b_floor") cfg.b_floor = parse_one(key, value);
        else if (key == "tau") cfg.tau = parse_one(key, value);
        else if (key == "samples") cfg.samples = static_cast<int>(parse_one(key, value));
        else if (key == "out") cfg.out = value;
        else throw ConfigError("config: unknown key '" + key + "' on line " + std::to_string(lineno));
    }

    if (cfg.truncation < 2 || cfg.truncation > kMaxTruncation)
        throw ConfigError("config: truncation must be in [2, 32]");
    if (!(cfg.window > 0)) throw ConfigError("config: window must be positive");
    if (cfg.windows < 1) throw ConfigError("config: windows must be >= 1");
    if (cfg.steps < 16 || (cfg.steps & (cfg.steps - 1)) != 0)
        throw ConfigError("config: steps must be a power of two >= 16");
    if (!(cfg.family_tol > 0)) throw ConfigError("config: family_tol must be positive");
    if (!(cfg.floor > 0)) throw ConfigError("config: floor must be positive");
    if (cfg.samples < 2) throw ConfigError("config: samples must be >= 2");
    if (cfg.perturbation_radius < 0) throw ConfigError("config: perturbation_radius must be >= 0");
    return cfg;
}

}  // namespace bistab
