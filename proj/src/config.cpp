#include "rtlab/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace rtlab {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : "; ") + x;
    return s;
}

class Reader {
public:
    std::vector<std::string> errors;

    void unknown_keys(const json& obj, const std::string& where, std::set<std::string> allowed) {
        for (const auto& [k, _] : obj.items())
            if (!allowed.count(k)) errors.push_back(where + ": unknown key \"" + k + "\"");
    }

    template <class T>
    void get(const json& obj, const std::string& where, const char* key, T& out) {
        if (!obj.contains(key)) return;
        try {
            out = obj.at(key).get<T>();
        } catch (const json::exception&) {
            errors.push_back(where + "." + key + ": wrong type");
        }
    }

    void positive(double v, const std::string& what, const char* why = "") {
        if (!(v > 0.0) || !std::isfinite(v)) errors.push_back(what + " must be positive" + why);
    }

    const json* object(const json& j, const char* key, bool required) {
        if (!j.contains(key)) {
            if (required) errors.push_back(std::string("missing required section \"") + key + "\"");
            return nullptr;
        }
        if (!j.at(key).is_object()) {
            errors.push_back(std::string(key) + ": expected an object");
            return nullptr;
        }
        return &j.at(key);
    }
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : ValidationError("invalid config: " + join(violations)), violations_(std::move(violations)) {}

Grid RunConfig::grid() const { return Grid::make(dim, cells, extents); }

DensityProfile RunConfig::profile() const {
    const double height = extents.at(dim - 1);
    if (profile_csv) return tabulated_profile(*profile_csv, height);
    return builtin_profile(profile_kind_from_string(profile_kind), profile_params, height);
}

LabConfig RunConfig::lab() const {
    LabConfig c;
    c.lambda_dt = lambda_dt;
    c.nonlinear = nonlinear;
    return c;
}

json RunConfig::to_json() const {
    json j;
    j["grid"] = {{"dim", dim}, {"cells", cells}, {"extents", extents}};
    if (profile_csv)
        j["profile"] = {{"csv", profile_csv->string()}};
    else
        j["profile"] = {{"kind", profile_kind}, {"params", profile_params}};
    j["physics"] = {{"mu", physics.mu}, {"g", physics.g}};
    j["solver"] = {{"eigen_tol", eigen.residual_tol}, {"root_tol", eigen.root_tol},
                   {"krylov_dim", eigen.krylov_dim},   {"max_iterations", eigen.max_iterations},
                   {"linear_tol", nonlinear.solver_tol}, {"cfl", nonlinear.cfl},
                   {"cfl_max", nonlinear.cfl_max}};
    j["experiment"] = {{"deltas", deltas},           {"lambda_t", lambda_t}, {"fit_lambda_t", fit_lambda_t},
                       {"lambda_dt", lambda_dt},     {"epsilon0", epsilon0}};
    j["out"] = out.string();
    j["seed"] = seed;
    return j;
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot read config file " + path.string()});
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError({path.string() + ": " + e.what()});
    }
    return parse_config(j, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

RunConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError({"config must be a JSON object"});
    RunConfig c;
    Reader r;
    r.unknown_keys(j, "config", {"grid", "profile", "physics", "solver", "experiment", "out", "seed"});

    if (const json* g = r.object(j, "grid", true)) {
        r.unknown_keys(*g, "grid", {"dim", "cells", "extents"});
        r.get(*g, "grid", "dim", c.dim);
        r.get(*g, "grid", "cells", c.cells);
        r.get(*g, "grid", "extents", c.extents);
        if (c.dim != 2 && c.dim != 3) r.errors.push_back("grid.dim must be 2 or 3");
        if (c.extents.empty()) c.extents.assign(std::size_t(c.dim), 1.0);
        if (int(c.cells.size()) != c.dim) r.errors.push_back("grid.cells must have dim entries");
        if (int(c.extents.size()) != c.dim) r.errors.push_back("grid.extents must have dim entries");
        for (int n : c.cells)
            if (n < 4) r.errors.push_back("grid.cells entries must be at least 4");
        for (double L : c.extents) r.positive(L, "grid.extents entries");
    }

    if (const json* p = r.object(j, "profile", true)) {
        r.unknown_keys(*p, "profile", {"kind", "params", "csv"});
        if (p->contains("csv")) {
            std::string s;
            r.get(*p, "profile", "csv", s);
            std::filesystem::path f = s;
            if (f.is_relative()) f = base_dir / f;
            if (!std::filesystem::is_regular_file(f))
                r.errors.push_back("profile.csv: file not found: " + f.string());
            c.profile_csv = f;
            c.profile_kind = "tabulated";
        } else {
            r.get(*p, "profile", "kind", c.profile_kind);
            r.get(*p, "profile", "params", c.profile_params);
            try {
                if (profile_kind_from_string(c.profile_kind) == ProfileKind::Tabulated)
                    r.errors.push_back("profile: kind tabulated needs \"csv\"");
            } catch (const ValidationError& e) {
                r.errors.push_back(std::string("profile.kind: ") + e.what());
            }
        }
    }

    if (const json* p = r.object(j, "physics", false)) {
        r.unknown_keys(*p, "physics", {"mu", "g"});
        r.get(*p, "physics", "mu", c.physics.mu);
        r.get(*p, "physics", "g", c.physics.g);
    }
    r.positive(c.physics.mu, "physics.mu", " (viscosity mu > 0)");
    r.positive(c.physics.g, "physics.g", " (gravity g > 0)");

    if (const json* s = r.object(j, "solver", false)) {
        r.unknown_keys(*s, "solver",
                       {"eigen_tol", "root_tol", "krylov_dim", "max_iterations", "linear_tol", "cfl", "cfl_max"});
        r.get(*s, "solver", "eigen_tol", c.eigen.residual_tol);
        r.get(*s, "solver", "root_tol", c.eigen.root_tol);
        r.get(*s, "solver", "krylov_dim", c.eigen.krylov_dim);
        r.get(*s, "solver", "max_iterations", c.eigen.max_iterations);
        r.get(*s, "solver", "linear_tol", c.nonlinear.solver_tol);
        r.get(*s, "solver", "cfl", c.nonlinear.cfl);
        r.get(*s, "solver", "cfl_max", c.nonlinear.cfl_max);
    }
    r.positive(c.eigen.residual_tol, "solver.eigen_tol");
    r.positive(c.eigen.root_tol, "solver.root_tol");
    r.positive(c.nonlinear.solver_tol, "solver.linear_tol");
    r.positive(c.nonlinear.cfl, "solver.cfl");
    r.positive(c.nonlinear.cfl_max, "solver.cfl_max");
    if (c.eigen.krylov_dim < 8) r.errors.push_back("solver.krylov_dim must be at least 8");
    if (c.eigen.max_iterations < c.eigen.krylov_dim)
        r.errors.push_back("solver.max_iterations must be at least krylov_dim");
    if (c.nonlinear.cfl > c.nonlinear.cfl_max) r.errors.push_back("solver.cfl must not exceed solver.cfl_max");

    if (const json* e = r.object(j, "experiment", false)) {
        r.unknown_keys(*e, "experiment", {"deltas", "lambda_t", "fit_lambda_t", "lambda_dt", "epsilon0"});
        r.get(*e, "experiment", "deltas", c.deltas);
        r.get(*e, "experiment", "lambda_t", c.lambda_t);
        r.get(*e, "experiment", "fit_lambda_t", c.fit_lambda_t);
        r.get(*e, "experiment", "lambda_dt", c.lambda_dt);
        r.get(*e, "experiment", "epsilon0", c.epsilon0);
    }
    if (c.deltas.empty()) r.errors.push_back("experiment.deltas must not be empty");
    for (double d : c.deltas) r.positive(d, "experiment.deltas entries");
    for (double t : c.lambda_t) r.positive(t, "experiment.lambda_t entries");
    r.positive(c.fit_lambda_t, "experiment.fit_lambda_t");
    r.positive(c.lambda_dt, "experiment.lambda_dt");
    if (!(c.epsilon0 >= 0.0)) r.errors.push_back("experiment.epsilon0 must be >= 0 (0 selects it automatically)");

    std::string out = c.out.string();
    r.get(j, "config", "out", out);
    c.out = out;
    if (c.out.is_relative()) c.out = base_dir / c.out;
    r.get(j, "config", "seed", c.seed);
    c.eigen.seed = c.seed;

    if (r.errors.empty()) {
        try {
            c.grid();
            c.profile();
        } catch (const ValidationError& e) {
            r.errors.push_back(e.what());
        }
    }
    if (!r.errors.empty()) throw ConfigError(r.errors);
    return c;
}

std::string config_hash(const RunConfig& cfg) {
    const std::string s = cfg.to_json().dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunManifest::RunManifest(const RunConfig& cfg, std::string command)
    : hash_(config_hash(cfg)), command_(std::move(command)) {}

void RunManifest::add_output(const std::string& relative) { outputs_.push_back(relative); }

void RunManifest::set_status(int exit_code, std::string message) {
    exit_code_ = exit_code;
    message_ = std::move(message);
}

json RunManifest::to_json() const {
    json stages = json::array();
    for (const auto& [name, secs] : stages_) stages.push_back({{"stage", name}, {"seconds", secs}});
    json j = {{"config_hash", hash_}, {"version", artifact_version}, {"command", command_},
              {"exit_code", exit_code_}, {"stages", stages}, {"outputs", outputs_}};
    if (!message_.empty()) j["message"] = message_;
    return j;
}

void RunManifest::write(const std::filesystem::path& out_dir) const {
    std::filesystem::create_directories(out_dir);
    std::ofstream f(out_dir / "manifest.json");
    f << to_json().dump(2) << "\n";
}

}  // namespace rtlab
