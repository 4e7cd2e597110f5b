#pragma once

// Run configuration (JSON) and run manifests.
//
// {
//   "grid":       {"dim": 2, "cells": [32, 32], "extents": [1.0, 1.0]},
//   "profile":    {"kind": "linear", "params": {"a": 1, "b": 1}}   or   {"csv": "rho.csv"},
//   "physics":    {"mu": 0.01, "g": 1.0},
//   "solver":     {"eigen_tol": 1e-9, "root_tol": 1e-10, "krylov_dim": 120, "max_iterations": 20000,
//                  "linear_tol": 1e-12, "cfl": 0.4, "cfl_max": 0.5},
//   "experiment": {"deltas": [1e-5, 3e-5, 1e-4, 3e-4, 1e-3], "lambda_t": [0.5, 1, 1.5, 2],
//                  "fit_lambda_t": 1.0, "lambda_dt": 0.005, "epsilon0": 0},
//   "out": "out",
//   "seed": 20240917
// }
//
// Only "grid" and "profile" are required. epsilon0 = 0 selects it from a pilot run.
// Relative csv and out paths are resolved against the directory of the config file.

#include "rtlab/instability_lab.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rtlab {

class ConfigError : public ValidationError {
public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

struct RunConfig {
    int dim = 2;
    std::vector<int> cells;
    std::vector<double> extents;

    std::string profile_kind = "linear";
    std::map<std::string, double> profile_params;
    std::optional<std::filesystem::path> profile_csv;

    PhysicalParams physics;
    EigenOptions eigen;
    NonlinearOptions nonlinear;

    std::vector<double> deltas{1e-5, 3e-5, 1e-4, 3e-4, 1e-3};
    std::vector<double> lambda_t{0.5, 1.0, 1.5, 2.0};
    double fit_lambda_t = 1.0;
    double lambda_dt = 0.005;
    double epsilon0 = 0.0;

    std::filesystem::path out = "out";
    std::uint64_t seed = 20240917;

    Grid grid() const;
    DensityProfile profile() const;
    LabConfig lab() const;
    /// Every field with defaults filled in; keys sorted, so the dump is canonical.
    nlohmann::json to_json() const;
};

/// Throws ConfigError listing every violation (missing file, schema, non-positive parameters).
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");

/// 64-bit FNV-1a of the canonical dump, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

inline constexpr const char* artifact_version = "0.1.0";

class RunManifest {
public:
    RunManifest(const RunConfig& cfg, std::string command);

    /// Times the callable and records it under name.
    template <class F>
    auto stage(const std::string& name, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        struct Record {
            RunManifest* m;
            std::string name;
            std::chrono::steady_clock::time_point t0;
            ~Record() {
                m->stages_.emplace_back(
                    name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            }
        } rec{this, name, t0};
        return f();
    }

    /// Path relative to the output directory.
    void add_output(const std::string& relative);
    void set_status(int exit_code, std::string message = {});

    nlohmann::json to_json() const;
    /// Writes manifest.json into the output directory.
    void write(const std::filesystem::path& out_dir) const;

private:
    std::string hash_, command_, message_;
    int exit_code_ = 0;
    std::vector<std::pair<std::string, double>> stages_;
    std::vector<std::string> outputs_;
};

}  // namespace rtlab
