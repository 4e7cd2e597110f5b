#include "rtlab/cli.hpp"
#include "rtlab/config.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rtlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }

    fs::path write(const std::string& name, const json& j) const {
        std::ofstream(path / name) << j.dump();
        return path / name;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int call(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
    std::ostringstream o, e;
    const int code = dispatch(args, o, e);
    if (out) *out = o.str();
    if (err) *err = e.str();
    return code;
}

std::vector<std::string> violations(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.violations();
    }
    return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& what) {
    for (const auto& s : v)
        if (s.find(what) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
    const RunConfig c = parse_config(json{{"grid", {{"dim", 2}, {"cells", {16, 16}}}}, {"profile", {{"kind", "linear"}}}});
    CHECK(c.physics.mu == 0.01);
    CHECK(c.physics.g == 1.0);
    CHECK(c.extents == std::vector<double>{1.0, 1.0});
    CHECK(c.deltas.size() == 5);
    CHECK(c.lambda_dt == 0.005);
    CHECK(c.grid().n(1) == 16);
}

TEST_CASE("zero viscosity is rejected citing positivity") {
    const auto v = violations({{"grid", {{"cells", {8, 8}}}}, {"profile", {{"kind", "linear"}}}, {"physics", {{"mu", 0.0}}}});
    REQUIRE(v.size() == 1);
    CHECK(mentions(v, "mu must be positive"));
}

TEST_CASE("unknown profile kind lists the valid kinds") {
    const auto v = violations({{"grid", {{"cells", {8, 8}}}}, {"profile", {{"kind", "wobbly"}}}});
    CHECK(mentions(v, "linear, tanh_interface, local_bump, stable"));
}

TEST_CASE("every violation is reported") {
    const auto v = violations({{"grid", {{"dim", 4}, {"cells", {2}}}},
                               {"physics", {{"g", -1.0}}},
                               {"experiment", {{"deltas", json::array()}}},
                               {"colour", "red"}});
    CHECK(mentions(v, "grid.dim"));
    CHECK(mentions(v, "missing required section \"profile\""));
    CHECK(mentions(v, "physics.g"));
    CHECK(mentions(v, "experiment.deltas"));
    CHECK(mentions(v, "unknown key \"colour\""));
    CHECK(v.size() >= 5);
}

TEST_CASE("missing files") {
    CHECK_THROWS_AS(parse_config(fs::path("/nonexistent/cfg.json")), ConfigError);
    const auto v = violations({{"grid", {{"cells", {8, 8}}}}, {"profile", {{"csv", "/nonexistent/rho.csv"}}}});
    CHECK(mentions(v, "file not found"));
}

TEST_CASE("config hash is stable under field reordering") {
    const json a = json::parse(R"({"grid": {"dim": 2, "cells": [8, 8]}, "profile": {"kind": "linear", "params": {"a": 1, "b": 2}}})");
    const json b = json::parse(R"({"profile": {"params": {"b": 2, "a": 1}, "kind": "linear"}, "grid": {"cells": [8, 8], "dim": 2}})");
    CHECK(config_hash(parse_config(a)) == config_hash(parse_config(b)));
    json c = a;
    c["physics"] = {{"mu", 0.02}};
    CHECK(config_hash(parse_config(a)) != config_hash(parse_config(c)));
    CHECK(config_hash(parse_config(a)).size() == 16);
}

TEST_CASE("growth-rate on the stable profile") {
    TempDir d("rtlab_cli_stable");
    const auto cfg = d.write("cfg.json", {{"grid", {{"cells", {12, 12}}}}, {"profile", {{"kind", "stable"}}}, {"out", "o"}});
    std::string out;
    CHECK(call({"growth-rate", "--config", cfg.string()}, &out) == exit_ok);
    const json j = json::parse(out);
    CHECK(j["lambda"] == 0.0);
    CHECK(j["flag"] == "stable");
    CHECK(j["stable"] == true);
    CHECK(fs::exists(d.path / "o" / "manifest.json"));
}

TEST_CASE("oracle-check on 10x10") {
    TempDir d("rtlab_cli_oracle");
    const auto cfg = d.write("cfg.json", {{"grid", {{"cells", {10, 10}}}}, {"profile", {{"kind", "linear"}}}});
    std::string out;
    CHECK(call({"oracle-check", "--config", cfg.string()}, &out) == exit_ok);
    const json j = json::parse(out);
    CHECK(j["pass"] == true);
    CHECK(j["checks"].size() == 3);
}

TEST_CASE("unknown subcommand prints usage") {
    std::string err;
    CHECK(call({"frobnicate"}, nullptr, &err) == exit_invalid);
    CHECK(err.find("unknown subcommand") != std::string::npos);
    CHECK(err.find("Usage") != std::string::npos);
    CHECK(call({}, nullptr, &err) == exit_invalid);
}

TEST_CASE("invalid input and numerical failure exit codes") {
    TempDir d("rtlab_cli_codes");
    const auto bad = d.write("bad.json", {{"grid", {{"cells", {8, 8}}}}, {"profile", {{"kind", "linear"}}}, {"physics", {{"mu", -1}}}});
    std::string err;
    CHECK(call({"growth-rate", "--config", bad.string()}, nullptr, &err) == exit_invalid);
    CHECK(err.find("mu must be positive") != std::string::npos);
    const auto cfg = d.write("cfg.json", {{"grid", {{"cells", {12, 12}}}}, {"profile", {{"kind", "linear"}}}, {"out", "o"}});
    CHECK(call({"linear-evolve", "--config", cfg.string(), "--tmax", "1", "--dt", "-1"}) == exit_invalid);
    // a huge step breaks the transport limit and the run fails numerically
    CHECK(call({"nonlinear-evolve", "--config", cfg.string(), "--delta", "0.4", "--tmax", "20", "--dt", "0.15"}) ==
          exit_numerical);
    const json m = json::parse(slurp(d.path / "o" / "manifest.json"));
    CHECK(m["exit_code"] == exit_numerical);
}

TEST_CASE("outputs are deterministic and listed in the manifest") {
    TempDir d("rtlab_cli_determinism");
    const auto cfg = d.write("cfg.json", {{"grid", {{"cells", {12, 12}}}}, {"profile", {{"kind", "local_bump"}}}});
    const std::vector<std::string> args{"nonlinear-evolve", "--config", cfg.string(), "--delta", "1e-3",
                                        "--tmax", "3", "--snapshot-every", "50"};
    CHECK(call(args) == exit_ok);
    const std::string first = slurp(d.path / "out" / "nonlinear_evolve.csv");
    CHECK(call(args) == exit_ok);
    CHECK(first == slurp(d.path / "out" / "nonlinear_evolve.csv"));
    CHECK(first.rfind("t,rho_l2,ud_l2,uh_l2,E,rho_min,rho_max,energy_residual,dt\n", 0) == 0);

    const json m = json::parse(slurp(d.path / "out" / "manifest.json"));
    CHECK(m["config_hash"] == config_hash(parse_config(cfg)));
    CHECK(m["stages"].size() == 2);
    for (const auto& f : m["outputs"]) {
        const fs::path p = d.path / "out" / f.get<std::string>();
        CHECK(fs::exists(p));
        CHECK(fs::file_size(p) > 0);
    }
}

TEST_CASE("linear-evolve columns") {
    TempDir d("rtlab_cli_linear");
    const auto cfg = d.write("cfg.json", {{"grid", {{"cells", {12, 12}}}}, {"profile", {{"kind", "linear"}}}});
    CHECK(call({"linear-evolve", "--config", cfg.string(), "--tmax", "1", "--dt", "0.02", "--out",
                (d.path / "x").string()}) == exit_ok);
    const std::string csv = slurp(d.path / "x" / "linear_evolve.csv");
    CHECK(csv.rfind("t,norm_rho_l2,norm_u_l2,norm_u3_l2,deviation_from_analytic\n", 0) == 0);
}
