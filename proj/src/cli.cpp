#include "rtlab/cli.hpp"

#include "rtlab/config.hpp"
#include "rtlab/snapshot.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>

namespace rtlab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& header) : f_(path) {
        if (!f_) throw ValidationError("cannot write " + path.string());
        for (std::size_t i = 0; i < header.size(); ++i) f_ << (i ? "," : "") << header[i];
        f_ << "\n";
    }
    void row(const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) f_ << (i ? "," : "") << num(v[i]);
        f_ << "\n";
    }

private:
    std::ofstream f_;
};

struct Run {
    RunConfig cfg;
    fs::path out;
    RunManifest manifest;

    Run(RunConfig c, const std::string& out_override, const std::string& command)
        : cfg(std::move(c)), out(out_override.empty() ? cfg.out : fs::path(out_override)),
          manifest(cfg, command) {
        fs::create_directories(out);
    }

    fs::path path(const std::string& name) {
        manifest.add_output(name);
        return out / name;
    }

    void write_json(const std::string& name, const json& j) {
        std::ofstream f(path(name));
        f << j.dump(2) << "\n";
    }

    void write_velocity(const std::string& stem, const VelocityField& u) {
        for (int a = 0; a < u.grid.dim(); ++a)
            write_snapshot(path(stem + "_u" + std::to_string(a) + ".bin"), u.grid, a, u.comp(a));
    }

    void write_scalar(const std::string& name, const ScalarField& s) {
        write_snapshot(path(name), s.grid, -1, s.v);
    }
};

json growth_json(const GrowthRateResult& r) {
    return {{"lambda", r.lambda},
            {"stable", r.stable},
            {"marginal", r.marginal},
            {"alpha_at_lambda", r.alpha_at_lambda},
            {"fixedpoint_residual", r.fixedpoint_residual},
            {"eigen_residual", r.eigen_residual},
            {"iterations", r.iterations},
            {"alpha_evaluations", r.alpha_evaluations}};
}

int cmd_growth_rate(Run& run, bool oracle, std::ostream& out) {
    const VariationalProblem prob(run.cfg.profile(), run.cfg.grid(), run.cfg.physics, run.cfg.eigen);
    const GrowthRateResult r = run.manifest.stage("solve_lambda", [&] { return solve_lambda(prob); });
    json j = growth_json(r);
    j["flag"] = r.stable ? "stable" : (r.marginal ? "marginal" : "unstable");
    if (oracle) {
        const double a = alpha(prob, r.lambda).value;
        const double o = run.manifest.stage("oracle", [&] { return oracle_alpha_dense(prob, r.lambda); });
        j["oracle"] = {{"s", r.lambda}, {"alpha", a}, {"oracle_alpha", o}, {"abs_diff", std::abs(a - o)}};
    }
    if (r.lambda > 0.0) {
        run.write_velocity("eigenfield", r.eigenfield);
        run.write_scalar("eigen_pressure.bin", r.pressure);
    }
    run.write_json("growth_rate.json", j);
    out << j.dump(2) << "\n";
    return exit_ok;
}

int cmd_oracle_check(Run& run, std::ostream& out) {
    const VariationalProblem prob(run.cfg.profile(), run.cfg.grid(), run.cfg.physics, run.cfg.eigen);
    const GrowthRateResult r = run.manifest.stage("solve_lambda", [&] { return solve_lambda(prob); });
    std::vector<double> ss{0.0};
    if (r.lambda > 0.0) ss = {0.0, 0.5 * r.lambda, r.lambda};
    json rows = json::array();
    bool pass = true;
    run.manifest.stage("oracle", [&] {
        for (double s : ss) {
            const double a = alpha(prob, s).value;
            const double o = oracle_alpha_dense(prob, s);
            const double tol = 1e-6 * (1.0 + std::abs(a));
            const bool ok = std::abs(a - o) <= tol;
            pass = pass && ok;
            rows.push_back({{"s", s}, {"alpha", a}, {"oracle_alpha", o}, {"abs_diff", std::abs(a - o)},
                            {"tolerance", tol}, {"pass", ok}});
        }
        return 0;
    });
    const json j = {{"lambda", r.lambda}, {"checks", rows}, {"pass", pass}};
    run.write_json("oracle_check.json", j);
    out << j.dump(2) << "\n";
    return pass ? exit_ok : exit_numerical;
}

GrowthRateResult unstable_mode(Run& run, const VariationalProblem& prob, const char* what) {
    GrowthRateResult r = run.manifest.stage("solve_lambda", [&] { return solve_lambda(prob); });
    if (!(r.lambda > 0.0)) throw ValidationError(std::string(what) + ": the profile has no unstable mode");
    return r;
}

int cmd_linear_evolve(Run& run, double tmax, double dt, std::ostream& out) {
    if (!(tmax > 0.0)) throw ValidationError("linear-evolve: --tmax must be positive");
    if (!(dt > 0.0)) throw ValidationError("linear-evolve: --dt must be positive");
    const VariationalProblem prob(run.cfg.profile(), run.cfg.grid(), run.cfg.physics, run.cfg.eigen);
    const GrowthRateResult r = unstable_mode(run, prob, "linear-evolve");
    const int n = std::max(1, int(std::ceil(tmax / dt - 1e-9)));
    const LinearStepper stepper(prob, tmax / n);
    CsvWriter csv(run.path("linear_evolve.csv"),
                  {"t", "norm_rho_l2", "norm_u_l2", "norm_u3_l2", "deviation_from_analytic"});
    LinearState s = analytic_mode(r, prob, 0.0);
    double worst = 0.0;
    run.manifest.stage("evolve", [&] {
        for (int i = 0;; ++i) {
            const LinearState ref = analytic_mode(r, prob, s.t);
            const double dev = linear_distance(s, ref) / linear_norm(ref);
            worst = std::max(worst, dev);
            const auto c = component_norms(s.rho_pert, s.vel);
            csv.row({s.t, c[0], norm_l2(s.vel), c[1], dev});
            if (i == n) break;
            s = stepper.step(s);
            s.t = (i + 1) * (tmax / n);
        }
        return 0;
    });
    const json j = {{"lambda", r.lambda}, {"dt", tmax / n}, {"steps", n}, {"max_relative_deviation", worst}};
    run.write_json("linear_evolve.json", j);
    out << j.dump(2) << "\n";
    return exit_ok;
}

int cmd_nonlinear_evolve(Run& run, double delta, double tmax, double dt, int snapshot_every, std::ostream& out) {
    if (!(delta > 0.0)) throw ValidationError("nonlinear-evolve: --delta must be positive");
    if (!(tmax > 0.0)) throw ValidationError("nonlinear-evolve: --tmax must be positive");
    if (dt < 0.0) throw ValidationError("nonlinear-evolve: --dt must be positive");
    const VariationalProblem prob(run.cfg.profile(), run.cfg.grid(), run.cfg.physics, run.cfg.eigen);
    const GrowthRateResult r = run.manifest.stage("solve_lambda", [&] { return solve_lambda(prob); });

    State init(prob.grid());
    if (r.lambda > 0.0) {
        init = scaled_state(build_seed(r, prob), delta);
        if (dt == 0.0) dt = std::min(run.cfg.lambda_dt / r.lambda, LinearStepper::max_dt(prob));
    } else {
        init.vel = prob.seed_field();
        const double e = energy_norm(init.rho_pert, init.vel);
        for (double& x : init.vel.data) x *= delta / e;
    }
    const NonlinearSolver solver(prob, run.cfg.nonlinear);

    CsvWriter csv(run.path("nonlinear_evolve.csv"),
                  {"t", "rho_l2", "ud_l2", "uh_l2", "E", "rho_min", "rho_max", "energy_residual", "dt"});
    auto emit = [&](const State& s, double rmin, double rmax, double eres, double step_dt) {
        const auto c = component_norms(s.rho_pert, s.vel);
        csv.row({s.t, c[0], c[1], c[2], energy_norm(s.rho_pert, s.vel), rmin, rmax, eres, step_dt});
    };
    auto snapshot = [&](const State& s, int step) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "snap_%06d", step);
        run.write_scalar(std::string(stem) + "_rho.bin", s.rho_pert);
        run.write_velocity(stem, s.vel);
    };
    {
        double lo = init.rho_pert.v[0] + prob.rho().v[0], hi = lo;
        for (std::size_t i = 0; i < init.rho_pert.v.size(); ++i) {
            lo = std::min(lo, init.rho_pert.v[i] + prob.rho().v[i]);
            hi = std::max(hi, init.rho_pert.v[i] + prob.rho().v[i]);
        }
        emit(init, lo, hi, 0.0, 0.0);
    }
    if (snapshot_every > 0) snapshot(init, 0);
    int step = 0;
    const TrajectorySummary sum = run.manifest.stage("evolve", [&] {
        return rtlab::run(solver, init, tmax, [&](const State& s, const StepReport& rep) {
            ++step;
            emit(s, rep.rho_min, rep.rho_max, rep.energy_residual, rep.dt);
            if (snapshot_every > 0 && step % snapshot_every == 0) snapshot(s, step);
            return true;
        }, dt);
    });
    json j = {{"lambda", r.lambda},          {"delta", delta},
              {"steps", sum.steps},          {"t_final", sum.t_final},
              {"failed", sum.failed},        {"max_divergence", sum.max_divergence},
              {"rho_min", sum.rho_min},      {"rho_max", sum.rho_max},
              {"max_energy_residual", sum.max_energy_residual}};
    if (sum.failed) j["failure"] = sum.failure;
    run.write_json("nonlinear_evolve.json", j);
    out << j.dump(2) << "\n";
    return sum.failed ? exit_numerical : exit_ok;
}

void write_error_scaling(Run& run, const ErrorScalingResult& es, json& summary) {
    CsvWriter csv(run.path("error_scaling.csv"), {"delta", "lambda_t", "t", "err", "bound_ratio", "failed"});
    for (const auto& r : es.rows) csv.row({r.delta, r.lambda_t, r.t, r.err, r.bound_ratio, r.failed ? 1.0 : 0.0});
    summary["fitted_exponent"] = es.fitted_exponent;
    summary["fitted_C"] = es.fitted_c;
    summary["bound_ratio_spread"] = es.bound_ratio_spread;
    summary["fit_lambda_t"] = es.fit_lambda_t;
    summary["error_scaling_dt"] = es.dt;
    summary["pass"]["fitted_exponent_at_least_1.4"] = es.fitted_exponent >= 1.4;
}

void write_escape(Run& run, const EscapeTimeResult& et, json& summary) {
    CsvWriter csv(run.path("escape_time.csv"), {"delta", "log_inv_delta", "t_measured", "t_predicted", "escaped",
                                                "bound_held", "rho_l2", "ud_l2", "uh_l2", "E"});
    bool all_escaped = true, bound = true;
    for (const auto& r : et.rows) {
        csv.row({r.delta, std::log(1.0 / r.delta), r.t_measured, r.t_predicted, r.escaped ? 1.0 : 0.0,
                 r.bound_held ? 1.0 : 0.0, r.norms_at_escape[0], r.norms_at_escape[1], r.norms_at_escape[2],
                 r.energy_at_escape});
        all_escaped = all_escaped && r.escaped;
        bound = bound && r.bound_held;
    }
    summary["slope"] = et.slope;
    summary["inverse_lambda"] = et.inverse_lambda;
    summary["slope_over_inv_lambda"] = et.slope_ratio;
    summary["epsilon0"] = et.epsilon0;
    summary["epsilon"] = et.epsilon;
    summary["escape_dt"] = et.dt;
    summary["pass"]["all_escaped"] = all_escaped;
    summary["pass"]["growth_bound_held"] = bound;
    summary["pass"]["slope_within_10_percent"] = std::abs(et.slope_ratio - 1.0) <= 0.1;
}

int cmd_sweep(Run& run, const std::string& experiment, std::ostream& out) {
    const RunConfig& c = run.cfg;
    const LabConfig lab = c.lab();
    json summary = {{"experiment", experiment}, {"pass", json::object()}};

    if (experiment == "headline") {
        const HeadlineReport rep = run.manifest.stage("headline", [&] {
            return run_headline_case(c.profile(), c.grid(), c.physics, c.deltas, lab, c.eigen);
        });
        summary["profile"] = rep.profile;
        summary["lambda"] = rep.lambda;
        summary["stable"] = rep.stable;
        summary["marginal"] = rep.marginal;
        summary["min_drho"] = rep.min_drho;
        summary["max_drho"] = rep.max_drho;
        summary["lambda_linear_comparator"] = rep.lambda_linear_comparator;
        if (rep.error_scaling) write_error_scaling(run, *rep.error_scaling, summary);
        if (rep.escape) write_escape(run, *rep.escape, summary);
        summary["pass"]["lambda_positive"] = rep.lambda > 0.0;
        if (rep.lambda > 0.0)
            summary["pass"]["below_linear_comparator"] = rep.lambda <= rep.lambda_linear_comparator * (1.0 + 1e-6);
    } else if (experiment == "error-scaling" || experiment == "escape-time") {
        const VariationalProblem prob(c.profile(), c.grid(), c.physics, c.eigen);
        const GrowthRateResult r = unstable_mode(run, prob, "sweep");
        const SeedData seed = build_seed(r, prob);
        summary["lambda"] = r.lambda;
        summary["seed_m0"] = seed.m0;
        summary["seed_C2"] = seed.c2;
        if (experiment == "error-scaling") {
            const auto es = run.manifest.stage("error_scaling", [&] {
                return run_error_scaling(prob, r, seed, c.deltas, c.lambda_t, c.fit_lambda_t, lab);
            });
            write_error_scaling(run, es, summary);
        } else {
            double eps0 = c.epsilon0;
            if (eps0 == 0.0) {
                std::vector<double> pilot;
                for (double d : c.deltas)
                    if (d * std::exp(1.0) <= 0.5) pilot.push_back(d);
                std::sort(pilot.begin(), pilot.end());
                if (pilot.size() > 3) pilot.erase(pilot.begin(), pilot.end() - 3);
                if (pilot.size() < 2) throw ValidationError("sweep: the pilot run needs two deltas below 0.5/e");
                const auto es = run.manifest.stage("pilot", [&] {
                    return run_error_scaling(prob, r, seed, pilot, {0.5, 1.0}, 1.0, lab);
                });
                summary["pilot_fitted_C"] = es.fitted_c;
                eps0 = choose_epsilon0(es.fitted_c);
            }
            const auto et = run.manifest.stage("escape_time", [&] {
                return run_escape_time(prob, r, seed, c.deltas, eps0, lab);
            });
            write_escape(run, et, summary);
        }
    } else {
        throw ValidationError("sweep: unknown experiment \"" + experiment +
                              "\" (valid: error-scaling, escape-time, headline)");
    }
    run.write_json("sweep_summary.json", summary);
    out << summary.dump(2) << "\n";
    return exit_ok;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Rayleigh-Taylor instability lab", "rtlab"};
    app.require_subcommand(1);

    std::string config, out_dir, experiment;
    bool oracle = false;
    double tmax = 0.0, dt = 0.0, delta = 0.0;
    int snapshot_every = 0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "run configuration (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory (default: config \"out\")");
    };
    auto* growth = app.add_subcommand("growth-rate", "growth rate, eigenfield and pressure");
    common(growth);
    growth->add_flag("--oracle", oracle, "compare alpha at lambda against the dense oracle");
    auto* linear = app.add_subcommand("linear-evolve", "linearized evolution of the fastest mode");
    common(linear);
    linear->add_option("--tmax", tmax)->required();
    linear->add_option("--dt", dt)->required();
    auto* nonlinear = app.add_subcommand("nonlinear-evolve", "nonlinear evolution from delta times the mode");
    common(nonlinear);
    nonlinear->add_option("--delta", delta)->required();
    nonlinear->add_option("--tmax", tmax)->required();
    nonlinear->add_option("--dt", dt, "fixed step (default lambda_dt / lambda; adaptive when stable)");
    nonlinear->add_option("--snapshot-every", snapshot_every, "write fields every N steps");
    auto* sweep = app.add_subcommand("sweep", "delta ladders");
    common(sweep);
    sweep->add_option("--experiment", experiment)
        ->required()
        ->check(CLI::IsMember({"error-scaling", "escape-time", "headline"}));
    auto* check = app.add_subcommand("oracle-check", "alpha against the dense oracle at s = 0, lambda/2, lambda");
    common(check);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::Success&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        if (!args.empty() && !args[0].starts_with("-") && !app.get_subcommand_no_throw(args[0]))
            err << "unknown subcommand \"" << args[0] << "\"\n";
        else
            err << e.what() << "\n";
        err << app.help();
        return exit_invalid;
    }

    CLI::App* sub = app.get_subcommands().front();
    std::optional<Run> run;
    int code = exit_ok;
    std::string message;
    try {
        run.emplace(parse_config(fs::path(config)), out_dir, sub->get_name());
        if (sub == growth)
            code = cmd_growth_rate(*run, oracle, out);
        else if (sub == linear)
            code = cmd_linear_evolve(*run, tmax, dt, out);
        else if (sub == nonlinear)
            code = cmd_nonlinear_evolve(*run, delta, tmax, dt, snapshot_every, out);
        else if (sub == sweep)
            code = cmd_sweep(*run, experiment, out);
        else
            code = cmd_oracle_check(*run, out);
    } catch (const ValidationError& e) {
        code = exit_invalid;
        message = e.what();
    } catch (const std::exception& e) {
        code = exit_numerical;
        message = e.what();
    }
    if (!message.empty()) err << "rtlab " << sub->get_name() << ": " << message << "\n";
    if (run) {
        run->manifest.set_status(code, message);
        run->manifest.write(run->out);
    }
    return code;
}

}  // namespace rtlab
