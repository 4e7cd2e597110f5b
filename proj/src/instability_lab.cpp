#include "rtlab/instability_lab.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

namespace rtlab {

namespace {

double vertical_norm(const VelocityField& u) {
    return norm_l2(u.comp(u.grid.vertical()), u.grid);
}

double horizontal_norm(const VelocityField& u) {
    double s = 0.0;
    for (int a = 0; a < u.grid.vertical(); ++a) {
        const double n = norm_l2(u.comp(a), u.grid);
        s += n * n;
    }
    return std::sqrt(s);
}

double l2_pair(const ScalarField& r, const VelocityField& u) {
    const double a = norm_l2(r), b = norm_l2(u);
    return std::sqrt(a * a + b * b);
}

// Runs f(i) for i in [0, n) on up to `threads` workers; OpenMP is serial inside each worker.
template <class F>
void parallel_indices(int n, int threads, F&& f) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<int> next{0};
    auto worker = [&] {
        omp_set_num_threads(1);
        for (int i = next++; i < n; i = next++) {
            try {
                f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int w = std::max(1, std::min(threads, n));
    if (w == 1) {
        const int saved = omp_get_max_threads();
        worker();
        omp_set_num_threads(saved);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < w; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double fixed_dt(const VariationalProblem& prob, double lambda, const LabConfig& cfg) {
    if (!(cfg.lambda_dt > 0.0)) throw ValidationError("lab: lambda_dt must be positive");
    double cap = LinearStepper::max_dt(prob);
    if (cfg.nonlinear.dt_max > 0.0) cap = std::min(cap, cfg.nonlinear.dt_max);
    return std::min(cfg.lambda_dt / lambda, cap);
}

}  // namespace

int lab_threads(const LabConfig& cfg) {
    if (cfg.threads > 0) return cfg.threads;
    if (const char* env = std::getenv("RT_LAB_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::array<double, 3> component_norms(const ScalarField& rho, const VelocityField& u) {
    return {norm_l2(rho), vertical_norm(u), horizontal_norm(u)};
}

SeedData build_seed(const GrowthRateResult& result, const VariationalProblem& prob) {
    if (!(result.lambda > 0.0)) throw ValidationError("build_seed: no unstable mode (lambda = 0)");
    const LinearState m = analytic_mode(result, prob, 0.0);
    const double e = energy_norm(m.rho_pert, m.vel);
    if (!(e > 0.0)) throw NumericalError("build_seed: degenerate mode");
    SeedData s;
    s.rho0 = m.rho_pert;
    s.u0 = m.vel;
    s.q0 = m.pressure;
    for (double& x : s.rho0.v) x /= e;
    for (double& x : s.u0.data) x /= e;
    for (double& x : s.q0.v) x /= e;
    s.energy = energy_norm(s.rho0, s.u0);
    const auto n = component_norms(s.rho0, s.u0);
    s.norm_rho = n[0];
    s.norm_ud = n[1];
    s.norm_uh = n[2];
    s.m0 = std::min({n[0], n[1], n[2]});
    s.c2 = l2_pair(s.rho0, s.u0);
    if (!(s.m0 >= 1e-12)) {
        std::ostringstream os;
        os << "build_seed: degenerate mode, norms |rho| = " << n[0] << ", |u_d| = " << n[1] << ", |u_h| = " << n[2];
        throw NumericalError(os.str(), s.m0);
    }
    return s;
}

State scaled_state(const SeedData& seed, double delta) {
    State s(seed.rho0.grid);
    s.rho_pert = seed.rho0;
    s.vel = seed.u0;
    s.pressure = seed.q0;
    for (double& x : s.rho_pert.v) x *= delta;
    for (double& x : s.vel.data) x *= delta;
    for (double& x : s.pressure.v) x *= delta;
    return s;
}

double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ValidationError("regression_slope: need two or more points");
    const double n = double(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double num = 0, den = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    if (!(den > 0.0)) throw ValidationError("regression_slope: abscissae are all equal");
    return num / den;
}

ErrorScalingResult run_error_scaling(const VariationalProblem& prob, const GrowthRateResult& result,
                                     const SeedData& seed, const std::vector<double>& deltas,
                                     const std::vector<double>& lambda_t, double fit_lambda_t,
                                     const LabConfig& cfg) {
    if (!(result.lambda > 0.0)) throw ValidationError("run_error_scaling: no unstable mode");
    if (deltas.size() < 2 || lambda_t.empty()) throw ValidationError("run_error_scaling: need >= 2 deltas and a time grid");
    const double lam = result.lambda;
    const double max_lt = *std::max_element(lambda_t.begin(), lambda_t.end());
    for (double d : deltas) {
        if (!(d > 0.0)) throw ValidationError("run_error_scaling: deltas must be positive");
        if (d * std::exp(max_lt) > 0.5) {
            std::ostringstream os;
            os << "run_error_scaling: delta = " << d << " leaves the small-data regime (delta e^{lambda t} > 0.5)";
            throw ValidationError(os.str());
        }
    }
    ErrorScalingResult out;
    out.dt = fixed_dt(prob, lam, cfg);
    out.fit_lambda_t = fit_lambda_t;
    std::vector<int> targets;
    for (double lt : lambda_t) {
        if (!(lt > 0.0)) throw ValidationError("run_error_scaling: lambda t values must be positive");
        targets.push_back(std::max(1, int(std::lround(lt / (lam * out.dt)))));
    }
    const int nsteps = *std::max_element(targets.begin(), targets.end());

    // discrete linear reference, delta = 1
    std::vector<LinearState> ref(targets.size());
    {
        LinearStepper ls(prob, out.dt);
        LinearState l(prob.grid());
        l.rho_pert = seed.rho0;
        l.vel = seed.u0;
        l.pressure = seed.q0;
        for (int n = 1; n <= nsteps; ++n) {
            l = ls.step(l);
            for (std::size_t k = 0; k < targets.size(); ++k)
                if (targets[k] == n) ref[k] = l;
        }
    }

    const int nd = int(deltas.size());
    std::vector<std::vector<ErrorScalingRow>> per(nd);
    parallel_indices(nd, lab_threads(cfg), [&](int i) {
        const double d = deltas[i];
        NonlinearSolver ns(prob, cfg.nonlinear);
        State s = scaled_state(seed, d);
        std::vector<ErrorScalingRow> rows(targets.size());
        for (std::size_t k = 0; k < targets.size(); ++k) {
            rows[k].delta = d;
            rows[k].failed = true;
        }
        try {
            for (int n = 1; n <= nsteps; ++n) {
                s = ns.step(s, out.dt).first;
                for (std::size_t k = 0; k < targets.size(); ++k) {
                    if (targets[k] != n) continue;
                    ScalarField dr = s.rho_pert;
                    axpy(-d, ref[k].rho_pert.v, dr.v);
                    VelocityField du = s.vel;
                    axpy(-d, ref[k].vel.data, du.data);
                    ErrorScalingRow& r = rows[k];
                    r.t = s.t;
                    r.lambda_t = lam * s.t;
                    r.err = l2_pair(dr, du);
                    r.bound_ratio = r.err / (std::pow(d, 1.5) * std::exp(1.5 * lam * s.t));
                    r.failed = false;
                }
            }
        } catch (const NumericalError&) {
        }
        per[i] = std::move(rows);
    });

    std::size_t kfit = 0;
    for (std::size_t k = 0; k < lambda_t.size(); ++k)
        if (std::abs(lambda_t[k] - fit_lambda_t) < std::abs(lambda_t[kfit] - fit_lambda_t)) kfit = k;
    std::vector<double> lx, ly;
    double peak_max = 0.0, peak_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nd; ++i) {
        double peak = 0.0;
        for (const auto& r : per[i]) {
            out.rows.push_back(r);
            if (!r.failed) {
                peak = std::max(peak, r.bound_ratio);
                out.fitted_c = std::max(out.fitted_c, r.bound_ratio);
            }
        }
        peak_max = std::max(peak_max, peak);
        peak_min = std::min(peak_min, peak);
        const auto& r = per[i][kfit];
        if (!r.failed && r.err > 0.0) {
            lx.push_back(std::log(r.delta));
            ly.push_back(std::log(r.err));
        }
    }
    out.fitted_exponent = lx.size() >= 2 ? regression_slope(lx, ly) : std::numeric_limits<double>::quiet_NaN();
    out.bound_ratio_spread = peak_min > 0.0 ? peak_max / peak_min : std::numeric_limits<double>::infinity();
    return out;
}

double choose_epsilon0(double fitted_c) {
    return 0.05 / std::max(1.0, fitted_c);
}

EscapeTimeResult run_escape_time(const VariationalProblem& prob, const GrowthRateResult& result,
                                 const SeedData& seed, std::vector<double> deltas, double epsilon0,
                                 const LabConfig& cfg) {
    if (!(result.lambda > 0.0)) throw ValidationError("run_escape_time: no unstable mode");
    if (!(epsilon0 > 0.0)) throw ValidationError("run_escape_time: epsilon0 must be positive");
    if (deltas.size() < 2) throw ValidationError("run_escape_time: need at least two deltas");
    std::sort(deltas.begin(), deltas.end(), std::greater<>());
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] > 0.0)) throw ValidationError("run_escape_time: deltas must be positive");
        if (i > 0 && deltas[i] == deltas[i - 1]) throw ValidationError("run_escape_time: deltas must be distinct");
        if (deltas[i] >= 2.0 * epsilon0) throw ValidationError("run_escape_time: every delta must be below 2 epsilon0");
    }
    const double lam = result.lambda;
    EscapeTimeResult out;
    out.epsilon0 = epsilon0;
    out.epsilon = seed.m0 * epsilon0;
    out.inverse_lambda = 1.0 / lam;
    out.dt = fixed_dt(prob, lam, cfg);
    const double eps = out.epsilon;

    const int nd = int(deltas.size());
    out.rows.resize(nd);
    parallel_indices(nd, lab_threads(cfg), [&](int i) {
        const double d = deltas[i];
        EscapeRow& row = out.rows[i];
        row.delta = d;
        row.t_predicted = std::log(2.0 * epsilon0 / d) / lam;
        NonlinearSolver ns(prob, cfg.nonlinear);
        State s = scaled_state(seed, d);
        auto prev = component_norms(s.rho_pert, s.vel);
        double t_prev = s.t;
        const double tmax = (std::log(epsilon0 / d) + 4.0) / lam;
        Recorder rec = [&](const State& st, const StepReport&) {
            const auto cur = component_norms(st.rho_pert, st.vel);
            if (l2_pair(st.rho_pert, st.vel) > 2.0 * d * seed.c2 * std::exp(lam * st.t)) row.bound_held = false;
            if (std::min({cur[0], cur[1], cur[2]}) >= eps) {
                // log-linear crossing time of each norm inside the last step; escape needs all three
                double te = t_prev;
                for (int c = 0; c < 3; ++c) {
                    if (prev[c] >= eps) continue;
                    const double a = std::log(prev[c] / eps), b = std::log(cur[c] / eps);
                    te = std::max(te, t_prev + (st.t - t_prev) * (-a) / (b - a));
                }
                row.escaped = true;
                row.t_measured = te;
                row.norms_at_escape = cur;
                row.energy_at_escape = energy_norm(st.rho_pert, st.vel);
                return false;
            }
            prev = cur;
            t_prev = st.t;
            return true;
        };
        const TrajectorySummary sum = run(ns, std::move(s), tmax, rec, out.dt);
        if (sum.failed) row.failure = sum.failure;
        else if (!row.escaped) row.failure = "no escape before t = " + std::to_string(tmax);
    });

    std::vector<double> x, y;
    for (const auto& r : out.rows)
        if (r.escaped) {
            x.push_back(std::log(1.0 / r.delta));
            y.push_back(r.t_measured);
        }
    out.slope = x.size() >= 2 ? regression_slope(x, y) : std::numeric_limits<double>::quiet_NaN();
    out.slope_ratio = out.slope * lam;
    return out;
}

HeadlineReport run_headline_case(const DensityProfile& profile, const Grid& grid, PhysicalParams params,
                                 const std::vector<double>& deltas, const LabConfig& cfg, EigenOptions eig) {
    HeadlineReport rep;
    rep.profile = profile.name();
    rep.min_drho = profile.min_drho();
    rep.max_drho = profile.max_drho();
    const VariationalProblem prob(profile, grid, params, eig);
    const GrowthRateResult res = solve_lambda(prob);
    rep.lambda = res.lambda;
    rep.stable = res.stable;
    rep.marginal = res.marginal;
    if (!(res.lambda > 0.0)) return rep;

    if (profile.max_drho() > 0.0) {
        const double H = grid.extent(grid.vertical());
        const auto lin = builtin_profile(ProfileKind::Linear, {{"a", profile.min_rho()}, {"b", profile.max_drho()}}, H);
        rep.lambda_linear_comparator = solve_lambda(VariationalProblem(lin, grid, params, eig)).lambda;
    }

    const SeedData seed = build_seed(res, prob);
    std::vector<double> pilot;
    for (double d : deltas)
        if (d * std::exp(1.0) <= 0.5) pilot.push_back(d);
    std::sort(pilot.begin(), pilot.end());
    if (pilot.size() > 3) pilot.erase(pilot.begin(), pilot.end() - 3);
    rep.error_scaling = run_error_scaling(prob, res, seed, pilot, {0.5, 1.0}, 1.0, cfg);
    const double eps0 = choose_epsilon0(rep.error_scaling->fitted_c);
    rep.escape = run_escape_time(prob, res, seed, deltas, eps0, cfg);
    return rep;
}

}  // namespace rtlab
