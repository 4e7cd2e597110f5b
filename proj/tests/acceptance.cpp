// Acceptance checks 1-9. Prints one PASS/FAIL line per criterion and exits nonzero on any failure.
// Usage: acceptance [criterion numbers...]

#include "rtlab/instability_lab.hpp"
#include "rtlab/mesh_ops.hpp"
#include "rtlab/poisson.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace rtlab;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

DensityProfile profile(ProfileKind k, std::map<std::string, double> p = {}) { return builtin_profile(k, p, 1.0); }

Grid square(int n) { return Grid::make2d(n, n); }

Outcome oracle_equivalence() {
    Outcome o;
    double worst = 0.0;
    for (int n : {10, 12}) {
        const VariationalProblem prob(profile(ProfileKind::Linear), square(n), {});
        const double lam = solve_lambda(prob).lambda;
        for (double s : {0.0, 0.5 * lam, lam}) {
            const double a = alpha(prob, s).value;
            const double rel = std::abs(a - oracle_alpha_dense(prob, s)) / (1.0 + std::abs(a));
            worst = std::max(worst, rel);
        }
    }
    o.require(worst <= 1e-6, "|alpha - oracle| <= 1e-6 (1 + |alpha|)");
    o.detail << "max |alpha - oracle| / (1 + |alpha|) = " << worst << " over 10x10, 12x12 and s in {0, L/2, L}";
    return o;
}

Outcome fixed_point() {
    Outcome o;
    for (ProfileKind k : {ProfileKind::Linear, ProfileKind::TanhInterface, ProfileKind::LocalBump}) {
        const VariationalProblem prob(profile(k), square(32), {});
        const GrowthRateResult r = solve_lambda(prob);
        const double l2 = r.lambda * r.lambda;
        const double fp = std::abs(l2 - alpha(prob, r.lambda).value) / std::max(1.0, l2);
        o.require(r.lambda > 0.0, to_string(k) + " lambda > 0");
        o.require(fp <= 1e-8, to_string(k) + " fixed point");
        double prev = 0.0, worst_rise = 0.0;
        for (int i = 0; i < 5; ++i) {
            const double a = alpha(prob, 0.5 * i * r.lambda).value;
            if (i > 0) worst_rise = std::max(worst_rise, a - prev);
            prev = a;
        }
        o.require(worst_rise <= 1e-9, to_string(k) + " alpha nonincreasing");
        o.detail << to_string(k) << ": lambda " << r.lambda << ", |L^2 - alpha(L)| " << fp << ", max rise "
                 << worst_rise << "; ";
    }
    return o;
}

Outcome eigen_residual_refinement() {
    Outcome o;
    std::vector<double> res;
    for (int n : {16, 32, 64}) {
        const VariationalProblem prob(profile(ProfileKind::Linear), square(n), {});
        res.push_back(solve_lambda(prob).eigen_residual);
        o.detail << n << "^2: " << res.back() << "; ";
    }
    o.require(res[1] < res[0] && res[2] < res[1], "monotone decrease");
    return o;
}

Outcome linear_tracking() {
    Outcome o;
    const VariationalProblem prob(profile(ProfileKind::Linear), square(32), {});
    const GrowthRateResult r = solve_lambda(prob);
    const double lam = r.lambda;
    {
        const LinearStepper st(prob, 0.01 / lam);
        LinearState s = analytic_mode(r, prob, 0.0);
        std::vector<std::pair<double, double>> series{{0.0, linear_norm(s)}};
        for (int i = 0; i < 200; ++i) {
            s = st.step(s);
            series.emplace_back(s.t, linear_norm(s));
        }
        const double rate = measured_growth_rate(series);
        o.require(std::abs(rate / lam - 1.0) <= 0.02, "growth rate within 2%");
        o.detail << "measured / lambda = " << rate / lam << " (L dt = 0.01); ";
    }
    std::vector<double> dev;
    for (int n : {100, 200, 400}) {
        const LinearStepper st(prob, 1.0 / lam / n);
        LinearState s = analytic_mode(r, prob, 0.0);
        for (int i = 0; i < n; ++i) s = st.step(s);
        dev.push_back(linear_distance(s, analytic_mode(r, prob, 1.0 / lam)));
    }
    const double p1 = std::log2(dev[0] / dev[1]), p2 = std::log2(dev[1] / dev[2]);
    o.require(std::min(p1, p2) >= 1.0 - 0.05, "deviation order >= 1");
    o.detail << "deviation at L t = 1: " << dev[0] << ", " << dev[1] << ", " << dev[2] << ", orders " << p1 << ", "
             << p2;
    return o;
}

Outcome sharpness() {
    Outcome o;
    const VariationalProblem prob(profile(ProfileKind::Linear), square(32), {});
    const GrowthRateResult r = solve_lambda(prob);
    const double lam = r.lambda;
    const LinearStepper st(prob, 0.01 / lam);
    const double vnorm = std::sqrt(prob.mass_inner(r.eigenfield, r.eigenfield));
    SolverOptions so;
    so.tol = 1e-13;
    double lo = 1e300, hi = 0.0;
    int aligned = 0;
    for (unsigned seed = 1; seed <= 10; ++seed) {
        LinearState s(prob.grid());
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> d;
        VelocityField w(prob.grid());
        for (double& x : w.data) x = d(rng);
        w.clear_boundary();
        s.vel = leray_project(w, so);
        const double n0 = std::sqrt(prob.mass_inner(s.vel, s.vel));
        for (double& x : s.vel.data) x /= n0;
        const double proj = std::abs(prob.mass_inner(s.vel, r.eigenfield)) / vnorm;
        std::vector<std::pair<double, double>> series;
        for (int i = 1; i <= 10000; ++i) {
            s = st.step(s);
            if (i % 50 == 0) series.emplace_back(s.t, linear_norm(s));
        }
        const double rate = measured_growth_rate(series) / lam;
        if (proj > 1e-6) {
            ++aligned;
            o.require(rate >= 0.98 && rate <= 1.02, "seed " + std::to_string(seed) + " rate in [0.98, 1.02] lambda");
        } else {
            o.require(rate <= 1.02, "seed " + std::to_string(seed) + " rate <= 1.02 lambda");
        }
        lo = std::min(lo, rate);
        hi = std::max(hi, rate);
    }
    o.detail << "10 fields, " << aligned << " with projection > 1e-6; measured / lambda over L t in [50, 100] in [" << lo
             << ", " << hi << "]";
    return o;
}

Outcome nonlinear_invariants() {
    Outcome o;
    {
        const VariationalProblem prob(profile(ProfileKind::Linear), square(32), {});
        const NonlinearSolver solver(prob);
        State s(prob.grid());
        for (int i = 0; i < 1000; ++i) s = solver.step(s, 0.01).first;
        o.require(norm_l2(s.vel) <= 1e-12, "equilibrium preserved");
        o.detail << "rest after 1000 steps |u| = " << norm_l2(s.vel) << "; ";
    }
    const VariationalProblem prob(profile(ProfileKind::LocalBump), square(32), {});
    const GrowthRateResult r = solve_lambda(prob);
    const SeedData seed = build_seed(r, prob);
    const NonlinearSolver solver(prob);
    {
        const State s0 = scaled_state(seed, 0.05);
        const auto [lo, hi] = reconstruction_range(s0.rho_pert, prob.rho());
        double viol = 0.0, div = 0.0;
        const auto sum = run(solver, s0, 3.0 / r.lambda, [&](const State&, const StepReport& rep) {
            viol = std::max({viol, lo - rep.rho_min, rep.rho_max - hi});
            div = std::max(div, rep.divergence_residual);
            return true;
        }, 0.005 / r.lambda);
        o.require(!sum.failed, "trajectory completed");
        o.require(viol <= 1e-9, "density min/max principle");
        o.require(div <= 1e-8, "divergence residual");
        o.detail << "local_bump delta 0.05 to L t = 3: extremum violation " << std::max(viol, 0.0)
                 << ", max divergence " << div << "; ";
    }
    auto residual = [&](double dt) {
        State s = scaled_state(seed, 1e-2);
        double worst = 0.0;
        const int n = int(std::lround(0.5 / r.lambda / dt));
        for (int i = 0; i < n; ++i) {
            const State b = solver.step(s, dt).first;
            worst = std::max(worst, energy_balance_residual(s, b, dt, prob));
            s = b;
        }
        return worst;
    };
    const double dt = 0.01 / r.lambda;
    const double ratio = residual(dt) / residual(0.5 * dt);
    o.require(ratio >= 1.6 && ratio <= 2.4, "energy residual halving ratio in [1.6, 2.4]");
    o.detail << "energy residual dt-halving ratio " << ratio;
    return o;
}

LabConfig lab() { return LabConfig{}; }

Outcome error_scaling() {
    Outcome o;
    const VariationalProblem prob(profile(ProfileKind::Linear), square(64), {});
    const GrowthRateResult r = solve_lambda(prob);
    const SeedData seed = build_seed(r, prob);
    const auto es = run_error_scaling(prob, r, seed, {1e-4, 3e-4, 1e-3}, {1.0}, 1.0, lab());
    o.require(es.fitted_exponent >= 1.4, "fitted exponent >= 1.4");
    o.require(es.bound_ratio_spread < 10.0, "bound ratio spread < 10");
    o.detail << "64^2 linear profile, L t = 1: p = " << es.fitted_exponent << ", bound ratio spread "
             << es.bound_ratio_spread << ", fitted C " << es.fitted_c << ", errors";
    for (const auto& row : es.rows) o.detail << " " << row.err;
    return o;
}

void describe_escape(Outcome& o, const EscapeTimeResult& et, double tol) {
    bool all = true, above = true;
    for (const auto& row : et.rows) {
        all = all && row.escaped;
        for (double n : row.norms_at_escape) above = above && n >= et.epsilon;
    }
    o.require(all, "every delta escapes");
    o.require(above, "all three norms >= epsilon at escape");
    o.require(std::abs(et.slope_ratio - 1.0) <= tol, "slope within tolerance of 1/lambda");
    o.detail << "slope " << et.slope << " vs 1/lambda " << et.inverse_lambda << " (ratio " << et.slope_ratio
             << "), eps0 " << et.epsilon0 << ", eps " << et.epsilon;
}

Outcome escape_time() {
    Outcome o;
    const auto rep = run_headline_case(profile(ProfileKind::Linear), square(32), {}, {1e-5, 3e-5, 1e-4, 3e-4, 1e-3},
                                       lab());
    o.require(rep.escape.has_value(), "escape experiment ran");
    if (rep.escape) describe_escape(o, *rep.escape, 0.05);
    o.detail << "; 32^2 linear profile, lambda " << rep.lambda;
    return o;
}

Outcome headline() {
    Outcome o;
    const std::vector<double> deltas{1e-5, 3e-5, 1e-4, 3e-4, 1e-3};
    const auto bump = profile(ProfileKind::LocalBump);
    o.require(bump.min_drho() < 0.0 && bump.has_rising_density(), "bump violates the gradient bound, density rises");
    const auto rep = run_headline_case(bump, square(32), {}, deltas, lab());
    o.require(rep.lambda > 0.0, "lambda > 0 on local_bump");
    o.require(rep.lambda < rep.lambda_linear_comparator, "below the dominating linear profile");
    o.detail << "local_bump inf rho' = " << rep.min_drho << ", lambda " << rep.lambda << " (comparator "
             << rep.lambda_linear_comparator << "), ";
    if (rep.escape) describe_escape(o, *rep.escape, 0.10);
    else o.require(false, "escape experiment ran");
    const auto st = run_headline_case(profile(ProfileKind::Stable), square(32), {}, deltas, lab());
    o.require(st.stable && st.lambda == 0.0 && !st.escape, "stable profile: lambda = 0, no escape");
    o.detail << "; stable profile lambda " << st.lambda << (st.escape ? ", escape ran" : ", no escape");
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle equivalence", oracle_equivalence},
        {"fixed-point contract", fixed_point},
        {"eigen-residual refinement", eigen_residual_refinement},
        {"linear mode tracking", linear_tracking},
        {"sharpness of lambda", sharpness},
        {"nonlinear solver invariants", nonlinear_invariants},
        {"error-scaling law", error_scaling},
        {"escape-time law", escape_time},
        {"headline: no gradient lower bound", headline},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = int(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %d %s: %s (%.1f s) %s\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(), secs,
                    o.detail.str().c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
