#include "rtlab/nonlinear_dynamics.hpp"
#include "rtlab/mesh_ops.hpp"
#include "rtlab/poisson.hpp"
#include "util.hpp"

#include <doctest.h>

#include <cmath>

using namespace rtlab;

namespace {

VelocityField solenoidal(const Grid& g, unsigned seed, double scale) {
    SolverOptions o;
    o.tol = 1e-13;
    VelocityField u = leray_project(testutil::random_velocity(g, seed), o);
    const double n = norm_l2(u);
    for (double& x : u.data) x *= scale / n;
    return u;
}

double max_abs(const VelocityField& u) {
    double m = 0.0;
    for (double x : u.data) m = std::max(m, std::abs(x));
    return m;
}

// Curl of a nodal stream function vanishing on the walls: discretely divergence free.
VelocityField from_stream(const Grid& g, unsigned seed) {
    const int nx = g.n(0), nz = g.n(1);
    std::vector<double> psi(std::size_t(nx + 1) * (nz + 1), 0.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-0.02, 0.02);
    for (int j = 1; j < nz; ++j)
        for (int i = 1; i < nx; ++i) psi[std::size_t(j) * (nx + 1) + i] = d(rng);
    auto at = [&](int i, int j) { return psi[std::size_t(j) * (nx + 1) + i]; };
    VelocityField u(g);
    for (int j = 0; j < nz; ++j)
        for (int i = 0; i <= nx; ++i) u.at(0, i, j) = (at(i, j + 1) - at(i, j)) / g.h(1);
    for (int j = 0; j <= nz; ++j)
        for (int i = 0; i < nx; ++i) u.at(1, i, j) = -(at(i + 1, j) - at(i, j)) / g.h(0);
    return u;
}

struct Fixture {
    VariationalProblem prob{builtin_profile(ProfileKind::Linear, {}, 1.0), Grid::make2d(16, 16), {}};
    GrowthRateResult res = solve_lambda(prob);
    NonlinearSolver solver{prob};
};

const Fixture& fx() {
    static const Fixture f;
    return f;
}

}  // namespace

TEST_CASE("no velocity, no transport") {
    const Grid g = Grid::make2d(10, 10);
    const auto rho = testutil::random_scalar(g, 1);
    const auto [bar, d] = sample_profile(builtin_profile(ProfileKind::Linear, {}, 1.0), g);
    const ScalarField out = advect_density(rho, VelocityField(g), bar, 0.1);
    CHECK(out.v == rho.v);
}

TEST_CASE("uniform total density stays uniform") {
    const Grid g = Grid::make2d(16, 16);
    const auto [bar, d] = sample_profile(builtin_profile(ProfileKind::LocalBump, {}, 1.0), g);
    ScalarField pert(g);
    for (std::size_t i = 0; i < pert.v.size(); ++i) pert.v[i] = 2.0 - bar.v[i];
    const VelocityField u = from_stream(g, 2);
    CHECK(u.is_no_slip());
    const double dt = 0.4 * g.min_h() / max_abs(u);
    for (int n = 0; n < 20; ++n) pert = advect_density(pert, u, bar, dt);
    double worst = 0.0;
    for (std::size_t i = 0; i < pert.v.size(); ++i) worst = std::max(worst, std::abs(pert.v[i] + bar.v[i] - 2.0));
    CHECK(worst < 1e-13);
}

TEST_CASE("density obeys the min/max principle") {
    const Grid g = Grid::make2d(24, 24);
    const auto [bar, d] = sample_profile(builtin_profile(ProfileKind::LocalBump, {}, 1.0), g);
    ScalarField pert = testutil::random_scalar(g, 3);
    for (double& x : pert.v) x *= 0.3;
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < pert.v.size(); ++i) {
        lo = std::min(lo, pert.v[i] + bar.v[i]);
        hi = std::max(hi, pert.v[i] + bar.v[i]);
    }
    for (int n = 0; n < 100; ++n) {
        const VelocityField u = solenoidal(g, 100 + n, 1.0);
        int sub = 0;
        pert = advect_density(pert, u, bar, 0.45 * g.min_h() / max_abs(u), 0.5, &sub, {lo, hi});
        CHECK(sub >= 1);
    }
    for (std::size_t i = 0; i < pert.v.size(); ++i) {
        CHECK(pert.v[i] + bar.v[i] >= lo - 1e-12);
        CHECK(pert.v[i] + bar.v[i] <= hi + 1e-12);
    }
}

TEST_CASE("reconstruction range covers the cells and is exact for the linear profile") {
    const Grid g = Grid::make2d(16, 16);
    const auto [bar, d] = sample_profile(builtin_profile(ProfileKind::Linear, {}, 1.0), g);
    const auto [lo, hi] = reconstruction_range(ScalarField(g), bar);
    CHECK(lo == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hi == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("Courant number above the limit is refused") {
    const Grid g = Grid::make2d(8, 8);
    const auto [bar, d] = sample_profile(builtin_profile(ProfileKind::Linear, {}, 1.0), g);
    const VelocityField u = solenoidal(g, 4, 1.0);
    CHECK_THROWS_AS(advect_density(ScalarField(g), u, bar, 0.6 * g.min_h() / max_abs(u)), NumericalError);
}

TEST_CASE("steady state is a discrete fixed point") {
    const auto& f = fx();
    State s(f.prob.grid());
    for (int n = 0; n < 100; ++n) s = f.solver.step(s, 0.01).first;
    CHECK(norm_l2(s.vel) == 0.0);
    CHECK(norm_l2(s.rho_pert) == 0.0);
}

TEST_CASE("one step linearizes to the linear step") {
    const auto& f = fx();
    const LinearState m = analytic_mode(f.res, f.prob, 0.0);
    const double dt = 0.01;
    const LinearState lin = step_linear(m, dt, f.prob);
    auto diff = [&](double delta) {
        LinearState ls = m;
        for (double& x : ls.rho_pert.v) x *= delta;
        for (double& x : ls.vel.data) x *= delta;
        for (double& x : ls.pressure.v) x *= delta;
        const State out = f.solver.step(State::from_linear(ls), dt).first;
        LinearState ref = lin;
        for (double& x : ref.rho_pert.v) x *= delta;
        for (double& x : ref.vel.data) x *= delta;
        LinearState got(f.prob.grid());
        got.rho_pert = out.rho_pert;
        got.vel = out.vel;
        return linear_distance(got, ref);
    };
    const double a = diff(2e-6), b = diff(1e-6);
    CHECK(b < 1e-10);
    CHECK(a / b == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("each step is divergence free") {
    const auto& f = fx();
    State s = State::from_linear(analytic_mode(f.res, f.prob, 0.0));
    for (double& x : s.vel.data) x *= 1e-2;
    for (double& x : s.rho_pert.v) x *= 1e-2;
    for (double& x : s.pressure.v) x *= 1e-2;
    for (int n = 0; n < 10; ++n) {
        const auto [next, rep] = f.solver.step(s, 0.01);
        CHECK(rep.divergence_residual <= 1e-8);
        CHECK(rep.pressure_iterations > 0);
        s = next;
    }
}

TEST_CASE("overdamped motion decays monotonically") {
    const Grid g = Grid::make2d(16, 16);
    const VariationalProblem prob(ScalarField(g, 1.0), ScalarField(g, 0.0), {1.0, 1.0});
    const NonlinearSolver solver(prob);
    State s(g);
    s.vel = solenoidal(g, 5, 0.1);
    const double dt = 0.5 * solver.dt_cap();
    double prev = norm_l2(s.vel);
    for (int n = 0; n < 30; ++n) {
        s = solver.step(s, dt).first;
        const double now = norm_l2(s.vel);
        CHECK(now < prev);
        prev = now;
    }
}

TEST_CASE("energy balance") {
    const auto& f = fx();
    State z(f.prob.grid());
    CHECK(energy_balance_residual(z, z, 0.01, f.prob) == 0.0);

    State s = State::from_linear(analytic_mode(f.res, f.prob, 0.0));
    for (double& x : s.vel.data) x *= 1e-3;
    for (double& x : s.rho_pert.v) x *= 1e-3;
    for (double& x : s.pressure.v) x *= 1e-3;
    auto residual = [&](double dt) {
        State a = s;
        double worst = 0.0;
        const int n = int(std::lround(0.2 / dt));
        for (int i = 0; i < n; ++i) {
            const State b = f.solver.step(a, dt).first;
            worst = std::max(worst, energy_balance_residual(a, b, dt, f.prob));
            a = b;
        }
        return worst;
    };
    const double r1 = residual(0.02), r2 = residual(0.01);
    CHECK(r1 / r2 >= 1.6);
    CHECK(r1 / r2 <= 2.4);
}

TEST_CASE("pure diffusion dissipates at the viscous rate") {
    const Grid g = Grid::make2d(16, 16);
    const VariationalProblem prob(ScalarField(g, 1.0), ScalarField(g, 0.0), {0.05, 1.0});
    const NonlinearSolver solver(prob);
    State s(g);
    s.vel = solenoidal(g, 6, 1e-4);
    const double dt = 0.1 * solver.dt_cap();
    const State b = solver.step(s, dt).first;
    const ScalarField one(g, 1.0);
    const double rate = (kinetic_energy(one, b.vel) - kinetic_energy(one, s.vel)) / dt;
    CHECK(rate == doctest::Approx(-0.05 * grad_norm_sq(s.vel)).epsilon(0.05));
}

TEST_CASE("small data grow at the linear rate") {
    const auto& f = fx();
    State s = State::from_linear(analytic_mode(f.res, f.prob, 0.0));
    for (double& x : s.vel.data) x *= 1e-4;
    for (double& x : s.rho_pert.v) x *= 1e-4;
    for (double& x : s.pressure.v) x *= 1e-4;
    std::vector<std::pair<double, double>> series;
    const TrajectorySummary sum = run(f.solver, s, 2.0 / f.res.lambda, [&](const State& st, const StepReport&) {
        series.emplace_back(st.t, norm_l2(st.vel.comp(1), st.vel.grid));
        return true;
    }, 0.005 / f.res.lambda);
    CHECK_FALSE(sum.failed);
    CHECK(measured_growth_rate(series) == doctest::Approx(f.res.lambda).epsilon(0.03));
}

TEST_CASE("zero initial data give a zero trajectory") {
    const auto& f = fx();
    bool all_zero = true;
    const auto sum = run(f.solver, State(f.prob.grid()), 0.5, [&](const State& st, const StepReport&) {
        all_zero = all_zero && norm_l2(st.vel) == 0.0 && norm_l2(st.rho_pert) == 0.0;
        return true;
    }, 0.05);
    CHECK(all_zero);
    CHECK(sum.steps == 10);
    CHECK(sum.t_final == doctest::Approx(0.5));
}

TEST_CASE("run rejects inadmissible initial data") {
    const auto& f = fx();
    State s(f.prob.grid());
    s.vel = testutil::random_velocity(f.prob.grid(), 7);
    CHECK_THROWS_AS(run(f.solver, s, 0.1, {}), ValidationError);
}
