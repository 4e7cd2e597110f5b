#include "rtlab/growth_rate.hpp"
#include "rtlab/mesh_ops.hpp"

#include <doctest.h>

#include <cmath>

using namespace rtlab;

namespace {

DensityProfile linear() { return builtin_profile(ProfileKind::Linear, {}, 1.0); }

}  // namespace

TEST_CASE("alpha matches the dense oracle") {
    const VariationalProblem prob(linear(), Grid::make2d(10, 10), {});
    for (double s : {0.0, 0.3, 0.6}) {
        const double a = alpha(prob, s).value;
        CHECK(std::abs(a - oracle_alpha_dense(prob, s)) <= 1e-9 * (1.0 + std::abs(a)));
    }
}

TEST_CASE("alpha matches the oracle on a curved profile and a non-square box") {
    const auto p = builtin_profile(ProfileKind::LocalBump, {}, 0.8);
    const VariationalProblem prob(p, Grid::make2d(12, 8, 1.2, 0.8), {0.02, 1.5});
    const double a = alpha(prob, 0.4).value;
    CHECK(std::abs(a - oracle_alpha_dense(prob, 0.4)) <= 1e-9 * (1.0 + std::abs(a)));
}

TEST_CASE("maximizer is divergence free, no-slip and attains alpha") {
    const VariationalProblem prob(linear(), Grid::make2d(16, 16), {});
    const AlphaResult r = alpha(prob, 0.2);
    CHECK(r.maximizer.is_no_slip());
    CHECK(norm_l2(divergence(r.maximizer)) < 1e-10);
    CHECK(prob.mass_inner(r.maximizer, r.maximizer) == doctest::Approx(1.0));
    CHECK(prob.rayleigh_quotient(r.maximizer, 0.2) == doctest::Approx(r.value).epsilon(1e-9));
    CHECK(prob.rayleigh_quotient(prob.project(prob.seed_field()), 0.2) <= r.value + 1e-12);
}

TEST_CASE("alpha is nonincreasing in s and bounded by the buoyancy ratio") {
    const VariationalProblem prob(linear(), Grid::make2d(12, 12), {});
    double prev = alpha(prob, 0.0).value;
    CHECK(prev <= 1.0 * 1.0 / 1.0 + 1e-12);
    for (double s : {0.25, 0.5, 1.0, 2.0}) {
        const double a = alpha(prob, s).value;
        CHECK(a <= prev + 1e-9);
        prev = a;
    }
}

TEST_CASE("growth rate is the fixed point of alpha") {
    const VariationalProblem prob(linear(), Grid::make2d(16, 16), {});
    const GrowthRateResult r = solve_lambda(prob);
    CHECK(r.lambda > 0.0);
    CHECK_FALSE(r.stable);
    CHECK(std::abs(r.lambda * r.lambda - r.alpha_at_lambda) <= 1e-8 * std::max(1.0, r.lambda * r.lambda));
    CHECK(std::abs(r.lambda * r.lambda - alpha(prob, r.lambda).value) <= 1e-8);
    CHECK(r.lambda < std::sqrt(alpha(prob, 0.0).value));
}

TEST_CASE("stronger viscosity slows the growth") {
    const Grid g = Grid::make2d(12, 12);
    const double a = solve_lambda(VariationalProblem(linear(), g, {0.01, 1.0})).lambda;
    const double b = solve_lambda(VariationalProblem(linear(), g, {0.05, 1.0})).lambda;
    CHECK(b < a);
}

TEST_CASE("stable and constant profiles have no growth") {
    const Grid g = Grid::make2d(12, 12);
    const auto st = solve_lambda(VariationalProblem(builtin_profile(ProfileKind::Stable, {}, 1.0), g, {}));
    CHECK(st.lambda == 0.0);
    CHECK(st.stable);
    const auto flat = builtin_profile(ProfileKind::Linear, {{"a", 1.0}, {"b", 0.0}}, 1.0);
    const auto c = solve_lambda(VariationalProblem(flat, g, {}));
    CHECK(c.lambda == 0.0);
    CHECK(c.stable);
}

TEST_CASE("discrete eigenpair satisfies the boundary problem with the solver closure") {
    const VariationalProblem prob(linear(), Grid::make2d(16, 16), {});
    const GrowthRateResult r = solve_lambda(prob);
    CHECK(boundary_problem_residual(prob, r.lambda, r.eigenfield, nullptr, WallClosure::Reflect) < 1e-7);
    CHECK(r.eigen_residual > 0.0);
    CHECK(r.eigen_residual < 0.2);
}

TEST_CASE("dense oracle refuses large problems") {
    const VariationalProblem prob(linear(), Grid::make2d(40, 40), {});
    CHECK_THROWS_AS(oracle_alpha_dense(prob, 0.0), ValidationError);
}
