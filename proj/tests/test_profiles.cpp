#include "rtlab/profiles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace rtlab;

namespace {

double central(const DensityProfile& p, double z, double h = 1e-5) {
    return (p.rho(z + h) - p.rho(z - h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("linear profile") {
    const auto p = builtin_profile(ProfileKind::Linear, {{"a", 1.0}, {"b", 1.0}}, 1.0);
    CHECK(p.rho(0.5) == doctest::Approx(1.5));
    CHECK(p.drho(0.1) == doctest::Approx(1.0));
    CHECK(p.drho(0.9) == doctest::Approx(1.0));
    CHECK(p.has_rising_density());
    CHECK(p.has_positive_gradient_bound());
}

TEST_CASE("stable profile has no rising density") {
    const auto p = builtin_profile(ProfileKind::Stable, {{"a", 2.0}, {"b", 1.0}}, 1.0);
    CHECK(p.rho(0.25) == doctest::Approx(1.75));
    CHECK_FALSE(p.has_rising_density());
}

TEST_CASE("local bump rises locally and falls elsewhere") {
    const auto p = builtin_profile(ProfileKind::LocalBump, {}, 1.0);
    CHECK(p.has_rising_density());
    CHECK_FALSE(p.has_positive_gradient_bound());
    CHECK(p.min_drho() < 0.0);
    CHECK(p.drho(0.05) < 0.0);
    CHECK(p.drho(0.95) < 0.0);
    CHECK(p.drho(0.5) > 0.0);
    CHECK(p.max_rho() / p.min_rho() <= 3.0);
}

TEST_CASE("derivatives agree with central differences") {
    for (ProfileKind k : {ProfileKind::Linear, ProfileKind::TanhInterface, ProfileKind::LocalBump, ProfileKind::Stable}) {
        const auto p = builtin_profile(k, {}, 1.0);
        for (double z = 0.01; z < 1.0; z += 0.037) CHECK(p.drho(z) == doctest::Approx(central(p, z)).epsilon(1e-6));
    }
}

TEST_CASE("local bump second derivative is bounded across the patch joins") {
    const auto p = builtin_profile(ProfileKind::LocalBump, {}, 1.0);
    double worst = 0.0;
    const double h = 1e-4;
    for (double z = 2 * h; z < 1.0 - 2 * h; z += 1e-3) {
        const double d3 = (p.rho(z + 2 * h) - 2 * p.rho(z + h) + 2 * p.rho(z - h) - p.rho(z - 2 * h)) / (2 * h * h * h);
        worst = std::max(worst, std::abs(d3));
    }
    CHECK(std::isfinite(worst));
    CHECK(worst < 1e4);
}

TEST_CASE("samples are exact for the linear profile") {
    const auto p = builtin_profile(ProfileKind::Linear, {{"a", 1.0}, {"b", 2.0}}, 1.0);
    const Grid g = Grid::make2d(4, 8);
    const auto [rho, drho] = sample_profile(p, g);
    for (int j = 0; j < 8; ++j) {
        CHECK(rho(2, j) == doctest::Approx(1.0 + 2.0 * (j + 0.5) / 8.0));
        CHECK(drho(1, j) == doctest::Approx(2.0));
    }
}

TEST_CASE("constant profile samples a zero derivative") {
    const auto p = builtin_profile(ProfileKind::Linear, {{"a", 1.3}, {"b", 0.0}}, 1.0);
    const auto [rho, drho] = sample_profile(p, Grid::make2d(4, 6));
    for (double d : drho.v) CHECK(d == 0.0);
    CHECK_FALSE(p.has_rising_density());
}

TEST_CASE("sampled derivative matches differences of samples to second order") {
    const auto p = builtin_profile(ProfileKind::TanhInterface, {}, 1.0);
    auto err = [&](int n) {
        const auto [rho, drho] = sample_profile(p, Grid::make2d(4, n));
        double e = 0.0;
        for (int j = 1; j + 1 < n; ++j)
            e = std::max(e, std::abs((rho(0, j + 1) - rho(0, j - 1)) * n / 2.0 - drho(0, j)));
        return e;
    };
    const double ratio = err(32) / err(64);
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("positive density on fine columns") {
    for (ProfileKind k : {ProfileKind::Linear, ProfileKind::TanhInterface, ProfileKind::LocalBump, ProfileKind::Stable}) {
        const auto p = builtin_profile(k, {}, 1.0);
        const auto [rho, drho] = sample_profile(p, Grid::make2d(4, 4096));
        for (double r : rho.v) REQUIRE(r > 0.0);
    }
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(builtin_profile(ProfileKind::Linear, {{"a", -3.0}, {"b", 1.0}}, 1.0), ValidationError);
    CHECK_THROWS_AS(builtin_profile(ProfileKind::Linear, {{"slope", 1.0}}, 1.0), ValidationError);
    CHECK_THROWS_AS(profile_kind_from_string("wobbly"), ValidationError);
    try {
        profile_kind_from_string("wobbly");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("local_bump") != std::string::npos);
    }
    PhysicalParams bad;
    bad.mu = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("tabulated profile from CSV") {
    const auto path = std::filesystem::temp_directory_path() / "rtlab_profile.csv";
    {
        std::ofstream f(path);
        f << "z,rho\n";
        for (int i = 0; i <= 40; ++i) {
            const double z = i / 40.0;
            f << z << "," << 1.0 + z + 0.1 * std::sin(3 * z) << "\n";
        }
    }
    const auto p = tabulated_profile(path, 1.0);
    CHECK(p.c2_between_knots_only());
    CHECK(p.rho(0.33) == doctest::Approx(1.33 + 0.1 * std::sin(0.99)).epsilon(1e-5));
    CHECK(p.drho(0.5) == doctest::Approx(1.0 + 0.3 * std::cos(1.5)).epsilon(1e-3));
    CHECK(p.has_rising_density());
    std::filesystem::remove(path);
}

TEST_CASE("cubic spline reproduces a cubic between interior knots") {
    std::vector<double> x, y;
    for (int i = 0; i <= 10; ++i) {
        x.push_back(i * 0.1);
        y.push_back(2.0 + 0.5 * x.back());
    }
    const CubicSpline s(x, y);
    CHECK(s(0.437) == doctest::Approx(2.2185));
    CHECK(s.derivative(0.61) == doctest::Approx(0.5));
}
