#pragma once

#include "rtlab/grid.hpp"

#include <random>

namespace testutil {

inline rtlab::ScalarField random_scalar(const rtlab::Grid& g, unsigned seed) {
    rtlab::ScalarField f(g);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (double& x : f.v) x = d(rng);
    return f;
}

inline rtlab::VelocityField random_velocity(const rtlab::Grid& g, unsigned seed) {
    rtlab::VelocityField u(g);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (double& x : u.data) x = d(rng);
    u.clear_boundary();
    return u;
}

inline rtlab::Grid grid3(int n, int m, int k) {
    const int c[3] = {n, m, k};
    const double L[3] = {1.0, 0.7, 1.3};
    return rtlab::Grid::make(3, c, L);
}

}  // namespace testutil
