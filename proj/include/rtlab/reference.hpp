#pragma once

// Serial reference kernels: plain loops over flat arrays, no OpenMP.
// The stencil kernels in mesh_ops agree with these bit for bit; dot agrees to roundoff
// (the parallel version sums fixed blocks).

#include "rtlab/grid.hpp"

namespace rtlab::reference {

ScalarField divergence(const VelocityField& v);
VelocityField gradient(const ScalarField& phi);
/// Reflect closure: ghost value -v behind a wall.
VelocityField laplacian_dirichlet(const VelocityField& v);
/// Left-to-right sum.
double dot(std::span<const double> x, std::span<const double> y);

}  // namespace rtlab::reference
