#pragma once

// Discrete differential operators and norms on the MAC grid.
//
// All inner products carry the cell volume, so that
//   <gradient(phi), v> = -<phi, divergence(v)>
// holds exactly for every v with zero boundary-normal faces.

#include "rtlab/grid.hpp"

namespace rtlab {

ScalarField divergence(const VelocityField& v);

/// Face-normal differences on interior faces; boundary-normal faces are zero.
VelocityField gradient(const ScalarField& phi);

/// Same as gradient() but multiplied face-wise by coeff (interior faces only).
VelocityField weighted_gradient(const ScalarField& phi, const FaceField& coeff);

/// Wall treatment for tangential neighbours outside the box.
enum class WallClosure {
    Reflect,    ///< ghost = -v (second-order for the wall value, the solver operator)
    Quadratic,  ///< ghost = -2 v0 + v1 / 3 (quadratic through the zero wall value)
};

/// Component-wise (2d+1)-point Laplacian with u = 0 on the walls.
/// Boundary-normal faces of the result are zero.
VelocityField laplacian_dirichlet(const VelocityField& v, WallClosure closure = WallClosure::Reflect);

/// Laplacian of a single component array (same layout as FaceField::comp(a)).
void laplacian_component(const Grid& g, int a, std::span<const double> in, std::span<double> out);

/// Cell-to-face arithmetic average. Boundary faces copy the adjacent cell value.
FaceField face_average(const ScalarField& s);

/// Cell-to-face harmonic average. Boundary faces copy the adjacent cell value.
FaceField face_harmonic_average(const ScalarField& s);

/// Average of the two faces of component a bounding each cell.
ScalarField cell_average(const VelocityField& v, int a);

/// Interpolates a cell field onto interior faces of component a (boundary faces zero).
void cell_to_faces(const ScalarField& s, int a, std::span<double> out);

double inner(const ScalarField& f, const ScalarField& g);
double inner(const VelocityField& u, const VelocityField& v);

/// Sum over cells of weight * f * g * volume.
double weighted_inner(const ScalarField& f, const ScalarField& g, const ScalarField& weight);
/// Velocity version: the cell-centered weight is averaged onto faces.
double weighted_inner(const VelocityField& u, const VelocityField& v, const ScalarField& weight);
/// Velocity version with face-sampled weight.
double weighted_inner(const VelocityField& u, const VelocityField& v, const FaceField& weight);

double norm_l2(const ScalarField& f);
double norm_l2(const VelocityField& u);
double norm_l2(std::span<const double> values, const Grid& g);

/// Squared Dirichlet seminorm -<laplacian(u), u>, i.e. the discrete integral of |grad u|^2.
double grad_norm_sq(const VelocityField& u);

/// H1 norms. Scalars use interior face differences (no boundary data); velocities use the
/// no-slip seminorm grad_norm_sq.
double norm_h1(const ScalarField& f);
double norm_h1(const VelocityField& u);

/// H2 norms: the H1 norm plus all undivided second differences scaled by 1/h^2, with
/// one-sided stencils at the array ends. Velocity components are treated as plain arrays.
double norm_h2(const ScalarField& f);
double norm_h2(const VelocityField& u);

}  // namespace rtlab
