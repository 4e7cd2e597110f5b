#pragma once

// Growth rate of the Rayleigh-Taylor steady state by the modified variational method.
//
// For a penalty s >= 0,
//
//   alpha(s) = sup_w ( g <rho', w_d^2> - s mu |grad w|^2 ) / <rho, |w|^2>
//
// over discretely divergence-free, no-slip MAC fields w. The growth rate is the
// positive root of Lambda^2 = alpha(Lambda). The pencil is discretised as
//
//   A = g I^T diag(rho'_cell) I   (I: vertical faces -> cells, average)
//   B = -laplacian_dirichlet
//   M = diag(rho on faces)        (face average of the cell samples)
//
// which makes e^{Lambda t}(-rho' I v_d / Lambda, v) an exact solution of the
// semi-discrete linearized system for every eigenpair (Lambda, v).

#include "rtlab/poisson.hpp"
#include "rtlab/profiles.hpp"

#include <memory>

namespace rtlab {

struct EigenOptions {
    double residual_tol = 1e-9;   ///< Ritz residual relative to max(1, |theta|)
    int max_iterations = 20000;   ///< total operator applications per alpha evaluation
    int krylov_dim = 120;         ///< Lanczos basis size before an explicit restart
    double root_tol = 1e-10;      ///< bracket width relative to max(1, s_hi)
    double marginal = 1e-12;      ///< alpha(0) below this is reported as marginal
    std::uint64_t seed = 20240917;
};

class VariationalProblem {
public:
    VariationalProblem(const DensityProfile& profile, const Grid& grid, PhysicalParams params,
                       EigenOptions opts = {});
    /// From height-only cell samples (used for variants such as a constant density).
    VariationalProblem(ScalarField rho, ScalarField drho, PhysicalParams params, EigenOptions opts = {});

    const Grid& grid() const noexcept { return rho_.grid; }
    const ScalarField& rho() const noexcept { return rho_; }
    const ScalarField& drho() const noexcept { return drho_; }
    const FaceField& rho_face() const noexcept { return rho_face_; }
    const PhysicalParams& params() const noexcept { return params_; }
    const EigenOptions& options() const noexcept { return opts_; }
    bool rising() const noexcept { return rising_; }

    /// rho per cell row and per vertical face (height-only profiles for the separable solvers).
    const std::vector<double>& rho_rows() const noexcept { return rho_rows_; }
    const std::vector<double>& rho_vfaces() const noexcept { return rho_vfaces_; }

    /// Projection orthogonal in the rho-weighted inner product (coefficient 1/rho on faces).
    VelocityField project(const VelocityField& v) const;
    /// Direct solver for D((1/rho) G phi) = rhs.
    const PoissonSolver& projector() const noexcept { return *projector_; }
    /// Buoyancy part: A w, with the cell volume divided out.
    VelocityField buoyancy(const VelocityField& w) const;
    /// g sum rho'_cell (I w_d)^2 vol
    double buoyancy_form(const VelocityField& w) const;
    /// (g <rho' w_d^2> - s mu |grad w|^2) / <rho |w|^2>, evaluated directly.
    double rayleigh_quotient(const VelocityField& w, double s) const;
    /// <rho u, v>
    double mass_inner(const VelocityField& u, const VelocityField& v) const;

    /// Deterministic starting field: projected white noise from the configured seed.
    VelocityField seed_field() const;

private:
    void finish_setup();

    ScalarField rho_, drho_;
    FaceField rho_face_;
    PhysicalParams params_;
    EigenOptions opts_;
    bool rising_ = false;
    std::vector<double> rho_rows_, rho_vfaces_;
    std::shared_ptr<const PoissonSolver> projector_;
};

struct AlphaResult {
    double value = 0.0;
    VelocityField maximizer;  ///< unit rho-weighted norm
    int iterations = 0;
    double residual = 0.0;
};

/// Largest eigenvalue of the penalized pencil on the divergence-free subspace
/// (restarted Lanczos in the rho-weighted inner product). Throws NumericalError on
/// non-convergence. An optional start field warm-starts the iteration.
AlphaResult alpha(const VariationalProblem& prob, double s, const VelocityField* start = nullptr);

/// Dense reference: explicit null-space basis of D and a generalized symmetric
/// eigensolve. Throws ValidationError above 2000 velocity unknowns.
double oracle_alpha_dense(const VariationalProblem& prob, double s);

struct GrowthRateResult {
    double lambda = 0.0;  ///< 0 flags "no instability found"
    bool stable = false;
    bool marginal = false;
    VelocityField eigenfield;
    ScalarField pressure;
    double alpha_at_lambda = 0.0;
    double fixedpoint_residual = 0.0;
    double eigen_residual = 0.0;
    int iterations = 0;  ///< operator applications over all alpha evaluations
    int alpha_evaluations = 0;
};

/// Root of alpha(s) = s^2 by a bracketed TOMS 748 search.
GrowthRateResult solve_lambda(const VariationalProblem& prob);

struct EigenPair {
    VelocityField v;
    ScalarField p;
    double residual = 0.0;
    double alpha = 0.0;
    int iterations = 0;
};

/// Eigenfield, pressure and the residual of the boundary problem
///   lambda^2 rho v + lambda grad p = lambda mu lap v + g rho' v_d e_d.
/// The residual uses the quadratic wall closure for the Laplacian, so it measures the
/// consistency of the discrete pair with the continuous problem rather than solver noise.
EigenPair eigenpair(const VariationalProblem& prob, double lambda, const VelocityField* start = nullptr);

/// Residual of the boundary problem for a given (lambda, v), p recovered by an unweighted projection.
/// With the reflect closure the residual of an exact discrete eigenpair is at roundoff level
/// and p is the discrete multiplier.
double boundary_problem_residual(const VariationalProblem& prob, double lambda, const VelocityField& v,
                                 ScalarField* pressure = nullptr,
                                 WallClosure closure = WallClosure::Quadratic);

}  // namespace rtlab
