#pragma once

// Pressure Poisson solves, Leray projection and the implicit viscous solve.

#include "rtlab/mesh_ops.hpp"
#include "rtlab/separable.hpp"

#include <optional>

namespace rtlab {

enum class Preconditioner { Jacobi, Separable };

struct SolverOptions {
    double tol = 1e-10;   ///< relative residual
    int max_iters = 0;    ///< 0 means 10 * (number of unknowns)
    Preconditioner preconditioner = Preconditioner::Jacobi;
};

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;  ///< final relative residual
};

/// Preconditioned conjugate gradients for an SPD operator. When mean_free is set the
/// iteration runs on the zero-mean subspace (singular Neumann operators).
/// Throws NumericalError carrying the residual on non-convergence.
template <class Apply, class Precond>
SolveStats pcg(Apply&& apply, Precond&& precond, std::span<const double> b, std::span<double> x, double tol,
               int max_iters, bool mean_free);

/// Variable-coefficient Poisson problem D(k G phi) = rhs with zero-flux walls.
class PoissonSolver {
public:
    /// Jacobi-preconditioned CG for an arbitrary positive face coefficient.
    PoissonSolver(FaceField k, SolverOptions opts);
    /// CG preconditioned with a height-only separable approximation of k.
    PoissonSolver(FaceField k, SeparableSolver precond, SolverOptions opts);
    /// Exact direct solver when k depends on height only (k_cell per row, k_face per vertical face).
    static PoissonSolver height_only(const Grid& g, std::span<const double> k_cell, std::span<const double> k_face);

    /// Returns the zero-mean solution. rhs must have zero mean (|mean| <= 1e-10 * rms).
    ScalarField solve(const ScalarField& rhs, SolveStats* stats = nullptr) const;

    /// D(k G phi).
    ScalarField apply(const ScalarField& phi) const;
    const FaceField& coefficient() const noexcept { return k_; }

private:
    FaceField k_;
    SolverOptions opts_;
    std::optional<SeparableSolver> sep_;
    bool direct_ = false;
    std::vector<double> jacobi_;
};

/// Solves divergence(coeff * gradient(phi)) = rhs. Without coeff the coefficient is 1;
/// a cell coefficient is moved to faces by harmonic averaging.
ScalarField poisson_solve(const ScalarField& rhs, const ScalarField* coeff = nullptr, SolverOptions opts = {},
                          SolveStats* stats = nullptr);

/// v - k G phi with D(k G phi) = D v, the k-weighted Helmholtz decomposition.
VelocityField leray_project(const VelocityField& v, const PoissonSolver& solver, SolveStats* stats = nullptr);
/// Unweighted projection with the default Jacobi-preconditioned solver.
VelocityField leray_project(const VelocityField& v, SolverOptions opts = {});

/// (c * u - nu * laplacian u) = rhs on the interior faces of one velocity component.
class HelmholtzSolver {
public:
    /// CG with the given separable preconditioner; c is the full face field of component a.
    HelmholtzSolver(const Grid& g, int a, std::vector<double> c, double nu, SeparableSolver precond,
                    SolverOptions opts);
    /// Exact direct solve when c depends on height only.
    static HelmholtzSolver height_only(const Grid& g, int a, std::span<const double> c_profile, double nu);

    /// rhs and result use the full component layout; boundary faces are zero.
    void solve(std::span<const double> rhs, std::span<double> out, SolveStats* stats = nullptr) const;

private:
    HelmholtzSolver() = default;
    Grid grid_;
    int axis_ = 0;
    std::vector<double> c_;
    double nu_ = 0.0;
    std::optional<SeparableSolver> sep_;
    SolverOptions opts_;
    bool direct_ = false;
};

}  // namespace rtlab

#include "rtlab/detail/pcg.ipp"
