#pragma once

// Direct solver for operators whose coefficients depend only on the vertical
// coordinate:
//
//   L x = sum_{b horizontal} w(z) T_b x + V x + c(z) x
//
// where each T_b is a constant-coefficient 1D second-difference matrix along a
// horizontal axis and V is tridiagonal along the vertical axis. The horizontal
// matrices are diagonalised once; each horizontal mode then needs one tridiagonal
// solve. The steady density depends on height only, so the projection and the
// viscous solves of the linearized system are all of this form, and for the full
// nonlinear system the same solver is an effective preconditioner.

#include "rtlab/grid.hpp"

#include <vector>

namespace rtlab {

class SeparableSolver {
public:
    enum class Stencil {
        CellNeumann,    ///< cell unknowns, zero flux at the walls
        CellReflect,    ///< cell unknowns, ghost = -value (zero wall value)
        FaceDirichlet,  ///< interior face unknowns, zero boundary faces
    };

    /// Solver for D(k grad phi) = rhs on cell unknowns with zero-flux walls.
    /// k_cell[z] is the coefficient on horizontal faces of cell row z (size n_z);
    /// k_face[z] the coefficient on vertical face z (size n_z + 1, ends ignored).
    /// The operator is singular; solutions are returned with zero mean.
    static SeparableSolver poisson(const Grid& g, std::span<const double> k_cell, std::span<const double> k_face);

    /// Solver for (c(z) - nu * laplacian) u = rhs on the interior faces of velocity
    /// component a. shift has one entry per vertical position of the component.
    static SeparableSolver helmholtz(const Grid& g, int a, std::span<const double> shift, double nu);

    /// Solves in place; x holds the right-hand side on entry (unknown layout, see below).
    void solve(std::span<double> x) const;

    /// Unknown-array shape: cells for Poisson, interior faces of the component otherwise.
    const std::array<int, 3>& dims() const noexcept { return m_; }
    std::size_t size() const noexcept { return std::size_t(m_[0]) * m_[1] * m_[2]; }

    // Moving data between a full face-component array and the interior unknowns.
    static void gather_interior(const Grid& g, int a, std::span<const double> comp, std::span<double> x);
    static void scatter_interior(const Grid& g, int a, std::span<const double> x, std::span<double> comp);

private:
    struct Horizontal {
        int axis = 0;
        std::vector<double> q;       // m x m eigenvectors, column-major
        std::vector<double> lambda;  // eigenvalues
    };

    static std::vector<double> second_difference_matrix(Stencil s, int m, double h);
    void add_horizontal(int axis, Stencil s, double h);
    void transform(int hidx, std::span<double> x, bool forward) const;

    Grid grid_;
    int vaxis_ = 1;
    std::array<int, 3> m_{1, 1, 1};
    std::vector<Horizontal> horiz_;
    std::vector<double> lower_, diag_, upper_;  // vertical operator V
    std::vector<double> weight_;                // w(z) multiplying the horizontal part
    std::vector<double> shift_;                 // c(z)
    bool singular_ = false;
};

}  // namespace rtlab
