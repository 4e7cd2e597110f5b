#pragma once

// Staggered (MAC) discretization of an axis-aligned box.
//
// Layout for a grid with cells n = (n0, n1, n2):
//   - scalars live at cell centers, index i + n0*(j + n1*k)
//   - velocity component a lives on faces normal to axis a; its array has
//     n_a + 1 entries along axis a and n_b along every other axis b
//   - the last active axis (dim - 1) is vertical; gravity points along -e_{dim-1}
// In 2D the third axis is inactive (n2 = 1, L2 = 1) and component 2 is empty.

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtlab {

/// Raised for invalid user input (bad grids, configs, profile parameters).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure fails (non-convergence, CFL violation).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, double residual = 0.0)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

struct Index3 {
    int i = 0, j = 0, k = 0;
    int& operator[](int a) { return a == 0 ? i : (a == 1 ? j : k); }
    int operator[](int a) const { return a == 0 ? i : (a == 1 ? j : k); }
};

class Grid {
public:
    Grid() = default;

    /// Throws ValidationError unless dim is 2 or 3, every n_i >= 4 and every L_i > 0.
    static Grid make(int dim, std::span<const int> cells, std::span<const double> extents);
    static Grid make2d(int nx, int nz, double lx = 1.0, double lz = 1.0);

    int dim() const noexcept { return dim_; }
    int vertical() const noexcept { return dim_ - 1; }
    int n(int a) const noexcept { return n_[a]; }
    double extent(int a) const noexcept { return L_[a]; }
    double h(int a) const noexcept { return L_[a] / n_[a]; }
    double min_h() const noexcept;
    double cell_volume() const noexcept { return h(0) * h(1) * h(2); }

    std::size_t cells() const noexcept {
        return std::size_t(n_[0]) * std::size_t(n_[1]) * std::size_t(n_[2]);
    }
    std::size_t cell_index(int i, int j, int k) const noexcept {
        return std::size_t(i) + std::size_t(n_[0]) * (std::size_t(j) + std::size_t(n_[1]) * std::size_t(k));
    }

    /// Array shape of velocity component a (zero for a >= dim).
    std::array<int, 3> face_dims(int a) const noexcept;
    std::size_t faces(int a) const noexcept;
    std::size_t face_index(int a, int i, int j, int k) const noexcept {
        const auto m = face_dims(a);
        return std::size_t(i) + std::size_t(m[0]) * (std::size_t(j) + std::size_t(m[1]) * std::size_t(k));
    }

    double cell_center(int a, int idx) const noexcept { return (idx + 0.5) * h(a); }
    double face_position(int a, int idx) const noexcept { return idx * h(a); }

    bool operator==(const Grid& o) const noexcept {
        return dim_ == o.dim_ && n_ == o.n_ && L_ == o.L_;
    }

private:
    int dim_ = 2;
    std::array<int, 3> n_{4, 4, 1};
    std::array<double, 3> L_{1.0, 1.0, 1.0};
};

void require_same_grid(const Grid& a, const Grid& b);

struct ScalarField {
    Grid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double value = 0.0) : grid(g), v(g.cells(), value) {}

    double& operator()(int i, int j, int k = 0) { return v[grid.cell_index(i, j, k)]; }
    double operator()(int i, int j, int k = 0) const { return v[grid.cell_index(i, j, k)]; }
};

/// Face-normal data for all active axes, stored contiguously component after component.
/// Used for velocities and for face-sampled coefficients.
struct FaceField {
    Grid grid;
    std::vector<double> data;
    std::array<std::size_t, 4> offset{};

    FaceField() = default;
    explicit FaceField(const Grid& g, double value = 0.0);

    std::span<double> comp(int a) { return {data.data() + offset[a], offset[a + 1] - offset[a]}; }
    std::span<const double> comp(int a) const {
        return {data.data() + offset[a], offset[a + 1] - offset[a]};
    }
    double& at(int a, int i, int j, int k = 0) { return data[offset[a] + grid.face_index(a, i, j, k)]; }
    double at(int a, int i, int j, int k = 0) const {
        return data[offset[a] + grid.face_index(a, i, j, k)];
    }

    /// True when every boundary-normal face is exactly zero.
    bool is_no_slip() const;
    /// Sets boundary-normal faces to zero.
    void clear_boundary();
};

using VelocityField = FaceField;

/// Calls f(i, j, k) for every cell.
template <class F>
void for_each_cell(const Grid& g, F&& f) {
    for (int k = 0; k < g.n(2); ++k)
        for (int j = 0; j < g.n(1); ++j)
            for (int i = 0; i < g.n(0); ++i) f(i, j, k);
}

/// Calls f(i, j, k) for every face of component a that is not on the boundary.
template <class F>
void for_each_interior_face(const Grid& g, int a, F&& f) {
    const auto m = g.face_dims(a);
    const Index3 lo{a == 0 ? 1 : 0, a == 1 ? 1 : 0, a == 2 ? 1 : 0};
    const Index3 hi{a == 0 ? m[0] - 1 : m[0], a == 1 ? m[1] - 1 : m[1], a == 2 ? m[2] - 1 : m[2]};
    for (int k = lo.k; k < hi.k; ++k)
        for (int j = lo.j; j < hi.j; ++j)
            for (int i = lo.i; i < hi.i; ++i) f(i, j, k);
}

// Elementwise helpers used by the solvers. Reductions use a fixed blocking so the
// result does not depend on the thread count.
double dot(std::span<const double> x, std::span<const double> y);
double weighted_dot(std::span<const double> w, std::span<const double> x, std::span<const double> y);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace rtlab
