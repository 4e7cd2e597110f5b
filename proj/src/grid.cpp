#include "rtlab/grid.hpp"

#include <algorithm>
#include <sstream>

namespace rtlab {

namespace {
constexpr std::size_t kReductionBlock = 2048;
}

Grid Grid::make(int dim, std::span<const int> cells, std::span<const double> extents) {
    if (dim != 2 && dim != 3) throw ValidationError("grid dimension must be 2 or 3");
    if (cells.size() != std::size_t(dim) || extents.size() != std::size_t(dim))
        throw ValidationError("grid needs exactly one cell count and one extent per axis");
    Grid g;
    g.dim_ = dim;
    g.n_ = {1, 1, 1};
    g.L_ = {1.0, 1.0, 1.0};
    for (int a = 0; a < dim; ++a) {
        if (cells[a] < 4) {
            std::ostringstream os;
            os << "grid axis " << a << " needs at least 4 cells, got " << cells[a];
            throw ValidationError(os.str());
        }
        if (!(extents[a] > 0.0)) {
            std::ostringstream os;
            os << "grid axis " << a << " needs a positive extent, got " << extents[a];
            throw ValidationError(os.str());
        }
        g.n_[a] = cells[a];
        g.L_[a] = extents[a];
    }
    return g;
}

Grid Grid::make2d(int nx, int nz, double lx, double lz) {
    const int n[2] = {nx, nz};
    const double L[2] = {lx, lz};
    return make(2, n, L);
}

double Grid::min_h() const noexcept {
    double m = h(0);
    for (int a = 1; a < dim_; ++a) m = std::min(m, h(a));
    return m;
}

std::array<int, 3> Grid::face_dims(int a) const noexcept {
    if (a >= dim_) return {0, 0, 0};
    std::array<int, 3> m = n_;
    m[a] += 1;
    return m;
}

std::size_t Grid::faces(int a) const noexcept {
    const auto m = face_dims(a);
    return std::size_t(m[0]) * std::size_t(m[1]) * std::size_t(m[2]);
}

void require_same_grid(const Grid& a, const Grid& b) {
    if (!(a == b)) throw ValidationError("fields live on different grids");
}

FaceField::FaceField(const Grid& g, double value) : grid(g) {
    offset[0] = 0;
    for (int a = 0; a < 3; ++a) offset[a + 1] = offset[a] + g.faces(a);
    data.assign(offset[3], value);
}

bool FaceField::is_no_slip() const {
    for (int a = 0; a < grid.dim(); ++a) {
        const auto m = grid.face_dims(a);
        for (int k = 0; k < m[2]; ++k)
            for (int j = 0; j < m[1]; ++j)
                for (int i = 0; i < m[0]; ++i) {
                    const Index3 idx{i, j, k};
                    if ((idx[a] == 0 || idx[a] == m[a] - 1) && at(a, i, j, k) != 0.0) return false;
                }
    }
    return true;
}

void FaceField::clear_boundary() {
    for (int a = 0; a < grid.dim(); ++a) {
        const auto m = grid.face_dims(a);
        for (int k = 0; k < m[2]; ++k)
            for (int j = 0; j < m[1]; ++j)
                for (int i = 0; i < m[0]; ++i) {
                    const Index3 idx{i, j, k};
                    if (idx[a] == 0 || idx[a] == m[a] - 1) at(a, i, j, k) = 0.0;
                }
    }
}

double dot(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    const std::size_t nb = (n + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < std::ptrdiff_t(nb); ++b) {
        const std::size_t lo = std::size_t(b) * kReductionBlock;
        const std::size_t hi = std::min(n, lo + kReductionBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += x[i] * y[i];
        partial[b] = s;
    }
    double s = 0.0;
    for (double p : partial) s += p;
    return s;
}

double weighted_dot(std::span<const double> w, std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    const std::size_t nb = (n + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < std::ptrdiff_t(nb); ++b) {
        const std::size_t lo = std::size_t(b) * kReductionBlock;
        const std::size_t hi = std::min(n, lo + kReductionBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += w[i] * x[i] * y[i];
        partial[b] = s;
    }
    double s = 0.0;
    for (double p : partial) s += p;
    return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    const std::ptrdiff_t n = std::ptrdiff_t(x.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace rtlab
