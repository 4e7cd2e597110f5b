#include "rtlab/separable.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace rtlab {

namespace {

inline std::size_t lin(const std::array<int, 3>& m, const Index3& p) {
    return std::size_t(p.i) + std::size_t(m[0]) * (std::size_t(p.j) + std::size_t(m[1]) * std::size_t(p.k));
}

// Line starts for a sweep along `axis`: every index with p[axis] == 0.
std::vector<Index3> line_starts(const std::array<int, 3>& m, int axis) {
    std::vector<Index3> starts;
    for (int k = 0; k < (axis == 2 ? 1 : m[2]); ++k)
        for (int j = 0; j < (axis == 1 ? 1 : m[1]); ++j)
            for (int i = 0; i < (axis == 0 ? 1 : m[0]); ++i) starts.push_back({i, j, k});
    return starts;
}

std::size_t stride(const std::array<int, 3>& m, int axis) {
    return axis == 0 ? 1 : (axis == 1 ? std::size_t(m[0]) : std::size_t(m[0]) * m[1]);
}

}  // namespace

std::vector<double> SeparableSolver::second_difference_matrix(Stencil s, int m, double h) {
    std::vector<double> t(std::size_t(m) * m, 0.0);
    const double ih2 = 1.0 / (h * h);
    for (int r = 0; r < m; ++r) {
        double d = -2.0;
        if (r == 0 || r == m - 1) {
            if (s == Stencil::CellNeumann) d = -1.0;
            if (s == Stencil::CellReflect) d = -3.0;
        }
        t[r + std::size_t(m) * r] = d * ih2;
        if (r > 0) t[r + std::size_t(m) * (r - 1)] = ih2;
        if (r < m - 1) t[r + std::size_t(m) * (r + 1)] = ih2;
    }
    return t;
}

void SeparableSolver::add_horizontal(int axis, Stencil s, double h) {
    const int m = m_[axis];
    const auto t = second_difference_matrix(s, m, h);
    Eigen::Map<const Eigen::MatrixXd> tm(t.data(), m, m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tm);
    Horizontal hz;
    hz.axis = axis;
    hz.lambda.assign(es.eigenvalues().data(), es.eigenvalues().data() + m);
    hz.q.assign(es.eigenvectors().data(), es.eigenvectors().data() + std::size_t(m) * m);
    if (s == Stencil::CellNeumann) {
        // The largest eigenvalue is the constant mode; pin it exactly.
        hz.lambda[m - 1] = 0.0;
        const double c = 1.0 / std::sqrt(double(m));
        for (int r = 0; r < m; ++r) hz.q[r + std::size_t(m) * (m - 1)] = c;
    }
    horiz_.push_back(std::move(hz));
}

SeparableSolver SeparableSolver::poisson(const Grid& g, std::span<const double> k_cell,
                                         std::span<const double> k_face) {
    SeparableSolver s;
    s.grid_ = g;
    s.vaxis_ = g.vertical();
    s.m_ = {g.n(0), g.n(1), g.n(2)};
    const int nz = g.n(s.vaxis_);
    if (k_cell.size() != std::size_t(nz) || k_face.size() != std::size_t(nz) + 1)
        throw ValidationError("separable poisson: coefficient profile has the wrong length");
    for (int b = 0; b < s.vaxis_; ++b) s.add_horizontal(b, Stencil::CellNeumann, g.h(b));
    const double ih2 = 1.0 / (g.h(s.vaxis_) * g.h(s.vaxis_));
    s.lower_.assign(nz, 0.0);
    s.upper_.assign(nz, 0.0);
    s.diag_.assign(nz, 0.0);
    for (int z = 0; z < nz; ++z) {
        const double kl = z > 0 ? k_face[z] : 0.0;
        const double ku = z < nz - 1 ? k_face[z + 1] : 0.0;
        s.lower_[z] = kl * ih2;
        s.upper_[z] = ku * ih2;
        s.diag_[z] = -(kl + ku) * ih2;
    }
    s.weight_.assign(k_cell.begin(), k_cell.end());
    s.shift_.assign(nz, 0.0);
    s.singular_ = true;
    return s;
}

SeparableSolver SeparableSolver::helmholtz(const Grid& g, int a, std::span<const double> shift, double nu) {
    SeparableSolver s;
    s.grid_ = g;
    s.vaxis_ = g.vertical();
    s.m_ = {g.n(0), g.n(1), g.n(2)};
    s.m_[a] -= 1;
    const int nz = s.m_[s.vaxis_];
    if (shift.size() != std::size_t(nz)) throw ValidationError("separable helmholtz: shift has the wrong length");
    for (int b = 0; b < s.vaxis_; ++b)
        s.add_horizontal(b, b == a ? Stencil::FaceDirichlet : Stencil::CellReflect, g.h(b));
    const auto tz = second_difference_matrix(a == s.vaxis_ ? Stencil::FaceDirichlet : Stencil::CellReflect, nz,
                                             g.h(s.vaxis_));
    s.lower_.assign(nz, 0.0);
    s.upper_.assign(nz, 0.0);
    s.diag_.assign(nz, 0.0);
    for (int z = 0; z < nz; ++z) {
        s.diag_[z] = -nu * tz[z + std::size_t(nz) * z];
        if (z > 0) s.lower_[z] = -nu * tz[z + std::size_t(nz) * (z - 1)];
        if (z < nz - 1) s.upper_[z] = -nu * tz[z + std::size_t(nz) * (z + 1)];
    }
    s.weight_.assign(nz, -nu);
    s.shift_.assign(shift.begin(), shift.end());
    s.singular_ = false;
    return s;
}

void SeparableSolver::transform(int hidx, std::span<double> x, bool forward) const {
    const Horizontal& hz = horiz_[hidx];
    const int m = m_[hz.axis];
    const std::size_t st = stride(m_, hz.axis);
    const auto starts = line_starts(m_, hz.axis);
#pragma omp parallel
    {
        std::vector<double> in(m), out(m);
#pragma omp for schedule(static)
        for (std::ptrdiff_t l = 0; l < std::ptrdiff_t(starts.size()); ++l) {
            const std::size_t base = lin(m_, starts[l]);
            for (int r = 0; r < m; ++r) in[r] = x[base + r * st];
            for (int r = 0; r < m; ++r) {
                double s = 0.0;
                if (forward)
                    for (int c = 0; c < m; ++c) s += hz.q[c + std::size_t(m) * r] * in[c];
                else
                    for (int c = 0; c < m; ++c) s += hz.q[r + std::size_t(m) * c] * in[c];
                out[r] = s;
            }
            for (int r = 0; r < m; ++r) x[base + r * st] = out[r];
        }
    }
}

void SeparableSolver::solve(std::span<double> x) const {
    if (x.size() != size()) throw ValidationError("separable solve: array size mismatch");
    for (std::size_t h = 0; h < horiz_.size(); ++h) transform(int(h), x, true);

    const int nz = m_[vaxis_];
    const std::size_t st = stride(m_, vaxis_);
    const auto starts = line_starts(m_, vaxis_);
#pragma omp parallel
    {
        std::vector<double> cp(nz), dp(nz);
#pragma omp for schedule(static)
        for (std::ptrdiff_t l = 0; l < std::ptrdiff_t(starts.size()); ++l) {
            const Index3 p = starts[l];
            double lam = 0.0;
            bool zero_mode = true;
            for (const auto& hz : horiz_) {
                lam += hz.lambda[p[hz.axis]];
                zero_mode = zero_mode && hz.lambda[p[hz.axis]] == 0.0;
            }
            const std::size_t base = lin(m_, p);
            const bool pin = singular_ && zero_mode;
            // Thomas algorithm; the pinned system fixes the first unknown to zero.
            for (int z = 0; z < nz; ++z) {
                double a = lower_[z], b = diag_[z] + weight_[z] * lam + shift_[z], c = upper_[z];
                double r = x[base + z * st];
                if (pin && z == 0) {
                    a = 0.0;
                    b = 1.0;
                    c = 0.0;
                    r = 0.0;
                }
                if (z > 0) {
                    const double den = b - a * cp[z - 1];
                    cp[z] = c / den;
                    dp[z] = (r - a * dp[z - 1]) / den;
                } else {
                    cp[z] = c / b;
                    dp[z] = r / b;
                }
            }
            for (int z = nz - 1; z >= 0; --z) {
                double v = dp[z];
                if (z < nz - 1) v -= cp[z] * x[base + (z + 1) * st];
                x[base + z * st] = v;
            }
        }
    }

    for (std::size_t h = horiz_.size(); h-- > 0;) transform(int(h), x, false);

    if (singular_) {
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= double(x.size());
        for (double& v : x) v -= mean;
    }
}

void SeparableSolver::gather_interior(const Grid& g, int a, std::span<const double> comp, std::span<double> x) {
    const auto m = g.face_dims(a);
    std::array<int, 3> mi = m;
    mi[a] -= 2;
    for (int k = 0; k < mi[2]; ++k)
        for (int j = 0; j < mi[1]; ++j)
            for (int i = 0; i < mi[0]; ++i) {
                Index3 p{i, j, k};
                p[a] += 1;
                x[lin(mi, {i, j, k})] = comp[lin(m, p)];
            }
}

void SeparableSolver::scatter_interior(const Grid& g, int a, std::span<const double> x, std::span<double> comp) {
    const auto m = g.face_dims(a);
    std::array<int, 3> mi = m;
    mi[a] -= 2;
    for (int k = 0; k < mi[2]; ++k)
        for (int j = 0; j < mi[1]; ++j)
            for (int i = 0; i < mi[0]; ++i) {
                Index3 p{i, j, k};
                p[a] += 1;
                comp[lin(m, p)] = x[lin(mi, {i, j, k})];
            }
}

}  // namespace rtlab
