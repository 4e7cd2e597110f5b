#include "rtlab/mesh_ops.hpp"

#include <cmath>

namespace rtlab {

namespace {

inline std::size_t lin(const std::array<int, 3>& m, const Index3& p) {
    return std::size_t(p.i) + std::size_t(m[0]) * (std::size_t(p.j) + std::size_t(m[1]) * std::size_t(p.k));
}

inline Index3 shifted(Index3 p, int axis, int by) {
    p[axis] += by;
    return p;
}

// Sum of squared second differences (pure and mixed) of an array with shape m,
// scaled by the grid spacing; one-sided stencils at the array ends.
double second_difference_sq(const Grid& g, const std::array<int, 3>& m, std::span<const double> f) {
    double total = 0.0;
    for (int b = 0; b < g.dim(); ++b) {
        const double ih2 = 1.0 / (g.h(b) * g.h(b));
        for (int k = 0; k < m[2]; ++k)
            for (int j = 0; j < m[1]; ++j)
                for (int i = 0; i < m[0]; ++i) {
                    Index3 p{i, j, k};
                    int c = p[b];
                    if (c == 0) c = 1;
                    if (c == m[b] - 1) c = m[b] - 2;
                    Index3 q = p;
                    q[b] = c;
                    const double d2 = (f[lin(m, shifted(q, b, 1))] - 2.0 * f[lin(m, q)] + f[lin(m, shifted(q, b, -1))]) * ih2;
                    total += d2 * d2;
                }
        for (int c = b + 1; c < g.dim(); ++c) {
            const double ihh = 1.0 / (g.h(b) * g.h(c));
            for (int k = 0; k < m[2] - (b == 2 || c == 2 ? 1 : 0); ++k)
                for (int j = 0; j < m[1] - (b == 1 || c == 1 ? 1 : 0); ++j)
                    for (int i = 0; i < m[0] - (b == 0 ? 1 : 0); ++i) {
                        const Index3 p{i, j, k};
                        const Index3 pb = shifted(p, b, 1), pc = shifted(p, c, 1), pbc = shifted(pb, c, 1);
                        const double d2 = (f[lin(m, pbc)] - f[lin(m, pb)] - f[lin(m, pc)] + f[lin(m, p)]) * ihh;
                        total += 2.0 * d2 * d2;
                    }
        }
    }
    return total * g.cell_volume();
}

}  // namespace

ScalarField divergence(const VelocityField& v) {
    const Grid& g = v.grid;
    ScalarField out(g);
#pragma omp parallel for collapse(2) schedule(static)
    for (int k = 0; k < g.n(2); ++k)
        for (int j = 0; j < g.n(1); ++j)
            for (int i = 0; i < g.n(0); ++i) {
                double s = 0.0;
                for (int a = 0; a < g.dim(); ++a) {
                    const Index3 p{i, j, k};
                    const Index3 q = shifted(p, a, 1);
                    s += (v.at(a, q.i, q.j, q.k) - v.at(a, i, j, k)) / g.h(a);
                }
                out(i, j, k) = s;
            }
    return out;
}

VelocityField gradient(const ScalarField& phi) {
    const Grid& g = phi.grid;
    VelocityField out(g);
    for (int a = 0; a < g.dim(); ++a) {
        const auto m = g.face_dims(a);
        const double ih = 1.0 / g.h(a);
        auto c = out.comp(a);
#pragma omp parallel for collapse(2) schedule(static)
        for (int k = 0; k < m[2]; ++k)
            for (int j = 0; j < m[1]; ++j)
                for (int i = 0; i < m[0]; ++i) {
                    const Index3 p{i, j, k};
                    if (p[a] == 0 || p[a] == m[a] - 1) continue;
                    const Index3 lo = shifted(p, a, -1);
                    c[lin(m, p)] = (phi(i, j, k) - phi(lo.i, lo.j, lo.k)) * ih;
                }
    }
    return out;
}

VelocityField weighted_gradient(const ScalarField& phi, const FaceField& coeff) {
    require_same_grid(phi.grid, coeff.grid);
    VelocityField out = gradient(phi);
    const std::ptrdiff_t n = std::ptrdiff_t(out.data.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out.data[i] *= coeff.data[i];
    return out;
}

void laplacian_component(const Grid& g, int a, std::span<const double> in, std::span<double> out) {
    const auto m = g.face_dims(a);
#pragma omp parallel for collapse(2) schedule(static)
    for (int k = 0; k < m[2]; ++k)
        for (int j = 0; j < m[1]; ++j)
            for (int i = 0; i < m[0]; ++i) {
                const Index3 p{i, j, k};
                const std::size_t c = lin(m, p);
                if (p[a] == 0 || p[a] == m[a] - 1) {
                    out[c] = 0.0;
                    continue;
                }
                const double vc = in[c];
                double s = 0.0;
                for (int b = 0; b < g.dim(); ++b) {
                    const double lo = p[b] > 0 ? in[lin(m, shifted(p, b, -1))] : -vc;
                    const double hi = p[b] < m[b] - 1 ? in[lin(m, shifted(p, b, 1))] : -vc;
                    s += (hi - 2.0 * vc + lo) / (g.h(b) * g.h(b));
                }
                out[c] = s;
            }
}

VelocityField laplacian_dirichlet(const VelocityField& v, WallClosure closure) {
    const Grid& g = v.grid;
    VelocityField out(g);
    for (int a = 0; a < g.dim(); ++a) {
        if (closure == WallClosure::Reflect) {
            laplacian_component(g, a, v.comp(a), out.comp(a));
            continue;
        }
        const auto m = g.face_dims(a);
        const auto in = v.comp(a);
        auto res = out.comp(a);
        for (int k = 0; k < m[2]; ++k)
            for (int j = 0; j < m[1]; ++j)
                for (int i = 0; i < m[0]; ++i) {
                    const Index3 p{i, j, k};
                    if (p[a] == 0 || p[a] == m[a] - 1) continue;
                    const double vc = in[lin(m, p)];
                    double s = 0.0;
                    for (int b = 0; b < g.dim(); ++b) {
                        double lo, hi;
                        if (b == a) {
                            lo = in[lin(m, shifted(p, b, -1))];
                            hi = in[lin(m, shifted(p, b, 1))];
                        } else {
                            lo = p[b] > 0 ? in[lin(m, shifted(p, b, -1))]
                                          : -2.0 * vc + in[lin(m, shifted(p, b, 1))] / 3.0;
                            hi = p[b] < m[b] - 1 ? in[lin(m, shifted(p, b, 1))]
                                                 : -2.0 * vc + in[lin(m, shifted(p, b, -1))] / 3.0;
                        }
                        s += (hi - 2.0 * vc + lo) / (g.h(b) * g.h(b));
                    }
                    res[lin(m, p)] = s;
                }
    }
    return out;
}

FaceField face_average(const ScalarField& s) {
    const Grid& g = s.grid;
    FaceField out(g);
    for (int a = 0; a < g.dim(); ++a) {
        const auto m = g.face_dims(a);
        auto c = out.comp(a);
#pragma omp parallel for collapse(2) schedule(static)
        for (int k = 0; k < m[2]; ++k)
            for (int j = 0; j < m[1]; ++j)
                for (int i = 0; i < m[0]; ++i) {
                    const Index3 p{i, j, k};
                    const Index3 lo = shifted(p, a, -1);
                    if (p[a] == 0)
                        c[lin(m, p)] = s(i, j, k);
                    else if (p[a] == m[a] - 1)
                        c[lin(m, p)] = s(lo.i, lo.j, lo.k);
                    else
                        c[lin(m, p)] = 0.5 * (s(i, j, k) + s(lo.i, lo.j, lo.k));
                }
    }
    return out;
}

FaceField face_harmonic_average(const ScalarField& s) {
    const Grid& g = s.grid;
    FaceField out(g);
    for (int a = 0; a < g.dim(); ++a) {
        const auto m = g.face_dims(a);
        auto c = out.comp(a);
#pragma omp parallel for collapse(2) schedule(static)
        for (int k = 0; k < m[2]; ++k)
            for (int j = 0; j < m[1]; ++j)
                for (int i = 0; i < m[0]; ++i) {
                    const Index3 p{i, j, k};
                    const Index3 lo = shifted(p, a, -1);
                    if (p[a] == 0)
                        c[lin(m, p)] = s(i, j, k);
                    else if (p[a] == m[a] - 1)
                        c[lin(m, p)] = s(lo.i, lo.j, lo.k);
                    else
                        c[lin(m, p)] = 2.0 / (1.0 / s(i, j, k) + 1.0 / s(lo.i, lo.j, lo.k));
                }
    }
    return out;
}

ScalarField cell_average(const VelocityField& v, int a) {
    const Grid& g = v.grid;
    ScalarField out(g);
#pragma omp parallel for collapse(2) schedule(static)
    for (int k = 0; k < g.n(2); ++k)
        for (int j = 0; j < g.n(1); ++j)
            for (int i = 0; i < g.n(0); ++i) {
                const Index3 q = shifted(Index3{i, j, k}, a, 1);
                out(i, j, k) = 0.5 * (v.at(a, i, j, k) + v.at(a, q.i, q.j, q.k));
            }
    return out;
}

void cell_to_faces(const ScalarField& s, int a, std::span<double> out) {
    const Grid& g = s.grid;
    const auto m = g.face_dims(a);
#pragma omp parallel for collapse(2) schedule(static)
    for (int k = 0; k < m[2]; ++k)
        for (int j = 0; j < m[1]; ++j)
            for (int i = 0; i < m[0]; ++i) {
                const Index3 p{i, j, k};
                if (p[a] == 0 || p[a] == m[a] - 1) {
                    out[lin(m, p)] = 0.0;
                    continue;
                }
                const Index3 lo = shifted(p, a, -1);
                out[lin(m, p)] = 0.5 * (s(i, j, k) + s(lo.i, lo.j, lo.k));
            }
}

double inner(const ScalarField& f, const ScalarField& g) {
    require_same_grid(f.grid, g.grid);
    return dot(f.v, g.v) * f.grid.cell_volume();
}

double inner(const VelocityField& u, const VelocityField& v) {
    require_same_grid(u.grid, v.grid);
    return dot(u.data, v.data) * u.grid.cell_volume();
}

double weighted_inner(const ScalarField& f, const ScalarField& g, const ScalarField& weight) {
    require_same_grid(f.grid, g.grid);
    require_same_grid(f.grid, weight.grid);
    return weighted_dot(weight.v, f.v, g.v) * f.grid.cell_volume();
}

double weighted_inner(const VelocityField& u, const VelocityField& v, const FaceField& weight) {
    require_same_grid(u.grid, v.grid);
    require_same_grid(u.grid, weight.grid);
    return weighted_dot(weight.data, u.data, v.data) * u.grid.cell_volume();
}

double weighted_inner(const VelocityField& u, const VelocityField& v, const ScalarField& weight) {
    require_same_grid(u.grid, weight.grid);
    return weighted_inner(u, v, face_average(weight));
}

double norm_l2(std::span<const double> values, const Grid& g) {
    return std::sqrt(dot(values, values) * g.cell_volume());
}

double norm_l2(const ScalarField& f) { return norm_l2(f.v, f.grid); }
double norm_l2(const VelocityField& u) { return norm_l2(u.data, u.grid); }

double grad_norm_sq(const VelocityField& u) {
    const VelocityField lap = laplacian_dirichlet(u);
    return -inner(lap, u);
}

double norm_h1(const ScalarField& f) {
    const VelocityField gr = gradient(f);
    return std::sqrt(inner(f, f) + inner(gr, gr));
}

double norm_h1(const VelocityField& u) {
    return std::sqrt(inner(u, u) + grad_norm_sq(u));
}

double norm_h2(const ScalarField& f) {
    const double h1 = norm_h1(f);
    const auto m = std::array<int, 3>{f.grid.n(0), f.grid.n(1), f.grid.n(2)};
    return std::sqrt(h1 * h1 + second_difference_sq(f.grid, m, f.v));
}

double norm_h2(const VelocityField& u) {
    const double h1 = norm_h1(u);
    double s = h1 * h1;
    for (int a = 0; a < u.grid.dim(); ++a) s += second_difference_sq(u.grid, u.grid.face_dims(a), u.comp(a));
    return std::sqrt(s);
}

}  // namespace rtlab
