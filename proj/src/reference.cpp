#include "rtlab/reference.hpp"

namespace rtlab::reference {

namespace {

std::array<std::size_t, 3> strides(const std::array<int, 3>& m) {
    return {1, std::size_t(m[0]), std::size_t(m[0]) * std::size_t(m[1])};
}

}  // namespace

ScalarField divergence(const VelocityField& v) {
    const Grid& g = v.grid;
    ScalarField out(g);
    for (int k = 0; k < g.n(2); ++k)
        for (int j = 0; j < g.n(1); ++j)
            for (int i = 0; i < g.n(0); ++i) {
                double s = 0.0;
                for (int a = 0; a < g.dim(); ++a) {
                    const auto st = strides(g.face_dims(a));
                    const std::size_t f = g.face_index(a, i, j, k);
                    s += (v.comp(a)[f + st[a]] - v.comp(a)[f]) / g.h(a);
                }
                out.v[g.cell_index(i, j, k)] = s;
            }
    return out;
}

VelocityField gradient(const ScalarField& phi) {
    const Grid& g = phi.grid;
    VelocityField out(g);
    for (int a = 0; a < g.dim(); ++a) {
        const auto m = g.face_dims(a);
        auto c = out.comp(a);
        const std::size_t cs = a == 0 ? 1 : (a == 1 ? std::size_t(g.n(0)) : std::size_t(g.n(0)) * g.n(1));
        for (int k = 0; k < m[2]; ++k)
            for (int j = 0; j < m[1]; ++j)
                for (int i = 0; i < m[0]; ++i) {
                    const int p[3] = {i, j, k};
                    if (p[a] == 0 || p[a] == m[a] - 1) continue;
                    int q[3] = {i, j, k};
                    q[a] -= 1;
                    const std::size_t lo = g.cell_index(q[0], q[1], q[2]);
                    c[g.face_index(a, i, j, k)] = (phi.v[lo + cs] - phi.v[lo]) * (1.0 / g.h(a));
                }
    }
    return out;
}

VelocityField laplacian_dirichlet(const VelocityField& v) {
    const Grid& g = v.grid;
    VelocityField out(g);
    for (int a = 0; a < g.dim(); ++a) {
        const auto m = g.face_dims(a);
        const auto st = strides(m);
        const auto in = v.comp(a);
        auto res = out.comp(a);
        for (int k = 0; k < m[2]; ++k)
            for (int j = 0; j < m[1]; ++j)
                for (int i = 0; i < m[0]; ++i) {
                    const int p[3] = {i, j, k};
                    if (p[a] == 0 || p[a] == m[a] - 1) continue;
                    const std::size_t c = g.face_index(a, i, j, k);
                    double s = 0.0;
                    for (int b = 0; b < g.dim(); ++b) {
                        const double lo = p[b] > 0 ? in[c - st[b]] : -in[c];
                        const double hi = p[b] < m[b] - 1 ? in[c + st[b]] : -in[c];
                        s += (hi - 2.0 * in[c] + lo) / (g.h(b) * g.h(b));
                    }
                    res[c] = s;
                }
    }
    return out;
}

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

}  // namespace rtlab::reference
