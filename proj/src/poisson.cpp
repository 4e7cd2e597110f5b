#include "rtlab/poisson.hpp"

#include <cmath>
#include <sstream>

namespace rtlab {

namespace {

int default_iters(const SolverOptions& o, std::size_t n) {
    return o.max_iters > 0 ? o.max_iters : int(10 * n);
}

FaceField height_only_faces(const Grid& g, std::span<const double> k_cell, std::span<const double> k_face) {
    FaceField k(g);
    const int vz = g.vertical();
    for (int a = 0; a < g.dim(); ++a) {
        const auto m = g.face_dims(a);
        for (int kk = 0; kk < m[2]; ++kk)
            for (int j = 0; j < m[1]; ++j)
                for (int i = 0; i < m[0]; ++i) {
                    const Index3 p{i, j, kk};
                    k.at(a, i, j, kk) = a == vz ? k_face[p[vz]] : k_cell[p[vz]];
                }
    }
    return k;
}

}  // namespace

PoissonSolver::PoissonSolver(FaceField k, SolverOptions opts) : k_(std::move(k)), opts_(opts) {
    const Grid& g = k_.grid;
    jacobi_.assign(g.cells(), 0.0);
    for_each_cell(g, [&](int i, int j, int kk) {
        double d = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            Index3 p{i, j, kk};
            const double ih2 = 1.0 / (g.h(a) * g.h(a));
            if (p[a] > 0) d += k_.at(a, i, j, kk) * ih2;
            p[a] += 1;
            if (p[a] < g.n(a)) d += k_.at(a, p.i, p.j, p.k) * ih2;
        }
        jacobi_[g.cell_index(i, j, kk)] = d > 0.0 ? 1.0 / d : 1.0;
    });
}

PoissonSolver::PoissonSolver(FaceField k, SeparableSolver precond, SolverOptions opts)
    : k_(std::move(k)), opts_(opts), sep_(std::move(precond)) {
    opts_.preconditioner = Preconditioner::Separable;
}

PoissonSolver PoissonSolver::height_only(const Grid& g, std::span<const double> k_cell,
                                         std::span<const double> k_face) {
    PoissonSolver s(height_only_faces(g, k_cell, k_face), SeparableSolver::poisson(g, k_cell, k_face), {});
    s.direct_ = true;
    return s;
}

ScalarField PoissonSolver::apply(const ScalarField& phi) const {
    return divergence(weighted_gradient(phi, k_));
}

ScalarField PoissonSolver::solve(const ScalarField& rhs, SolveStats* stats) const {
    const Grid& g = k_.grid;
    require_same_grid(g, rhs.grid);
    double mean = 0.0, sq = 0.0;
    for (double v : rhs.v) {
        mean += v;
        sq += v * v;
    }
    mean /= double(rhs.v.size());
    const double rms = std::sqrt(sq / double(rhs.v.size()));
    if (std::abs(mean) > 1e-10 * rms) {
        std::ostringstream os;
        os << "poisson_solve: right-hand side is not compatible with zero-flux walls (mean " << mean
           << ", rms " << rms << ")";
        throw ValidationError(os.str());
    }

    ScalarField phi(g);
    if (direct_) {
        phi.v = rhs.v;
        detail::remove_mean(phi.v);
        sep_->solve(phi.v);
        if (stats) *stats = SolveStats{1, 0.0};
        return phi;
    }

    ScalarField work(g);
    auto apply_neg = [&](std::span<const double> in, std::span<double> out) {
        std::copy(in.begin(), in.end(), work.v.begin());
        const ScalarField r = apply(work);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = -r.v[i];
    };
    SolveStats st;
    if (opts_.preconditioner == Preconditioner::Separable && sep_) {
        auto pre = [&](std::span<const double> r, std::span<double> z) {
            std::copy(r.begin(), r.end(), z.begin());
            detail::remove_mean(z);
            sep_->solve(z);
            for (double& v : z) v = -v;
        };
        st = pcg(apply_neg, pre, rhs.v, phi.v, opts_.tol, default_iters(opts_, g.cells()), true);
    } else {
        auto pre = [&](std::span<const double> r, std::span<double> z) {
            for (std::size_t i = 0; i < z.size(); ++i) z[i] = jacobi_[i] * r[i];
        };
        st = pcg(apply_neg, pre, rhs.v, phi.v, opts_.tol, default_iters(opts_, g.cells()), true);
    }
    // pcg solved -A phi = rhs
    for (double& v : phi.v) v = -v;
    if (stats) *stats = st;
    return phi;
}

ScalarField poisson_solve(const ScalarField& rhs, const ScalarField* coeff, SolverOptions opts, SolveStats* stats) {
    FaceField k(rhs.grid, 1.0);
    if (coeff) {
        require_same_grid(rhs.grid, coeff->grid);
        for (double c : coeff->v)
            if (!(c > 0.0)) throw ValidationError("poisson_solve: coefficient must be strictly positive");
        k = face_harmonic_average(*coeff);
    }
    PoissonSolver solver(std::move(k), opts);
    return solver.solve(rhs, stats);
}

VelocityField leray_project(const VelocityField& v, const PoissonSolver& solver, SolveStats* stats) {
    ScalarField div = divergence(v);
    // no-slip data: the mean is roundoff
    detail::remove_mean(div.v);
    const ScalarField phi = solver.solve(div, stats);
    VelocityField out = v;
    const VelocityField corr = weighted_gradient(phi, solver.coefficient());
    axpy(-1.0, corr.data, out.data);
    out.clear_boundary();
    return out;
}

VelocityField leray_project(const VelocityField& v, SolverOptions opts) {
    PoissonSolver solver(FaceField(v.grid, 1.0), opts);
    return leray_project(v, solver);
}

HelmholtzSolver::HelmholtzSolver(const Grid& g, int a, std::vector<double> c, double nu, SeparableSolver precond,
                                 SolverOptions opts)
    : grid_(g), axis_(a), c_(std::move(c)), nu_(nu), sep_(std::move(precond)), opts_(opts) {}

HelmholtzSolver HelmholtzSolver::height_only(const Grid& g, int a, std::span<const double> c_profile, double nu) {
    HelmholtzSolver s;
    s.grid_ = g;
    s.axis_ = a;
    s.nu_ = nu;
    s.sep_ = SeparableSolver::helmholtz(g, a, c_profile, nu);
    s.direct_ = true;
    return s;
}

void HelmholtzSolver::solve(std::span<const double> rhs, std::span<double> out, SolveStats* stats) const {
    const std::size_t nfull = grid_.faces(axis_);
    std::vector<double> interior(sep_->size());
    if (direct_) {
        SeparableSolver::gather_interior(grid_, axis_, rhs, interior);
        sep_->solve(interior);
        std::fill(out.begin(), out.end(), 0.0);
        SeparableSolver::scatter_interior(grid_, axis_, interior, out);
        if (stats) *stats = SolveStats{1, 0.0};
        return;
    }
    std::vector<double> b(rhs.begin(), rhs.end());
    {
        // Boundary-normal faces are not unknowns.
        std::vector<double> tmp(sep_->size());
        SeparableSolver::gather_interior(grid_, axis_, b, tmp);
        std::fill(b.begin(), b.end(), 0.0);
        SeparableSolver::scatter_interior(grid_, axis_, tmp, b);
    }
    std::vector<double> lap(nfull);
    auto apply = [&](std::span<const double> in, std::span<double> o) {
        laplacian_component(grid_, axis_, in, lap);
        for (std::size_t i = 0; i < nfull; ++i) o[i] = c_[i] * in[i] - nu_ * lap[i];
        // boundary entries: in is zero there and lap is zero there
    };
    auto pre = [&](std::span<const double> r, std::span<double> z) {
        SeparableSolver::gather_interior(grid_, axis_, r, interior);
        sep_->solve(interior);
        std::fill(z.begin(), z.end(), 0.0);
        SeparableSolver::scatter_interior(grid_, axis_, interior, z);
    };
    const SolveStats st = pcg(apply, pre, b, out, opts_.tol, default_iters(opts_, nfull), false);
    if (stats) *stats = st;
}

}  // namespace rtlab
