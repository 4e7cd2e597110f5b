#include "rtlab/growth_rate.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace rtlab {

namespace {

double row_value(const ScalarField& f, int z) {
    const Grid& g = f.grid;
    return g.dim() == 2 ? f(0, z, 0) : f(0, 0, z);
}

void require_height_only(const ScalarField& f, const char* what) {
    const Grid& g = f.grid;
    const int vz = g.vertical();
    for_each_cell(g, [&](int i, int j, int k) {
        const Index3 c{i, j, k};
        const double r = row_value(f, c[vz]);
        if (std::abs(f(i, j, k) - r) > 1e-14 * std::max(1.0, std::abs(r)))
            throw ValidationError(std::string("variational problem: ") + what + " must depend on height only");
    });
}

}  // namespace

VariationalProblem::VariationalProblem(const DensityProfile& profile, const Grid& grid, PhysicalParams params,
                                       EigenOptions opts)
    : params_(params), opts_(opts) {
    if (std::abs(profile.height() - grid.extent(grid.vertical())) > 1e-12 * profile.height())
        throw ValidationError("variational problem: profile height differs from the vertical grid extent");
    auto [r, d] = sample_profile(profile, grid);
    rho_ = std::move(r);
    drho_ = std::move(d);
    finish_setup();
}

VariationalProblem::VariationalProblem(ScalarField rho, ScalarField drho, PhysicalParams params, EigenOptions opts)
    : rho_(std::move(rho)), drho_(std::move(drho)), params_(params), opts_(opts) {
    require_same_grid(rho_.grid, drho_.grid);
    for (double v : rho_.v)
        if (!(v > 0.0)) throw ValidationError("variational problem: density must be positive");
    finish_setup();
}

void VariationalProblem::finish_setup() {
    params_.validate();
    if (opts_.krylov_dim < 4) throw ValidationError("eigen options: krylov_dim must be at least 4");
    if (!(opts_.residual_tol > 0.0) || !(opts_.root_tol > 0.0))
        throw ValidationError("eigen options: tolerances must be positive");
    require_height_only(rho_, "rho");
    require_height_only(drho_, "rho'");
    const Grid& g = rho_.grid;
    const int nz = g.n(g.vertical());
    rho_rows_.resize(nz);
    for (int z = 0; z < nz; ++z) rho_rows_[z] = row_value(rho_, z);
    rho_vfaces_.resize(nz + 1);
    rho_vfaces_[0] = rho_rows_[0];
    rho_vfaces_[nz] = rho_rows_[nz - 1];
    for (int z = 1; z < nz; ++z) rho_vfaces_[z] = 0.5 * (rho_rows_[z - 1] + rho_rows_[z]);
    rho_face_ = face_average(rho_);

    std::vector<double> kc(nz), kf(nz + 1);
    for (int z = 0; z < nz; ++z) kc[z] = 1.0 / rho_rows_[z];
    for (int z = 0; z <= nz; ++z) kf[z] = 1.0 / rho_vfaces_[z];
    projector_ = std::make_shared<const PoissonSolver>(PoissonSolver::height_only(g, kc, kf));

    rising_ = std::any_of(drho_.v.begin(), drho_.v.end(), [](double d) { return d > 1e-12; });
}

VelocityField VariationalProblem::project(const VelocityField& v) const {
    return leray_project(v, *projector_);
}

VelocityField VariationalProblem::buoyancy(const VelocityField& w) const {
    const Grid& g = grid();
    const int vz = g.vertical();
    ScalarField c = cell_average(w, vz);
    for (std::size_t i = 0; i < c.v.size(); ++i) c.v[i] *= params_.g * drho_.v[i];
    VelocityField out(g);
    cell_to_faces(c, vz, out.comp(vz));
    return out;
}

double VariationalProblem::buoyancy_form(const VelocityField& w) const {
    const ScalarField c = cell_average(w, grid().vertical());
    return params_.g * weighted_dot(drho_.v, c.v, c.v) * grid().cell_volume();
}

double VariationalProblem::mass_inner(const VelocityField& u, const VelocityField& v) const {
    return weighted_inner(u, v, rho_face_);
}

double VariationalProblem::rayleigh_quotient(const VelocityField& w, double s) const {
    const double den = mass_inner(w, w);
    if (!(den > 0.0)) throw ValidationError("rayleigh_quotient: zero field");
    return (buoyancy_form(w) - s * params_.mu * grad_norm_sq(w)) / den;
}

VelocityField VariationalProblem::seed_field() const {
    std::mt19937_64 rng(opts_.seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    VelocityField w(grid());
    for (double& x : w.data) x = nd(rng);
    w.clear_boundary();
    w = project(w);
    const double n = std::sqrt(mass_inner(w, w));
    for (double& x : w.data) x /= n;
    return w;
}

namespace {

// K w = P M^{-1} (A + s mu lap) w, self-adjoint in the rho-weighted inner product on
// divergence-free fields.
VelocityField apply_pencil(const VariationalProblem& prob, double s, const VelocityField& w) {
    VelocityField t = prob.buoyancy(w);
    const double c = s * prob.params().mu;
    if (c != 0.0) axpy(c, laplacian_dirichlet(w).data, t.data);
    const auto& rf = prob.rho_face().data;
    for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] /= rf[i];
    return prob.project(t);
}

void normalize(const VariationalProblem& prob, VelocityField& w) {
    const double n = std::sqrt(prob.mass_inner(w, w));
    if (!(n > 0.0) || !std::isfinite(n)) throw NumericalError("alpha: degenerate start vector");
    for (double& x : w.data) x /= n;
}

}  // namespace

AlphaResult alpha(const VariationalProblem& prob, double s, const VelocityField* start) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("alpha: penalty s must be finite and nonnegative");
    const EigenOptions& o = prob.options();

    VelocityField x;
    if (start) {
        require_same_grid(start->grid, prob.grid());
        // Mix in the seed so every symmetry class of the pencil stays represented.
        x = prob.project(*start);
        const double n = std::sqrt(prob.mass_inner(x, x));
        VelocityField seed = prob.seed_field();
        if (n > 0.0) axpy(1.0 / n, x.data, seed.data);
        x = std::move(seed);
    } else {
        x = prob.seed_field();
    }
    normalize(prob, x);

    int total = 0;
    double last_res = 0.0, last_theta = 0.0, prev_restart_theta = std::numeric_limits<double>::quiet_NaN();
    const int m = o.krylov_dim;
    std::vector<VelocityField> Q;
    Q.reserve(m);
    while (true) {
        Q.clear();
        std::vector<double> al, be;
        VelocityField q = x;
        bool done = false;
        Eigen::VectorXd y;
        double theta = 0.0;
        for (int j = 0; j < m; ++j) {
            Q.push_back(q);
            VelocityField w = apply_pencil(prob, s, Q[j]);
            ++total;
            const double a = prob.mass_inner(w, Q[j]);
            axpy(-a, Q[j].data, w.data);
            if (j > 0) axpy(-be[j - 1], Q[j - 1].data, w.data);
            for (int pass = 0; pass < 2; ++pass)
                for (int i = 0; i <= j; ++i) axpy(-prob.mass_inner(w, Q[i]), Q[i].data, w.data);
            const double b = std::sqrt(std::max(0.0, prob.mass_inner(w, w)));
            al.push_back(a);
            be.push_back(b);

            const bool last = j + 1 == m;
            const bool check = last || j % 5 == 4 || j == 0;
            double scale = 1.0;
            if (check || b == 0.0) {
                Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(al.data(), j + 1);
                Eigen::VectorXd e = j > 0 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(be.data(), j))
                                          : Eigen::VectorXd();
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
                es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
                theta = es.eigenvalues()(j);
                y = es.eigenvectors().col(j);
                last_res = b * std::abs(y(j));
                last_theta = theta;
                scale = std::max(1.0, std::abs(theta));
                if (last_res <= o.residual_tol * scale || b <= 1e-14 * scale) done = true;
            }
            if (done || last || total >= o.max_iterations) break;
            if (b <= 1e-14 * scale) {
                done = true;
                break;
            }
            q = w;
            for (double& v : q.data) v /= b;
        }
        x = VelocityField(prob.grid());
        for (int i = 0; i < y.size(); ++i) axpy(y(i), Q[i].data, x.data);
        x = prob.project(x);
        normalize(prob, x);
        if (!done && std::abs(last_theta - prev_restart_theta) <= 1e-14 * std::max(1.0, std::abs(last_theta)))
            done = true;
        if (done) break;
        if (total >= o.max_iterations) {
            std::ostringstream os;
            os << "alpha: Lanczos did not converge after " << total << " operator applications (s = " << s
               << ", Ritz value " << last_theta << ", residual " << last_res << ")";
            throw NumericalError(os.str(), last_res);
        }
        prev_restart_theta = last_theta;
    }
    AlphaResult r;
    r.maximizer = std::move(x);
    r.value = prob.rayleigh_quotient(r.maximizer, s);
    r.iterations = total;
    r.residual = last_res;
    return r;
}

double oracle_alpha_dense(const VariationalProblem& prob, double s) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("oracle: penalty s must be finite and nonnegative");
    const Grid& g = prob.grid();
    std::vector<std::size_t> unknowns;  // positions in FaceField::data
    for (int a = 0; a < g.dim(); ++a) {
        VelocityField probe(g);
        for_each_interior_face(g, a, [&](int i, int j, int k) {
            unknowns.push_back(probe.offset[a] + g.face_index(a, i, j, k));
        });
    }
    const Eigen::Index n = Eigen::Index(unknowns.size());
    if (n > 2000) {
        std::ostringstream os;
        os << "oracle_alpha_dense: " << n << " velocity unknowns exceed the dense limit of 2000";
        throw ValidationError(os.str());
    }
    const Eigen::Index nc = Eigen::Index(g.cells());
    Eigen::MatrixXd D(nc, n), S(n, n);
    Eigen::VectorXd M(n);
    const double c = s * prob.params().mu;
    VelocityField e(g);
    for (Eigen::Index col = 0; col < n; ++col) {
        e.data[unknowns[col]] = 1.0;
        const ScalarField div = divergence(e);
        for (Eigen::Index r = 0; r < nc; ++r) D(r, col) = div.v[r];
        const VelocityField b = prob.buoyancy(e);
        const VelocityField l = laplacian_dirichlet(e);
        for (Eigen::Index r = 0; r < n; ++r) S(r, col) = b.data[unknowns[r]] + c * l.data[unknowns[r]];
        M(col) = prob.rho_face().data[unknowns[col]];
        e.data[unknowns[col]] = 0.0;
    }
    S = 0.5 * (S + S.transpose()).eval();

    Eigen::BDCSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-10 * sv(0)) ++rank;
    const Eigen::MatrixXd Z = svd.matrixV().rightCols(n - rank);
    const Eigen::MatrixXd Sr = Z.transpose() * S * Z;
    const Eigen::MatrixXd Mr = Z.transpose() * M.asDiagonal() * Z;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(0.5 * (Sr + Sr.transpose()),
                                                                  0.5 * (Mr + Mr.transpose()), Eigen::EigenvaluesOnly);
    if (ges.info() != Eigen::Success) throw NumericalError("oracle_alpha_dense: dense eigensolver failed");
    return ges.eigenvalues().maxCoeff();
}

double boundary_problem_residual(const VariationalProblem& prob, double lambda, const VelocityField& v,
                                 ScalarField* pressure, WallClosure closure) {
    const Grid& g = prob.grid();
    VelocityField r = prob.buoyancy(v);
    axpy(lambda * prob.params().mu, laplacian_dirichlet(v, closure).data, r.data);
    VelocityField inertia(g);
    const auto& rf = prob.rho_face().data;
    for (std::size_t i = 0; i < r.data.size(); ++i) inertia.data[i] = lambda * lambda * rf[i] * v.data[i];
    axpy(-1.0, inertia.data, r.data);
    r.clear_boundary();

    const int nz = g.n(g.vertical());
    const std::vector<double> kc(nz, 1.0), kf(nz + 1, 1.0);
    const PoissonSolver solver = PoissonSolver::height_only(g, kc, kf);
    ScalarField div = divergence(r);
    detail::remove_mean(div.v);
    const ScalarField phi = solver.solve(div);
    axpy(-1.0, gradient(phi).data, r.data);
    if (pressure) {
        *pressure = phi;
        for (double& x : pressure->v) x /= lambda;
    }
    const double den = norm_l2(inertia);
    return den > 0.0 ? norm_l2(r) / den : norm_l2(r);
}

EigenPair eigenpair(const VariationalProblem& prob, double lambda, const VelocityField* start) {
    if (!(lambda > 0.0)) throw ValidationError("eigenpair: lambda must be positive");
    AlphaResult a = alpha(prob, lambda, start);
    EigenPair ep;
    ep.alpha = a.value;
    ep.iterations = a.iterations;
    ep.v = std::move(a.maximizer);
    ep.residual = boundary_problem_residual(prob, lambda, ep.v, &ep.p);
    return ep;
}

GrowthRateResult solve_lambda(const VariationalProblem& prob) {
    GrowthRateResult res;
    res.pressure = ScalarField(prob.grid());
    res.eigenfield = VelocityField(prob.grid());
    if (!prob.rising()) {
        res.stable = true;
        return res;
    }
    const EigenOptions& o = prob.options();
    AlphaResult a0 = alpha(prob, 0.0);
    res.iterations += a0.iterations;
    res.alpha_evaluations = 1;
    if (a0.value <= 0.0) {
        res.stable = true;
        return res;
    }
    if (a0.value < o.marginal) {
        res.marginal = true;
        return res;
    }

    VelocityField warm = a0.maximizer;
    auto F = [&](double s) {
        AlphaResult a = alpha(prob, s, &warm);
        res.iterations += a.iterations;
        ++res.alpha_evaluations;
        warm = std::move(a.maximizer);
        return a.value - s * s;
    };

    double s_hi = std::sqrt(a0.value);
    double f_hi = F(s_hi);
    int doublings = 0;
    while (f_hi > 0.0) {
        if (++doublings > 60) throw NumericalError("solve_lambda: no sign change after 60 bracket doublings");
        s_hi *= 2.0;
        f_hi = F(s_hi);
    }
    double lambda = s_hi;
    if (f_hi < 0.0) {
        const double width = o.root_tol * std::max(1.0, s_hi);
        auto tol = [width](double lo, double hi) { return std::abs(hi - lo) <= width; };
        std::uintmax_t max_iter = 200;
        const auto [lo, hi] =
            boost::math::tools::toms748_solve(F, 0.0, s_hi, a0.value, f_hi, tol, max_iter);
        lambda = 0.5 * (lo + hi);
    }

    EigenPair ep = eigenpair(prob, lambda, &warm);
    res.iterations += ep.iterations;
    ++res.alpha_evaluations;
    res.lambda = lambda;
    res.alpha_at_lambda = ep.alpha;
    res.fixedpoint_residual = std::abs(lambda * lambda - ep.alpha);
    res.eigen_residual = ep.residual;
    res.eigenfield = std::move(ep.v);
    res.pressure = std::move(ep.p);
    return res;
}

}  // namespace rtlab
