#include "rtlab/nonlinear_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

namespace rtlab {

namespace {

double minmod(double a, double b) {
    if (a * b <= 0.0) return 0.0;
    return a > 0.0 ? std::min(a, b) : std::max(a, b);
}

Index3 step_axis(Index3 p, int a, int d) {
    p[a] += d;
    return p;
}

double max_abs(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

double wall_slope(double toward, double toward_bar, double centre, double lo, double hi, int side) {
    // side -1: wall below, value centre - s/2; side +1: wall above, value centre + s/2
    double s = minmod(toward, toward_bar);
    if (!(centre >= lo && centre <= hi)) return 0.0;
    if (side < 0) return std::clamp(s, 2.0 * (centre - hi), 2.0 * (centre - lo));
    return std::clamp(s, 2.0 * (lo - centre), 2.0 * (hi - centre));
}

}  // namespace

State State::from_linear(const LinearState& s) {
    State out;
    out.t = s.t;
    out.rho_pert = s.rho_pert;
    out.vel = s.vel;
    out.pressure = s.pressure;
    return out;
}

std::pair<double, double> reconstruction_range(const ScalarField& rho_pert, const ScalarField& rho_bar) {
    const Grid& g = rho_pert.grid;
    require_same_grid(g, rho_bar.grid);
    const double inf = std::numeric_limits<double>::infinity();
    double lo = inf, hi = -inf;
    auto rho = [&](int i, int j, int k) {
        const std::size_t c = g.cell_index(i, j, k);
        return rho_pert.v[c] + rho_bar.v[c];
    };
    for_each_cell(g, [&](int i, int j, int k) {
        const double r = rho(i, j, k);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
        for (int a = 0; a < g.dim(); ++a) {
            const Index3 c{i, j, k};
            if (c[a] == 0) {
                const Index3 n = step_axis(c, a, 1);
                const double w = r - 0.5 * minmod(rho(n.i, n.j, n.k) - r, rho_bar(n.i, n.j, n.k) - rho_bar(i, j, k));
                lo = std::min(lo, w);
                hi = std::max(hi, w);
            }
            if (c[a] == g.n(a) - 1) {
                const Index3 n = step_axis(c, a, -1);
                const double w = r + 0.5 * minmod(r - rho(n.i, n.j, n.k), rho_bar(i, j, k) - rho_bar(n.i, n.j, n.k));
                lo = std::min(lo, w);
                hi = std::max(hi, w);
            }
        }
    });
    return {lo, hi};
}

ScalarField advect_density(const ScalarField& rho_pert, const VelocityField& vel, const ScalarField& rho_bar,
                           double dt, double cfl_max, int* substeps, std::pair<double, double> bounds) {
    const Grid& g = rho_pert.grid;
    require_same_grid(g, vel.grid);
    require_same_grid(g, rho_bar.grid);
    if (!(dt > 0.0)) throw ValidationError("advect_density: dt must be positive");
    const int dim = g.dim();
    const double cfl = max_abs(vel.data) * dt / g.min_h();
    if (cfl > cfl_max) {
        std::ostringstream os;
        os << "advect_density: CFL number " << cfl << " exceeds " << cfl_max << "; reduce dt";
        throw NumericalError(os.str(), cfl);
    }

    // Largest outflow rate of any cell; 1.5 dt * rate <= 1 makes the update a convex combination.
    double rate = 0.0;
    for_each_cell(g, [&](int i, int j, int k) {
        double out = 0.0;
        for (int a = 0; a < dim; ++a) {
            const Index3 c{i, j, k};
            const Index3 up = step_axis(c, a, 1);
            out += (std::max(0.0, vel.at(a, up.i, up.j, up.k)) + std::max(0.0, -vel.at(a, i, j, k))) / g.h(a);
        }
        rate = std::max(rate, out);
    });
    const int nsub = std::max(1, int(std::ceil(1.5 * dt * rate * (1.0 + 1e-12))));
    if (substeps) *substeps = nsub;
    const double h_dt = dt / nsub;

    ScalarField pert = rho_pert;
    ScalarField rho(g);
    std::vector<double> slope(g.cells());
    ScalarField next(g);
    for (int sub = 0; sub < nsub; ++sub) {
        for (std::size_t i = 0; i < rho.v.size(); ++i) rho.v[i] = pert.v[i] + rho_bar.v[i];
        next.v = pert.v;
        for (int a = 0; a < dim; ++a) {
            const int na = g.n(a);
#pragma omp parallel for collapse(2) schedule(static)
            for (int k = 0; k < g.n(2); ++k)
                for (int j = 0; j < g.n(1); ++j)
                    for (int i = 0; i < g.n(0); ++i) {
                        const Index3 c{i, j, k};
                        const Index3 lo = step_axis(c, a, -1), hi = step_axis(c, a, 1);
                        double s;
                        if (c[a] == 0)
                            s = wall_slope(rho(hi.i, hi.j, hi.k) - rho(i, j, k),
                                           rho_bar(hi.i, hi.j, hi.k) - rho_bar(i, j, k), rho(i, j, k),
                                           bounds.first, bounds.second, -1);
                        else if (c[a] == na - 1)
                            s = wall_slope(rho(i, j, k) - rho(lo.i, lo.j, lo.k),
                                           rho_bar(i, j, k) - rho_bar(lo.i, lo.j, lo.k), rho(i, j, k),
                                           bounds.first, bounds.second, 1);
                        else
                            s = minmod(rho(i, j, k) - rho(lo.i, lo.j, lo.k), rho(hi.i, hi.j, hi.k) - rho(i, j, k));
                        slope[g.cell_index(i, j, k)] = s;
                    }
            const double f = h_dt / g.h(a);
#pragma omp parallel for collapse(2) schedule(static)
            for (int k = 0; k < g.n(2); ++k)
                for (int j = 0; j < g.n(1); ++j)
                    for (int i = 0; i < g.n(0); ++i) {
                        const Index3 c{i, j, k};
                        auto flux = [&](const Index3& face) {
                            // face between cells face - e_a and face
                            if (face[a] == 0 || face[a] == na) return 0.0;
                            const double u = vel.at(a, face.i, face.j, face.k);
                            const Index3 l = step_axis(face, a, -1);
                            const std::size_t il = g.cell_index(l.i, l.j, l.k);
                            const std::size_t ir = g.cell_index(face.i, face.j, face.k);
                            const double v = u > 0.0 ? rho.v[il] + 0.5 * slope[il] : rho.v[ir] - 0.5 * slope[ir];
                            return u * v;
                        };
                        next(i, j, k) -= f * (flux(step_axis(c, a, 1)) - flux(c));
                    }
        }
        std::swap(pert.v, next.v);
    }
    return pert;
}

VelocityField momentum_advection(const VelocityField& u) {
    const Grid& g = u.grid;
    const int dim = g.dim();
    VelocityField out(g);
    for (int a = 0; a < dim; ++a) {
        const auto m = g.face_dims(a);
        auto oc = out.comp(a);
        const auto uc = u.comp(a);
        auto at = [&](const Index3& p) { return uc[g.face_index(a, p.i, p.j, p.k)]; };
#pragma omp parallel for collapse(2) schedule(static)
        for (int k = 0; k < m[2]; ++k)
            for (int j = 0; j < m[1]; ++j)
                for (int i = 0; i < m[0]; ++i) {
                    const Index3 p{i, j, k};
                    if (p[a] == 0 || p[a] == m[a] - 1) continue;
                    const double up = at(p);
                    double acc = 0.0;
                    for (int b = 0; b < dim; ++b) {
                        double U;
                        if (b == a) {
                            U = up;
                        } else {
                            const Index3 l = step_axis(p, a, -1);
                            const Index3 l1 = step_axis(l, b, 1), p1 = step_axis(p, b, 1);
                            U = 0.25 * (u.at(b, l.i, l.j, l.k) + u.at(b, l1.i, l1.j, l1.k) + u.at(b, p.i, p.j, p.k) +
                                        u.at(b, p1.i, p1.j, p1.k));
                        }
                        if (U == 0.0) continue;
                        const int dir = U > 0.0 ? -1 : 1;
                        const int lim = m[b];
                        // neighbour values along b, with the no-slip ghost -u for tangential walls
                        auto val = [&](int off, bool& ghost) {
                            Index3 q = step_axis(p, b, off);
                            ghost = false;
                            if (q[b] < 0 || q[b] >= lim) {
                                ghost = true;
                                return -up;
                            }
                            return at(q);
                        };
                        bool g1, g2;
                        const double v1 = val(dir, g1);
                        const double v2 = g1 ? 0.0 : val(2 * dir, g2);
                        double d;
                        if (!g1 && !g2)
                            d = (3.0 * up - 4.0 * v1 + v2) / (2.0 * g.h(b));
                        else
                            d = (up - v1) / g.h(b);
                        acc += U * (-dir) * d;
                    }
                    oc[g.face_index(a, i, j, k)] = acc;
                }
    }
    return out;
}

double kinetic_energy(const ScalarField& rho_total, const VelocityField& u) {
    return 0.5 * weighted_inner(u, u, face_average(rho_total));
}

double energy_balance_residual(const State& before, const State& after, double dt, const VariationalProblem& prob) {
    ScalarField r0 = before.rho_pert, r1 = after.rho_pert;
    axpy(1.0, prob.rho().v, r0.v);
    axpy(1.0, prob.rho().v, r1.v);
    const double ke0 = kinetic_energy(r0, before.vel), ke1 = kinetic_energy(r1, after.vel);
    const double mu = prob.params().mu, g = prob.params().g;
    const ScalarField ud = cell_average(before.vel, prob.grid().vertical());
    const double work = g * inner(before.rho_pert, ud);
    return std::abs((ke1 - ke0) / dt + mu * grad_norm_sq(before.vel) + work) / std::max(1.0, ke0 / dt);
}

double energy_norm(const ScalarField& rho_pert, const VelocityField& u) {
    const double a = norm_l2(rho_pert), b = norm_h2(u);
    return std::sqrt(a * a + b * b);
}

NonlinearSolver::NonlinearSolver(const VariationalProblem& prob, NonlinearOptions opts) : prob_(&prob), opts_(opts) {
    if (!(opts_.solver_tol > 0.0) || !(opts_.cfl > 0.0) || !(opts_.cfl <= opts_.cfl_max))
        throw ValidationError("nonlinear options: need solver_tol > 0 and 0 < cfl <= cfl_max");
    dt_cap_ = LinearStepper::max_dt(prob);
    if (opts_.dt_max > 0.0) dt_cap_ = std::min(dt_cap_, opts_.dt_max);
    const Grid& g = prob.grid();
    const int nz = g.n(g.vertical());
    std::vector<double> kc(nz), kf(nz + 1);
    for (int z = 0; z < nz; ++z) kc[z] = 1.0 / prob.rho_rows()[z];
    for (int z = 0; z <= nz; ++z) kf[z] = 1.0 / prob.rho_vfaces()[z];
    poisson_pre_ = SeparableSolver::poisson(g, kc, kf);
}

const std::vector<SeparableSolver>& NonlinearSolver::viscous_pre(double dt) const {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (cached_dt_ != dt) {
        const VariationalProblem& prob = *prob_;
        const Grid& g = prob.grid();
        visc_pre_.clear();
        for (int a = 0; a < g.dim(); ++a) {
            std::vector<double> c;
            if (a == g.vertical())
                c.assign(prob.rho_vfaces().begin() + 1, prob.rho_vfaces().end() - 1);
            else
                c = prob.rho_rows();
            for (double& x : c) x /= dt;
            visc_pre_.push_back(SeparableSolver::helmholtz(g, a, c, 0.5 * prob.params().mu));
        }
        cached_dt_ = dt;
    }
    return visc_pre_;
}

std::pair<VelocityField, ScalarField> NonlinearSolver::momentum_step(const State& s, const ScalarField& rho_pert_new,
                                                                     double dt, StepReport* report) const {
    const VariationalProblem& prob = *prob_;
    const Grid& g = prob.grid();
    const int vz = g.vertical();
    const double mu = prob.params().mu;
    SolverOptions so;
    so.tol = opts_.solver_tol;

    ScalarField rho1 = rho_pert_new;
    axpy(1.0, prob.rho().v, rho1.v);
    const FaceField rf = face_average(rho1);

    VelocityField rhs = laplacian_dirichlet(s.vel);
    const VelocityField adv = momentum_advection(s.vel);
    for (std::size_t i = 0; i < rhs.data.size(); ++i)
        rhs.data[i] = rf.data[i] * (s.vel.data[i] / dt - adv.data[i]) + 0.5 * mu * rhs.data[i];
    {
        std::vector<double> b(g.faces(vz));
        cell_to_faces(rho_pert_new, vz, b);
        axpy(-prob.params().g, b, rhs.comp(vz));
    }
    axpy(-1.0, gradient(s.pressure).data, rhs.data);

    const auto& pre = viscous_pre(dt);
    VelocityField ustar(g);
    int visc_its = 0;
    for (int a = 0; a < g.dim(); ++a) {
        const auto rc = rf.comp(a);
        std::vector<double> c(rc.begin(), rc.end());
        for (double& x : c) x /= dt;
        const HelmholtzSolver hs(g, a, std::move(c), 0.5 * mu, pre[a], so);
        SolveStats st;
        hs.solve(rhs.comp(a), ustar.comp(a), &st);
        visc_its += st.iterations;
    }

    FaceField k(g);
    for (std::size_t i = 0; i < k.data.size(); ++i) k.data[i] = 1.0 / rf.data[i];
    const PoissonSolver ps(std::move(k), *poisson_pre_, so);
    ScalarField div = divergence(ustar);
    detail::remove_mean(div.v);
    SolveStats pst;
    const ScalarField phi = ps.solve(div, &pst);
    VelocityField u = ustar;
    axpy(-1.0, weighted_gradient(phi, ps.coefficient()).data, u.data);
    u.clear_boundary();
    ScalarField q = s.pressure;
    axpy(1.0 / dt, phi.v, q.v);
    if (report) {
        report->pressure_iterations = pst.iterations;
        report->viscous_iterations = visc_its;
    }
    return {std::move(u), std::move(q)};
}

std::pair<State, StepReport> NonlinearSolver::step(const State& s, double dt) const {
    const VariationalProblem& prob = *prob_;
    if (!(dt > 0.0) || dt > dt_cap_ * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "step: dt = " << dt << " outside (0, " << dt_cap_ << "]";
        throw ValidationError(os.str());
    }
    StepReport rep;
    rep.dt = dt;
    State out(prob.grid());
    out.t = s.t + dt;
    out.rho_bounds = s.rho_bounds ? *s.rho_bounds : reconstruction_range(s.rho_pert, prob.rho());
    out.rho_pert = advect_density(s.rho_pert, s.vel, prob.rho(), dt, opts_.cfl_max, &rep.substeps, *out.rho_bounds);
    auto [u, q] = momentum_step(s, out.rho_pert, dt, &rep);
    out.vel = std::move(u);
    out.pressure = std::move(q);

    rep.divergence_residual = norm_l2(divergence(out.vel));
    rep.rho_min = std::numeric_limits<double>::infinity();
    rep.rho_max = -rep.rho_min;
    for (std::size_t i = 0; i < out.rho_pert.v.size(); ++i) {
        const double r = out.rho_pert.v[i] + prob.rho().v[i];
        rep.rho_min = std::min(rep.rho_min, r);
        rep.rho_max = std::max(rep.rho_max, r);
    }
    rep.energy_residual = energy_balance_residual(s, out, dt, prob);
    if (!std::isfinite(rep.divergence_residual) || !std::isfinite(rep.energy_residual) || !(rep.rho_min > 0.0))
        throw NumericalError("step: state left the admissible set (non-finite values or non-positive density)");
    return {std::move(out), rep};
}

double NonlinearSolver::adaptive_dt(const State& s) const {
    const double umax = std::max(max_abs(s.vel.data), opts_.velocity_floor);
    return std::min(dt_cap_, opts_.cfl * prob_->grid().min_h() / umax);
}

TrajectorySummary run(const NonlinearSolver& solver, State initial, double tmax, const Recorder& recorder,
                      double fixed_dt) {
    const VariationalProblem& prob = solver.problem();
    require_same_grid(prob.grid(), initial.vel.grid);
    if (!initial.vel.is_no_slip()) throw ValidationError("run: initial velocity must vanish on the walls");
    const double div0 = norm_l2(divergence(initial.vel));
    if (div0 > 1e-8 * std::max(1.0, norm_l2(initial.vel)))
        throw ValidationError("run: initial velocity is not divergence-free");
    TrajectorySummary sum;
    sum.rho_min = std::numeric_limits<double>::infinity();
    sum.rho_max = -sum.rho_min;
    State s = std::move(initial);
    const double t0 = s.t;
    while (s.t < tmax - 1e-12 * std::max(1.0, tmax)) {
        double dt = fixed_dt > 0.0 ? fixed_dt : solver.adaptive_dt(s);
        if (s.t + dt > tmax) dt = tmax - s.t;
        try {
            auto [next, rep] = solver.step(s, dt);
            s = std::move(next);
            ++sum.steps;
            sum.t_final = s.t;
            sum.max_divergence = std::max(sum.max_divergence, rep.divergence_residual);
            sum.rho_min = std::min(sum.rho_min, rep.rho_min);
            sum.rho_max = std::max(sum.rho_max, rep.rho_max);
            sum.max_energy_residual = std::max(sum.max_energy_residual, rep.energy_residual);
            if (recorder && !recorder(s, rep)) break;
        } catch (const NumericalError& e) {
            sum.failed = true;
            sum.failure = e.what();
            break;
        }
    }
    if (sum.steps == 0) sum.t_final = t0;
    return sum;
}

}  // namespace rtlab
