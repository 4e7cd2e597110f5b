#include "rtlab/linear_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rtlab {

LinearState analytic_mode(const GrowthRateResult& result, const VariationalProblem& prob, double t) {
    if (!(result.lambda > 0.0)) throw ValidationError("analytic_mode: no unstable mode (lambda = 0)");
    const Grid& g = prob.grid();
    require_same_grid(g, result.eigenfield.grid);
    const double lam = result.lambda;
    const double e = std::exp(lam * t);
    LinearState s(g);
    s.t = t;
    const ScalarField vd = cell_average(result.eigenfield, g.vertical());
    for (std::size_t i = 0; i < s.rho_pert.v.size(); ++i) s.rho_pert.v[i] = -e * prob.drho().v[i] * vd.v[i] / lam;
    s.vel = result.eigenfield;
    for (double& x : s.vel.data) x *= e;
    boundary_problem_residual(prob, lam, result.eigenfield, &s.pressure, WallClosure::Reflect);
    for (double& x : s.pressure.v) x *= e;
    return s;
}

double LinearStepper::max_dt(const VariationalProblem& prob) {
    const double h = prob.grid().min_h();
    double rmin = prob.rho_rows()[0];
    for (double r : prob.rho_rows()) rmin = std::min(rmin, r);
    return 0.25 * h * h * rmin / prob.params().mu;
}

LinearStepper::LinearStepper(const VariationalProblem& prob, double dt) : prob_(&prob), dt_(dt) {
    const double cap = max_dt(prob);
    if (!(dt > 0.0) || dt > cap * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "step_linear: dt = " << dt << " outside (0, " << cap << "]; reduce dt";
        throw ValidationError(os.str());
    }
    const Grid& g = prob.grid();
    const int vz = g.vertical();
    for (int a = 0; a < g.dim(); ++a) {
        std::vector<double> c;
        if (a == vz)
            c.assign(prob.rho_vfaces().begin() + 1, prob.rho_vfaces().end() - 1);
        else
            c = prob.rho_rows();
        for (double& x : c) x /= dt;
        viscous_.push_back(HelmholtzSolver::height_only(g, a, c, 0.5 * prob.params().mu));
    }
}

LinearState LinearStepper::step(const LinearState& s) const {
    const VariationalProblem& prob = *prob_;
    const Grid& g = prob.grid();
    require_same_grid(g, s.vel.grid);
    const int vz = g.vertical();
    const double mu = prob.params().mu, dt = dt_;
    LinearState out(g);
    out.t = s.t + dt;

    const ScalarField ud = cell_average(s.vel, vz);
    for (std::size_t i = 0; i < out.rho_pert.v.size(); ++i)
        out.rho_pert.v[i] = s.rho_pert.v[i] - dt * prob.drho().v[i] * ud.v[i];

    VelocityField rhs = laplacian_dirichlet(s.vel);
    const auto& rf = prob.rho_face().data;
    for (std::size_t i = 0; i < rhs.data.size(); ++i) rhs.data[i] = rf[i] / dt * s.vel.data[i] + 0.5 * mu * rhs.data[i];
    {
        std::vector<double> b(g.faces(vz));
        cell_to_faces(out.rho_pert, vz, b);
        axpy(-prob.params().g, b, rhs.comp(vz));
    }
    axpy(-1.0, gradient(s.pressure).data, rhs.data);

    VelocityField ustar(g);
    for (int a = 0; a < g.dim(); ++a) viscous_[a].solve(rhs.comp(a), ustar.comp(a));

    ScalarField div = divergence(ustar);
    detail::remove_mean(div.v);
    const ScalarField phi = prob.projector().solve(div);
    out.vel = ustar;
    axpy(-1.0, weighted_gradient(phi, prob.projector().coefficient()).data, out.vel.data);
    out.vel.clear_boundary();
    out.pressure = s.pressure;
    axpy(1.0 / dt, phi.v, out.pressure.v);
    return out;
}

LinearState step_linear(const LinearState& s, double dt, const VariationalProblem& prob) {
    return LinearStepper(prob, dt).step(s);
}

double measured_growth_rate(const std::vector<std::pair<double, double>>& series) {
    if (series.size() < 3) throw ValidationError("measured_growth_rate: need at least 3 points");
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!(series[i].second > 0.0) || !std::isfinite(series[i].second))
            throw ValidationError("measured_growth_rate: values must be positive");
        if (i > 0 && !(series[i].first > series[i - 1].first))
            throw ValidationError("measured_growth_rate: times must be strictly increasing");
    }
    const std::size_t n = series.size();
    const std::size_t lo = std::min(n / 2, n - 3);
    double st = 0, sy = 0;
    const double m = double(n - lo);
    for (std::size_t i = lo; i < n; ++i) {
        st += series[i].first;
        sy += std::log(series[i].second);
    }
    st /= m;
    sy /= m;
    double num = 0, den = 0;
    for (std::size_t i = lo; i < n; ++i) {
        const double dt = series[i].first - st;
        num += dt * (std::log(series[i].second) - sy);
        den += dt * dt;
    }
    return num / den;
}

double linear_norm(const LinearState& s) {
    const double a = norm_l2(s.rho_pert), b = norm_l2(s.vel);
    return std::sqrt(a * a + b * b);
}

double linear_distance(const LinearState& a, const LinearState& b) {
    ScalarField dr = a.rho_pert;
    axpy(-1.0, b.rho_pert.v, dr.v);
    VelocityField du = a.vel;
    axpy(-1.0, b.vel.data, du.data);
    const double x = norm_l2(dr), y = norm_l2(du);
    return std::sqrt(x * x + y * y);
}

}  // namespace rtlab
