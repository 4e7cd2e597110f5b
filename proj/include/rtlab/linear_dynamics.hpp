#pragma once

// Linearized perturbation equations around the steady state:
//
//   rho_t + rho' u_d = 0
//   rho_bar u_t + grad q = mu lap u - g rho e_d,   div u = 0,   u = 0 on the walls.

#include "rtlab/growth_rate.hpp"

#include <utility>
#include <vector>

namespace rtlab {

struct LinearState {
    double t = 0.0;
    ScalarField rho_pert;
    VelocityField vel;
    ScalarField pressure;

    LinearState() = default;
    explicit LinearState(const Grid& g) : rho_pert(g), vel(g), pressure(g) {}
};

/// e^{lambda t} (-rho' I v_d / lambda, v, p) for the eigenpair in result. The pressure is
/// the discrete multiplier of the pair, so the state solves the semi-discrete system exactly.
LinearState analytic_mode(const GrowthRateResult& result, const VariationalProblem& prob, double t);

/// One step:
///   rho^{n+1} = rho^n - dt rho' I u_d^n
///   (rho_bar/dt - mu/2 lap) u* = rho_bar/dt u^n + mu/2 lap u^n - g I rho^{n+1} e_d - G q^n
///   D((1/rho_bar) G psi) = D u* / dt,  u^{n+1} = u* - dt G psi / rho_bar,  q^{n+1} = q^n + psi
/// All inner solves are direct, so the map is exactly linear.
class LinearStepper {
public:
    /// Throws ValidationError unless 0 < dt <= 0.25 h^2 min(rho) / mu.
    LinearStepper(const VariationalProblem& prob, double dt);

    LinearState step(const LinearState& s) const;
    double dt() const noexcept { return dt_; }
    static double max_dt(const VariationalProblem& prob);

private:
    const VariationalProblem* prob_;
    double dt_;
    std::vector<HelmholtzSolver> viscous_;
};

LinearState step_linear(const LinearState& s, double dt, const VariationalProblem& prob);

/// Least-squares slope of log(value) against t over the last half of the series.
/// Throws ValidationError for fewer than 3 points, non-increasing t or non-positive values.
double measured_growth_rate(const std::vector<std::pair<double, double>>& series);

/// sqrt(|rho|^2 + |u|^2) in L2.
double linear_norm(const LinearState& s);

/// L2 distance of (rho, u), pressure excluded.
double linear_distance(const LinearState& a, const LinearState& b);

}  // namespace rtlab
