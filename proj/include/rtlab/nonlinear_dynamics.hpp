#pragma once

// Full perturbation equations around the steady state, total density rho = rho_bar + rho_pert:
//
//   rho_t + u . grad rho = 0
//   rho (u_t + u . grad u) + grad q = mu lap u - g rho_pert e_d,   div u = 0,   u = 0 on the walls.

#include "rtlab/linear_dynamics.hpp"

#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>

namespace rtlab {

struct State {
    double t = 0.0;
    ScalarField rho_pert;
    VelocityField vel;
    ScalarField pressure;
    /// Range of the initial total density; set by the first step and carried along.
    std::optional<std::pair<double, double>> rho_bounds;

    State() = default;
    explicit State(const Grid& g) : rho_pert(g), vel(g), pressure(g) {}
    static State from_linear(const LinearState& s);
};

struct StepReport {
    double dt = 0.0;
    int substeps = 1;                 ///< density transport substeps
    double divergence_residual = 0.0; ///< L2 norm of div u after the step
    double rho_min = 0.0, rho_max = 0.0;
    double energy_residual = 0.0;
    int pressure_iterations = 0;
    int viscous_iterations = 0;
};

struct NonlinearOptions {
    double solver_tol = 1e-12;
    double cfl = 0.4;
    double cfl_max = 0.5;      ///< advect_density refuses larger Courant numbers
    double dt_max = 0.0;       ///< 0: the viscous guard 0.25 h^2 min(rho_bar) / mu
    double velocity_floor = 1e-12;
};

/// Second-order upwind MUSCL (minmod) transport of the total density in flux form.
/// Slopes in wall cells are limited against the steady profile, so a linear steady profile
/// is reconstructed exactly, and are clipped so the reconstructed wall value stays in bounds.
/// Substeps keep every update a convex combination, so values stay inside the bounds when the
/// input does. Throws NumericalError when max|u| dt / min h exceeds cfl_max.
ScalarField advect_density(const ScalarField& rho_pert, const VelocityField& vel, const ScalarField& rho_bar,
                           double dt, double cfl_max = 0.5, int* substeps = nullptr,
                           std::pair<double, double> bounds = {-std::numeric_limits<double>::infinity(),
                                                               std::numeric_limits<double>::infinity()});

/// Range of the piecewise-linear reconstruction of the total density: cell values and
/// reconstructed wall values.
std::pair<double, double> reconstruction_range(const ScalarField& rho_pert, const ScalarField& rho_bar);

/// u . grad u on the faces of every component (second-order upwind, first order next to walls).
VelocityField momentum_advection(const VelocityField& u);

/// Discrete kinetic energy 1/2 sum rho_face |u|^2 vol.
double kinetic_energy(const ScalarField& rho_total, const VelocityField& u);

/// |(KE1 - KE0)/dt + mu |grad u0|^2 + g <rho_pert0, I u0_d>| / max(1, KE0/dt).
double energy_balance_residual(const State& before, const State& after, double dt, const VariationalProblem& prob);

/// sqrt(|rho_pert|^2 + |u|^2_{H2}).
double energy_norm(const ScalarField& rho_pert, const VelocityField& u);

class NonlinearSolver {
public:
    NonlinearSolver(const VariationalProblem& prob, NonlinearOptions opts = {});

    /// advect_density followed by momentum_step.
    std::pair<State, StepReport> step(const State& s, double dt) const;

    /// Velocity and pressure update for a given new density (returns iteration counts in report).
    std::pair<VelocityField, ScalarField> momentum_step(const State& s, const ScalarField& rho_pert_new, double dt,
                                                        StepReport* report = nullptr) const;

    /// min(dt_max, cfl min h / max(|u|, floor)).
    double adaptive_dt(const State& s) const;
    double dt_cap() const noexcept { return dt_cap_; }
    const VariationalProblem& problem() const noexcept { return *prob_; }

private:
    const std::vector<SeparableSolver>& viscous_pre(double dt) const;

    const VariationalProblem* prob_;
    NonlinearOptions opts_;
    double dt_cap_;
    std::optional<SeparableSolver> poisson_pre_;
    // separable viscous preconditioners built from rho_bar for the last dt used
    mutable std::mutex cache_mutex_;
    mutable double cached_dt_ = -1.0;
    mutable std::vector<SeparableSolver> visc_pre_;
};

struct TrajectorySummary {
    int steps = 0;
    double t_final = 0.0;
    bool failed = false;
    std::string failure;
    double max_divergence = 0.0;
    double rho_min = 0.0, rho_max = 0.0;
    double max_energy_residual = 0.0;
};

/// Called after every accepted step; returning false stops the run.
using Recorder = std::function<bool(const State&, const StepReport&)>;

/// Integrates to tmax with adaptive steps, or fixed steps when fixed_dt > 0 (the last step is
/// shortened to land on tmax). Solver failures end the run with failed = true.
TrajectorySummary run(const NonlinearSolver& solver, State initial, double tmax, const Recorder& recorder,
                      double fixed_dt = 0.0);

}  // namespace rtlab
