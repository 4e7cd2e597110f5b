#pragma once

// Experiments on the nonlinear instability: error scaling against the linear mode,
// escape times and the profile without a positive lower bound on rho'.

#include "rtlab/nonlinear_dynamics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rtlab {

struct SeedData {
    ScalarField rho0;    ///< -c rho' I v_d / lambda
    VelocityField u0;    ///< c v
    ScalarField q0;      ///< c times the discrete pressure multiplier
    double energy = 0.0; ///< sqrt(|rho0|^2 + |u0|^2_{H2}), equal to 1
    double norm_rho = 0.0, norm_ud = 0.0, norm_uh = 0.0;
    double m0 = 0.0;     ///< smallest of the three norms
    double c2 = 0.0;     ///< L2 norm of (rho0, u0)
};

/// Throws ValidationError when lambda = 0 and NumericalError when a norm is below 1e-12.
SeedData build_seed(const GrowthRateResult& result, const VariationalProblem& prob);

/// delta * seed as a nonlinear state at t = 0.
State scaled_state(const SeedData& seed, double delta);

/// Component norms used for escape detection: |rho|, |u_d|, |u_h| in L2.
std::array<double, 3> component_norms(const ScalarField& rho, const VelocityField& u);

struct LabConfig {
    double lambda_dt = 0.005;   ///< fixed time step as a fraction of 1/lambda
    NonlinearOptions nonlinear;
    int threads = 0;            ///< 0: RT_LAB_THREADS or the hardware concurrency
};

struct ErrorScalingRow {
    double delta = 0.0;
    double lambda_t = 0.0;
    double t = 0.0;
    double err = 0.0;           ///< |(rho, u)_nonlinear - delta (rho, u)_linear| in L2
    double bound_ratio = 0.0;   ///< err / (delta^{3/2} e^{3/2 lambda t})
    bool failed = false;
};

struct ErrorScalingResult {
    std::vector<ErrorScalingRow> rows;
    double fit_lambda_t = 1.0;
    double fitted_exponent = 0.0;   ///< slope of log err against log delta at fit_lambda_t
    double fitted_c = 0.0;          ///< largest bound_ratio
    double bound_ratio_spread = 0.0;///< max over deltas of the per-delta peak ratio / min of the same
    double dt = 0.0;
};

/// The linear reference is the discrete linear evolution of the seed with the same dt, so the
/// comparison isolates the nonlinear error from the time discretization.
/// Throws ValidationError if max delta e^{lambda max t} > 0.5.
ErrorScalingResult run_error_scaling(const VariationalProblem& prob, const GrowthRateResult& result,
                                     const SeedData& seed, const std::vector<double>& deltas,
                                     const std::vector<double>& lambda_t, double fit_lambda_t,
                                     const LabConfig& cfg);

struct EscapeRow {
    double delta = 0.0;
    double t_measured = 0.0;
    double t_predicted = 0.0;   ///< ln(2 eps0 / delta) / lambda
    bool escaped = false;
    bool bound_held = true;     ///< |(rho, u)| <= 2 delta C2 e^{lambda t} up to escape
    std::array<double, 3> norms_at_escape{};
    double energy_at_escape = 0.0;
    std::string failure;
};

struct EscapeTimeResult {
    std::vector<EscapeRow> rows;
    double epsilon0 = 0.0;
    double epsilon = 0.0;
    double slope = 0.0;          ///< d T / d ln(1/delta)
    double inverse_lambda = 0.0;
    double slope_ratio = 0.0;    ///< slope * lambda
    double dt = 0.0;
};

/// eps0 = 0.05 / max(1, fitted_c).
double choose_epsilon0(double fitted_c);

EscapeTimeResult run_escape_time(const VariationalProblem& prob, const GrowthRateResult& result,
                                 const SeedData& seed, std::vector<double> deltas, double epsilon0,
                                 const LabConfig& cfg);

struct HeadlineReport {
    std::string profile;
    double lambda = 0.0;
    bool stable = false;
    bool marginal = false;
    double min_drho = 0.0, max_drho = 0.0;
    double lambda_linear_comparator = 0.0;  ///< linear profile with b = max rho'
    std::optional<ErrorScalingResult> error_scaling;
    std::optional<EscapeTimeResult> escape;
};

/// Growth rate, pilot error scaling, escape-time regression and the linear comparator.
/// A profile without rising density stops after the growth rate with stable = true.
HeadlineReport run_headline_case(const DensityProfile& profile, const Grid& grid, PhysicalParams params,
                                 const std::vector<double>& deltas, const LabConfig& cfg,
                                 EigenOptions eig = {});

/// Least-squares slope of y against x.
double regression_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Worker count for delta ladders: cfg.threads, else RT_LAB_THREADS, else hardware concurrency.
int lab_threads(const LabConfig& cfg);

}  // namespace rtlab
