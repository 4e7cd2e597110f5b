#pragma once

// Steady density profiles rho(z) of the quiescent hydrostatic state.

#include "rtlab/grid.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <utility>

namespace rtlab {

struct PhysicalParams {
    double mu = 0.01;  ///< shear viscosity
    double g = 1.0;    ///< gravitational constant

    /// Throws ValidationError unless both are strictly positive.
    void validate() const;
};

enum class ProfileKind { Linear, TanhInterface, LocalBump, Stable, Tabulated };

std::string to_string(ProfileKind k);
/// Throws ValidationError listing the valid kinds.
ProfileKind profile_kind_from_string(const std::string& s);

class DensityProfile {
public:
    DensityProfile(std::string name, ProfileKind kind, std::map<std::string, double> params, double height,
                   std::function<double(double)> rho, std::function<double(double)> drho);

    const std::string& name() const noexcept { return name_; }
    ProfileKind kind() const noexcept { return kind_; }
    const std::map<std::string, double>& params() const noexcept { return params_; }
    double height() const noexcept { return height_; }

    double rho(double z) const { return rho_(z); }
    double drho(double z) const { return drho_(z); }

    /// Some height where the density increases upward (the instability condition).
    bool has_rising_density() const noexcept { return rising_; }
    /// The derivative is bounded below by a positive constant (the restriction this
    /// artifact shows to be unnecessary).
    bool has_positive_gradient_bound() const noexcept { return bounded_below_; }
    double min_rho() const noexcept { return min_rho_; }
    double max_rho() const noexcept { return max_rho_; }
    double min_drho() const noexcept { return min_drho_; }
    double max_drho() const noexcept { return max_drho_; }
    /// Cubic-spline tables are only C2 between knots; reported, not resolved.
    bool c2_between_knots_only() const noexcept { return kind_ == ProfileKind::Tabulated; }

private:
    std::string name_;
    ProfileKind kind_;
    std::map<std::string, double> params_;
    double height_;
    std::function<double(double)> rho_, drho_;
    bool rising_ = false, bounded_below_ = false;
    double min_rho_ = 0, max_rho_ = 0, min_drho_ = 0, max_drho_ = 0;
};

/// Builtin profiles on z in [0, height]. Missing parameters take documented defaults:
///   linear          rho = a + b z                         a = 1, b = 1
///   tanh_interface  rho = rho_m + rho_a tanh((z - z0)/w)  rho_m = 2, rho_a = 0.5, z0 = H/2, w = H/10
///   local_bump      rho' = amp (B((z - zc)/width) - drain), B(x) = (1 - x^2)^3 on |x| < 1
///                   rho0 = 1.5, amp = 4, zc = H/2, width = H/5, drain = 0.3
///   stable          rho = a - b z                         a = 2, b = 1
/// Throws ValidationError for unknown parameters, invalid ranges or a non-positive density.
DensityProfile builtin_profile(ProfileKind kind, const std::map<std::string, double>& params, double height);

/// Two-column CSV (z, rho), optional header line, z strictly increasing and covering [0, height].
/// Interpolated by a natural cubic spline; the derivative comes from the spline.
DensityProfile tabulated_profile(const std::filesystem::path& csv, double height);

/// Cell-centered samples of rho and rho'. Throws ValidationError on a non-positive sample.
std::pair<ScalarField, ScalarField> sample_profile(const DensityProfile& p, const Grid& g);

/// Natural cubic spline through (x_i, y_i).
class CubicSpline {
public:
    CubicSpline(std::vector<double> x, std::vector<double> y);
    double operator()(double t) const;
    double derivative(double t) const;

private:
    std::size_t segment(double t) const;
    std::vector<double> x_, y_, m_;  // m_: second derivatives at knots
};

}  // namespace rtlab
