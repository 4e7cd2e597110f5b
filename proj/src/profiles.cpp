#include "rtlab/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

namespace rtlab {

namespace {

constexpr int kScanPoints = 10000;

double param(const std::map<std::string, double>& p, const std::string& key, double fallback) {
    const auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

void check_keys(const std::map<std::string, double>& p, std::initializer_list<const char*> allowed,
                const std::string& kind) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : p) {
        if (!ok.count(k)) {
            std::ostringstream os;
            os << "profile " << kind << ": unknown parameter '" << k << "' (valid:";
            for (const auto* a : allowed) os << ' ' << a;
            os << ')';
            throw ValidationError(os.str());
        }
        if (!std::isfinite(v)) throw ValidationError("profile " + kind + ": parameter '" + k + "' is not finite");
    }
}

// (1 - x^2)^3 on |x| < 1 and its primitive from -1.
double bump(double x) {
    if (std::abs(x) >= 1.0) return 0.0;
    const double s = 1.0 - x * x;
    return s * s * s;
}
double bump_primitive(double x) {
    const double c = std::clamp(x, -1.0, 1.0);
    const double c2 = c * c;
    return c * (1.0 - c2 + 0.6 * c2 * c2 - c2 * c2 * c2 / 7.0) + 16.0 / 35.0;
}

}  // namespace

void PhysicalParams::validate() const {
    if (!(mu > 0.0)) throw ValidationError("viscosity mu must be strictly positive (mu > 0)");
    if (!(g > 0.0)) throw ValidationError("gravitational constant g must be strictly positive (g > 0)");
}

std::string to_string(ProfileKind k) {
    switch (k) {
        case ProfileKind::Linear: return "linear";
        case ProfileKind::TanhInterface: return "tanh_interface";
        case ProfileKind::LocalBump: return "local_bump";
        case ProfileKind::Stable: return "stable";
        case ProfileKind::Tabulated: return "tabulated";
    }
    return "unknown";
}

ProfileKind profile_kind_from_string(const std::string& s) {
    if (s == "linear") return ProfileKind::Linear;
    if (s == "tanh_interface") return ProfileKind::TanhInterface;
    if (s == "local_bump") return ProfileKind::LocalBump;
    if (s == "stable") return ProfileKind::Stable;
    throw ValidationError("unknown profile kind '" + s + "' (valid kinds: linear, tanh_interface, local_bump, stable)");
}

DensityProfile::DensityProfile(std::string name, ProfileKind kind, std::map<std::string, double> params,
                               double height, std::function<double(double)> rho, std::function<double(double)> drho)
    : name_(std::move(name)), kind_(kind), params_(std::move(params)), height_(height), rho_(std::move(rho)),
      drho_(std::move(drho)) {
    if (!(height_ > 0.0)) throw ValidationError("profile height must be positive");
    min_rho_ = min_drho_ = std::numeric_limits<double>::infinity();
    max_rho_ = max_drho_ = -std::numeric_limits<double>::infinity();
    for (int s = 0; s <= kScanPoints; ++s) {
        const double z = height_ * s / kScanPoints;
        const double r = rho_(z), d = drho_(z);
        min_rho_ = std::min(min_rho_, r);
        max_rho_ = std::max(max_rho_, r);
        min_drho_ = std::min(min_drho_, d);
        max_drho_ = std::max(max_drho_, d);
    }
    if (!(min_rho_ > 0.0)) {
        std::ostringstream os;
        os << "profile " << name_ << ": density must stay positive, minimum is " << min_rho_;
        throw ValidationError(os.str());
    }
    rising_ = max_drho_ > 1e-12;
    bounded_below_ = min_drho_ > 1e-12;
}

DensityProfile builtin_profile(ProfileKind kind, const std::map<std::string, double>& params, double height) {
    const double H = height;
    switch (kind) {
        case ProfileKind::Linear: {
            check_keys(params, {"a", "b"}, "linear");
            const double a = param(params, "a", 1.0), b = param(params, "b", 1.0);
            return DensityProfile("linear", kind, {{"a", a}, {"b", b}}, H, [=](double z) { return a + b * z; },
                                  [=](double) { return b; });
        }
        case ProfileKind::Stable: {
            check_keys(params, {"a", "b"}, "stable");
            const double a = param(params, "a", 2.0), b = param(params, "b", 1.0);
            if (!(b > 0.0)) throw ValidationError("profile stable: b must be positive (rho = a - b z)");
            return DensityProfile("stable", kind, {{"a", a}, {"b", b}}, H, [=](double z) { return a - b * z; },
                                  [=](double) { return -b; });
        }
        case ProfileKind::TanhInterface: {
            check_keys(params, {"rho_m", "rho_a", "z0", "w"}, "tanh_interface");
            const double rm = param(params, "rho_m", 2.0), ra = param(params, "rho_a", 0.5);
            const double z0 = param(params, "z0", 0.5 * H), w = param(params, "w", 0.1 * H);
            if (!(w > 0.0)) throw ValidationError("profile tanh_interface: w must be positive");
            return DensityProfile(
                "tanh_interface", kind, {{"rho_m", rm}, {"rho_a", ra}, {"z0", z0}, {"w", w}}, H,
                [=](double z) { return rm + ra * std::tanh((z - z0) / w); },
                [=](double z) {
                    const double c = std::cosh((z - z0) / w);
                    return ra / (w * c * c);
                });
        }
        case ProfileKind::LocalBump: {
            check_keys(params, {"rho0", "amp", "zc", "width", "drain"}, "local_bump");
            const double r0 = param(params, "rho0", 1.5), amp = param(params, "amp", 4.0);
            const double zc = param(params, "zc", 0.5 * H), w = param(params, "width", 0.2 * H);
            const double drain = param(params, "drain", 0.3);
            if (!(amp > 0.0)) throw ValidationError("profile local_bump: amp must be positive");
            if (!(w > 0.0)) throw ValidationError("profile local_bump: width must be positive");
            if (!(drain > 0.0 && drain < 1.0)) throw ValidationError("profile local_bump: drain must lie in (0, 1)");
            return DensityProfile(
                "local_bump", kind, {{"rho0", r0}, {"amp", amp}, {"zc", zc}, {"width", w}, {"drain", drain}}, H,
                [=](double z) { return r0 + amp * (w * bump_primitive((z - zc) / w) - drain * z); },
                [=](double z) { return amp * (bump((z - zc) / w) - drain); });
        }
        case ProfileKind::Tabulated: break;
    }
    throw ValidationError("builtin_profile: tabulated profiles are loaded from CSV");
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 3 || y_.size() != n) throw ValidationError("cubic spline needs at least 3 matching points");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1])) throw ValidationError("cubic spline abscissae must be strictly increasing");
    m_.assign(n, 0.0);
    // Tridiagonal system for the interior second derivatives (natural ends).
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
        const double a = h0 / 6.0, b = (h0 + h1) / 3.0, cc = h1 / 6.0;
        const double r = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
        const double den = b - a * c[i - 1];
        c[i] = cc / den;
        d[i] = (r - a * d[i - 1]) / den;
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
        m_[i] = d[i] - c[i] * m_[i + 1];
        if (i == 1) break;
    }
}

std::size_t CubicSpline::segment(double t) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = it == x_.begin() ? 0 : std::size_t(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
}

double CubicSpline::operator()(double t) const {
    const std::size_t i = segment(t);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - t) / h, b = (t - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::derivative(double t) const {
    const std::size_t i = segment(t);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - t) / h, b = (t - x_[i]) / h;
    return (y_[i + 1] - y_[i]) / h + ((1.0 - 3.0 * a * a) * m_[i] + (3.0 * b * b - 1.0) * m_[i + 1]) * h / 6.0;
}

DensityProfile tabulated_profile(const std::filesystem::path& csv, double height) {
    std::ifstream is(csv);
    if (!is) throw ValidationError("profile table not found: " + csv.string());
    std::vector<double> z, r;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double a, b;
        if (!(ls >> a >> b)) {
            if (z.empty()) continue;  // header
            throw ValidationError("profile table " + csv.string() + ": bad line " + std::to_string(lineno));
        }
        z.push_back(a);
        r.push_back(b);
    }
    if (z.size() < 3) throw ValidationError("profile table needs at least 3 rows");
    if (z.front() > 1e-12 || z.back() < height - 1e-12)
        throw ValidationError("profile table must cover the vertical extent [0, height]");
    auto spline = std::make_shared<CubicSpline>(z, r);
    return DensityProfile("tabulated:" + csv.filename().string(), ProfileKind::Tabulated, {}, height,
                          [spline](double t) { return (*spline)(t); },
                          [spline](double t) { return spline->derivative(t); });
}

std::pair<ScalarField, ScalarField> sample_profile(const DensityProfile& p, const Grid& g) {
    ScalarField rho(g), drho(g);
    const int vz = g.vertical();
    for_each_cell(g, [&](int i, int j, int k) {
        const Index3 c{i, j, k};
        const double z = g.cell_center(vz, c[vz]);
        const double r = p.rho(z);
        if (!(r > 0.0)) {
            std::ostringstream os;
            os << "sample_profile: non-positive density " << r << " at z = " << z;
            throw ValidationError(os.str());
        }
        rho(i, j, k) = r;
        drho(i, j, k) = p.drho(z);
    });
    return {std::move(rho), std::move(drho)};
}

}  // namespace rtlab
