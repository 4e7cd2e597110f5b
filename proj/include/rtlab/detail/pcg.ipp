#pragma once

#include <cmath>
#include <sstream>
#include <vector>

namespace rtlab {

namespace detail {
inline void remove_mean(std::span<double> x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= double(x.size());
    for (double& v : x) v -= m;
}
}  // namespace detail

template <class Apply, class Precond>
SolveStats pcg(Apply&& apply, Precond&& precond, std::span<const double> b, std::span<double> x, double tol,
               int max_iters, bool mean_free) {
    const std::size_t n = b.size();
    std::vector<double> r(b.begin(), b.end()), z(n), p(n), q(n);
    if (mean_free) detail::remove_mean(r);
    std::fill(x.begin(), x.end(), 0.0);
    const double bnorm = std::sqrt(dot(r, r));
    SolveStats st;
    if (bnorm == 0.0) return st;

    precond(std::span<const double>(r), std::span<double>(z));
    if (mean_free) detail::remove_mean(z);
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= max_iters; ++it) {
        apply(std::span<const double>(p), std::span<double>(q));
        const double pq = dot(p, q);
        if (!(pq > 0.0)) {
            std::ostringstream os;
            os << "pcg: operator is not positive definite on the search direction (p.Ap = " << pq << ")";
            throw NumericalError(os.str(), std::sqrt(dot(r, r)) / bnorm);
        }
        const double alpha = rz / pq;
        axpy(alpha, p, x);
        axpy(-alpha, q, r);
        const double rn = std::sqrt(dot(r, r)) / bnorm;
        st.iterations = it;
        st.residual = rn;
        if (rn <= tol) {
            if (mean_free) detail::remove_mean(x);
            return st;
        }
        precond(std::span<const double>(r), std::span<double>(z));
        if (mean_free) detail::remove_mean(z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    std::ostringstream os;
    os << "pcg: no convergence after " << max_iters << " iterations, relative residual " << st.residual;
    throw NumericalError(os.str(), st.residual);
}

}  // namespace rtlab
