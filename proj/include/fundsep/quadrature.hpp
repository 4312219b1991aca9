#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fundsep/types.hpp"

namespace fundsep {

// adaptive Gauss-Kronrod on [a,b] (either end may be infinite); throws
// QuadratureFailure when the error estimate exceeds abs_tol. The refinement
// target handed to the underlying routine tracks abs_tol: chasing a fixed
// 1e-14 on integrands with endpoint kinks burns 2^depth subdivisions for
// digits nobody asked for.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-12, int max_depth = 15) {
    double err = 0.0;
    const double refine_tol = std::max(1e-14, 0.1 * abs_tol);
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, max_depth, refine_tol, &err);
    if (!std::isfinite(v)) {
        throw QuadratureFailure("integral did not evaluate to a finite value");
    }
    if (err > abs_tol && err > 1e-12 * std::abs(v)) {
        throw QuadratureFailure("integral error estimate " + std::to_string(err) +
                                " exceeds tolerance " + std::to_string(abs_tol));
    }
    return v;
}

// same, but returns +inf instead of throwing when the value blows up;
// used by the recurrence checks where divergence is the expected answer
inline double integrate_allow_blowup(const std::function<double(double)>& f, double a, double b) {
    try {
        double err = 0.0;
        const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
            f, a, b, 15, 1e-10, &err);
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        return v;
    } catch (const std::exception&) {
        return std::numeric_limits<double>::infinity();
    }
}

} // namespace fundsep
