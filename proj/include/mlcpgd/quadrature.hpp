#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mlcpgd/errors.hpp"

namespace mlcpgd {

// Adaptive Gauss-Kronrod integral of f over [lo, hi]. Orientation-aware:
// lo > hi flips the sign. The tolerance is treated as an absolute error
// target for order-one integrands (relative once |value| exceeds one);
// exceeding it raises QuadratureNotConverged instead of returning silently.
template <typename F>
double integrate(F&& f, double lo, double hi, double tol) {
    if (lo == hi) return 0.0;
    double sign = 1.0;
    if (lo > hi) {
        std::swap(lo, hi);
        sign = -1.0;
    }
    double err = 0.0;
    double val = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        std::forward<F>(f), lo, hi, 12, tol, &err);
    if (!(err <= tol * std::max(1.0, std::abs(val))))
        fail(Errc::QuadratureNotConverged, "error estimate " + std::to_string(err) +
                                               " above tolerance " + std::to_string(tol));
    return sign * val;
}

} // namespace mlcpgd
