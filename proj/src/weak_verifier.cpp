#include "mlcpgd/weak_verifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "mlcpgd/constants.hpp"
#include "mlcpgd/errors.hpp"
#include "mlcpgd/quadrature.hpp"

namespace mlcpgd {

namespace {

constexpr double kTermTol = 1e-10;

// Integral of phi(t, .) over the oriented interval [xlo, xhi], clipped to
// the support of phi (exact, since phi vanishes outside it).
double space_slice(double t, double xlo, double xhi, const TestFunction& phi) {
    double sign = 1.0;
    if (xlo > xhi) {
        std::swap(xlo, xhi);
        sign = -1.0;
    }
    xlo = std::max(xlo, phi.x_lo());
    xhi = std::min(xhi, phi.x_hi());
    if (xlo >= xhi) return 0.0;
    if (phi.time_factor.value(t) == 0.0) return 0.0;
    return sign *
           integrate([&](double x) { return phi.value(t, x); }, xlo, xhi, kTermTol);
}

// Integral of factor * phi(t, path(t)) over the oriented time interval
// [s, sigma], clipped to the time support of phi.
double path_flux(double s, double sigma, const AffinePath& path, double factor,
                 const TestFunction& phi) {
    if (factor == 0.0) return 0.0;
    double sign = 1.0;
    if (s > sigma) {
        std::swap(s, sigma);
        sign = -1.0;
    }
    s = std::max(s, phi.t_lo());
    sigma = std::min(sigma, phi.t_hi());
    if (s >= sigma) return 0.0;
    return sign * factor *
           integrate([&](double t) { return phi.value(t, path.at(t)); }, s, sigma,
                     kTermTol);
}

} // namespace

double Bump1D::value(double x) const {
    double s = (x - center) / radius;
    double q = 1.0 - s * s;
    if (q <= 1e-12) return 0.0;
    return std::exp(-1.0 / q);
}

double Bump1D::deriv(double x) const {
    double s = (x - center) / radius;
    double q = 1.0 - s * s;
    if (q <= 1e-12) return 0.0;
    return std::exp(-1.0 / q) * (-2.0 * s / (q * q)) / radius;
}

double TestFunction::value(double t, double x) const {
    return time_factor.value(t) * space_factor.value(x);
}

double TestFunction::dt(double t, double x) const {
    return time_factor.deriv(t) * space_factor.value(x);
}

double TestFunction::dx(double t, double x) const {
    return time_factor.value(t) * space_factor.deriv(x);
}

TestFunction bump(double center_t, double center_x, double radius_t, double radius_x) {
    if (!(radius_t > 0.0) || !(radius_x > 0.0))
        fail(Errc::InvalidRadii, "bump radii must be positive");
    return TestFunction{{center_t, radius_t}, {center_x, radius_x}};
}

double j_closed_form(double s, double sigma, const AffinePath& a, const AffinePath& b,
                     double u, const TestFunction& phi) {
    // Divergence form of the swept integral: two space slices at the end
    // times plus the transport flux through each moving boundary.
    return space_slice(sigma, a.at(sigma), b.at(sigma), phi) -
           space_slice(s, a.at(s), b.at(s), phi) +
           path_flux(s, sigma, b, u - b.rate, phi) +
           path_flux(s, sigma, a, a.rate - u, phi);
}

double j_quadrature(double s, double sigma, const AffinePath& a, const AffinePath& b,
                    double u, const TestFunction& phi) {
    double sign = 1.0;
    if (s > sigma) {
        std::swap(s, sigma);
        sign = -1.0;
    }
    s = std::max(s, phi.t_lo());
    sigma = std::min(sigma, phi.t_hi());
    if (s >= sigma) return 0.0;
    auto inner = [&](double t) {
        double xlo = a.at(t);
        double xhi = b.at(t);
        double isign = 1.0;
        if (xlo > xhi) {
            std::swap(xlo, xhi);
            isign = -1.0;
        }
        xlo = std::max(xlo, phi.x_lo());
        xhi = std::min(xhi, phi.x_hi());
        if (xlo >= xhi) return 0.0;
        return isign * integrate([&](double x) { return phi.dt(t, x) + u * phi.dx(t, x); },
                                 xlo, xhi, 1e-11);
    };
    return sign * integrate(inner, s, sigma, 1e-9);
}

namespace {

double cell_weight(const Segment& seg, double alpha, Equation which) {
    double w = static_cast<double>(seg.level);
    if (which == Equation::Momentum)
        w *= (seg.u + seg.p) * (seg.level == 2 ? 1.0 / alpha : 1.0);
    return w;
}

} // namespace

double weak_residual(const Trajectory& traj, const TestFunction& phi, Equation which) {
    const double alpha = traj.road.alpha;
    double total = 0.0;

    // Swept-cell terms: between consecutive logged instants every segment
    // moves along affine paths with constant velocity, so its contribution
    // reduces to one J-integral per cell.
    struct Span {
        const ClusterState* state;
        double t_end;
    };
    std::vector<Span> spans;
    if (traj.log.empty()) {
        spans.push_back({&traj.initial, traj.horizon});
    } else {
        spans.push_back({&traj.initial, traj.log.front().event.time});
        for (std::size_t i = 0; i + 1 < traj.log.size(); ++i)
            spans.push_back({&traj.log[i].state, traj.log[i + 1].event.time});
        spans.push_back({&traj.log.back().state, traj.horizon});
    }

    for (const Span& span : spans) {
        double s0 = std::max(span.state->time, phi.t_lo());
        double s1 = std::min(span.t_end, phi.t_hi());
        if (s0 >= s1) continue;
        for (const Segment& seg : span.state->segments) {
            // A zero-length segment sweeps nothing only if it is not
            // growing; a piece born at zero length with a free head still
            // sweeps a triangle.
            if (seg.length() <= 0.0 && seg.head_rate() <= seg.tail_rate()) continue;
            double w = cell_weight(seg, alpha, which);
            if (w == 0.0) continue;
            AffinePath pa{seg.a, seg.tail_rate(), span.state->time};
            AffinePath pb{seg.b, seg.head_rate(), span.state->time};
            double span_lo = std::min(pa.at(s0), pa.at(s1));
            double span_hi = std::max(pb.at(s0), pb.at(s1));
            if (span_hi <= phi.x_lo() || span_lo >= phi.x_hi()) continue;
            total += w * j_closed_form(s0, s1, pa, pb, seg.u, phi);
        }
    }

    // Initial pairing: nonzero only when the support of phi reaches the
    // starting time.
    double t0 = traj.initial.time;
    if (phi.time_factor.value(t0) != 0.0) {
        for (const Segment& seg : traj.initial.segments) {
            if (seg.length() <= 0.0) continue;
            double w = cell_weight(seg, alpha, which);
            if (w == 0.0) continue;
            total += w * space_slice(t0, seg.a, seg.b, phi);
        }
    }
    return total;
}

LipschitzCheck lipschitz_time_check(const Trajectory& traj, const Bump1D& phi, double s,
                                    double t) {
    auto pairing = [&](double when) {
        ClusterState st = traj.state_at(when);
        double acc = 0.0;
        for (const Segment& seg : st.segments) {
            if (seg.length() <= 0.0) continue;
            double lo = std::max(seg.a, phi.lo());
            double hi = std::min(seg.b, phi.hi());
            if (lo >= hi) continue;
            acc += static_cast<double>(seg.level) *
                   integrate([&](double x) { return phi.value(x); }, lo, hi, kTermTol);
        }
        return acc;
    };

    double sup_u = 0.0;
    double sup_p = 0.0;
    for (const Segment& seg : traj.initial.segments) {
        if (seg.length() <= 0.0) continue;
        sup_u = std::max(sup_u, seg.u);
        sup_p = std::max(sup_p, seg.p);
    }
    double speed = 2.0 * traj.road.alpha * (sup_u + sup_p);

    // |phi'| has a single interior kink at the center, so integrate each
    // monotone half separately.
    double tv = integrate([&](double x) { return std::abs(phi.deriv(x)); }, phi.lo(),
                          phi.center, kTermTol) +
                integrate([&](double x) { return std::abs(phi.deriv(x)); }, phi.center,
                          phi.hi(), kTermTol);

    LipschitzCheck check;
    check.lhs = std::abs(pairing(t) - pairing(s));
    check.rhs = static_cast<double>(traj.road.max_level()) * speed * tv * std::abs(t - s);
    return check;
}

} // namespace mlcpgd
