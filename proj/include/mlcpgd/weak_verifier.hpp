#pragma once

#include <cstddef>
#include <vector>

#include "mlcpgd/event_engine.hpp"

namespace mlcpgd {

// One-dimensional smooth bump factor: value exp(-1/(1-s^2)) of the scaled
// coordinate s = (x - center)/radius inside |s| < 1, identically zero
// outside. All derivatives vanish at the support edges.
struct Bump1D {
    double center = 0.0;
    double radius = 1.0;

    double value(double x) const;
    double deriv(double x) const;

    double lo() const { return center - radius; }
    double hi() const { return center + radius; }
};

// Compactly supported smooth test function phi(t, x): a product of two
// one-dimensional bumps, one in time and one in space.
struct TestFunction {
    Bump1D time_factor;
    Bump1D space_factor;

    double value(double t, double x) const;
    double dt(double t, double x) const;
    double dx(double t, double x) const;

    double t_lo() const { return time_factor.lo(); }
    double t_hi() const { return time_factor.hi(); }
    double x_lo() const { return space_factor.lo(); }
    double x_hi() const { return space_factor.hi(); }
};

// Builds the product bump centered at (center_t, center_x) with the given
// support radii. Throws InvalidRadii unless both radii are positive.
TestFunction bump(double center_t, double center_x, double radius_t, double radius_x);

// Straight-line path x(t) = x0 + rate * (t - t0).
struct AffinePath {
    double x0 = 0.0;
    double rate = 0.0;
    double t0 = 0.0;

    double at(double t) const { return x0 + rate * (t - t0); }
};

// Space-time integral J(s, sigma, a, b, u) of (d_t phi + u d_x phi) over the
// region swept between the paths a(t) and b(t) for t from s to sigma,
// evaluated two independent ways:
//  - j_closed_form reduces it to four one-dimensional integrals (two space
//    slices at the end times plus one flux integral along each path);
//  - j_quadrature evaluates the two-dimensional integral directly by nested
//    adaptive quadrature.
// Both are orientation-aware in time (sigma < s) and in space (b below a).
double j_closed_form(double s, double sigma, const AffinePath& a, const AffinePath& b,
                     double u, const TestFunction& phi);
double j_quadrature(double s, double sigma, const AffinePath& a, const AffinePath& b,
                    double u, const TestFunction& phi);

// Which conservation law a residual is evaluated against.
enum class Equation { Mass, Momentum };

// Distributional residual of one conservation law against phi, assembled
// from the trajectory's piecewise-constant cell structure: for every
// inter-event time interval and every segment alive on it, the swept cell
// contributes weight * J, and the initial profile contributes its pairing
// with phi(0, .). Identically zero (up to quadrature error) exactly when
// the trajectory is a weak solution on the support of phi. The support of
// phi in time must not extend past the trajectory horizon.
double weak_residual(const Trajectory& traj, const TestFunction& phi, Equation which);

// Continuity-in-time check: the density pairing against a fixed space
// profile moves at most Lipschitz-fast between two times.
struct LipschitzCheck {
    double lhs = 0.0; // |<n(t) - n(s), phi>|
    double rhs = 0.0; // max level * speed bound * integral |phi'| * |t - s|
    bool ok() const { return lhs <= rhs * (1.0 + 1e-9) + 1e-12; }
};
LipschitzCheck lipschitz_time_check(const Trajectory& traj, const Bump1D& phi, double s,
                                    double t);

} // namespace mlcpgd
