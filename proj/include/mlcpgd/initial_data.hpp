#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mlcpgd/cluster_state.hpp"
#include "mlcpgd/road_profile.hpp"
#include "mlcpgd/weak_verifier.hpp"

namespace mlcpgd {

// Piecewise-linear tabulated profile: value v[i] at node x[i], interpolated
// linearly between consecutive nodes, zero outside the node range.
struct LinearTable {
    std::vector<double> x;
    std::vector<double> v;

    double at(double q) const;
    // Exact integral over [lo, hi] (trapezoid per linear piece).
    double integral(double lo, double hi) const;
    // Exact essential infimum of the interpolant over [lo, hi] intersected
    // with the node range: the minimum over interior nodes and the clipped
    // endpoint values. Zero when the ranges do not overlap.
    double min_on(double lo, double hi) const;

    double lo() const { return x.front(); }
    double hi() const { return x.back(); }
};

// General initial data: density, velocity, and offset profiles. The density
// support is the node range of n0; u0 and p0 need only cover it.
struct GeneralData {
    LinearTable n0;
    LinearTable u0;
    LinearTable p0;

    // Structural checks (node ordering, bounds against the road's capacity,
    // sign constraints) and the capacity compatibility condition
    // (capacity - n0) * p0 = 0 at tabulation resolution.
    void validate(const RoadProfile& road) const;
};

// Block approximation at refinement k: every road interval intersected with
// the density support splits into k equal subintervals; each subinterval
// contributes one left-anchored block carrying exactly its share of mass,
// the infimum velocity, and the infimum offset (offset zero unless the data
// is at full capacity throughout the subinterval). Throws NonPositiveK.
ClusterState approximate_blocks(const GeneralData& data, const RoadProfile& road, int k);

// Pairing distance between general data and a block state against a smooth
// space profile: |<n0 - n_blocks, phi>| and the analogous velocity- and
// offset-weighted pairings.
struct ApproxError {
    double e_n = 0.0;
    double e_nu = 0.0;
    double e_np = 0.0;
};
ApproxError weak_error(const GeneralData& data, const ClusterState& blocks,
                       const Bump1D& phi);

// Output sampling grid for field tables.
struct OutputGrid {
    double x0 = 0.0;
    double x1 = 0.0;
    int nx = 0;
    int nt = 0;
};

// A complete simulation scenario: the road, exactly one initial-data form
// (explicit blocks or general data plus a refinement), a horizon, and the
// output grid.
struct Scenario {
    RoadProfile road;
    std::optional<ClusterState> blocks;
    std::optional<GeneralData> general;
    int k = 0;
    double horizon = 0.0;
    OutputGrid grid;

    // The block state the engine starts from.
    ClusterState initial_state() const;
};

// Parses and validates a scenario from JSON text / from a file. Malformed
// JSON or missing/mistyped fields raise ParseError naming the field;
// semantic violations raise the matching validation error.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

} // namespace mlcpgd
