#pragma once

#include <string>
#include <vector>

#include "mlcpgd/road_profile.hpp"

namespace mlcpgd {

// One saturated block of cars: density equals the lane count `level` on
// [a, b], velocity u and speed offset p are constant along it. p is the part
// of the preferred velocity a queued driver cannot currently use; u + p is
// conserved for a car except across lane-count transitions.
//
// Blocks caught in a lane-count transition are split in two around the
// transition point: the upstream piece has its head pinned there, the
// downstream piece its tail. A piece pinned at both ends bridges two
// transitions at once (a chain).
struct Segment {
    double a = 0.0;
    double b = 0.0;
    double u = 0.0;
    double p = 0.0;
    int level = 1;

    bool pinned_tail = false;
    bool pinned_head = false;
    int tail_transition = -1;
    int head_transition = -1;

    double length() const { return b - a; }
    double w() const { return u + p; }
    bool coupled() const { return pinned_tail || pinned_head; }

    // Endpoint speeds: a pinned endpoint stands still, a free one moves with
    // the block velocity.
    double tail_rate() const { return pinned_tail ? 0.0 : u; }
    double head_rate() const { return pinned_head ? 0.0 : u; }
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct Violation {
    enum class Kind {
        Overlap,
        ZeroLength,
        NegativeLength,
        NegativeVelocity,
        NegativeOffset,
        LevelMismatch,
        StraddlesTransition,
        HeadOffsetPositive, // free road ahead but unreleased speed offset
        PinnedOffTransition,
        BrokenCoupling,
    };
    Kind kind;
    int segment = -1;
    std::string detail;
};

const char* violation_name(Violation::Kind kind);

struct ConstraintReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

struct FieldSample {
    double n = 0.0;
    double nu = 0.0;
    double np = 0.0;
};

// Snapshot of the whole road at one instant. Segments are kept ordered left
// to right and pairwise disjoint up to contact.
struct ClusterState {
    double time = 0.0;
    std::vector<Segment> segments;

    // Density at x with the right-limit convention: on a shared endpoint the
    // value of the right neighbour wins, at an isolated head the vacuum does.
    double density_at(double x) const;

    // Index of the segment whose [a, b) covers x (right-limit convention),
    // or -1 in vacuum.
    int segment_index_at(double x) const;

    double total_mass() const;

    // Total variation over the window K of the velocity profile, extended
    // linearly across vacuum gaps and by constants beyond the outermost
    // blocks. Jumps exactly on the window edge do not count.
    double total_variation_u(Interval K) const;

    // Same for the offset profile, which is zero in vacuum; an isolated block
    // inside K contributes 2p.
    double total_variation_p(Interval K) const;

    // Structural admissibility: ordering, sign conditions, saturation against
    // the road profile, released offsets on free heads, coupling integrity.
    ConstraintReport check_constraints(const RoadProfile& road) const;

    // n, n*u, n*p sampled at strictly increasing positions.
    std::vector<FieldSample> sample_fields(const std::vector<double>& xs) const;
};

// Fuse adjacent segments that are in contact and carry identical (u, p,
// level) and no pinned endpoints at the joint. Keeps snapshots canonical.
void merge_identical_contacts(ClusterState& state);

} // namespace mlcpgd
