#include "mlcpgd/cluster_state.hpp"

#include <algorithm>
#include <cmath>

#include "mlcpgd/constants.hpp"
#include "mlcpgd/errors.hpp"

namespace mlcpgd {

const char* violation_name(Violation::Kind kind) {
    using K = Violation::Kind;
    switch (kind) {
        case K::Overlap: return "Overlap";
        case K::ZeroLength: return "ZeroLength";
        case K::NegativeLength: return "NegativeLength";
        case K::NegativeVelocity: return "NegativeVelocity";
        case K::NegativeOffset: return "NegativeOffset";
        case K::LevelMismatch: return "LevelMismatch";
        case K::StraddlesTransition: return "StraddlesTransition";
        case K::HeadOffsetPositive: return "HeadOffsetPositive";
        case K::PinnedOffTransition: return "PinnedOffTransition";
        case K::BrokenCoupling: return "BrokenCoupling";
    }
    return "Unknown";
}

int ClusterState::segment_index_at(double x) const {
    // First segment whose head lies strictly right of x; x belongs to it iff
    // its tail is not past x. Ties at a shared endpoint resolve rightward.
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (segments[i].b > x) return segments[i].a <= x ? static_cast<int>(i) : -1;
    }
    return -1;
}

double ClusterState::density_at(double x) const {
    int i = segment_index_at(x);
    return i < 0 ? 0.0 : static_cast<double>(segments[i].level);
}

double ClusterState::total_mass() const {
    double m = 0.0;
    for (const Segment& s : segments) m += s.level * s.length();
    return m;
}

namespace {

// Overlap length of (lo, hi) with K.
double overlap(double lo, double hi, Interval K) {
    return std::max(0.0, std::min(hi, K.hi) - std::max(lo, K.lo));
}

bool strictly_inside(double x, Interval K) { return K.lo < x && x < K.hi; }

// Segments with spatial extent; zero-length transients carry no profile.
std::vector<Segment> extended(const std::vector<Segment>& segs) {
    std::vector<Segment> out;
    for (const Segment& s : segs)
        if (s.length() > 0.0) out.push_back(s);
    return out;
}

} // namespace

double ClusterState::total_variation_u(Interval K) const {
    if (!(K.lo < K.hi)) fail(Errc::EmptyInterval, "total variation window is empty");
    std::vector<Segment> segs = extended(segments);
    if (segs.empty()) return 0.0;

    // The extended velocity profile is constant on blocks and beyond the
    // outermost ones, and linear across vacuum gaps; only gap slopes and
    // contact jumps contribute.
    double tv = 0.0;
    for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
        double gap = segs[i + 1].a - segs[i].b;
        double jump = std::abs(segs[i + 1].u - segs[i].u);
        if (gap > kEpsX) {
            tv += jump * overlap(segs[i].b, segs[i + 1].a, K) / gap;
        } else if (strictly_inside(segs[i].b, K)) {
            tv += jump;
        }
    }
    return tv;
}

double ClusterState::total_variation_p(Interval K) const {
    if (!(K.lo < K.hi)) fail(Errc::EmptyInterval, "total variation window is empty");
    std::vector<Segment> segs = extended(segments);

    // The offset profile vanishes in vacuum, so every block edge facing
    // vacuum is a jump of size p, and contacts jump by the difference.
    double tv = 0.0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        bool contact_before = i > 0 && segs[i].a - segs[i - 1].b <= kEpsX;
        if (!contact_before && strictly_inside(segs[i].a, K)) tv += std::abs(segs[i].p);
        bool contact_after = i + 1 < segs.size() && segs[i + 1].a - segs[i].b <= kEpsX;
        if (strictly_inside(segs[i].b, K))
            tv += contact_after ? std::abs(segs[i + 1].p - segs[i].p) : std::abs(segs[i].p);
    }
    return tv;
}

ConstraintReport ClusterState::check_constraints(const RoadProfile& road) const {
    ConstraintReport report;
    auto add = [&](Violation::Kind kind, int i, std::string detail) {
        report.violations.push_back({kind, i, std::move(detail)});
    };

    for (std::size_t i = 0; i < segments.size(); ++i) {
        const Segment& s = segments[i];
        int idx = static_cast<int>(i);

        if (s.length() < -kEpsX) {
            add(Violation::Kind::NegativeLength, idx, "head lies left of tail");
        } else if (s.length() <= kEpsX && !s.coupled()) {
            add(Violation::Kind::ZeroLength, idx, "free segment without extent");
        }
        if (s.u < 0.0) add(Violation::Kind::NegativeVelocity, idx, "u < 0");
        if (s.p < 0.0) add(Violation::Kind::NegativeOffset, idx, "p < 0");

        if (i + 1 < segments.size() && s.b > segments[i + 1].a + kEpsX)
            add(Violation::Kind::Overlap, idx, "overlaps the next segment");

        if (s.length() > kEpsX) {
            // Saturation: the block must fill the local capacity, and a block
            // never spans a change of capacity.
            double mid = 0.5 * (s.a + s.b);
            if (road.level_at(mid) != s.level)
                add(Violation::Kind::LevelMismatch, idx, "density differs from lane count");
            auto j = road.next_transition(s.a + kEpsX);
            if (j && road.transitions[*j] < s.b - kEpsX)
                add(Violation::Kind::StraddlesTransition, idx, "crosses a lane transition");
        }

        if (s.pinned_tail) {
            if (s.tail_transition < 0 || s.tail_transition >= road.transition_count() ||
                std::abs(s.a - road.transitions[s.tail_transition]) > kEpsX)
                add(Violation::Kind::PinnedOffTransition, idx, "pinned tail away from its transition");
            bool linked = i > 0 && segments[i - 1].pinned_head &&
                          segments[i - 1].head_transition == s.tail_transition;
            if (!linked) add(Violation::Kind::BrokenCoupling, idx, "pinned tail without upstream partner");
        }
        if (s.pinned_head) {
            if (s.head_transition < 0 || s.head_transition >= road.transition_count() ||
                std::abs(s.b - road.transitions[s.head_transition]) > kEpsX)
                add(Violation::Kind::PinnedOffTransition, idx, "pinned head away from its transition");
            bool linked = i + 1 < segments.size() && segments[i + 1].pinned_tail &&
                          segments[i + 1].tail_transition == s.head_transition;
            if (!linked) add(Violation::Kind::BrokenCoupling, idx, "pinned head without downstream partner");
        }

        // A block with free road ahead must have converted its whole offset
        // into speed. Pieces engaged in a transition are exempt: an
        // enlargement legitimately parks momentum in its downstream piece.
        if (s.p > 0.0 && !s.coupled()) {
            bool contact_ahead = i + 1 < segments.size() && segments[i + 1].a - s.b <= kEpsX;
            auto j = road.next_transition(s.b - kEpsX);
            bool on_transition = j && std::abs(road.transitions[*j] - s.b) <= kEpsX;
            if (!contact_ahead && !on_transition)
                add(Violation::Kind::HeadOffsetPositive, idx, "positive offset with free road ahead");
        }
    }
    return report;
}

std::vector<FieldSample> ClusterState::sample_fields(const std::vector<double>& xs) const {
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        if (!(xs[i] < xs[i + 1])) fail(Errc::UnsortedGrid, "sample positions must strictly increase");
    std::vector<FieldSample> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        int k = segment_index_at(xs[i]);
        if (k >= 0) {
            const Segment& s = segments[k];
            out[i] = {static_cast<double>(s.level), s.level * s.u, s.level * s.p};
        }
    }
    return out;
}

void merge_identical_contacts(ClusterState& state) {
    std::vector<Segment>& segs = state.segments;
    std::size_t i = 0;
    while (i + 1 < segs.size()) {
        Segment& l = segs[i];
        Segment& r = segs[i + 1];
        bool joint_free = !l.pinned_head && !r.pinned_tail;
        if (joint_free && std::abs(r.a - l.b) <= kEpsX && l.level == r.level && l.u == r.u &&
            l.p == r.p) {
            l.b = r.b;
            l.pinned_head = r.pinned_head;
            l.head_transition = r.head_transition;
            segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        } else {
            ++i;
        }
    }
}

} // namespace mlcpgd
