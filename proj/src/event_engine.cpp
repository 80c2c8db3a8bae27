#include "mlcpgd/event_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mlcpgd/constants.hpp"
#include "mlcpgd/errors.hpp"

namespace mlcpgd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void advance_positions(ClusterState& state, double dt) {
    for (Segment& s : state.segments) {
        s.a += s.tail_rate() * dt;
        s.b += s.head_rate() * dt;
    }
    state.time += dt;
}

// Transition whose position coincides with x up to the contact tolerance.
int transition_at(const RoadProfile& road, double x) {
    auto it = std::upper_bound(road.transitions.begin(), road.transitions.end(), x - 2 * kEpsX);
    if (it != road.transitions.end() && std::abs(*it - x) <= kEpsX)
        return static_cast<int>(it - road.transitions.begin());
    return -1;
}

struct Candidate {
    EventKind kind;
    double tau;
    double rate; // position drift per unit of deferred time, for batching
    int first;   // leftmost segment involved, for deterministic ordering
    std::vector<int> indices;
};

std::vector<Candidate> gather_candidates(const ClusterState& state, const RoadProfile& road) {
    std::vector<Candidate> cands;
    const auto& segs = state.segments;

    for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
        double gap = segs[i + 1].a - segs[i].b;
        double closing = segs[i].head_rate() - segs[i + 1].tail_rate();
        if (closing > 0.0 && gap > -kEpsX) {
            double tau = gap <= kEpsX ? 0.0 : gap / closing;
            cands.push_back({EventKind::Collision, tau, closing, static_cast<int>(i),
                             {static_cast<int>(i), static_cast<int>(i) + 1}});
        }
    }

    for (std::size_t i = 0; i < segs.size(); ++i) {
        const Segment& s = segs[i];
        int idx = static_cast<int>(i);
        if (s.pinned_head) {
            // The upstream piece of a coupling completes once its free tail
            // has drained up to the transition.
            if (!s.pinned_tail && (s.u > 0.0 || s.length() <= kEpsX)) {
                double tau = s.u > 0.0 ? std::max(0.0, s.length()) / s.u : 0.0;
                cands.push_back({EventKind::CouplingComplete, tau, s.u, idx, {s.head_transition}});
            }
            continue;
        }
        int jat = transition_at(road, s.b);
        if (jat >= 0 && s.level == road.levels[jat]) {
            // Sitting on a transition it approaches from upstream: engages as
            // soon as the block has any speed to spend; w == 0 never crosses.
            // A head at a transition it already crossed (level matches the
            // downstream side) is just moving away and never re-engages.
            if (s.w() > 0.0)
                cands.push_back({EventKind::TransitionHit, 0.0, s.u, idx, {idx, jat}});
        } else if (s.u > 0.0) {
            auto jn = road.next_transition(s.b + kEpsX);
            if (jn) {
                double tau = std::max(0.0, (road.transitions[*jn] - s.b) / s.u);
                cands.push_back({EventKind::TransitionHit, tau, s.u, idx, {idx, *jn}});
            }
        }
    }
    return cands;
}

int kind_priority(EventKind kind) {
    switch (kind) {
        case EventKind::Collision: return 0;
        case EventKind::CouplingComplete: return 1;
        case EventKind::TransitionHit: return 2;
        case EventKind::HorizonReached: return 3;
    }
    return 3;
}

// After a leader speeds up, a touching follower with banked offset gets its
// head free and spends the offset at once; overshooting is corrected by the
// zero-gap collision that immediately follows. One sweep; returns whether
// anything was released.
bool release_free_heads(ClusterState& state, const RoadProfile& road) {
    auto& segs = state.segments;
    bool changed = false;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        Segment& s = segs[i];
        if (s.coupled() || s.p <= 0.0) continue;
        int jat = transition_at(road, s.b);
        if (jat >= 0 && s.level == road.levels[jat]) continue; // engages there instead
        bool held = false;
        if (i + 1 < segs.size()) {
            double gap = segs[i + 1].a - s.b;
            held = gap <= kEpsX && segs[i + 1].tail_rate() <= s.u;
        }
        if (!held) {
            s.u = s.w();
            s.p = 0.0;
            changed = true;
        }
    }
    return changed;
}

} // namespace

const char* event_kind_name(EventKind kind) {
    switch (kind) {
        case EventKind::Collision: return "collision";
        case EventKind::TransitionHit: return "transition_hit";
        case EventKind::CouplingComplete: return "coupling_complete";
        case EventKind::HorizonReached: return "horizon_reached";
    }
    return "unknown";
}

void advance(ClusterState& state, const RoadProfile& road, double dt) {
    if (dt < 0.0) fail(Errc::NegativeDt, "cannot advance by a negative step");
    if (dt == 0.0) return;
    for (const Candidate& c : gather_candidates(state, road))
        if (c.tau < dt - kEpsT)
            fail(Errc::EventSkipped,
                 std::string(event_kind_name(c.kind)) + " due before the end of the step");
    advance_positions(state, dt);
}

Event next_event(const ClusterState& state, const RoadProfile& road, double horizon) {
    double tau_h = std::max(0.0, horizon - state.time);
    std::vector<Candidate> cands = gather_candidates(state, road);
    double tau_min = kInf;
    for (const Candidate& c : cands) tau_min = std::min(tau_min, c.tau);
    if (tau_min >= tau_h) return {EventKind::HorizonReached, horizon, {}};

    // Candidates count as simultaneous with the earliest one only if firing
    // them at tau_min keeps their positions within the contact tolerance;
    // the rest simply wait for a later iteration.
    double cutoff = tau_min + kEpsT;
    auto in_batch = [&](const Candidate& c) {
        return c.tau <= cutoff && (c.tau - tau_min) * c.rate <= kEpsX;
    };
    int best_priority = 3;
    for (const Candidate& c : cands)
        if (in_batch(c)) best_priority = std::min(best_priority, kind_priority(c.kind));

    double t_ev = state.time + tau_min;
    if (best_priority == kind_priority(EventKind::Collision)) {
        // Batched collision pairs chain into groups; take the leftmost run.
        std::vector<int> firsts;
        for (const Candidate& c : cands)
            if (c.kind == EventKind::Collision && in_batch(c)) firsts.push_back(c.first);
        std::sort(firsts.begin(), firsts.end());
        int lo = firsts.front();
        int hi = lo;
        for (int f : firsts) {
            if (f == hi + 1) hi = f;
            else if (f > hi + 1) break;
        }
        Event ev{EventKind::Collision, t_ev, {}};
        for (int k = lo; k <= hi + 1; ++k) ev.indices.push_back(k);
        return ev;
    }
    const Candidate* best = nullptr;
    for (const Candidate& c : cands) {
        if (!in_batch(c) || kind_priority(c.kind) != best_priority) continue;
        if (!best || c.first < best->first) best = &c;
    }
    return {best->kind, t_ev, best->indices};
}

void apply_collision(ClusterState& state, const std::vector<int>& group) {
    auto& segs = state.segments;
    if (group.size() < 2) fail(Errc::NotInContact, "collision needs at least two segments");
    for (std::size_t k = 0; k < group.size(); ++k) {
        if (group[k] < 0 || group[k] >= static_cast<int>(segs.size()))
            fail(Errc::NotInContact, "segment index out of range");
        if (k > 0 && group[k] != group[k - 1] + 1)
            fail(Errc::NotInContact, "collision group must be contiguous");
    }
    for (std::size_t k = 0; k + 1 < group.size(); ++k) {
        const Segment& l = segs[group[k]];
        const Segment& r = segs[group[k + 1]];
        if (r.a - l.b > kEpsX)
            fail(Errc::NotInContact, "segments " + std::to_string(group[k]) + " and " +
                                         std::to_string(group[k + 1]) + " are apart");
        if (l.pinned_head || r.pinned_tail)
            fail(Errc::NotInContact, "collision group crosses a coupling joint");
    }

    // Everyone adopts the velocity of the rightmost member and banks the
    // rest; that member is the constraint setter and keeps its state.
    double uq = segs[group.back()].u;
    for (std::size_t k = 0; k + 1 < group.size(); ++k) {
        Segment& s = segs[group[k]];
        s.p = s.u + s.p - uq;
        s.u = uq;
    }
    // Close sub-tolerance gaps exactly, translating members leftward of the
    // setter so no mass is created or destroyed.
    for (std::size_t k = group.size() - 1; k-- > 0;) {
        Segment& l = segs[group[k]];
        double shift = segs[group[k + 1]].a - l.b;
        l.a += shift;
        l.b += shift;
    }
}

namespace {

void begin_coupling(ClusterState& state, const RoadProfile& road, int segment, int transition) {
    auto& segs = state.segments;
    Segment& s = segs[segment];
    double r = road.transitions[transition];
    if (s.pinned_head) fail(Errc::WrongDirection, "segment is already engaged at a transition");
    if (std::abs(s.b - r) > kEpsX) fail(Errc::WrongDirection, "head is not at the transition");

    // Re-pin the head exactly onto the transition, preserving the length.
    double shift = r - s.b;
    s.a += shift;
    s.b = r;
    s.pinned_head = true;
    s.head_transition = transition;

    int to_level = road.level_at(r);
    double i_up = s.level == 2 ? 1.0 / road.alpha : 1.0;
    double i_dn = to_level == 2 ? 1.0 / road.alpha : 1.0;

    Segment d;
    d.a = r;
    d.b = r;
    d.level = to_level;
    d.u = s.w() * i_up / i_dn; // the weighted speed budget carries across
    d.p = 0.0;
    d.pinned_tail = true;
    d.tail_transition = transition;
    segs.insert(segs.begin() + segment + 1, d);

    resolve_couplings(state);
    if (segs[segment].p < -kEpsX || segs[segment + 1].p < -kEpsX)
        fail(Errc::NegativeOffset, "coupling closure produced a negative offset");
}

} // namespace

void begin_narrowing(ClusterState& state, const RoadProfile& road, int segment, int transition) {
    if (segment < 0 || segment >= static_cast<int>(state.segments.size()) || transition < 0 ||
        transition >= road.transition_count())
        fail(Errc::WrongDirection, "no such segment or transition");
    if (state.segments[segment].level != 2 || road.levels[transition] != 2 ||
        road.levels[transition + 1] != 1)
        fail(Errc::WrongDirection, "narrowing requires a two-lane block meeting a 2->1 transition");
    begin_coupling(state, road, segment, transition);
}

void begin_enlargement(ClusterState& state, const RoadProfile& road, int segment, int transition) {
    if (segment < 0 || segment >= static_cast<int>(state.segments.size()) || transition < 0 ||
        transition >= road.transition_count())
        fail(Errc::WrongDirection, "no such segment or transition");
    if (state.segments[segment].level != 1 || road.levels[transition] != 1 ||
        road.levels[transition + 1] != 2)
        fail(Errc::WrongDirection, "enlargement requires a one-lane block meeting a 1->2 transition");
    begin_coupling(state, road, segment, transition);
}

void complete_coupling(ClusterState& state, const RoadProfile& road, int transition) {
    if (transition < 0 || transition >= road.transition_count())
        fail(Errc::CouplingNotComplete, "no such transition");
    auto& segs = state.segments;
    int i = -1;
    for (std::size_t k = 0; k < segs.size(); ++k)
        if (segs[k].pinned_head && segs[k].head_transition == transition) i = static_cast<int>(k);
    if (i < 0) fail(Errc::CouplingNotComplete, "no coupling engaged at this transition");
    Segment& up = segs[i];
    if (up.pinned_tail)
        fail(Errc::CouplingNotComplete, "upstream piece still bridges an earlier transition");
    if (up.length() > kEpsX)
        fail(Errc::CouplingNotComplete, "upstream piece has not drained yet");
    int di = i + 1;
    if (di >= static_cast<int>(segs.size()) || !segs[di].pinned_tail ||
        segs[di].tail_transition != transition)
        fail(Errc::CouplingNotComplete, "downstream partner missing");

    // Hand the sub-tolerance mass sliver over before dropping the piece.
    segs[di].b += std::max(0.0, up.length()) * up.level / segs[di].level;
    segs[di].pinned_tail = false;
    segs[di].tail_transition = -1;
    segs.erase(segs.begin() + i);

    Segment& ex = segs[i];
    if (!ex.pinned_head) {
        // Fully released: spend the whole budget, unless a slower block sits
        // right at the head, in which case match it and bank the rest.
        double w = ex.w();
        double v = kInf;
        if (i + 1 < static_cast<int>(segs.size()) && segs[i + 1].a - ex.b <= kEpsX)
            v = segs[i + 1].tail_rate();
        ex.u = std::min(w, v);
        ex.p = w - ex.u;
    }
    resolve_couplings(state);
}

void resolve_couplings(ClusterState& state) {
    auto& segs = state.segments;
    int n = static_cast<int>(segs.size());
    int i = n - 1;
    while (i >= 0) {
        // A chain ends at a downstream piece that is not itself engaged
        // further; walk left to its upstream-most member.
        if (!(segs[i].pinned_tail && !segs[i].pinned_head)) {
            --i;
            continue;
        }
        int last = i;
        int first = i;
        while (first > 0 && segs[first].pinned_tail && segs[first - 1].pinned_head &&
               segs[first - 1].head_transition == segs[first].tail_transition)
            --first;

        // The chain passes the largest mass flux every member's budget
        // allows; a slower block touching the chain head caps it further.
        double flux = kInf;
        for (int k = first; k <= last; ++k) flux = std::min(flux, segs[k].level * segs[k].w());
        if (last + 1 < n && segs[last + 1].a - segs[last].b <= kEpsX)
            flux = std::min(flux, segs[last].level * segs[last + 1].tail_rate());

        for (int k = first; k <= last; ++k) {
            double w = segs[k].w();
            segs[k].u = flux / segs[k].level;
            segs[k].p = w - segs[k].u;
        }
        i = first - 1;
    }
}

Trajectory run(const RoadProfile& road, const ClusterState& initial, double horizon,
               const RunOptions& options) {
    road.validate();
    if (!(horizon >= initial.time))
        fail(Errc::ValidationError, "horizon precedes the initial time");

    ClusterState state = initial;
    ConstraintReport report = state.check_constraints(road);
    if (!report.ok()) {
        const Violation& v = report.violations.front();
        fail(Errc::InadmissibleState, std::string(violation_name(v.kind)) + " on segment " +
                                          std::to_string(v.segment) + ": " + v.detail);
    }
    merge_identical_contacts(state);

    Trajectory traj{road, state, horizon, {}};
    int max_window = options.max_events_per_window > 0
                         ? options.max_events_per_window
                         : kZenoFactor * (static_cast<int>(state.segments.size()) +
                                          road.transition_count() + 1);
    double window_start = state.time;
    int window_count = 0;

    for (;;) {
        Event ev = next_event(state, road, horizon);
        double dt = ev.time - state.time;
        if (dt > 0.0) advance_positions(state, dt);
        if (ev.kind == EventKind::HorizonReached) {
            state.time = horizon;
            traj.log.push_back({ev, state});
            break;
        }
        switch (ev.kind) {
            case EventKind::Collision:
                apply_collision(state, ev.indices);
                break;
            case EventKind::TransitionHit:
                if (state.segments[ev.indices[0]].level == 2)
                    begin_narrowing(state, road, ev.indices[0], ev.indices[1]);
                else
                    begin_enlargement(state, road, ev.indices[0], ev.indices[1]);
                break;
            case EventKind::CouplingComplete:
                complete_coupling(state, road, ev.indices[0]);
                break;
            case EventKind::HorizonReached:
                break;
        }
        // A release can raise the contact cap of a chain further upstream, so
        // closure and release iterate together until nothing changes.
        do {
            resolve_couplings(state);
        } while (release_free_heads(state, road));
        merge_identical_contacts(state);
        traj.log.push_back({ev, state});

        if (state.time - window_start > kEpsT) {
            window_start = state.time;
            window_count = 1;
        } else if (++window_count > max_window) {
            fail(Errc::StalledSimulation,
                 std::to_string(window_count) + " events without time progress near t=" +
                     std::to_string(state.time));
        }
    }
    return traj;
}

ClusterState Trajectory::state_at(double t) const {
    const ClusterState* base = &initial;
    for (const LogEntry& entry : log) {
        if (entry.state.time <= t) base = &entry.state;
        else break;
    }
    ClusterState s = *base;
    double dt = std::min(t, horizon) - s.time;
    if (dt > 0.0) advance_positions(s, dt);
    return s;
}

} // namespace mlcpgd
