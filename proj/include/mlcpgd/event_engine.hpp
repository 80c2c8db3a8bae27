#pragma once

#include <vector>

#include "mlcpgd/cluster_state.hpp"
#include "mlcpgd/road_profile.hpp"

namespace mlcpgd {

enum class EventKind { Collision, TransitionHit, CouplingComplete, HorizonReached };

const char* event_kind_name(EventKind kind);

// indices payload by kind:
//   Collision        -> the contiguous group of segment indices that merged
//   TransitionHit    -> {segment index, transition index}
//   CouplingComplete -> {transition index}
//   HorizonReached   -> {}
struct Event {
    EventKind kind = EventKind::HorizonReached;
    double time = 0.0;
    std::vector<int> indices;
};

struct LogEntry {
    Event event;
    ClusterState state; // snapshot just after the event was applied
};

struct Trajectory {
    RoadProfile road;
    ClusterState initial;
    double horizon = 0.0;
    std::vector<LogEntry> log;

    // State at time t in [0, horizon], reconstructed exactly: fields are
    // piecewise constant and endpoints move affinely between events.
    ClusterState state_at(double t) const;
};

struct RunOptions {
    // Events allowed inside one simultaneity window before the run is
    // declared stalled; <= 0 picks the default from the problem size.
    int max_events_per_window = 0;
};

// Translate every segment by its endpoint rates for dt >= 0. Throws
// NegativeDt, or EventSkipped if an event would fire strictly inside the step.
void advance(ClusterState& state, const RoadProfile& road, double dt);

// Earliest upcoming event from this state (HorizonReached if nothing sooner).
// Simultaneous candidates are resolved collision-first, then coupling
// completions, then transition arrivals, leftmost first.
Event next_event(const ClusterState& state, const RoadProfile& road, double horizon);

// Sticky merge of a contiguous group of touching segments: every member
// adopts the velocity of the rightmost one and banks the difference in its
// offset. Throws NotInContact when the group is not a touching run.
void apply_collision(ClusterState& state, const std::vector<int>& group);

// A two-lane block whose head reached a 2->1 transition: split into a pinned
// upstream piece and a growing one-lane downstream piece. Throws
// WrongDirection, NegativeOffset.
void begin_narrowing(ClusterState& state, const RoadProfile& road, int segment, int transition);

// One-lane head reaching a 1->2 transition, mirror construction.
void begin_enlargement(ClusterState& state, const RoadProfile& road, int segment, int transition);

// The upstream piece at this transition has drained; remove it and release
// the downstream piece with its exit state. Throws CouplingNotComplete.
void complete_coupling(ClusterState& state, const RoadProfile& road, int transition);

// Recompute the velocity/offset split of every coupled chain from the mass
// flux it can sustain (capped by each member's banked speed and by a slower
// block sitting at the chain head). Idempotent.
void resolve_couplings(ClusterState& state);

// Drive the state to the horizon, logging every event. Throws
// InadmissibleState on a bad initial state and StalledSimulation when events
// pile up without time progressing.
Trajectory run(const RoadProfile& road, const ClusterState& initial, double horizon,
               const RunOptions& options = {});

} // namespace mlcpgd
