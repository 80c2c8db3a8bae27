#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "mlcpgd/constants.hpp"
#include "mlcpgd/errors.hpp"
#include "mlcpgd/event_engine.hpp"
#include "support/oracles.hpp"

using namespace mlcpgd;
using oracle::thrown_code;

namespace {

Segment block(double a, double b, double u, double p, int level = 1) {
    Segment s;
    s.a = a;
    s.b = b;
    s.u = u;
    s.p = p;
    s.level = level;
    return s;
}

std::vector<EventKind> kinds_of(const Trajectory& traj) {
    std::vector<EventKind> out;
    for (const auto& e : traj.log) out.push_back(e.event.kind);
    return out;
}

// Shared invariants of any trajectory: nondecreasing event times, admissible
// post-event states, and exact conservation of the total mass.
void check_trajectory(const Trajectory& traj) {
    double mass0 = traj.initial.total_mass();
    double prev = traj.initial.time;
    for (const auto& entry : traj.log) {
        CHECK(entry.event.time >= prev);
        prev = entry.event.time;
        auto report = entry.state.check_constraints(traj.road);
        if (!report.ok()) {
            CAPTURE(violation_name(report.violations.front().kind));
            CAPTURE(entry.state.time);
            CHECK(report.ok());
        }
        CHECK(entry.state.total_mass() ==
              doctest::Approx(mass0).epsilon(1e-10));
    }
}

} // namespace

// ---------------------------------------------------------------- advance --

TEST_CASE("advance translates a free block by u*dt") {
    RoadProfile road;
    ClusterState st;
    st.segments = {block(0, 1, 2, 0)};
    advance(st, road, 0.5);
    CHECK(st.segments[0].a == doctest::Approx(1.0));
    CHECK(st.segments[0].b == doctest::Approx(2.0));
    CHECK(st.time == doctest::Approx(0.5));
}

TEST_CASE("advance by zero changes nothing") {
    RoadProfile road;
    ClusterState st;
    st.segments = {block(0, 1, 2, 0)};
    advance(st, road, 0.0);
    CHECK(st.segments[0].a == 0.0);
    CHECK(st.segments[0].b == 1.0);
    CHECK(st.time == 0.0);
}

TEST_CASE("advance moves a coupled pair at its interior rates") {
    RoadProfile road{{0.0}, {2, 1}, 2.0};
    ClusterState st;
    Segment up = block(-1, 0, 0.25, 0.75, 2);
    up.pinned_head = true;
    up.head_transition = 0;
    Segment dn = block(0, 0.5, 0.5, 0, 1);
    dn.pinned_tail = true;
    dn.tail_transition = 0;
    st.segments = {up, dn};
    double mass = st.total_mass();

    advance(st, road, 1.0);
    CHECK(st.segments[0].a == doctest::Approx(-0.75));
    CHECK(st.segments[0].b == doctest::Approx(0.0));
    CHECK(st.segments[1].a == doctest::Approx(0.0));
    CHECK(st.segments[1].b == doctest::Approx(1.0));
    CHECK(st.total_mass() == doctest::Approx(mass)); // 2*0.75 + 1*1.0 = 2.5
}

TEST_CASE("advance refuses to step over a pending event") {
    RoadProfile road;
    ClusterState st;
    st.segments = {block(0, 1, 2, 0), block(2, 3, 1, 0)}; // collision at t=1
    CHECK(thrown_code([&] { advance(st, road, 2.0); }) == Errc::EventSkipped);
    CHECK(thrown_code([&] { advance(st, road, -0.1); }) == Errc::NegativeDt);
}

// ------------------------------------------------------------- next_event --

TEST_CASE("closing blocks meet at the gap-closure time") {
    RoadProfile road;
    ClusterState st;
    st.segments = {block(0, 1, 2, 0), block(2, 3, 1, 0)};
    Event ev = next_event(st, road, 100.0);
    CHECK(ev.kind == EventKind::Collision);
    CHECK(ev.time == doctest::Approx(1.0));
    REQUIRE(ev.indices.size() == 2);
    CHECK(ev.indices[0] == 0);
    CHECK(ev.indices[1] == 1);
}

TEST_CASE("a free head reaches the next transition at distance over speed") {
    RoadProfile road{{3.0}, {1, 2}, 2.0};
    ClusterState st;
    st.segments = {block(0, 1, 1, 0)};
    Event ev = next_event(st, road, 100.0);
    CHECK(ev.kind == EventKind::TransitionHit);
    CHECK(ev.time == doctest::Approx(2.0));
    REQUIRE(ev.indices.size() == 2);
    CHECK(ev.indices[0] == 0); // segment
    CHECK(ev.indices[1] == 0); // transition
}

TEST_CASE("nothing ahead means the horizon is the next event") {
    RoadProfile road;
    ClusterState st;
    st.segments = {block(0, 1, 1, 0)};
    Event ev = next_event(st, road, 10.0);
    CHECK(ev.kind == EventKind::HorizonReached);
    CHECK(ev.time == doctest::Approx(10.0));
}

TEST_CASE("equal speeds never close a gap") {
    RoadProfile road;
    ClusterState st;
    st.segments = {block(0, 1, 1, 0), block(2, 3, 1, 0)};
    Event ev = next_event(st, road, 50.0);
    CHECK(ev.kind == EventKind::HorizonReached);
}

TEST_CASE("a draining upstream piece completes at length over rate") {
    RoadProfile road{{0.0}, {2, 1}, 2.0};
    ClusterState st;
    Segment up = block(-1, 0, 0.25, 0.75, 2);
    up.pinned_head = true;
    up.head_transition = 0;
    Segment dn = block(0, 0.5, 0.5, 0, 1);
    dn.pinned_tail = true;
    dn.tail_transition = 0;
    st.segments = {up, dn};
    Event ev = next_event(st, road, 100.0);
    CHECK(ev.kind == EventKind::CouplingComplete);
    CHECK(ev.time == doctest::Approx(4.0));
    REQUIRE(ev.indices.size() == 1);
    CHECK(ev.indices[0] == 0); // transition index
}

// -------------------------------------------------------- apply_collision --

TEST_CASE("a faster block adopts the slower leader's speed and banks the rest") {
    ClusterState st;
    st.segments = {block(0, 1, 2, 0), block(1, 2, 1, 0)};
    apply_collision(st, {0, 1});
    CHECK(st.segments[0].u == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(st.segments[0].p == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(st.segments[1].u == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(st.segments[1].p == doctest::Approx(0.0));
}

TEST_CASE("a simultaneous triple pile-up banks offsets left to right") {
    ClusterState st;
    st.segments = {block(0, 1, 3, 0), block(1, 2, 2, 0), block(2, 3, 1, 0)};
    apply_collision(st, {0, 1, 2});
    for (const auto& s : st.segments) CHECK(s.u == doctest::Approx(1.0));
    CHECK(st.segments[0].p == doctest::Approx(2.0));
    CHECK(st.segments[1].p == doctest::Approx(1.0));
    CHECK(st.segments[2].p == doctest::Approx(0.0));
}

TEST_CASE("collisions require contact and an unpinned run") {
    ClusterState apart;
    apart.segments = {block(0, 1, 2, 0), block(3, 4, 1, 0)};
    CHECK(thrown_code([&] { apply_collision(apart, {0, 1}); }) == Errc::NotInContact);

    ClusterState pinned;
    Segment l = block(0, 1, 0.25, 0, 2);
    l.pinned_head = true;
    l.head_transition = 0;
    Segment r = block(1, 2, 0.5, 0, 1);
    r.pinned_tail = true;
    r.tail_transition = 0;
    pinned.segments = {l, r};
    CHECK(thrown_code([&] { apply_collision(pinned, {0, 1}); }) == Errc::NotInContact);
}

TEST_CASE("randomized pairwise collisions satisfy the sticky formulas exactly") {
    std::mt19937_64 rng(20250818u);
    std::uniform_real_distribution<double> speed(0.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        double ur = speed(rng);
        double ul = ur + speed(rng) + 1e-3; // strictly faster on the left
        ClusterState st;
        st.segments = {block(0, 1, ul, 0), block(1, 2, ur, 0)};
        apply_collision(st, {0, 1});
        CHECK(st.segments[0].u == ur);           // exact, no arithmetic involved
        CHECK(st.segments[0].p == ul - ur);      // single subtraction
        CHECK(st.segments[1].u == ur);
        CHECK(st.segments[1].p == 0.0);
    }
}

// ------------------------------------------------- narrowing / enlargement --

TEST_CASE("unobstructed narrowing splits per the closed form") {
    RoadProfile road{{0.0}, {2, 1}, 2.0};
    ClusterState st;
    st.segments = {block(-1, 0, 1, 0, 2)};
    begin_narrowing(st, road, 0, 0);
    REQUIRE(st.segments.size() == 2);
    const Segment& up = st.segments[0];
    const Segment& dn = st.segments[1];
    CHECK(up.u == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(up.p == doctest::Approx(0.75).epsilon(1e-10));
    CHECK(up.pinned_head);
    CHECK(dn.u == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(dn.p == doctest::Approx(0.0));
    CHECK(dn.level == 1);
    CHECK(dn.pinned_tail);
}

TEST_CASE("narrowing with alpha=1 only halves the density") {
    RoadProfile road{{0.0}, {2, 1}, 1.0};
    ClusterState st;
    st.segments = {block(-1, 0, 1, 0, 2)};
    begin_narrowing(st, road, 0, 0);
    CHECK(st.segments[0].u == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(st.segments[1].u == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(st.segments[1].p == doctest::Approx(0.0));
}

TEST_CASE("narrowing against a standing jam parks the whole coupling") {
    RoadProfile road{{0.0}, {2, 1}, 2.0};
    ClusterState st;
    st.segments = {block(-1, 0, 1, 0, 2), block(0, 1, 0, 0, 1)};
    begin_narrowing(st, road, 0, 0);
    REQUIRE(st.segments.size() == 3);
    CHECK(st.segments[0].u == doctest::Approx(0.0));
    CHECK(st.segments[0].p == doctest::Approx(1.0));
    CHECK(st.segments[1].u == doctest::Approx(0.0));
    CHECK(st.segments[1].p == doctest::Approx(0.5));
}

TEST_CASE("unobstructed enlargement spends the whole budget upstream") {
    RoadProfile road{{0.0}, {1, 2}, 2.0};
    ClusterState st;
    st.segments = {block(-1, 0, 1, 0, 1)};
    begin_enlargement(st, road, 0, 0);
    REQUIRE(st.segments.size() == 2);
    CHECK(st.segments[0].u == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(st.segments[0].p == doctest::Approx(0.0));
    CHECK(st.segments[1].u == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(st.segments[1].p == doctest::Approx(1.5).epsilon(1e-10));
    CHECK(st.segments[1].level == 2);
}

TEST_CASE("enlargement with alpha=1 halves speed and keeps half the budget banked") {
    RoadProfile road{{0.0}, {1, 2}, 1.0};
    ClusterState st;
    st.segments = {block(-1, 0, 1, 0, 1)};
    begin_enlargement(st, road, 0, 0);
    CHECK(st.segments[1].u == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(st.segments[1].p == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("enlargement against a slow blocker is capped by contact") {
    RoadProfile road{{0.0}, {1, 2}, 2.0};
    ClusterState st;
    st.segments = {block(-1, 0, 1, 0, 1), block(0, 1, 0.25, 0, 2)};
    begin_enlargement(st, road, 0, 0);
    REQUIRE(st.segments.size() == 3);
    CHECK(st.segments[0].u == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(st.segments[0].p == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(st.segments[1].u == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("coupling starters validate direction") {
    RoadProfile road{{0.0}, {2, 1}, 2.0};
    ClusterState st;
    st.segments = {block(-1, 0, 1, 0, 2)};
    CHECK(thrown_code([&] { begin_enlargement(st, road, 0, 0); }) == Errc::WrongDirection);

    ClusterState away;
    away.segments = {block(-2, -1, 1, 0, 2)};
    CHECK(thrown_code([&] { begin_narrowing(away, road, 0, 0); }) == Errc::WrongDirection);
}

// ------------------------------------------------------- complete_coupling --

namespace {

ClusterState drained_pair(double dn_b, double dn_u, double dn_p, int up_level, int dn_level) {
    ClusterState st;
    Segment up = block(0, 0, 0.25, 0.25, up_level);
    up.pinned_head = true;
    up.head_transition = 0;
    Segment dn = block(0, dn_b, dn_u, dn_p, dn_level);
    dn.pinned_tail = true;
    dn.tail_transition = 0;
    st.segments = {up, dn};
    return st;
}

} // namespace

TEST_CASE("completed narrowing releases the downstream block at its exit state") {
    RoadProfile road{{0.0}, {2, 1}, 2.0};
    ClusterState st = drained_pair(2.0, 0.5, 0.0, 2, 1); // w = 0.5 downstream
    complete_coupling(st, road, 0);
    REQUIRE(st.segments.size() == 1);
    CHECK(st.segments[0].u == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(st.segments[0].p == doctest::Approx(0.0));
    CHECK(st.segments[0].length() == doctest::Approx(2.0)); // doubled
    CHECK(!st.segments[0].coupled());
}

TEST_CASE("completed enlargement releases at the doubled budget") {
    RoadProfile road{{0.0}, {1, 2}, 2.0};
    ClusterState st = drained_pair(0.5, 0.5, 1.5, 1, 2); // w = 2 downstream
    complete_coupling(st, road, 0);
    REQUIRE(st.segments.size() == 1);
    CHECK(st.segments[0].u == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(st.segments[0].p == doctest::Approx(0.0));
    CHECK(st.segments[0].length() == doctest::Approx(0.5)); // halved
}

TEST_CASE("an obstructed exit matches the blocker and banks the difference") {
    RoadProfile road{{0.0}, {2, 1}, 2.0};
    ClusterState st = drained_pair(2.0, 0.5, 0.0, 2, 1);
    st.segments.push_back(block(2.0, 3.0, 0.2, 0, 1)); // touching slow leader
    complete_coupling(st, road, 0);
    REQUIRE(st.segments.size() == 2);
    CHECK(st.segments[0].u == doctest::Approx(0.2).epsilon(1e-10));
    CHECK(st.segments[0].p == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("completion requires a drained upstream piece") {
    RoadProfile road{{0.0}, {2, 1}, 2.0};
    ClusterState st;
    Segment up = block(-0.5, 0, 0.25, 0.75, 2);
    up.pinned_head = true;
    up.head_transition = 0;
    Segment dn = block(0, 1, 0.5, 0, 1);
    dn.pinned_tail = true;
    dn.tail_transition = 0;
    st.segments = {up, dn};
    CHECK(thrown_code([&] { complete_coupling(st, road, 0); }) == Errc::CouplingNotComplete);
}

// -------------------------------------------------------------------- run --

TEST_CASE("a lone block just rides to the horizon") {
    RoadProfile road;
    ClusterState st;
    st.segments = {block(0, 1, 1.5, 0)};
    Trajectory traj = run(road, st, 10.0);
    check_trajectory(traj);
    REQUIRE(traj.log.size() == 1);
    CHECK(traj.log[0].event.kind == EventKind::HorizonReached);
    CHECK(traj.log[0].state.segments[0].a == doctest::Approx(15.0));
    CHECK(traj.log[0].state.segments[0].b == doctest::Approx(16.0));
}

TEST_CASE("a merged jam never re-separates on a uniform road") {
    RoadProfile road;
    ClusterState st;
    st.segments = {block(0, 1, 2, 0), block(2, 3, 1, 0)};
    Trajectory traj = run(road, st, 20.0);
    check_trajectory(traj);
    auto kinds = kinds_of(traj);
    REQUIRE(kinds.size() == 2);
    CHECK(kinds[0] == EventKind::Collision);
    CHECK(kinds[1] == EventKind::HorizonReached);
    const ClusterState& fin = traj.log.back().state;
    REQUIRE(fin.segments.size() == 2);
    CHECK(fin.segments[1].a - fin.segments[0].b == doctest::Approx(0.0));
    CHECK(fin.segments[0].u == doctest::Approx(1.0));
    CHECK(fin.segments[0].p == doctest::Approx(1.0));
}

TEST_CASE("full narrowing pipeline: hit, drain, exit at the closed-form state") {
    RoadProfile road{{0.0}, {2, 1}, 2.0};
    ClusterState st;
    st.segments = {block(-2, -1, 1, 0, 2)};
    Trajectory traj = run(road, st, 10.0);
    check_trajectory(traj);
    auto kinds = kinds_of(traj);
    REQUIRE(kinds.size() == 3);
    CHECK(kinds[0] == EventKind::TransitionHit);
    CHECK(kinds[1] == EventKind::CouplingComplete);
    CHECK(kinds[2] == EventKind::HorizonReached);
    CHECK(traj.log[0].event.time == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(traj.log[1].event.time == doctest::Approx(5.0).epsilon(1e-10)); // duration L/u_int = 4

    const ClusterState& fin = traj.log.back().state;
    REQUIRE(fin.segments.size() == 1);
    CHECK(fin.segments[0].u == doctest::Approx(0.5).epsilon(1e-10)); // exit speed w/alpha
    CHECK(fin.segments[0].p == doctest::Approx(0.0));
    CHECK(fin.segments[0].length() == doctest::Approx(2.0).epsilon(1e-10)); // 2L
    CHECK(fin.segments[0].a == doctest::Approx(2.5).epsilon(1e-10));
}

TEST_CASE("full enlargement pipeline: exit at doubled speed and half length") {
    RoadProfile road{{0.0}, {1, 2}, 2.0};
    ClusterState st;
    st.segments = {block(-2, -1, 1, 0, 1)};
    Trajectory traj = run(road, st, 4.0);
    check_trajectory(traj);
    auto kinds = kinds_of(traj);
    REQUIRE(kinds.size() == 3);
    CHECK(kinds[0] == EventKind::TransitionHit);
    CHECK(kinds[1] == EventKind::CouplingComplete);
    CHECK(traj.log[1].event.time == doctest::Approx(2.0).epsilon(1e-10)); // duration L/w

    const ClusterState& fin = traj.log.back().state;
    REQUIRE(fin.segments.size() == 1);
    CHECK(fin.segments[0].u == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(fin.segments[0].p == doctest::Approx(0.0));
    CHECK(fin.segments[0].length() == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(fin.segments[0].a == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("crossing a widening and a narrowing in turn restores the block") {
    RoadProfile road{{0.0, 10.0}, {1, 2, 1}, 2.0};
    ClusterState st;
    st.segments = {block(-1, 0, 1, 0, 1)};
    Trajectory traj = run(road, st, 8.0);
    check_trajectory(traj);

    const ClusterState& fin = traj.log.back().state;
    REQUIRE(fin.segments.size() == 1);
    CHECK(fin.segments[0].u == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fin.segments[0].p == doctest::Approx(0.0));
    CHECK(fin.segments[0].length() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fin.segments[0].level == 1);
}

TEST_CASE("a slow follower entering a drained narrowing leaves a growing void in the jam") {
    // Narrowing at 0, front block couples at t=0, the follower with
    // u_front/(2a) < u_rear <= u_front catches the draining tail, inherits the
    // crawl, and cannot keep up once the front accelerates out.
    RoadProfile road{{0.0}, {2, 1}, 2.0};
    ClusterState st;
    st.segments = {block(-2.2, -1.2, 0.4, 0, 2), block(-1, 0, 1, 0, 2)};
    Trajectory traj = run(road, st, 20.0);
    check_trajectory(traj);

    auto kinds = kinds_of(traj);
    REQUIRE(kinds.size() == 6);
    CHECK(kinds[0] == EventKind::TransitionHit);    // front engages
    CHECK(kinds[1] == EventKind::Collision);        // rear catches the tail
    CHECK(kinds[2] == EventKind::CouplingComplete); // front exits
    CHECK(kinds[3] == EventKind::TransitionHit);    // rear engages
    CHECK(kinds[4] == EventKind::CouplingComplete); // rear exits
    CHECK(traj.log[1].event.time == doctest::Approx(4.0 / 3.0).epsilon(1e-10));
    CHECK(traj.log[2].event.time == doctest::Approx(4.0).epsilon(1e-10));

    // Between the two exits the one-lane pieces separate at (u_f - u_r)/a.
    ClusterState mid = traj.state_at(9.0);
    REQUIRE(mid.segments.size() == 3);
    double gap9 = mid.segments[2].a - mid.segments[1].b;
    CHECK(gap9 == doctest::Approx(0.3 * 5.0).epsilon(1e-9));
    ClusterState later = traj.state_at(11.0);
    double gap11 = later.segments[2].a - later.segments[1].b;
    CHECK(gap11 - gap9 == doctest::Approx(0.6).epsilon(1e-9));
}

TEST_CASE("colliding into a slow block just past a widening banks the offsets") {
    // The emerging piece catches a slow leader while the upstream side still
    // drains: the contact cap yields p_int = u_i - 2*u_j upstream, and the
    // exit keeps p = a*u_i - u_j banked behind the leader.
    RoadProfile road{{0.0}, {1, 2}, 2.0};
    ClusterState st;
    st.segments = {block(-1, 0, 1, 0, 1), block(0.05, 0.55, 0.4, 0, 2)};
    Trajectory traj = run(road, st, 5.0);
    check_trajectory(traj);

    auto kinds = kinds_of(traj);
    REQUIRE(kinds.size() == 4);
    CHECK(kinds[0] == EventKind::TransitionHit);
    CHECK(kinds[1] == EventKind::Collision);
    CHECK(kinds[2] == EventKind::CouplingComplete);

    // After the collision the upstream piece crawls at 2*u_j with the rest banked.
    const ClusterState& after_hit = traj.log[1].state;
    REQUIRE(after_hit.segments.size() == 3);
    CHECK(after_hit.segments[0].u == doctest::Approx(0.8).epsilon(1e-10));
    CHECK(after_hit.segments[0].p == doctest::Approx(0.2).epsilon(1e-10)); // u_i - 2u_j

    // After completion the released block tails the leader with the banked gap.
    const ClusterState& after_exit = traj.log[2].state;
    REQUIRE(after_exit.segments.size() == 2);
    CHECK(after_exit.segments[0].u == doctest::Approx(0.4).epsilon(1e-10));
    CHECK(after_exit.segments[0].p == doctest::Approx(1.6).epsilon(1e-10)); // a*u_i - u_j
    CHECK(after_exit.segments[0].p >= after_hit.segments[0].p); // a*u_i - u_j >= u_i - 2u_j
    CHECK(after_hit.segments[0].p > 0.0);

    // The jam stays glued from then on.
    const ClusterState& fin = traj.log.back().state;
    CHECK(fin.segments[1].a - fin.segments[0].b == doctest::Approx(0.0));
}

TEST_CASE("a block released by a widening outruns a slow follower for good") {
    RoadProfile road{{0.0}, {1, 2}, 2.0};
    ClusterState st;
    st.segments = {block(-3, -2.5, 0.4, 0, 1), block(-1, 0, 1, 0, 1)};
    Trajectory traj = run(road, st, 6.0);
    check_trajectory(traj);

    // Front crosses and accelerates to a*u; the rear never catches it and the
    // void between them widens at a*u_front - u_rear.
    ClusterState s2 = traj.state_at(2.0);
    ClusterState s3 = traj.state_at(3.0);
    REQUIRE(s2.segments.size() == 2);
    double gap2 = s2.segments[1].a - s2.segments[0].b;
    double gap3 = s3.segments[1].a - s3.segments[0].b;
    CHECK(s2.segments[1].u == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(gap3 - gap2 == doctest::Approx(2.0 - 0.4).epsilon(1e-9));
}

TEST_CASE("a short two-lane section builds a chain and hands the block through") {
    RoadProfile road{{0.0, 0.3}, {1, 2, 1}, 2.0};
    ClusterState st;
    st.segments = {block(-1, 0, 1, 0, 1)};
    Trajectory traj = run(road, st, 3.0);
    check_trajectory(traj);

    auto kinds = kinds_of(traj);
    REQUIRE(kinds.size() == 5);
    CHECK(kinds[0] == EventKind::TransitionHit);    // widening engaged
    CHECK(kinds[1] == EventKind::TransitionHit);    // chain: narrowing engaged too
    CHECK(kinds[2] == EventKind::CouplingComplete); // widening drained
    CHECK(kinds[3] == EventKind::CouplingComplete); // narrowing drained
    CHECK(traj.log[1].event.time == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(traj.log[2].event.time == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(traj.log[3].event.time == doctest::Approx(1.6).epsilon(1e-9));

    const ClusterState& fin = traj.log.back().state;
    REQUIRE(fin.segments.size() == 1);
    CHECK(fin.segments[0].u == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fin.segments[0].p == doctest::Approx(0.0));
    CHECK(fin.segments[0].length() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fin.segments[0].level == 1);
}

TEST_CASE("a short one-lane section likewise chains a narrowing into a widening") {
    RoadProfile road{{0.0, 0.2}, {2, 1, 2}, 2.0};
    ClusterState st;
    st.segments = {block(-1, 0, 1, 0, 2)};
    Trajectory traj = run(road, st, 6.0);
    check_trajectory(traj);

    const ClusterState& fin = traj.log.back().state;
    REQUIRE(fin.segments.size() == 1);
    CHECK(fin.segments[0].u == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fin.segments[0].p == doctest::Approx(0.0));
    CHECK(fin.segments[0].length() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fin.segments[0].level == 2);
}

TEST_CASE("a collision and a transition arrival at the same instant process collision-first") {
    RoadProfile road{{2.0}, {1, 2}, 2.0};
    ClusterState st;
    st.segments = {block(-3, -1.5, 2.5, 0, 1), block(0, 1, 1, 0, 1)};
    Trajectory traj = run(road, st, 1.0 + 1e-7);
    check_trajectory(traj);
    auto kinds = kinds_of(traj);
    REQUIRE(kinds.size() >= 2);
    CHECK(kinds[0] == EventKind::Collision);
    CHECK(kinds[1] == EventKind::TransitionHit);
    CHECK(traj.log[0].event.time == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(traj.log[1].event.time == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("runs reject inadmissible starting states") {
    RoadProfile road;
    ClusterState st;
    st.segments = {block(0, 2, 1, 0), block(1, 3, 1, 0)};
    CHECK(thrown_code([&] { run(road, st, 1.0); }) == Errc::InadmissibleState);
}

TEST_CASE("the stall guard interrupts cascades when configured tightly") {
    RoadProfile road{{0.0}, {2, 1}, 2.0};
    ClusterState st;
    st.segments = {block(-2.2, -1.2, 0.4, 0, 2), block(-1, 0, 1, 0, 2)};
    RunOptions tight;
    tight.max_events_per_window = 1;
    CHECK(thrown_code([&] { run(road, st, 20.0, tight); }) == Errc::StalledSimulation);
}

TEST_CASE("identical runs produce identical trajectories") {
    RoadProfile road{{0.0, 0.3}, {1, 2, 1}, 2.0};
    ClusterState st;
    st.segments = {block(-2.2, -1.2, 0.4, 0, 1), block(-1, 0, 1, 0, 1)};
    Trajectory a = run(road, st, 12.0);
    Trajectory b = run(road, st, 12.0);
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        CHECK(a.log[i].event.kind == b.log[i].event.kind);
        CHECK(a.log[i].event.time == b.log[i].event.time);
        REQUIRE(a.log[i].state.segments.size() == b.log[i].state.segments.size());
        for (std::size_t k = 0; k < a.log[i].state.segments.size(); ++k) {
            CHECK(a.log[i].state.segments[k].a == b.log[i].state.segments[k].a);
            CHECK(a.log[i].state.segments[k].b == b.log[i].state.segments[k].b);
            CHECK(a.log[i].state.segments[k].u == b.log[i].state.segments[k].u);
            CHECK(a.log[i].state.segments[k].p == b.log[i].state.segments[k].p);
        }
    }
}

TEST_CASE("states between events reconstruct exactly from the log") {
    RoadProfile road{{0.0}, {2, 1}, 2.0};
    ClusterState st;
    st.segments = {block(-2, -1, 1, 0, 2)};
    Trajectory traj = run(road, st, 10.0);

    ClusterState before = traj.state_at(0.5); // still free
    CHECK(before.segments[0].b == doctest::Approx(-0.5));
    ClusterState during = traj.state_at(3.0); // two drain hours after the hit
    REQUIRE(during.segments.size() == 2);
    CHECK(during.segments[0].a == doctest::Approx(-1.0 + 0.25 * 2.0));
    CHECK(during.segments[1].b == doctest::Approx(0.5 * 2.0));
    ClusterState after = traj.state_at(6.0);
    REQUIRE(after.segments.size() == 1);
    CHECK(after.segments[0].a == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("a 2->1->2 double crossing with wide spacing also restores the block") {
    RoadProfile road{{0.0, 10.0}, {2, 1, 2}, 2.0};
    ClusterState st;
    st.segments = {block(-1, 0, 1, 0, 2)};
    Trajectory traj = run(road, st, 40.0);
    check_trajectory(traj);
    const ClusterState& fin = traj.log.back().state;
    REQUIRE(fin.segments.size() == 1);
    CHECK(fin.segments[0].u == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fin.segments[0].p == doctest::Approx(0.0));
    CHECK(fin.segments[0].length() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fin.segments[0].level == 2);
}
