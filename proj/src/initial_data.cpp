#include "mlcpgd/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mlcpgd/errors.hpp"
#include "mlcpgd/quadrature.hpp"

namespace mlcpgd {

namespace {

constexpr double kCompatTol = 1e-9;

void check_table_shape(const LinearTable& t, const char* name) {
    if (t.x.size() != t.v.size() || t.x.size() < 2)
        fail(Errc::ValidationError,
             std::string(name) + ": needs at least two nodes with matching values");
    for (std::size_t i = 0; i + 1 < t.x.size(); ++i)
        if (!(t.x[i] < t.x[i + 1]))
            fail(Errc::UnsortedGrid, std::string(name) + ": nodes must strictly increase");
}

} // namespace

double LinearTable::at(double q) const {
    if (x.empty() || q < x.front() || q > x.back()) return 0.0;
    auto it = std::upper_bound(x.begin(), x.end(), q);
    if (it == x.end()) return v.back();
    if (it == x.begin()) return v.front();
    std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    double t = (q - x[i]) / (x[i + 1] - x[i]);
    return v[i] + t * (v[i + 1] - v[i]);
}

double LinearTable::integral(double lo, double hi) const {
    if (x.empty()) return 0.0;
    lo = std::max(lo, x.front());
    hi = std::min(hi, x.back());
    if (lo >= hi) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        double c = std::max(x[i], lo);
        double d = std::min(x[i + 1], hi);
        if (c >= d) continue;
        acc += 0.5 * (at(c) + at(d)) * (d - c);
    }
    return acc;
}

double LinearTable::min_on(double lo, double hi) const {
    if (x.empty()) return 0.0;
    lo = std::max(lo, x.front());
    hi = std::min(hi, x.back());
    if (lo > hi) return 0.0;
    double m = std::min(at(lo), at(hi));
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] > lo && x[i] < hi) m = std::min(m, v[i]);
    return m;
}

void GeneralData::validate(const RoadProfile& road) const {
    road.validate();
    check_table_shape(n0, "n0");
    check_table_shape(u0, "u0");
    check_table_shape(p0, "p0");
    for (double value : n0.v)
        if (value < 0.0) fail(Errc::ValidationError, "n0 must be nonnegative");
    for (double value : u0.v)
        if (value < 0.0) fail(Errc::ValidationError, "u0 must be nonnegative");
    for (double value : p0.v)
        if (value < 0.0) fail(Errc::ValidationError, "p0 must be nonnegative");

    // Capacity bound: between consecutive breakpoints (nodes and road
    // transitions) the density is linear and the capacity constant, so
    // endpoint checks are exact.
    std::vector<double> cuts = n0.x;
    for (double r : road.transitions)
        if (r > n0.lo() && r < n0.hi()) cuts.push_back(r);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double c = cuts[i], d = cuts[i + 1];
        if (c >= d) continue;
        double cap = static_cast<double>(road.level_at(0.5 * (c + d)));
        if (std::max(n0.at(c), n0.at(d)) > cap + 1e-12)
            fail(Errc::ValidationError, "n0 exceeds the lane capacity");
    }

    // Compatibility at tabulation resolution: wherever the offset is
    // positive the density must sit at capacity. Checked at every node of
    // every table plus road transitions, and at midpoints in between.
    std::vector<double> points = cuts;
    for (double q : u0.x) points.push_back(q);
    for (double q : p0.x) points.push_back(q);
    std::sort(points.begin(), points.end());
    std::vector<double> probes;
    for (std::size_t i = 0; i < points.size(); ++i) {
        probes.push_back(points[i]);
        if (i + 1 < points.size() && points[i] < points[i + 1])
            probes.push_back(0.5 * (points[i] + points[i + 1]));
    }
    for (double q : probes) {
        if (p0.at(q) <= kCompatTol) continue;
        // A probe exactly on a transition tests a measure-zero point where
        // the capacity is ambiguous; the stretches on either side carry
        // their own probes.
        if (std::find(road.transitions.begin(), road.transitions.end(), q) !=
            road.transitions.end())
            continue;
        double cap = static_cast<double>(road.level_at(q));
        if (n0.at(q) < cap - kCompatTol)
            fail(Errc::IncompatibleData,
                 "positive offset over under-capacity density near x = " +
                     std::to_string(q));
    }
}

ClusterState approximate_blocks(const GeneralData& data, const RoadProfile& road, int k) {
    if (k <= 0) fail(Errc::NonPositiveK, "refinement must be positive");
    data.validate(road);

    double s0 = data.n0.lo();
    double s1 = data.n0.hi();
    std::vector<double> bounds{s0};
    for (double r : road.transitions)
        if (r > s0 && r < s1) bounds.push_back(r);
    bounds.push_back(s1);

    ClusterState out;
    out.time = 0.0;
    for (std::size_t j = 0; j + 1 < bounds.size(); ++j) {
        double A = bounds[j];
        double B = bounds[j + 1];
        int level = road.level_at(0.5 * (A + B));
        for (int i = 0; i < k; ++i) {
            double a = (i == 0) ? A : A + (B - A) * (static_cast<double>(i) / k);
            double b = (i + 1 == k) ? B : A + (B - A) * (static_cast<double>(i + 1) / k);
            double mass = data.n0.integral(a, b) / level;
            if (mass <= 0.0) continue;
            mass = std::min(mass, b - a);
            Segment s;
            s.a = a;
            s.b = a + mass;
            s.level = level;
            s.u = data.u0.min_on(a, b);
            bool dense = data.n0.min_on(a, b) >= level - 1e-12;
            s.p = dense ? data.p0.min_on(a, b) : 0.0;
            out.segments.push_back(s);
        }
    }
    return out;
}

ApproxError weak_error(const GeneralData& data, const ClusterState& blocks,
                       const Bump1D& phi) {
    auto data_pairing = [&](const LinearTable* weight) {
        double lo = std::max(data.n0.lo(), phi.lo());
        double hi = std::min(data.n0.hi(), phi.hi());
        if (lo >= hi) return 0.0;
        std::vector<double> cuts{lo, hi};
        auto add_nodes = [&](const std::vector<double>& xs) {
            for (double q : xs)
                if (q > lo && q < hi) cuts.push_back(q);
        };
        add_nodes(data.n0.x);
        if (weight) add_nodes(weight->x);
        std::sort(cuts.begin(), cuts.end());
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            if (cuts[i + 1] - cuts[i] <= 0.0) continue;
            acc += integrate(
                [&](double q) {
                    double f = data.n0.at(q) * phi.value(q);
                    if (weight) f *= weight->at(q);
                    return f;
                },
                cuts[i], cuts[i + 1], 1e-10);
        }
        return acc;
    };
    auto block_pairing = [&](int component) {
        double acc = 0.0;
        for (const Segment& seg : blocks.segments) {
            if (seg.length() <= 0.0) continue;
            double lo = std::max(seg.a, phi.lo());
            double hi = std::min(seg.b, phi.hi());
            if (lo >= hi) continue;
            double w = static_cast<double>(seg.level);
            if (component == 1) w *= seg.u;
            if (component == 2) w *= seg.p;
            if (w == 0.0) continue;
            acc += w * integrate([&](double q) { return phi.value(q); }, lo, hi, 1e-10);
        }
        return acc;
    };
    ApproxError e;
    e.e_n = std::abs(data_pairing(nullptr) - block_pairing(0));
    e.e_nu = std::abs(data_pairing(&data.u0) - block_pairing(1));
    e.e_np = std::abs(data_pairing(&data.p0) - block_pairing(2));
    return e;
}

ClusterState Scenario::initial_state() const {
    if (blocks) return *blocks;
    return approximate_blocks(*general, road, k);
}

namespace {

using json = nlohmann::json;

const json& field(const json& j, const char* name) {
    if (!j.is_object()) fail(Errc::ParseError, std::string("expected an object holding ") + name);
    auto it = j.find(name);
    if (it == j.end()) fail(Errc::ParseError, std::string("missing field: ") + name);
    return *it;
}

double number_field(const json& j, const char* name) {
    const json& f = field(j, name);
    if (!f.is_number()) fail(Errc::ParseError, std::string(name) + " must be a number");
    return f.get<double>();
}

int int_field(const json& j, const char* name) {
    const json& f = field(j, name);
    if (!f.is_number_integer())
        fail(Errc::ParseError, std::string(name) + " must be an integer");
    return f.get<int>();
}

LinearTable table_field(const json& j, const char* name) {
    const json& f = field(j, name);
    if (!f.is_array())
        fail(Errc::ParseError, std::string(name) + " must be an array of [x, value] pairs");
    LinearTable t;
    for (const json& e : f) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            fail(Errc::ParseError, std::string(name) + " entries must be [x, value] pairs");
        t.x.push_back(e[0].get<double>());
        t.v.push_back(e[1].get<double>());
    }
    return t;
}

} // namespace

Scenario parse_scenario(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(Errc::ParseError, e.what());
    }
    if (!j.is_object()) fail(Errc::ParseError, "scenario must be a JSON object");

    Scenario sc;

    const json& jroad = field(j, "road");
    const json& jt = field(jroad, "transitions");
    const json& jl = field(jroad, "levels");
    if (!jt.is_array()) fail(Errc::ParseError, "road.transitions must be an array");
    if (!jl.is_array()) fail(Errc::ParseError, "road.levels must be an array");
    for (const json& e : jt) {
        if (!e.is_number()) fail(Errc::ParseError, "road.transitions must hold numbers");
        sc.road.transitions.push_back(e.get<double>());
    }
    sc.road.levels.clear();
    for (const json& e : jl) {
        if (!e.is_number_integer()) fail(Errc::ParseError, "road.levels must hold integers");
        sc.road.levels.push_back(e.get<int>());
    }
    if (jroad.contains("alpha")) sc.road.alpha = number_field(jroad, "alpha");
    sc.road.validate();

    bool has_blocks = j.contains("blocks");
    bool has_general = j.contains("general");
    if (has_blocks == has_general)
        fail(Errc::ValidationError,
             "scenario needs exactly one of 'blocks' and 'general'");

    sc.horizon = number_field(j, "horizon");
    if (!(sc.horizon > 0.0)) fail(Errc::ValidationError, "horizon must be positive");

    const json& jg = field(j, "grid");
    sc.grid.x0 = number_field(jg, "x0");
    sc.grid.x1 = number_field(jg, "x1");
    sc.grid.nx = int_field(jg, "nx");
    sc.grid.nt = int_field(jg, "nt");
    if (!(sc.grid.x0 < sc.grid.x1) || sc.grid.nx < 2 || sc.grid.nt < 2)
        fail(Errc::ValidationError, "grid needs x0 < x1 and nx, nt >= 2");

    if (has_blocks) {
        const json& jb = j.at("blocks");
        if (!jb.is_array()) fail(Errc::ParseError, "blocks must be an array");
        ClusterState state;
        state.time = 0.0;
        for (const json& e : jb) {
            Segment s;
            s.a = number_field(e, "a");
            s.b = number_field(e, "b");
            s.u = number_field(e, "u");
            s.p = e.contains("p") ? number_field(e, "p") : 0.0;
            s.level = e.contains("level") ? int_field(e, "level") : 1;
            state.segments.push_back(s);
        }
        ConstraintReport report = state.check_constraints(sc.road);
        if (!report.ok())
            fail(Errc::ValidationError,
                 std::string("inadmissible blocks: ") +
                     violation_name(report.violations.front().kind));
        sc.blocks = std::move(state);
    } else {
        const json& jgen = j.at("general");
        GeneralData data;
        data.n0 = table_field(jgen, "n0");
        data.u0 = table_field(jgen, "u0");
        data.p0 = table_field(jgen, "p0");
        sc.k = int_field(jgen, "k");
        if (sc.k <= 0) fail(Errc::NonPositiveK, "general.k must be positive");
        data.validate(sc.road);
        sc.general = std::move(data);
    }
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::ParseError, "cannot open scenario file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

} // namespace mlcpgd
