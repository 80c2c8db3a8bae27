#include "mlcpgd/serialize.hpp"

#include <charconv>
#include <fstream>

#include <json.hpp>

#include "mlcpgd/diagnostics.hpp"
#include "mlcpgd/errors.hpp"

namespace mlcpgd {

using ordered_json = nlohmann::ordered_json;

std::string fmt_double(double value) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::ParseError, "cannot open output file: " + path);
    return out;
}

ordered_json segment_json(const Segment& s) {
    ordered_json j;
    j["a"] = s.a;
    j["b"] = s.b;
    j["u"] = s.u;
    j["p"] = s.p;
    j["level"] = s.level;
    const char* coupling = "none";
    if (s.pinned_tail && s.pinned_head)
        coupling = "both";
    else if (s.pinned_head)
        coupling = "upstream";
    else if (s.pinned_tail)
        coupling = "downstream";
    j["coupling"] = coupling;
    if (s.pinned_tail) j["tail_transition"] = s.tail_transition;
    if (s.pinned_head) j["head_transition"] = s.head_transition;
    return j;
}

ordered_json state_json(const ClusterState& st) {
    ordered_json j;
    j["t"] = st.time;
    ordered_json segs = ordered_json::array();
    for (const Segment& s : st.segments) segs.push_back(segment_json(s));
    j["segments"] = std::move(segs);
    return j;
}

std::vector<double> grid_times(const Trajectory& traj, const OutputGrid& grid) {
    std::vector<double> ts;
    double t0 = traj.initial.time;
    double t1 = traj.horizon;
    for (int i = 0; i < grid.nt; ++i)
        ts.push_back(t0 + (t1 - t0) * (static_cast<double>(i) / (grid.nt - 1)));
    return ts;
}

} // namespace

void write_events_jsonl(const std::string& path, const Trajectory& traj) {
    std::ofstream out = open_out(path);
    for (const LogEntry& e : traj.log) {
        ordered_json ev;
        ev["t"] = e.event.time;
        ev["kind"] = event_kind_name(e.event.kind);
        ev["indices"] = e.event.indices;
        out << ev.dump() << '\n';
        out << state_json(e.state).dump() << '\n';
    }
}

void write_snapshots_json(const std::string& path, const Trajectory& traj,
                          const OutputGrid& grid) {
    std::ofstream out = open_out(path);
    ordered_json arr = ordered_json::array();
    for (double t : grid_times(traj, grid)) arr.push_back(state_json(traj.state_at(t)));
    out << arr.dump(2) << '\n';
}

void write_fields_csv(const std::string& path, const Trajectory& traj,
                      const OutputGrid& grid) {
    std::ofstream out = open_out(path);
    out << "t,x,n,nu,np\n";
    std::vector<double> xs;
    for (int j = 0; j < grid.nx; ++j)
        xs.push_back(grid.x0 +
                     (grid.x1 - grid.x0) * (static_cast<double>(j) / (grid.nx - 1)));
    for (double t : grid_times(traj, grid)) {
        ClusterState st = traj.state_at(t);
        std::vector<FieldSample> samples = st.sample_fields(xs);
        for (std::size_t j = 0; j < xs.size(); ++j)
            out << fmt_double(t) << ',' << fmt_double(xs[j]) << ','
                << fmt_double(samples[j].n) << ',' << fmt_double(samples[j].nu) << ','
                << fmt_double(samples[j].np) << '\n';
    }
}

void write_bounds_json(const std::string& path, const BoundsReport& report) {
    std::ofstream out = open_out(path);
    ordered_json j;
    j["value_bound"] = report.value_bound;
    j["window"] = {{"lo", report.window.lo}, {"hi", report.window.hi}};
    j["ok"] = report.ok();
    ordered_json rows = ordered_json::array();
    for (const BoundsRow& r : report.rows) {
        ordered_json row;
        row["t"] = r.t;
        row["max_u"] = r.max_u;
        row["max_p"] = r.max_p;
        row["tv_u"] = r.tv_u;
        row["tv_p"] = r.tv_p;
        row["tv_bound"] = r.tv_bound;
        row["values_ok"] = r.values_ok;
        row["tv_ok"] = r.tv_ok;
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    out << j.dump(2) << '\n';
}

void write_residuals_json(const std::string& path, const std::vector<BumpSpec>& bumps,
                          const std::vector<double>& mass,
                          const std::vector<double>& momentum, double max_abs) {
    std::ofstream out = open_out(path);
    ordered_json j;
    j["mass"] = mass;
    j["momentum"] = momentum;
    j["max_abs"] = max_abs;
    ordered_json arr = ordered_json::array();
    for (const BumpSpec& b : bumps) {
        ordered_json spec;
        spec["center"] = {b.tc, b.xc};
        spec["radii"] = {b.rt, b.rx};
        arr.push_back(std::move(spec));
    }
    j["bumps"] = std::move(arr);
    out << j.dump(2) << '\n';
}

void write_convergence_csv(const std::string& path,
                           const std::vector<ConvergenceRow>& rows) {
    std::ofstream out = open_out(path);
    out << "k,e_n,e_nu,e_np\n";
    for (const ConvergenceRow& r : rows)
        out << r.k << ',' << fmt_double(r.e_n) << ',' << fmt_double(r.e_nu) << ','
            << fmt_double(r.e_np) << '\n';
}

} // namespace mlcpgd
