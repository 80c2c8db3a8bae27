#pragma once

#include <string>
#include <vector>

#include "mlcpgd/event_engine.hpp"
#include "mlcpgd/initial_data.hpp"

namespace mlcpgd {

// Shortest round-trip decimal representation of a double.
std::string fmt_double(double value);

struct BoundsRow;
struct BoundsReport;
struct BumpSpec;

// Event log: one JSON line per event followed by one line holding the
// post-event state snapshot.
void write_events_jsonl(const std::string& path, const Trajectory& traj);

// State snapshots reconstructed at the grid's evenly spaced times.
void write_snapshots_json(const std::string& path, const Trajectory& traj,
                          const OutputGrid& grid);

// Sampled field table, header t,x,n,nu,np.
void write_fields_csv(const std::string& path, const Trajectory& traj,
                      const OutputGrid& grid);

void write_bounds_json(const std::string& path, const BoundsReport& report);

void write_residuals_json(const std::string& path, const std::vector<BumpSpec>& bumps,
                          const std::vector<double>& mass,
                          const std::vector<double>& momentum, double max_abs);

struct ConvergenceRow {
    int k = 0;
    double e_n = 0.0;
    double e_nu = 0.0;
    double e_np = 0.0;
};
void write_convergence_csv(const std::string& path,
                           const std::vector<ConvergenceRow>& rows);

} // namespace mlcpgd
