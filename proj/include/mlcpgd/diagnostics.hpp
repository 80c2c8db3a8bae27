#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mlcpgd/event_engine.hpp"
#include "mlcpgd/initial_data.hpp"

namespace mlcpgd {

// A priori bounds checked against a trajectory: the invariant-region value
// bound for u and p, and the total-variation propagation bound over a fixed
// observation window whose data-side window widens with the elapsed time.
struct BoundsRow {
    double t = 0.0;
    double max_u = 0.0;
    double max_p = 0.0;
    double tv_u = 0.0;
    double tv_p = 0.0;
    double tv_bound = 0.0;
    bool values_ok = true;
    bool tv_ok = true;
};

struct BoundsReport {
    double value_bound = 0.0; // 2 * alpha * (sup u0 + sup p0)
    Interval window;
    std::vector<BoundsRow> rows;
    bool ok() const {
        for (const BoundsRow& r : rows)
            if (!r.values_ok || !r.tv_ok) return false;
        return true;
    }
};

BoundsReport compute_bounds(const Trajectory& traj, const Interval& window);

// One test-bump placement: center (tc, xc), radii (rt, rx).
struct BumpSpec {
    double tc = 0.0;
    double xc = 0.0;
    double rt = 0.0;
    double rx = 0.0;
};

// Deterministic bump family for residual verification: bumps centered on
// the trajectory's logged events first (collisions, transition hits,
// completions), then seeded random placements, some of which reach back to
// t = 0 to exercise the initial pairing. Every bump's time support stays
// within [<0 allowed>, horizon].
std::vector<BumpSpec> bump_family(const Trajectory& traj, const OutputGrid& grid,
                                  int count, std::uint64_t seed);

// FNV-1a 64-bit hash of a byte string (seeds the bump family from the
// scenario text).
std::uint64_t fnv1a_hash(const std::string& bytes);

// Seed precedence: the MLCPGD_SEED environment variable when set and
// parseable, else the --seed flag when given, else the scenario-text hash.
std::uint64_t resolve_seed(const std::string& scenario_text,
                           std::optional<std::uint64_t> seed_flag);

// Command drivers. Each returns the process exit code:
//   0 success, 2 scenario parse/validation failure, 3 engine failure,
//   4 residual above tolerance, 5 approximation convergence failure.
int cli_simulate(const std::string& scenario_path, const std::string& out_dir);
int cli_verify(const std::string& scenario_path, const std::string& out_dir, int bumps,
               double tol, std::optional<std::uint64_t> seed_flag);
int cli_approximate(const std::string& scenario_path, const std::string& out_dir,
                    const std::vector<int>& ks);

} // namespace mlcpgd
