#pragma once

#include <optional>
#include <vector>

namespace mlcpgd {

// Piecewise-constant lane count along the road. transitions = (r_1,...,r_M)
// strictly increasing; levels has M+1 entries, levels[j] holding on the open
// interval (r_j, r_{j+1}) with r_0 = -inf and r_{M+1} = +inf. Values at a
// transition point follow the right-limit convention. alpha >= 1 is the
// two-lane speedup factor entering the momentum weight.
struct RoadProfile {
    std::vector<double> transitions;
    std::vector<int> levels{1};
    double alpha = 1.0;

    // Throws NonMonotoneTransitions, LevelOutOfRange, RedundantTransition,
    // AlphaBelowOne, or ValidationError (shape mismatch).
    void validate() const;

    // Lane count at x, right-continuous: level_at(r_j) is the value just
    // beyond r_j.
    int level_at(double x) const;

    // Momentum weight: 1 on one-lane stretches, 1/alpha on two-lane ones.
    double i_alpha_at(double x) const;

    // Index into transitions of the nearest transition strictly right of x,
    // or nullopt when none remains.
    std::optional<int> next_transition(double x) const;

    int max_level() const;
    int transition_count() const { return static_cast<int>(transitions.size()); }
};

} // namespace mlcpgd
