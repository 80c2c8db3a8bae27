#include "mlcpgd/road_profile.hpp"

#include <algorithm>
#include <string>

#include "mlcpgd/errors.hpp"

namespace mlcpgd {

void RoadProfile::validate() const {
    if (levels.size() != transitions.size() + 1)
        fail(Errc::ValidationError, "levels must have one more entry than transitions");
    for (std::size_t i = 0; i + 1 < transitions.size(); ++i)
        if (!(transitions[i] < transitions[i + 1]))
            fail(Errc::NonMonotoneTransitions,
                 "transitions must be strictly increasing at index " + std::to_string(i + 1));
    for (std::size_t j = 0; j < levels.size(); ++j)
        if (levels[j] != 1 && levels[j] != 2)
            fail(Errc::LevelOutOfRange, "lane count must be 1 or 2 at interval " + std::to_string(j));
    for (std::size_t j = 0; j + 1 < levels.size(); ++j)
        if (levels[j] == levels[j + 1])
            fail(Errc::RedundantTransition,
                 "transition " + std::to_string(j) + " does not change the lane count");
    if (!(alpha >= 1.0)) fail(Errc::AlphaBelowOne, "alpha must be >= 1");
}

int RoadProfile::level_at(double x) const {
    // Number of transitions <= x selects the interval; ties land on the right
    // interval, which is exactly the right-limit convention.
    auto it = std::upper_bound(transitions.begin(), transitions.end(), x);
    return levels[static_cast<std::size_t>(it - transitions.begin())];
}

double RoadProfile::i_alpha_at(double x) const {
    return level_at(x) == 2 ? 1.0 / alpha : 1.0;
}

std::optional<int> RoadProfile::next_transition(double x) const {
    auto it = std::upper_bound(transitions.begin(), transitions.end(), x);
    if (it == transitions.end()) return std::nullopt;
    return static_cast<int>(it - transitions.begin());
}

int RoadProfile::max_level() const {
    int m = 1;
    for (int l : levels) m = std::max(m, l);
    return m;
}

} // namespace mlcpgd
