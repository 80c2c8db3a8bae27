#pragma once

namespace mlcpgd {

// Position tolerance: two endpoints closer than this are "in contact", and a
// head this close to a lane transition counts as sitting on it.
inline constexpr double kEpsX = 1e-9;

// Event-time batching tolerance: candidate events within this window of the
// earliest one are treated as simultaneous.
inline constexpr double kEpsT = 1e-9;

// Zeno guard: at most this multiple of (initial segment count + transition
// count) events may fire inside a single kEpsT window before the run aborts.
inline constexpr int kZenoFactor = 10;

} // namespace mlcpgd
