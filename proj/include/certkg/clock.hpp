#pragma once

#include <chrono>
#include <functional>
#include <string>

namespace certkg {

using TimePoint = std::chrono::system_clock::time_point;
using Clock = std::function<TimePoint()>;

Clock system_clock();

// Starts at `start` and advances by `step` on every call. Used to make event
// logs reproducible in tests and fixture replays.
Clock stepping_clock(TimePoint start, std::chrono::milliseconds step = std::chrono::milliseconds(1));

// ISO-8601 UTC with millisecond precision, e.g. 2025-01-25T09:30:00.000Z.
std::string format_timestamp(TimePoint tp);
TimePoint parse_timestamp(const std::string& text);

}  // namespace certkg
