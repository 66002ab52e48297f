#include "certkg/clock.hpp"

#include "certkg/error.hpp"

#include <atomic>
#include <cstdio>
#include <ctime>
#include <memory>

namespace certkg {

Clock system_clock() {
  return [] { return std::chrono::system_clock::now(); };
}

Clock stepping_clock(TimePoint start, std::chrono::milliseconds step) {
  auto ticks = std::make_shared<std::atomic<std::int64_t>>(0);
  return [start, step, ticks] { return start + step * ticks->fetch_add(1); };
}

std::string format_timestamp(TimePoint tp) {
  using namespace std::chrono;
  const auto ms = duration_cast<milliseconds>(tp.time_since_epoch()).count();
  std::time_t secs = static_cast<std::time_t>(ms / 1000);
  int millis = static_cast<int>(ms % 1000);
  if (millis < 0) {
    millis += 1000;
    --secs;
  }
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, millis);
  return buf;
}

TimePoint parse_timestamp(const std::string& text) {
  std::tm tm{};
  int millis = 0;
  if (std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3dZ", &tm.tm_year, &tm.tm_mon,
                  &tm.tm_mday, &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &millis) != 7) {
    throw Error(ErrorCode::InvalidArgument, "malformed timestamp: " + text);
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  const std::time_t secs = timegm(&tm);
  return std::chrono::system_clock::from_time_t(secs) + std::chrono::milliseconds(millis);
}

}  // namespace certkg
