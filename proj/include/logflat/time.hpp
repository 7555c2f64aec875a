#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace logflat {

using Instant = std::chrono::sys_time<std::chrono::nanoseconds>;

// One accepted timestamp representation. Patterns use the letters
// yyyy MM dd HH mm ss, `S` for 1-9 fraction digits and `XXX` for an offset
// (`Z`, `+hh:mm` or `+hhmm`); any other character is a literal.
struct TimeFormat {
  enum class Kind { Pattern, EpochSeconds, EpochMillis };
  Kind kind = Kind::Pattern;
  std::string pattern;
  std::string name;

  static TimeFormat from_pattern(std::string pattern, std::string name = {});
  // Accepts the built-in names (rfc3339_fraction, rfc3339, datetime,
  // epoch_seconds, epoch_millis) or a pattern.
  static TimeFormat parse(std::string_view spec);
  // Calendar formats carry a date in their text; epoch ones are bare numbers.
  bool is_calendar() const noexcept { return kind == Kind::Pattern; }
};

// RFC 3339 with fraction and offset, RFC 3339, "yyyy-MM-dd HH:mm:ss",
// epoch seconds, epoch milliseconds.
const std::vector<TimeFormat>& default_time_formats();

struct TimeParseOptions {
  std::vector<TimeFormat> formats = default_time_formats();
  bool strict = false;
};

// Silent variant: first matching format wins, offsets normalized to UTC.
std::optional<Instant> try_parse_timestamp(std::string_view value,
                                           const std::vector<TimeFormat>& formats);
// True when `value` matches one of the calendar (non-epoch) formats.
bool looks_like_calendar_time(std::string_view value, const std::vector<TimeFormat>& formats);

// Lenient: unmatched input yields nullopt and a warning. Strict: throws
// ProcessingError.
std::optional<Instant> parse_timestamp(std::string_view value, const TimeParseOptions& options = {});

struct TimeWindows {
  int year;
  unsigned month;        // 1-12
  unsigned day_of_week;  // 1 = Monday ... 7 = Sunday
  unsigned hour;         // 0-23
  unsigned minute;       // 0-59
  friend bool operator==(const TimeWindows&, const TimeWindows&) = default;
};

TimeWindows decompose_time(Instant instant);

// RFC 3339 in UTC with a trailing `Z`; fraction printed only when non-zero,
// trailing zeros trimmed.
std::string format_rfc3339(Instant instant);

}  // namespace logflat
