#include "logflat/time.hpp"

#include <cctype>
#include <cstdint>

#include "logflat/error.hpp"
#include "logflat/log.hpp"

namespace logflat {

namespace {

using namespace std::chrono;

// Reads exactly `count` digits at `pos`.
bool read_digits(std::string_view s, std::size_t& pos, std::size_t count, std::int64_t& out) {
  if (pos + count > s.size()) return false;
  std::int64_t v = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const char c = s[pos + i];
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    v = v * 10 + (c - '0');
  }
  pos += count;
  out = v;
  return true;
}

bool starts_with(std::string_view s, std::size_t pos, std::string_view token) {
  return s.substr(pos, token.size()) == token;
}

std::optional<Instant> match_pattern(std::string_view value, std::string_view pattern) {
  std::int64_t year = 1970, month = 1, day = 1, hour = 0, minute = 0, second = 0;
  std::int64_t nanos = 0;
  std::int64_t offset_minutes = 0;
  std::size_t vp = 0;
  std::size_t pp = 0;
  while (pp < pattern.size()) {
    if (starts_with(pattern, pp, "yyyy")) {
      if (!read_digits(value, vp, 4, year)) return std::nullopt;
      pp += 4;
    } else if (starts_with(pattern, pp, "MM")) {
      if (!read_digits(value, vp, 2, month)) return std::nullopt;
      pp += 2;
    } else if (starts_with(pattern, pp, "dd")) {
      if (!read_digits(value, vp, 2, day)) return std::nullopt;
      pp += 2;
    } else if (starts_with(pattern, pp, "HH")) {
      if (!read_digits(value, vp, 2, hour)) return std::nullopt;
      pp += 2;
    } else if (starts_with(pattern, pp, "mm")) {
      if (!read_digits(value, vp, 2, minute)) return std::nullopt;
      pp += 2;
    } else if (starts_with(pattern, pp, "ss")) {
      if (!read_digits(value, vp, 2, second)) return std::nullopt;
      pp += 2;
    } else if (pattern[pp] == 'S') {
      std::size_t digits = 0;
      std::int64_t frac = 0;
      while (vp < value.size() && std::isdigit(static_cast<unsigned char>(value[vp]))) {
        if (digits < 9) frac = frac * 10 + (value[vp] - '0');
        ++digits;
        ++vp;
      }
      if (digits == 0 || digits > 9) return std::nullopt;
      for (std::size_t i = digits; i < 9; ++i) frac *= 10;
      nanos = frac;
      ++pp;
    } else if (starts_with(pattern, pp, "XXX")) {
      if (vp >= value.size()) return std::nullopt;
      const char sign = value[vp];
      if (sign == 'Z' || sign == 'z') {
        ++vp;
      } else if (sign == '+' || sign == '-') {
        ++vp;
        std::int64_t oh = 0, om = 0;
        if (!read_digits(value, vp, 2, oh)) return std::nullopt;
        if (vp < value.size() && value[vp] == ':') ++vp;
        if (!read_digits(value, vp, 2, om)) return std::nullopt;
        if (oh > 23 || om > 59) return std::nullopt;
        offset_minutes = (sign == '+' ? 1 : -1) * (oh * 60 + om);
      } else {
        return std::nullopt;
      }
      pp += 3;
    } else {
      if (vp >= value.size() || value[vp] != pattern[pp]) return std::nullopt;
      ++vp;
      ++pp;
    }
  }
  if (vp != value.size()) return std::nullopt;
  if (hour > 23 || minute > 59 || second > 59) return std::nullopt;
  const year_month_day ymd{std::chrono::year{static_cast<int>(year)},
                           std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) return std::nullopt;
  Instant t = sys_days{ymd} + hours{hour} + minutes{minute} + seconds{second} + nanoseconds{nanos};
  return t - minutes{offset_minutes};
}

std::optional<Instant> match_epoch(std::string_view value, std::size_t min_digits,
                                   std::size_t max_digits, std::int64_t ns_per_unit) {
  std::size_t pos = 0;
  bool negative = false;
  if (!value.empty() && value[0] == '-') {
    negative = true;
    pos = 1;
  }
  const std::size_t digits = value.size() - pos;
  if (digits < min_digits || digits > max_digits) return std::nullopt;
  std::int64_t v = 0;
  if (!read_digits(value, pos, digits, v)) return std::nullopt;
  const std::int64_t limit = INT64_MAX / ns_per_unit;
  if (v > limit) return std::nullopt;
  return Instant{nanoseconds{(negative ? -v : v) * ns_per_unit}};
}

std::optional<Instant> match(std::string_view value, const TimeFormat& f) {
  switch (f.kind) {
    case TimeFormat::Kind::Pattern: return match_pattern(value, f.pattern);
    case TimeFormat::Kind::EpochSeconds: return match_epoch(value, 1, 11, 1'000'000'000);
    case TimeFormat::Kind::EpochMillis: return match_epoch(value, 12, 15, 1'000'000);
  }
  return std::nullopt;
}

}  // namespace

TimeFormat TimeFormat::from_pattern(std::string pattern, std::string name) {
  TimeFormat f;
  f.kind = Kind::Pattern;
  f.name = name.empty() ? pattern : std::move(name);
  f.pattern = std::move(pattern);
  return f;
}

TimeFormat TimeFormat::parse(std::string_view spec) {
  for (const auto& f : default_time_formats()) {
    if (f.name == spec) return f;
  }
  if (spec.empty()) throw ConfigError("empty time format");
  return from_pattern(std::string(spec));
}

const std::vector<TimeFormat>& default_time_formats() {
  static const std::vector<TimeFormat> formats = [] {
    std::vector<TimeFormat> v;
    v.push_back(TimeFormat::from_pattern("yyyy-MM-ddTHH:mm:ss.SXXX", "rfc3339_fraction"));
    v.push_back(TimeFormat::from_pattern("yyyy-MM-ddTHH:mm:ssXXX", "rfc3339"));
    v.push_back(TimeFormat::from_pattern("yyyy-MM-dd HH:mm:ss", "datetime"));
    TimeFormat secs;
    secs.kind = TimeFormat::Kind::EpochSeconds;
    secs.name = "epoch_seconds";
    v.push_back(secs);
    TimeFormat millis;
    millis.kind = TimeFormat::Kind::EpochMillis;
    millis.name = "epoch_millis";
    v.push_back(millis);
    return v;
  }();
  return formats;
}

std::optional<Instant> try_parse_timestamp(std::string_view value,
                                           const std::vector<TimeFormat>& formats) {
  for (const auto& f : formats) {
    if (auto t = match(value, f)) return t;
  }
  return std::nullopt;
}

bool looks_like_calendar_time(std::string_view value, const std::vector<TimeFormat>& formats) {
  for (const auto& f : formats) {
    if (f.is_calendar() && match(value, f)) return true;
  }
  return false;
}

std::optional<Instant> parse_timestamp(std::string_view value, const TimeParseOptions& options) {
  if (auto t = try_parse_timestamp(value, options.formats)) return t;
  const std::string msg = "unrecognized timestamp '" + std::string(value) + "'";
  if (options.strict) throw ProcessingError(msg);
  log::warn(msg);
  return std::nullopt;
}

TimeWindows decompose_time(Instant instant) {
  const auto day_start = floor<days>(instant);
  const year_month_day ymd{day_start};
  const weekday wd{day_start};
  const auto since_midnight = duration_cast<minutes>(instant - day_start).count();
  return TimeWindows{static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                     wd.iso_encoding(), static_cast<unsigned>(since_midnight / 60),
                     static_cast<unsigned>(since_midnight % 60)};
}

std::string format_rfc3339(Instant instant) {
  const auto day_start = floor<days>(instant);
  const year_month_day ymd{day_start};
  const std::int64_t ns_of_day = (instant - day_start).count();
  const std::int64_t secs = ns_of_day / 1'000'000'000;
  std::int64_t frac = ns_of_day % 1'000'000'000;
  char buf[64];
  int n = std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d",
                        static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                        static_cast<unsigned>(ymd.day()), static_cast<int>(secs / 3600),
                        static_cast<int>((secs / 60) % 60), static_cast<int>(secs % 60));
  std::string out(buf, static_cast<std::size_t>(n));
  if (frac != 0) {
    char fb[16];
    std::snprintf(fb, sizeof fb, "%09lld", static_cast<long long>(frac));
    std::string digits(fb);
    while (!digits.empty() && digits.back() == '0') digits.pop_back();
    out += '.';
    out += digits;
  }
  out += 'Z';
  return out;
}

}  // namespace logflat
