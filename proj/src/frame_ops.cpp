#include "logflat/frame_ops.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>

#include "logflat/error.hpp"
#include "logflat/log.hpp"

namespace logflat {

namespace {

std::optional<std::int64_t> canonical_int(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  if (std::to_string(v) != s) return std::nullopt;
  return v;
}

std::optional<double> canonical_float(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) != s) return std::nullopt;
  return v;
}

Scalar parse_sentinel(std::string_view text) {
  if (auto i = canonical_int(text)) return *i;
  if (auto f = canonical_float(text)) return *f;
  if (text == "true") return true;
  if (text == "false") return false;
  return std::string(text);
}

bool sentinel_fits(ColumnKind kind, const Scalar& s) {
  switch (kind) {
    case ColumnKind::Text: return true;
    case ColumnKind::Int: return std::holds_alternative<std::int64_t>(s);
    case ColumnKind::Float: return std::holds_alternative<std::int64_t>(s) || std::holds_alternative<double>(s);
    case ColumnKind::Bool: return std::holds_alternative<bool>(s);
    case ColumnKind::Timestamp: return false;
  }
  return false;
}

Column fill_column(const Column& col, const Scalar& fill, ColumnKind kind) {
  ColumnBuilder b(col.name(), kind, col.size());
  for (std::size_t r = 0; r < col.size(); ++r) {
    if (col.is_null(r)) {
      b.append(fill);
    } else if (kind == ColumnKind::Text) {
      b.append_text(col.render(r));
    } else {
      b.append(col.cell(r));
    }
  }
  return std::move(b).build();
}

}  // namespace

std::optional<std::int64_t> IndexDictionary::index_of(std::string_view category) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i] == category) return static_cast<std::int64_t>(i);
  }
  return std::nullopt;
}

std::pair<Frame, IndexDictionary> string_index(const Frame& frame, std::string_view column) {
  const Column& col = frame.column(column);
  if (col.kind() != ColumnKind::Text) {
    throw KindError("string_index needs a text column; '" + col.name() + "' is " + std::string(to_string(col.kind())));
  }
  std::map<std::string, std::size_t, std::less<>> counts;
  for (std::size_t r = 0; r < col.size(); ++r) {
    if (!col.is_null(r)) ++counts[std::string(col.text(r))];
  }
  std::vector<std::pair<std::string, std::size_t>> ordered(counts.begin(), counts.end());
  // counts is already lexicographic, so a stable sort on frequency keeps the tie order.
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  IndexDictionary dict;
  dict.column = col.name();
  std::map<std::string_view, std::int64_t, std::less<>> lookup;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    dict.categories.push_back(ordered[i].first);
    dict.frequencies.push_back(ordered[i].second);
  }
  for (std::size_t i = 0; i < dict.categories.size(); ++i) lookup.emplace(dict.categories[i], static_cast<std::int64_t>(i));

  ColumnBuilder b(col.name(), ColumnKind::Int, col.size());
  for (std::size_t r = 0; r < col.size(); ++r) {
    if (col.is_null(r)) b.append_null();
    else b.append_int(lookup.find(col.text(r))->second);
  }
  return {frame.with_column(std::move(b).build()), std::move(dict)};
}

Frame restore_index(const Frame& frame, const IndexDictionary& dictionary) {
  const Column& col = frame.column(dictionary.column);
  if (col.kind() != ColumnKind::Int) throw KindError("restore_index needs an int column; '" + col.name() + "' is not");
  ColumnBuilder b(col.name(), ColumnKind::Text, col.size());
  for (std::size_t r = 0; r < col.size(); ++r) {
    if (col.is_null(r)) {
      b.append_null();
      continue;
    }
    const auto idx = col.int_at(r);
    if (idx < 0 || static_cast<std::size_t>(idx) >= dictionary.categories.size()) {
      throw ProcessingError("index " + std::to_string(idx) + " outside dictionary of '" + col.name() + "'");
    }
    b.append_text(dictionary.categories[static_cast<std::size_t>(idx)]);
  }
  return frame.with_column(std::move(b).build());
}

Frame zscale(const Frame& frame, std::string_view column) {
  const Column& col = frame.column(column);
  if (!is_numeric(col.kind())) {
    throw KindError("zscale needs a numeric column; '" + col.name() + "' is " + std::string(to_string(col.kind())));
  }
  double sum = 0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < col.size(); ++r) {
    if (col.is_null(r)) continue;
    sum += col.numeric(r);
    ++n;
  }
  if (n == 0) throw ProcessingError("zscale: column '" + col.name() + "' has no values");
  const double mean = sum / static_cast<double>(n);
  double ss = 0;
  for (std::size_t r = 0; r < col.size(); ++r) {
    if (col.is_null(r)) continue;
    const double d = col.numeric(r) - mean;
    ss += d * d;
  }
  const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;

  ColumnBuilder b(col.name(), ColumnKind::Float, col.size());
  for (std::size_t r = 0; r < col.size(); ++r) {
    if (col.is_null(r)) b.append_null();
    else b.append_float(sd > 0 ? (col.numeric(r) - mean) / sd : 0.0);
  }
  return frame.with_column(std::move(b).build());
}

NullFill NullFill::parse(std::string_view text) {
  NullFill f;
  if (text == "none") return f;
  if (text == "mean") {
    f.kind = Kind::Mean;
    return f;
  }
  if (text == "median") {
    f.kind = Kind::Median;
    return f;
  }
  constexpr std::string_view prefix = "sentinel:";
  if (text.substr(0, prefix.size()) == prefix) {
    f.kind = Kind::Sentinel;
    f.sentinel = parse_sentinel(text.substr(prefix.size()));
    return f;
  }
  throw ConfigError("unknown null_fill '" + std::string(text) + "' (expected none|mean|median|sentinel:<value>)");
}

std::string NullFill::describe() const {
  switch (kind) {
    case Kind::None: return "none";
    case Kind::Mean: return "mean";
    case Kind::Median: return "median";
    case Kind::Sentinel: return "sentinel:" + render_scalar(sentinel);
  }
  return "none";
}

Frame apply_null_fill(const Frame& frame, const NullFill& fill) {
  if (fill.kind == NullFill::Kind::None) return frame;
  Frame out = frame;
  for (std::size_t i = 0; i < frame.column_count(); ++i) {
    const Column& col = frame.column(i);
    if (col.null_count() == 0) continue;

    if (fill.kind == NullFill::Kind::Sentinel) {
      const ColumnKind kind = sentinel_fits(col.kind(), fill.sentinel) ? col.kind() : ColumnKind::Text;
      out = out.with_column(fill_column(col, fill.sentinel, kind));
      continue;
    }

    std::vector<double> values;
    const bool numeric = col.kind() == ColumnKind::Int || col.kind() == ColumnKind::Float;
    if (numeric) {
      for (std::size_t r = 0; r < col.size(); ++r) {
        if (!col.is_null(r)) values.push_back(col.numeric(r));
      }
    }
    if (values.empty()) {
      out = out.with_column(fill_column(col, std::string{}, ColumnKind::Text));
      continue;
    }
    double value = 0;
    if (fill.kind == NullFill::Kind::Mean) {
      value = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    } else {
      std::sort(values.begin(), values.end());
      const std::size_t m = values.size() / 2;
      value = values.size() % 2 == 1 ? values[m] : (values[m - 1] + values[m]) / 2.0;
    }
    out = out.with_column(fill_column(col, value, ColumnKind::Float));
  }
  return out;
}

std::pair<Frame, std::vector<TimeConversion>> convert_time_columns(const Frame& frame, const TimeParseOptions& options,
                                                                   const std::vector<std::string>& explicit_columns) {
  Frame out = frame;
  std::vector<TimeConversion> conversions;
  for (std::size_t i = 0; i < frame.column_count(); ++i) {
    const Column& col = frame.column(i);
    const bool forced = std::find(explicit_columns.begin(), explicit_columns.end(), col.name()) != explicit_columns.end();
    if (!forced) {
      if (col.kind() != ColumnKind::Text || col.null_count() == col.size()) continue;
      bool all = true;
      for (std::size_t r = 0; r < col.size() && all; ++r) {
        if (!col.is_null(r) && !looks_like_calendar_time(col.text(r), options.formats)) all = false;
      }
      if (!all) continue;
    }

    TimeConversion conv;
    conv.source = col.name();
    conv.timestamp_column = col.name() + "_ts";
    static constexpr std::string_view suffixes[] = {"_year", "_month", "_day_of_week", "_hour", "_minute"};
    for (auto s : suffixes) conv.window_columns.push_back(col.name() + std::string(s));
    bool clash = false;
    for (const auto& n : conv.window_columns) clash = clash || frame.has_column(n);
    if (frame.has_column(conv.timestamp_column) || clash) {
      log::warn("skipping time conversion of '" + col.name() + "': derived column name already taken");
      continue;
    }

    ColumnBuilder ts(conv.timestamp_column, ColumnKind::Timestamp, col.size());
    std::vector<ColumnBuilder> windows;
    for (const auto& n : conv.window_columns) windows.emplace_back(n, ColumnKind::Int, col.size());
    std::string first_bad;
    for (std::size_t r = 0; r < col.size(); ++r) {
      std::optional<Instant> t;
      if (!col.is_null(r)) {
        const std::string text = col.render(r);
        t = try_parse_timestamp(text, options.formats);
        if (!t) {
          if (options.strict) throw ProcessingError("unrecognized timestamp '" + text + "' in column '" + col.name() + "'");
          if (conv.unparsed++ == 0) first_bad = text;
        }
      }
      if (!t) {
        ts.append_null();
        for (auto& w : windows) w.append_null();
        continue;
      }
      ts.append_timestamp(*t);
      const TimeWindows tw = decompose_time(*t);
      windows[0].append_int(tw.year);
      windows[1].append_int(tw.month);
      windows[2].append_int(tw.day_of_week);
      windows[3].append_int(tw.hour);
      windows[4].append_int(tw.minute);
    }
    if (conv.unparsed > 0) {
      log::warn("column '" + col.name() + "': " + std::to_string(conv.unparsed) +
                " value(s) matched no timestamp format (first: '" + first_bad + "'); stored as null");
    }

    const std::size_t pos = *out.find(col.name());
    out = out.without_column(col.name());
    out = out.with_column_at(pos, std::move(ts).build());
    for (std::size_t k = 0; k < windows.size(); ++k) out = out.with_column_at(pos + 1 + k, std::move(windows[k]).build());
    conversions.push_back(std::move(conv));
  }
  return {out, conversions};
}

std::pair<Frame, std::vector<std::string>> coerce_numeric_text(const Frame& frame) {
  Frame out = frame;
  std::vector<std::string> converted;
  for (std::size_t i = 0; i < frame.column_count(); ++i) {
    const Column& col = frame.column(i);
    if (col.kind() != ColumnKind::Text || col.null_count() == col.size()) continue;
    bool all_int = true;
    bool all_num = true;
    for (std::size_t r = 0; r < col.size() && all_num; ++r) {
      if (col.is_null(r)) continue;
      const auto t = col.text(r);
      if (canonical_int(t)) continue;
      all_int = false;
      if (!canonical_float(t)) all_num = false;
    }
    if (!all_num) continue;
    ColumnBuilder b(col.name(), all_int ? ColumnKind::Int : ColumnKind::Float, col.size());
    for (std::size_t r = 0; r < col.size(); ++r) {
      if (col.is_null(r)) {
        b.append_null();
      } else if (all_int) {
        b.append_int(*canonical_int(col.text(r)));
      } else {
        const auto t = col.text(r);
        if (auto v = canonical_int(t)) b.append_float(static_cast<double>(*v));
        else b.append_float(*canonical_float(t));
      }
    }
    out = out.with_column(std::move(b).build());
    converted.push_back(col.name());
  }
  return {out, converted};
}

}  // namespace logflat
