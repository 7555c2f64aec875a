#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "logflat/frame.hpp"
#include "logflat/time.hpp"

namespace logflat {

// Category <-> index mapping produced by string_index. Index i is the i-th
// most frequent category; ties go to the lexicographically smaller text.
struct IndexDictionary {
  std::string column;
  std::vector<std::string> categories;
  std::vector<std::size_t> frequencies;

  std::optional<std::int64_t> index_of(std::string_view category) const;
  std::size_t size() const noexcept { return categories.size(); }
};

// Replaces a text column by its int category index (same name). Nulls stay null.
std::pair<Frame, IndexDictionary> string_index(const Frame& frame, std::string_view column);
// Inverse of string_index.
Frame restore_index(const Frame& frame, const IndexDictionary& dictionary);

// (x - mean) / s with the sample (n - 1) deviation; a constant or single-value
// column scales to zeros. Replaces the column by a float column.
Frame zscale(const Frame& frame, std::string_view column);

struct NullFill {
  enum class Kind { None, Mean, Median, Sentinel };
  Kind kind = Kind::None;
  Scalar sentinel = std::monostate{};

  static NullFill parse(std::string_view text);  // none|mean|median|sentinel:<value>
  std::string describe() const;
};

// Mean and median fill numeric columns (int columns become float); other
// columns get "" under those policies. A sentinel whose kind does not fit a
// column turns that column into text.
Frame apply_null_fill(const Frame& frame, const NullFill& fill);

struct TimeConversion {
  std::string source;
  std::string timestamp_column;
  std::vector<std::string> window_columns;
  std::size_t unparsed = 0;
};

// Converts time columns: text columns whose every non-null value matches a
// calendar format, plus any column named in `explicit_columns` (which may
// also use the epoch formats). Each becomes `<name>_ts` followed by
// `<name>_year`, `_month`, `_day_of_week`, `_hour`, `_minute`.
std::pair<Frame, std::vector<TimeConversion>> convert_time_columns(
    const Frame& frame, const TimeParseOptions& options, const std::vector<std::string>& explicit_columns = {});

// Text columns whose every non-null value is a canonical integer (or
// number) become int (or float) columns. Returns the converted column names.
std::pair<Frame, std::vector<std::string>> coerce_numeric_text(const Frame& frame);

}  // namespace logflat
