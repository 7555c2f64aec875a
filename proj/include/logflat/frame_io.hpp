#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "logflat/frame.hpp"

namespace logflat {

using FrameSchema = std::vector<std::pair<std::string, ColumnKind>>;

FrameSchema schema_of(const Frame& frame);

// RFC 4180 with a header row and LF line ends. Null cells are empty fields;
// empty text is written as "" so the two stay distinguishable. Returns the
// number of bytes written.
std::size_t write_csv(const Frame& frame, std::ostream& sink);

// One JSON object per row; null cells are omitted.
std::size_t write_jsonl(const Frame& frame, std::ostream& sink);

// CSV carries no kinds, so the schema names the kind of each header column.
Frame read_csv(std::istream& source, std::string name, const FrameSchema& schema);

// Without a schema, columns appear in first-seen key order and kinds are
// inferred (int < float, text otherwise; RFC 3339 `Z` strings as timestamps).
Frame read_jsonl(std::istream& source, std::string name, const std::optional<FrameSchema>& schema = std::nullopt);

}  // namespace logflat
