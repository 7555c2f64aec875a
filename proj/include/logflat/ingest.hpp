#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "logflat/value.hpp"

namespace logflat {

enum class ErrorPolicy { Skip, Abort };

ErrorPolicy parse_error_policy(std::string_view text);
std::string_view to_string(ErrorPolicy policy) noexcept;

struct IngestOptions {
  std::size_t max_depth = 8;
  ErrorPolicy policy = ErrorPolicy::Skip;
  unsigned workers = 1;
};

struct FailedLine {
  std::size_t line_number;
  std::string error;
};

struct IngestStats {
  std::size_t records_ok = 0;
  std::size_t records_failed = 0;
  std::vector<FailedLine> failed_lines;
};

struct Corpus {
  std::vector<ValueNode> records;
  std::vector<std::size_t> line_numbers;  // parallel to records, 1-based
  IngestStats stats;
};

// Parses one JSON-Lines document. Integers below 2^53 in magnitude become
// Int, every other number Float. Throws ParseError (malformed, duplicate key,
// too deep) or StructureError (top level not an object).
ValueNode parse_record(std::string_view line, std::size_t line_number,
                       std::size_t max_depth = 8);

// Reads newline-delimited records. Blank lines are skipped without being
// counted. Output order equals input order for any worker count.
Corpus read_corpus(std::istream& source, const IngestOptions& options = {});
Corpus read_corpus_file(const std::string& path, const IngestOptions& options = {});

// Compact JSON text; object field order preserved.
std::string to_json_text(const ValueNode& value);

}  // namespace logflat
