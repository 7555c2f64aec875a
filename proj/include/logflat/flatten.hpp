#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "logflat/frame.hpp"
#include "logflat/frame_ops.hpp"
#include "logflat/schema.hpp"
#include "logflat/value.hpp"

namespace logflat {

enum class FlattenMode { Local, Global };

FlattenMode parse_flatten_mode(std::string_view text);
std::string_view to_string(FlattenMode mode) noexcept;

struct FlattenConfig {
  FlattenMode mode = FlattenMode::Local;
  // dict_paths and delimiter_overrides live here; they shape the registry.
  ClassifyOptions classify;
  std::size_t max_depth = 8;
  NullFill null_fill;
  std::size_t workers = 1;

  void validate() const;  // throws ConfigError
};

// One flattened record: present leaves in walk order. Columns absent from the
// record have no cell; a null leaf has a cell holding monostate.
struct FlatRow {
  struct Cell {
    ColumnId column;
    Scalar value;
    friend bool operator==(const Cell&, const Cell&) = default;
  };
  std::vector<Cell> cells;
  // Complex paths (object, array or delimited text) that held null.
  std::vector<PathId> null_complex;

  friend bool operator==(const FlatRow&, const FlatRow&) = default;
};

// Column name -> value view of a row, in cell order.
std::vector<std::pair<std::string, Scalar>> named_cells(const FlatRow& row, const SchemaRegistry& registry);

FlatRow flatten_record(const ValueNode& record, const SchemaRegistry& registry, const FlattenConfig& cfg);

struct FlattenedCorpus {
  std::vector<FlatRow> rows;
  std::vector<RecordShape> shapes;
};

// flatten_record over every record, `cfg.workers` threads, input order kept.
// Records that do not fit the registry keep an empty row and an unknown shape.
FlattenedCorpus flatten_corpus(std::span<const ValueNode> records, const SchemaRegistry& registry,
                               const FlattenConfig& cfg);

struct LocalFrames {
  std::vector<Frame> frames;           // one per registry partition that received rows
  std::vector<std::size_t> partition;  // registry partition of each frame
  Frame rejected;                      // one text column `record` holding the source JSON
  std::size_t rejected_count = 0;
};

// One frame per baseline structure: per dict-union inner schema, or per
// top-level fingerprint when the registry has no dict union. Each frame starts
// with an int `schemaType` column holding the partition index.
LocalFrames partition_by_schema(std::span<const ValueNode> records, const SchemaRegistry& registry,
                                const FlattenConfig& cfg);

// One row per record over the union of all registry columns.
Frame unify_global(std::span<const ValueNode> records, const SchemaRegistry& registry, const FlattenConfig& cfg);

// Inverse of flatten_record for rows produced without null fill. Throws
// FlattenError when the row and fingerprint disagree.
ValueNode reconstruct(const FlatRow& row, const SchemaFingerprint& fingerprint, const SchemaRegistry& registry);

}  // namespace logflat
