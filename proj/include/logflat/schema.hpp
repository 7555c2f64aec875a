#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logflat/time.hpp"
#include "logflat/value.hpp"

namespace logflat {

// One step of a field path: an object key, an array slot, or a position
// produced by splitting a delimited string.
struct PathSegment {
  enum class Kind : std::uint8_t { Key, Index, Part };
  Kind kind = Kind::Key;
  std::string key;
  std::size_t index = 0;

  static PathSegment make_key(std::string k) { return {Kind::Key, std::move(k), 0}; }
  static PathSegment make_index(std::size_t i) { return {Kind::Index, {}, i}; }
  static PathSegment make_part(std::size_t i) { return {Kind::Part, {}, i}; }
  friend bool operator==(const PathSegment&, const PathSegment&) = default;
};

// Raw source names, before any column renaming.
class FieldPath {
 public:
  FieldPath() = default;
  explicit FieldPath(std::vector<PathSegment> segments) : segments_(std::move(segments)) {}
  static FieldPath key(std::string k) { return FieldPath({PathSegment::make_key(std::move(k))}); }

  FieldPath child(PathSegment seg) const;
  const std::vector<PathSegment>& segments() const noexcept { return segments_; }
  std::size_t size() const noexcept { return segments_.size(); }
  bool empty() const noexcept { return segments_.empty(); }

  // `a.b[2]#1`: keys joined by '.', array slots in brackets, split parts
  // after '#'. '.', '[', ']', '#' and '\' inside keys are backslash-escaped.
  std::string render() const;
  // Column stem: segments joined by '_', with '$' and '@' removed from keys.
  std::string column_stem() const;

  friend bool operator==(const FieldPath&, const FieldPath&) = default;

 private:
  std::vector<PathSegment> segments_;
};

struct FieldClass {
  enum class Kind : std::uint8_t { Scalar, StructWrapper, DictUnion, DelimitedString, List };
  Kind kind = Kind::Scalar;
  char delimiter = '\0';  // DelimitedString only

  static FieldClass scalar() { return {}; }
  static FieldClass delimited(char d) { return {Kind::DelimitedString, d}; }
  bool is_complex() const noexcept { return kind != Kind::Scalar; }
  friend bool operator==(const FieldClass&, const FieldClass&) = default;
};

std::string to_string(const FieldClass& cls);

// null < int < float < text; bool joins only with itself and null.
ValueKind join_kinds(ValueKind a, ValueKind b) noexcept;

struct ClassifyOptions {
  std::size_t sample_limit = 1000;
  std::string candidate_delimiters = ":,;|";
  double delimiter_share = 0.9;
  std::size_t max_depth = 8;
  // Rendered paths forced to DictUnion.
  std::set<std::string> dict_paths;
  // Rendered path -> delimiter; nullopt disables splitting for that path.
  std::map<std::string, std::optional<char>> delimiter_overrides;
  // Text that reads as a calendar timestamp is never split.
  std::vector<TimeFormat> time_formats = default_time_formats();
};

// Classifies one path from values sampled across records. Throws
// ClassificationConflict when objects, arrays and scalars mix at the path.
FieldClass classify_field(const FieldPath& path, std::span<const ValueNode* const> samples,
                          const ClassifyOptions& options = {});
FieldClass classify_field(const FieldPath& path, std::span<const ValueNode> samples,
                          const ClassifyOptions& options = {});

struct SchemaFingerprint {
  struct Entry {
    std::string path;
    ValueKind kind;
    friend bool operator==(const Entry&, const Entry&) = default;
  };
  std::vector<Entry> entries;  // sorted by path
  std::string digest;          // 16 hex digits, FNV-1a over the canonical text

  static SchemaFingerprint from_entries(std::vector<Entry> entries);
  std::string canonical_text() const;
  friend bool operator==(const SchemaFingerprint&, const SchemaFingerprint&) = default;
};

using PathId = std::uint32_t;
using ColumnId = std::uint32_t;

// Receives the leaves of one record as the registry walks it.
class LeafSink {
 public:
  virtual ~LeafSink() = default;
  virtual void on_leaf(PathId path, Scalar value) = 0;
  // A null where the registry expects an object, array or delimited text.
  virtual void on_null_complex(PathId) {}
};

struct RecordShape {
  bool known = false;
  std::optional<std::size_t> schema;     // index into schemas()
  std::optional<std::size_t> partition;  // index into partitions()
  std::vector<int> inner;                // per dict union: inner schema index, -1 absent
  std::string error;                     // why the walk failed when !known
};

class SchemaRegistry {
 public:
  struct Entry {
    SchemaFingerprint fingerprint;
    std::size_t count = 0;
  };
  struct PathInfo {
    FieldPath path;
    std::string rendered;
    PathId parent = 0;
    FieldClass cls;
    ValueKind kind = ValueKind::Null;
    std::size_t occurrences = 0;
    std::size_t max_length = 0;  // arrays: longest list; delimited: most parts
    std::optional<ColumnId> column;
  };
  struct Column {
    std::string name;
    PathId path;
    ValueKind kind;
  };
  // Inner schemas and partitions key on structure with list slots and split
  // parts folded into their field, so list length never splits a partition.
  struct DictUnion {
    PathId path;
    std::vector<Entry> inner_schemas;
  };
  struct Partition {
    std::vector<int> inner;
    std::size_t schema = 0;  // top-level schema of the first record in it
    std::size_t count = 0;
  };

  static constexpr std::string_view kSchemaTypeColumn = "schemaType";

  SchemaRegistry();
  ~SchemaRegistry();
  SchemaRegistry(SchemaRegistry&&) noexcept;
  SchemaRegistry& operator=(SchemaRegistry&&) noexcept;
  SchemaRegistry(const SchemaRegistry&);
  SchemaRegistry& operator=(const SchemaRegistry&);

  const std::vector<Entry>& schemas() const noexcept;
  std::size_t record_count() const noexcept;
  const ClassifyOptions& options() const noexcept;

  // Path 0 is the record root; real paths start at 1.
  std::size_t path_count() const noexcept;
  const PathInfo& path(PathId id) const;
  std::optional<PathId> find_path(std::string_view rendered) const;

  const std::vector<Column>& columns() const noexcept;
  std::optional<ColumnId> find_column(std::string_view name) const;
  // The source attribute a column belongs to: the top-level key, or the
  // dict-union key plus one inner key.
  std::string field_of(ColumnId column) const;

  const std::vector<DictUnion>& dict_unions() const noexcept;
  const std::vector<Partition>& partitions() const noexcept;

  // Walks `record` with the registered classes, reporting every leaf.
  // Throws FlattenError on unregistered paths, shape mismatches, or paths
  // longer than max_depth segments.
  void walk(const ValueNode& record, std::size_t max_depth, LeafSink& sink) const;
  // Locates the record's schema and partition. Leaves are also forwarded to
  // `forward` when given, so a flatten pass needs only one walk. A zero
  // max_depth means the registry's own limit.
  RecordShape analyze(const ValueNode& record, LeafSink* forward = nullptr, std::size_t max_depth = 0) const;
  std::optional<SchemaFingerprint> fingerprint_of(const ValueNode& record) const;

  struct Impl;  // opaque; public so internal helpers can name it

 private:
  std::unique_ptr<Impl> impl_;
  friend SchemaRegistry build_registry(std::span<const ValueNode>, const ClassifyOptions&);
};

// Registers every record. Enumeration order is first appearance.
SchemaRegistry build_registry(std::span<const ValueNode> records, const ClassifyOptions& options = {});

// Fingerprint of a record classified on its own (one-record registry).
SchemaFingerprint fingerprint(const ValueNode& record, const ClassifyOptions& options = {});

}  // namespace logflat
