#include "logflat/flatten.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <unordered_map>

#include "logflat/error.hpp"
#include "logflat/ingest.hpp"
#include "logflat/log.hpp"
#include "logflat/parallel.hpp"

namespace logflat {

FlattenMode parse_flatten_mode(std::string_view text) {
  if (text == "local") return FlattenMode::Local;
  if (text == "global") return FlattenMode::Global;
  throw ConfigError("mode must be local or global, got '" + std::string(text) + "'");
}

std::string_view to_string(FlattenMode mode) noexcept { return mode == FlattenMode::Local ? "local" : "global"; }

void FlattenConfig::validate() const {
  if (max_depth < 1) throw ConfigError("max_depth must be at least 1");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (classify.sample_limit < 1) throw ConfigError("sample_limit must be at least 1");
  if (!(classify.delimiter_share > 0.0 && classify.delimiter_share <= 1.0)) {
    throw ConfigError("delimiter_share must be in (0, 1]");
  }
  if (null_fill.kind == NullFill::Kind::Sentinel && std::holds_alternative<std::monostate>(null_fill.sentinel)) {
    throw ConfigError("sentinel null fill needs a scalar value");
  }
}

namespace {

class RowSink : public LeafSink {
 public:
  explicit RowSink(const SchemaRegistry& registry) : registry_(registry) {}

  void on_leaf(PathId path, Scalar value) override {
    const auto& column = registry_.path(path).column;
    if (!column) throw FlattenError("no column registered for '" + registry_.path(path).rendered + "'");
    row.cells.push_back({*column, std::move(value)});
  }
  void on_null_complex(PathId path) override { row.null_complex.push_back(path); }

  FlatRow row;

 private:
  const SchemaRegistry& registry_;
};

ColumnKind registry_kind(const SchemaRegistry& registry, ColumnId id) {
  return column_kind_for(registry.columns()[id].kind);
}

// Builds columns `ids` over the given rows. Cells are transposed once, then
// columns are filled independently across workers.
std::vector<Column> build_columns(const SchemaRegistry& registry, const std::vector<ColumnId>& ids,
                                  const std::vector<const FlatRow*>& rows, std::size_t workers) {
  std::vector<int> slot(registry.columns().size(), -1);
  for (std::size_t i = 0; i < ids.size(); ++i) slot[ids[i]] = static_cast<int>(i);
  std::vector<std::vector<std::pair<std::size_t, const Scalar*>>> by_column(ids.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& cell : rows[r]->cells) {
      const int s = slot[cell.column];
      if (s >= 0) by_column[static_cast<std::size_t>(s)].emplace_back(r, &cell.value);
    }
  }
  std::vector<Column> out(ids.size());
  detail::parallel_chunks(ids.size(), static_cast<unsigned>(workers), [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      ColumnBuilder builder(registry.columns()[ids[i]].name, registry_kind(registry, ids[i]), rows.size());
      std::size_t next = 0;
      for (const auto& [r, value] : by_column[i]) {
        while (next < r) {
          builder.append_null();
          ++next;
        }
        builder.append(*value);
        ++next;
      }
      while (next < rows.size()) {
        builder.append_null();
        ++next;
      }
      out[i] = std::move(builder).build();
    }
  });
  return out;
}

}  // namespace

std::vector<std::pair<std::string, Scalar>> named_cells(const FlatRow& row, const SchemaRegistry& registry) {
  std::vector<std::pair<std::string, Scalar>> out;
  out.reserve(row.cells.size());
  for (const auto& c : row.cells) out.emplace_back(registry.columns().at(c.column).name, c.value);
  return out;
}

FlatRow flatten_record(const ValueNode& record, const SchemaRegistry& registry, const FlattenConfig& cfg) {
  RowSink sink(registry);
  registry.walk(record, cfg.max_depth, sink);
  return std::move(sink.row);
}

FlattenedCorpus flatten_corpus(std::span<const ValueNode> records, const SchemaRegistry& registry,
                               const FlattenConfig& cfg) {
  FlattenedCorpus out;
  out.rows.resize(records.size());
  out.shapes.resize(records.size());
  detail::parallel_chunks(records.size(), static_cast<unsigned>(cfg.workers),
                          [&](std::size_t, std::size_t b, std::size_t e) {
                            for (std::size_t i = b; i < e; ++i) {
                              RowSink sink(registry);
                              RecordShape shape = registry.analyze(records[i], &sink, cfg.max_depth);
                              if (shape.known) out.rows[i] = std::move(sink.row);
                              out.shapes[i] = std::move(shape);
                            }
                          });
  return out;
}

LocalFrames partition_by_schema(std::span<const ValueNode> records, const SchemaRegistry& registry,
                                const FlattenConfig& cfg) {
  const FlattenedCorpus flat = flatten_corpus(records, registry, cfg);
  const std::size_t n_parts = registry.partitions().size();
  std::vector<std::vector<std::size_t>> members(n_parts);
  std::vector<std::size_t> rejected;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& shape = flat.shapes[i];
    if (shape.known && shape.partition) members[*shape.partition].push_back(i);
    else rejected.push_back(i);
  }

  LocalFrames out;
  for (std::size_t p = 0; p < n_parts; ++p) {
    if (members[p].empty()) continue;
    std::vector<const FlatRow*> rows;
    std::vector<bool> used(registry.columns().size(), false);
    for (auto i : members[p]) {
      rows.push_back(&flat.rows[i]);
      for (const auto& c : flat.rows[i].cells) used[c.column] = true;
    }
    std::vector<ColumnId> ids;
    for (ColumnId c = 0; c < used.size(); ++c) {
      if (used[c]) ids.push_back(c);
    }
    auto columns = build_columns(registry, ids, rows, cfg.workers);
    ColumnBuilder schema_type(std::string(SchemaRegistry::kSchemaTypeColumn), ColumnKind::Int, rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) schema_type.append_int(static_cast<std::int64_t>(p));
    columns.insert(columns.begin(), std::move(schema_type).build());
    Frame frame("schema_" + std::to_string(p), std::move(columns));
    out.frames.push_back(apply_null_fill(frame, cfg.null_fill));
    out.partition.push_back(p);
  }

  ColumnBuilder raw("record", ColumnKind::Text, rejected.size());
  for (auto i : rejected) {
    raw.append_text(to_json_text(records[i]));
    log::warn("record " + std::to_string(i) + " rejected: " +
              (flat.shapes[i].known ? std::string("no registered structure") : flat.shapes[i].error));
  }
  std::vector<Column> reject_cols;
  reject_cols.push_back(std::move(raw).build());
  out.rejected = Frame("rejected", std::move(reject_cols));
  out.rejected_count = rejected.size();
  return out;
}

Frame unify_global(std::span<const ValueNode> records, const SchemaRegistry& registry, const FlattenConfig& cfg) {
  const FlattenedCorpus flat = flatten_corpus(records, registry, cfg);
  std::vector<const FlatRow*> rows;
  rows.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!flat.shapes[i].known) throw FlattenError("record " + std::to_string(i) + ": " + flat.shapes[i].error);
    rows.push_back(&flat.rows[i]);
  }
  std::vector<ColumnId> ids(registry.columns().size());
  for (ColumnId c = 0; c < ids.size(); ++c) ids[c] = c;
  Frame frame("global", build_columns(registry, ids, rows, cfg.workers));
  return apply_null_fill(frame, cfg.null_fill);
}

namespace {

struct RebuildNode {
  enum class Kind { Unset, Leaf, Object, Array, Delimited };
  Kind kind = Kind::Unset;
  Scalar value;
  char delimiter = '\0';
  std::vector<std::pair<std::string, std::unique_ptr<RebuildNode>>> keys;
  std::map<std::size_t, std::unique_ptr<RebuildNode>> slots;  // array indices or split parts

  RebuildNode& child(const PathSegment& seg, const SchemaRegistry::PathInfo& parent_info) {
    const Kind want = seg.kind == PathSegment::Kind::Key     ? Kind::Object
                      : seg.kind == PathSegment::Kind::Index ? Kind::Array
                                                             : Kind::Delimited;
    if (kind == Kind::Unset) kind = want;
    if (kind != want) throw FlattenError("conflicting shapes under '" + parent_info.rendered + "'");
    if (want == Kind::Delimited) delimiter = parent_info.cls.delimiter;
    if (want == Kind::Object) {
      for (auto& [k, n] : keys) {
        if (k == seg.key) return *n;
      }
      keys.emplace_back(seg.key, std::make_unique<RebuildNode>());
      return *keys.back().second;
    }
    auto& slot = slots[seg.index];
    if (!slot) slot = std::make_unique<RebuildNode>();
    return *slot;
  }

  std::string joined() const {
    std::string out;
    std::size_t expect = 0;
    for (const auto& [i, n] : slots) {
      if (i != expect) throw FlattenError("missing split part " + std::to_string(expect));
      if (i > 0) out += delimiter;
      if (n->kind == Kind::Delimited) out += n->joined();
      else if (n->kind == Kind::Leaf) out += render_scalar(n->value);
      else throw FlattenError("split part is not text");
      ++expect;
    }
    return out;
  }

  ValueNode build() const {
    switch (kind) {
      case Kind::Unset: return ValueNode();
      case Kind::Leaf: return ValueNode::from_scalar(value);
      case Kind::Delimited: return ValueNode(joined());
      case Kind::Object: {
        Object obj;
        for (const auto& [k, n] : keys) obj.push_back({k, n->build()});
        return ValueNode(std::move(obj));
      }
      case Kind::Array: {
        Array arr;
        for (const auto& [i, n] : slots) {
          if (arr.size() < i) arr.resize(i);
          arr.push_back(n->build());
        }
        return ValueNode(std::move(arr));
      }
    }
    return ValueNode();
  }
};

std::vector<PathId> ancestry(const SchemaRegistry& registry, PathId id) {
  std::vector<PathId> chain;
  while (id != 0) {
    chain.push_back(id);
    id = registry.path(id).parent;
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

RebuildNode& descend(RebuildNode& root, const SchemaRegistry& registry, PathId id) {
  RebuildNode* cur = &root;
  PathId parent = 0;
  for (PathId step : ancestry(registry, id)) {
    const auto& info = registry.path(step);
    cur = &cur->child(info.path.segments().back(), registry.path(parent));
    parent = step;
  }
  return *cur;
}

}  // namespace

ValueNode reconstruct(const FlatRow& row, const SchemaFingerprint& fingerprint, const SchemaRegistry& registry) {
  std::map<std::string, ValueKind, std::less<>> expected;
  for (const auto& e : fingerprint.entries) expected.emplace(e.path, e.kind);

  RebuildNode root;
  root.kind = RebuildNode::Kind::Object;
  std::size_t matched = 0;
  for (const auto& cell : row.cells) {
    const PathId id = registry.columns().at(cell.column).path;
    const auto& rendered = registry.path(id).rendered;
    if (!expected.contains(rendered)) throw FlattenError("row cell '" + rendered + "' is not in the fingerprint");
    RebuildNode& leaf = descend(root, registry, id);
    if (leaf.kind != RebuildNode::Kind::Unset) throw FlattenError("duplicate cell for '" + rendered + "'");
    leaf.kind = RebuildNode::Kind::Leaf;
    leaf.value = cell.value;
    ++matched;
  }
  for (PathId id : row.null_complex) {
    const auto& rendered = registry.path(id).rendered;
    if (!expected.contains(rendered)) throw FlattenError("null '" + rendered + "' is not in the fingerprint");
    RebuildNode& n = descend(root, registry, id);
    n.kind = RebuildNode::Kind::Leaf;
    n.value = std::monostate{};
    ++matched;
  }
  if (matched != expected.size()) {
    throw FlattenError("row covers " + std::to_string(matched) + " of " + std::to_string(expected.size()) +
                       " fingerprint paths");
  }
  return root.build();
}

}  // namespace logflat
