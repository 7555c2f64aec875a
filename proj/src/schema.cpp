#include "logflat/schema.hpp"

#include <algorithm>
#include <cstdio>
#include <type_traits>
#include <unordered_map>
#include <unordered_set>

#include "logflat/error.hpp"

namespace logflat {

namespace {

constexpr std::uint32_t kNullMarker = 0x80000000u;

std::vector<std::string_view> split(std::string_view text, char d) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == d) {
      parts.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  parts.push_back(text.substr(start));
  return parts;
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct IdVectorHash {
  std::size_t operator()(const std::vector<std::uint32_t>& v) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto x : v) {
      h ^= x;
      h *= 0x100000001b3ull;
    }
    return static_cast<std::size_t>(h);
  }
};

struct IntVectorHash {
  std::size_t operator()(const std::vector<int>& v) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto x : v) {
      h ^= static_cast<std::uint32_t>(x);
      h *= 0x100000001b3ull;
    }
    return static_cast<std::size_t>(h);
  }
};

std::string escape_key(std::string_view key) {
  std::string out;
  out.reserve(key.size());
  for (char c : key) {
    if (c == '.' || c == '[' || c == ']' || c == '#' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

bool looks_like_url(std::string_view text) { return text.find("://") != std::string_view::npos; }

}  // namespace

FieldPath FieldPath::child(PathSegment seg) const {
  auto segs = segments_;
  segs.push_back(std::move(seg));
  return FieldPath(std::move(segs));
}

std::string FieldPath::render() const {
  std::string out;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    switch (s.kind) {
      case PathSegment::Kind::Key:
        if (i > 0) out += '.';
        out += escape_key(s.key);
        break;
      case PathSegment::Kind::Index:
        out += '[' + std::to_string(s.index) + ']';
        break;
      case PathSegment::Kind::Part:
        out += '#' + std::to_string(s.index);
        break;
    }
  }
  return out;
}

std::string FieldPath::column_stem() const {
  std::string out;
  for (const auto& s : segments_) {
    std::string piece;
    if (s.kind == PathSegment::Kind::Key) {
      for (char c : s.key) {
        if (c != '$' && c != '@') piece += c;
      }
      if (piece.empty()) piece = "field";
    } else {
      piece = std::to_string(s.index);
    }
    if (!out.empty()) out += '_';
    out += piece;
  }
  return out;
}

std::string to_string(const FieldClass& cls) {
  switch (cls.kind) {
    case FieldClass::Kind::Scalar: return "Scalar";
    case FieldClass::Kind::StructWrapper: return "StructWrapper";
    case FieldClass::Kind::DictUnion: return "DictUnion";
    case FieldClass::Kind::List: return "List";
    case FieldClass::Kind::DelimitedString: return std::string("DelimitedString(") + cls.delimiter + ")";
  }
  return "Unknown";
}

ValueKind join_kinds(ValueKind a, ValueKind b) noexcept {
  if (a == b) return a;
  if (a == ValueKind::Null) return b;
  if (b == ValueKind::Null) return a;
  if (a == ValueKind::Bool || b == ValueKind::Bool) return ValueKind::Text;
  if (a == ValueKind::Text || b == ValueKind::Text) return ValueKind::Text;
  if (a == ValueKind::Object || a == ValueKind::Array || b == ValueKind::Object || b == ValueKind::Array) {
    return ValueKind::Text;
  }
  return ValueKind::Float;  // int with float
}

FieldClass classify_field(const FieldPath& path, std::span<const ValueNode* const> samples,
                          const ClassifyOptions& options) {
  const std::string rendered = path.render();
  std::size_t objects = 0, arrays = 0, scalars = 0;
  for (const ValueNode* v : samples) {
    if (v->is_object()) ++objects;
    else if (v->is_array()) ++arrays;
    else if (!v->is_null()) ++scalars;
  }
  const int shapes = (objects > 0) + (arrays > 0) + (scalars > 0);
  if (shapes > 1) {
    throw ClassificationConflict(rendered, std::to_string(objects) + " object, " + std::to_string(arrays) +
                                               " array and " + std::to_string(scalars) + " scalar samples");
  }
  if (objects > 0) {
    if (options.dict_paths.contains(rendered)) return {FieldClass::Kind::DictUnion, '\0'};
    std::set<std::vector<std::string>> key_sets;
    for (const ValueNode* v : samples) {
      if (!v->is_object()) continue;
      std::vector<std::string> keys;
      for (const auto& m : v->as_object()) keys.push_back(m.name);
      std::sort(keys.begin(), keys.end());
      key_sets.insert(std::move(keys));
      if (key_sets.size() > 1) return {FieldClass::Kind::DictUnion, '\0'};
    }
    return {FieldClass::Kind::StructWrapper, '\0'};
  }
  if (arrays > 0) return {FieldClass::Kind::List, '\0'};
  if (scalars == 0) return FieldClass::scalar();

  if (auto it = options.delimiter_overrides.find(rendered); it != options.delimiter_overrides.end()) {
    return it->second ? FieldClass::delimited(*it->second) : FieldClass::scalar();
  }

  // Texts that read as timestamps or URLs are excluded from delimiter voting
  // but still count toward the non-null denominator.
  std::vector<std::string_view> candidates;
  for (const ValueNode* v : samples) {
    if (v->kind() != ValueKind::Text) continue;
    const std::string& t = v->as_text();
    if (t.find_first_of(options.candidate_delimiters) == std::string::npos) continue;
    if (looks_like_url(t) || looks_like_calendar_time(t, options.time_formats)) continue;
    candidates.push_back(t);
  }
  const double needed = options.delimiter_share * static_cast<double>(scalars);
  for (char d : options.candidate_delimiters) {
    std::map<std::size_t, std::size_t> freq;
    for (auto t : candidates) {
      const auto c = static_cast<std::size_t>(std::count(t.begin(), t.end(), d));
      if (c >= 1) ++freq[c];
    }
    std::size_t best = 0;
    for (const auto& [count, f] : freq) best = std::max(best, f);
    if (best > 0 && static_cast<double>(best) >= needed) return FieldClass::delimited(d);
  }
  return FieldClass::scalar();
}

FieldClass classify_field(const FieldPath& path, std::span<const ValueNode> samples,
                          const ClassifyOptions& options) {
  std::vector<const ValueNode*> ptrs;
  ptrs.reserve(samples.size());
  for (const auto& s : samples) ptrs.push_back(&s);
  return classify_field(path, std::span<const ValueNode* const>(ptrs), options);
}

SchemaFingerprint SchemaFingerprint::from_entries(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.path != b.path) return a.path < b.path;
    return a.kind < b.kind;
  });
  SchemaFingerprint fp;
  fp.entries = std::move(entries);
  fp.digest = fnv1a_hex(fp.canonical_text());
  return fp;
}

std::string SchemaFingerprint::canonical_text() const {
  std::string out;
  for (const auto& e : entries) {
    out += e.path;
    out += '\t';
    out += to_string(e.kind);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

struct SchemaRegistry::Impl {
  struct Node {
    PathInfo info;
    std::unordered_map<std::string, PathId> keys;
    std::vector<PathId> indices;
    std::vector<PathId> parts;
    std::vector<const ValueNode*> samples;
    std::vector<ValueNode> owned;
    bool seen_object = false;
    bool seen_array = false;
    bool seen_scalar = false;
    int dict_slot = -1;  // top-most dict union slot for this node itself
    int leaf_slot = -1;  // slot whose inner schema this node's leaves belong to
    // Outermost list or delimited ancestor, else the node itself. Structure
    // keys use it so list lengths and part counts do not split partitions.
    PathId group = 0;
  };

  ClassifyOptions options;
  std::vector<Node> nodes;
  std::unordered_map<std::string, PathId> path_by_rendered;

  std::vector<Column> columns;
  std::unordered_map<std::string, ColumnId> column_by_name;

  std::vector<Entry> schemas;
  std::unordered_map<std::vector<std::uint32_t>, std::size_t, IdVectorHash> schema_index;
  // Grouped top-level keys -> structure id; partitions use it when no dict union exists.
  std::unordered_map<std::vector<std::uint32_t>, std::size_t, IdVectorHash> structure_index;
  std::vector<DictUnion> dicts;
  std::vector<std::unordered_map<std::vector<std::uint32_t>, std::size_t, IdVectorHash>> dict_index;
  std::vector<Partition> partitions;
  std::unordered_map<std::vector<int>, std::size_t, IntVectorHash> partition_index;
  std::size_t records = 0;

  Impl() {
    Node root;
    root.info.cls = {FieldClass::Kind::StructWrapper, '\0'};
    nodes.push_back(std::move(root));
  }

  PathId add_node(PathId parent, PathSegment seg) {
    Node n;
    n.info.path = nodes[parent].info.path.child(std::move(seg));
    n.info.rendered = n.info.path.render();
    n.info.parent = parent;
    const Node& p = nodes[parent];
    n.leaf_slot = p.dict_slot >= 0 ? p.dict_slot : p.leaf_slot;
    const auto id = static_cast<PathId>(nodes.size());
    n.group = group_for(parent, id);
    path_by_rendered.emplace(n.info.rendered, id);
    nodes.push_back(std::move(n));
    return id;
  }

  PathId group_for(PathId parent, PathId self) const {
    const Node& p = nodes[parent];
    if (parent != 0 && p.group != parent) return p.group;
    const auto k = p.info.cls.kind;
    return k == FieldClass::Kind::List || k == FieldClass::Kind::DelimitedString ? parent : self;
  }

  PathId key_child(PathId parent, const std::string& key) {
    if (auto it = nodes[parent].keys.find(key); it != nodes[parent].keys.end()) return it->second;
    const PathId id = add_node(parent, PathSegment::make_key(key));
    nodes[parent].keys.emplace(key, id);
    return id;
  }

  PathId index_child(PathId parent, std::size_t i) {
    auto& idx = nodes[parent].indices;
    if (i < idx.size() && idx[i] != 0) return idx[i];
    const PathId id = add_node(parent, PathSegment::make_index(i));
    auto& again = nodes[parent].indices;
    if (again.size() <= i) again.resize(i + 1, 0);
    again[i] = id;
    return id;
  }

  PathId part_child(PathId parent, std::size_t i) {
    auto& parts = nodes[parent].parts;
    if (i < parts.size() && parts[i] != 0) return parts[i];
    const PathId id = add_node(parent, PathSegment::make_part(i));
    nodes[id].info.kind = ValueKind::Text;
    nodes[id].seen_scalar = true;
    auto& again = nodes[parent].parts;
    if (again.size() <= i) again.resize(i + 1, 0);
    again[i] = id;
    return id;
  }

  // Pass 1: structural paths, shapes, kinds and samples over every record.
  void observe(PathId id, const ValueNode& v) {
    if (nodes[id].info.path.size() > options.max_depth) {
      throw FlattenError("depth limit " + std::to_string(options.max_depth) + " exceeded at '" +
                         nodes[id].info.rendered + "'");
    }
    {
      Node& n = nodes[id];
      ++n.info.occurrences;
      if (n.samples.size() < options.sample_limit) n.samples.push_back(&v);
      if (v.is_object()) n.seen_object = true;
      else if (v.is_array()) n.seen_array = true;
      else if (!v.is_null()) n.seen_scalar = true;
      if (v.is_scalar()) n.info.kind = join_kinds(n.info.kind, v.kind());
    }
    if (v.is_object()) {
      for (const auto& m : v.as_object()) observe(key_child(id, m.name), m.value);
    } else if (v.is_array()) {
      const auto& arr = v.as_array();
      nodes[id].info.max_length = std::max(nodes[id].info.max_length, arr.size());
      for (std::size_t i = 0; i < arr.size(); ++i) observe(index_child(id, i), arr[i]);
    }
  }

  void classify_all() {
    for (PathId id = 1; id < nodes.size(); ++id) {
      {
        const Node& n = nodes[id];
        const int shapes = n.seen_object + n.seen_array + n.seen_scalar;
        if (shapes > 1) {
          std::string found;
          if (n.seen_object) found += "object ";
          if (n.seen_array) found += "array ";
          if (n.seen_scalar) found += "scalar ";
          throw ClassificationConflict(n.info.rendered, "mixed shapes across records: " + found);
        }
      }
      nodes[id].info.cls = classify_field(nodes[id].info.path, nodes[id].samples, options);
      if (nodes[id].info.cls.kind == FieldClass::Kind::DelimitedString) derive_part_samples(id);
    }
    for (PathId id = 1; id < nodes.size(); ++id) {
      Node& n = nodes[id];
      const Node& p = nodes[n.info.parent];
      n.leaf_slot = p.dict_slot >= 0 ? p.dict_slot : p.leaf_slot;
      n.group = group_for(n.info.parent, id);
      if (n.info.cls.kind == FieldClass::Kind::DictUnion && n.leaf_slot < 0) {
        n.dict_slot = static_cast<int>(dicts.size());
        dicts.push_back(DictUnion{id, {}});
        dict_index.emplace_back();
      }
    }
    for (auto& n : nodes) {
      n.samples.clear();
      n.samples.shrink_to_fit();
      n.owned.clear();
      n.owned.shrink_to_fit();
    }
  }

  void derive_part_samples(PathId id) {
    const char d = nodes[id].info.cls.delimiter;
    std::vector<std::vector<std::string>> per_part;
    for (const ValueNode* s : nodes[id].samples) {
      if (s->is_null()) continue;
      const std::string text = render_scalar(s->to_scalar());
      const auto parts = split(text, d);
      if (per_part.size() < parts.size()) per_part.resize(parts.size());
      for (std::size_t i = 0; i < parts.size(); ++i) per_part[i].emplace_back(parts[i]);
    }
    for (std::size_t i = 0; i < per_part.size(); ++i) {
      const PathId child = part_child(id, i);
      Node& c = nodes[child];
      c.owned.reserve(per_part[i].size());
      for (auto& t : per_part[i]) c.owned.emplace_back(std::move(t));
      for (const auto& o : c.owned) c.samples.push_back(&o);
    }
  }

  ColumnId assign_column(PathId id) {
    Node& n = nodes[id];
    if (n.info.column) return *n.info.column;
    const std::string stem = n.info.path.column_stem();
    std::string name = stem;
    for (int k = 2; name == kSchemaTypeColumn || column_by_name.contains(name); ++k) {
      name = stem + "_" + std::to_string(k);
    }
    const auto cid = static_cast<ColumnId>(columns.size());
    columns.push_back(Column{name, id, n.info.kind});
    column_by_name.emplace(std::move(name), cid);
    n.info.column = cid;
    return cid;
  }

  std::string relative_render(PathId id, PathId base) const {
    const auto& segs = nodes[id].info.path.segments();
    const std::size_t skip = base == 0 ? 0 : nodes[base].info.path.size();
    std::vector<PathSegment> rel(segs.begin() + static_cast<std::ptrdiff_t>(skip), segs.end());
    return FieldPath(std::move(rel)).render();
  }

  SchemaFingerprint make_fingerprint(const std::vector<std::uint32_t>& key, PathId base) const {
    std::vector<SchemaFingerprint::Entry> entries;
    entries.reserve(key.size());
    for (auto raw : key) {
      const PathId id = raw & ~kNullMarker;
      const Node& n = nodes[id];
      const bool null_complex = (raw & kNullMarker) != 0;
      entries.push_back({relative_render(id, base), null_complex ? ValueKind::Null : n.info.kind});
    }
    return SchemaFingerprint::from_entries(std::move(entries));
  }
};

namespace {

// Walks a record against the registered classes. With a mutable Impl it may
// create split-part nodes discovered past the classification sample.
template <typename ImplT>
class Walker {
 public:
  Walker(ImplT& impl, std::size_t max_depth, LeafSink& sink) : impl_(impl), max_depth_(max_depth), sink_(sink) {}

  void record(const ValueNode& rec) {
    if (!rec.is_object()) throw FlattenError("record is not an object");
    for (const auto& m : rec.as_object()) value(key_child(0, m.name), m.value);
  }

 private:
  static constexpr bool kBuild = !std::is_const_v<ImplT>;

  [[noreturn]] void unknown(PathId parent, const std::string& what) const {
    const auto& p = impl_.nodes[parent].info.rendered;
    throw FlattenError("path not in registry: " + (p.empty() ? what : p + what));
  }

  PathId key_child(PathId parent, const std::string& key) {
    const auto& keys = impl_.nodes[parent].keys;
    if (auto it = keys.find(key); it != keys.end()) return it->second;
    unknown(parent, (parent == 0 ? "" : ".") + key);
  }

  PathId index_child(PathId parent, std::size_t i) {
    const auto& idx = impl_.nodes[parent].indices;
    if (i < idx.size() && idx[i] != 0) return idx[i];
    unknown(parent, "[" + std::to_string(i) + "]");
  }

  PathId part_child(PathId parent, std::size_t i) {
    if constexpr (kBuild) {
      return impl_.part_child(parent, i);
    } else {
      const auto& parts = impl_.nodes[parent].parts;
      if (i < parts.size() && parts[i] != 0) return parts[i];
      unknown(parent, "#" + std::to_string(i));
    }
  }

  void check_depth(PathId id) const {
    const auto& info = impl_.nodes[id].info;
    if (info.path.size() > max_depth_) {
      throw FlattenError("depth limit " + std::to_string(max_depth_) + " exceeded at '" + info.rendered + "'");
    }
  }

  void value(PathId id, const ValueNode& v) {
    check_depth(id);
    const FieldClass cls = impl_.nodes[id].info.cls;
    if (v.is_null()) {
      if (cls.is_complex()) sink_.on_null_complex(id);
      else sink_.on_leaf(id, std::monostate{});
      return;
    }
    switch (cls.kind) {
      case FieldClass::Kind::Scalar:
        if (!v.is_scalar()) mismatch(id, v, "scalar");
        sink_.on_leaf(id, v.to_scalar());
        return;
      case FieldClass::Kind::StructWrapper:
      case FieldClass::Kind::DictUnion:
        if (!v.is_object()) mismatch(id, v, "object");
        for (const auto& m : v.as_object()) value(key_child(id, m.name), m.value);
        return;
      case FieldClass::Kind::List: {
        if (!v.is_array()) mismatch(id, v, "array");
        const auto& arr = v.as_array();
        for (std::size_t i = 0; i < arr.size(); ++i) value(index_child(id, i), arr[i]);
        return;
      }
      case FieldClass::Kind::DelimitedString:
        if (!v.is_scalar()) mismatch(id, v, "delimited text");
        text(id, render_scalar(v.to_scalar()));
        return;
    }
  }

  void text(PathId id, const std::string& t) {
    const char d = impl_.nodes[id].info.cls.delimiter;
    const auto parts = split(t, d);
    if constexpr (kBuild) {
      auto& n = impl_.nodes[id].info;
      n.max_length = std::max(n.max_length, parts.size());
    }
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const PathId child = part_child(id, i);
      check_depth(child);
      if (impl_.nodes[child].info.cls.kind == FieldClass::Kind::DelimitedString) {
        text(child, std::string(parts[i]));
      } else {
        sink_.on_leaf(child, std::string(parts[i]));
      }
    }
  }

  [[noreturn]] void mismatch(PathId id, const ValueNode& v, std::string_view expected) const {
    throw FlattenError("expected " + std::string(expected) + " at '" + impl_.nodes[id].info.rendered +
                       "', found " + std::string(to_string(v.kind())));
  }

  ImplT& impl_;
  std::size_t max_depth_;
  LeafSink& sink_;
};

// Collects leaf ids for fingerprinting and dict-union attribution.
class ShapeSink : public LeafSink {
 public:
  ShapeSink(const std::vector<SchemaRegistry::Impl::Node>& nodes, std::size_t slots, LeafSink* forward)
      : inner_(slots), present_(slots, false), nodes_(nodes), forward_(forward) {}

  void on_leaf(PathId path, Scalar value) override {
    add(path, path);
    if (forward_ != nullptr) forward_->on_leaf(path, std::move(value));
  }
  void on_null_complex(PathId path) override {
    if (forward_ != nullptr) forward_->on_null_complex(path);
    const int self = nodes_[path].dict_slot;
    if (self >= 0) return;  // a null dict union counts as absent
    add(path, path | kNullMarker);
  }

  std::vector<std::uint32_t> all;        // exact leaf keys
  std::vector<std::uint32_t> structure;  // grouped keys outside any dict union
  std::vector<std::vector<std::uint32_t>> inner_;
  std::vector<bool> present_;

 private:
  void add(PathId path, std::uint32_t key) {
    all.push_back(key);
    const std::uint32_t grouped = nodes_[path].group | (key & kNullMarker);
    const int slot = nodes_[path].leaf_slot;
    if (slot >= 0) {
      inner_[static_cast<std::size_t>(slot)].push_back(grouped);
      present_[static_cast<std::size_t>(slot)] = true;
    } else {
      structure.push_back(grouped);
    }
  }

  const std::vector<SchemaRegistry::Impl::Node>& nodes_;
  LeafSink* forward_;
};

// Building sink: also assigns column ids in first-appearance order. Holds the
// Impl rather than the node vector because part nodes may be appended.
class BuildSink : public LeafSink {
 public:
  explicit BuildSink(SchemaRegistry::Impl& impl) : inner_(impl.dicts.size()), present_(impl.dicts.size()), impl_(impl) {}

  void on_leaf(PathId path, Scalar) override {
    impl_.assign_column(path);
    add(path, path);
  }
  void on_null_complex(PathId path) override {
    if (impl_.nodes[path].dict_slot >= 0) {
      return;
    }
    add(path, path | kNullMarker);
  }

  std::vector<std::uint32_t> all;
  std::vector<std::uint32_t> structure;
  std::vector<std::vector<std::uint32_t>> inner_;
  std::vector<bool> present_;

 private:
  void add(PathId path, std::uint32_t key) {
    all.push_back(key);
    const std::uint32_t grouped = impl_.nodes[path].group | (key & kNullMarker);
    const int slot = impl_.nodes[path].leaf_slot;
    if (slot >= 0) {
      inner_[static_cast<std::size_t>(slot)].push_back(grouped);
      present_[static_cast<std::size_t>(slot)] = true;
    } else {
      structure.push_back(grouped);
    }
  }

  SchemaRegistry::Impl& impl_;
};

void sort_unique(std::vector<std::uint32_t>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Dict unions whose value was an empty object still count as present.
void mark_present_dicts(const SchemaRegistry::Impl& impl, const ValueNode& record, std::vector<bool>& present) {
  for (std::size_t s = 0; s < impl.dicts.size(); ++s) {
    const auto& segs = impl.nodes[impl.dicts[s].path].info.path.segments();
    const ValueNode* cur = &record;
    for (const auto& seg : segs) {
      if (cur == nullptr) break;
      if (seg.kind == PathSegment::Kind::Key) {
        cur = cur->find(seg.key);
      } else if (seg.kind == PathSegment::Kind::Index && cur->is_array() && seg.index < cur->as_array().size()) {
        cur = &cur->as_array()[seg.index];
      } else {
        cur = nullptr;
      }
    }
    if (cur != nullptr && cur->is_object()) present[s] = true;
  }
}

}  // namespace

SchemaRegistry::SchemaRegistry() : impl_(std::make_unique<Impl>()) {}
SchemaRegistry::~SchemaRegistry() = default;
SchemaRegistry::SchemaRegistry(SchemaRegistry&&) noexcept = default;
SchemaRegistry& SchemaRegistry::operator=(SchemaRegistry&&) noexcept = default;
SchemaRegistry::SchemaRegistry(const SchemaRegistry& other) : impl_(std::make_unique<Impl>(*other.impl_)) {}
SchemaRegistry& SchemaRegistry::operator=(const SchemaRegistry& other) {
  if (this != &other) impl_ = std::make_unique<Impl>(*other.impl_);
  return *this;
}

const std::vector<SchemaRegistry::Entry>& SchemaRegistry::schemas() const noexcept { return impl_->schemas; }
std::size_t SchemaRegistry::record_count() const noexcept { return impl_->records; }
const ClassifyOptions& SchemaRegistry::options() const noexcept { return impl_->options; }
std::size_t SchemaRegistry::path_count() const noexcept { return impl_->nodes.size(); }
const SchemaRegistry::PathInfo& SchemaRegistry::path(PathId id) const { return impl_->nodes.at(id).info; }

std::optional<PathId> SchemaRegistry::find_path(std::string_view rendered) const {
  auto it = impl_->path_by_rendered.find(std::string(rendered));
  if (it == impl_->path_by_rendered.end()) return std::nullopt;
  return it->second;
}

const std::vector<SchemaRegistry::Column>& SchemaRegistry::columns() const noexcept { return impl_->columns; }

std::optional<ColumnId> SchemaRegistry::find_column(std::string_view name) const {
  auto it = impl_->column_by_name.find(std::string(name));
  if (it == impl_->column_by_name.end()) return std::nullopt;
  return it->second;
}

std::string SchemaRegistry::field_of(ColumnId column) const {
  const auto& info = impl_->nodes[impl_->columns.at(column).path].info;
  const auto& segs = info.path.segments();
  std::size_t keep = 1;
  // Walk ancestors from the root; the first dict union keeps one more key.
  PathId cur = 0;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& node = impl_->nodes[cur];
    PathId next = 0;
    const auto& seg = segs[i];
    if (seg.kind == PathSegment::Kind::Key) next = node.keys.at(seg.key);
    else if (seg.kind == PathSegment::Kind::Index) next = node.indices.at(seg.index);
    else next = node.parts.at(seg.index);
    if (impl_->nodes[next].dict_slot >= 0) {
      keep = std::min(segs.size(), i + 2);
      break;
    }
    cur = next;
  }
  std::vector<PathSegment> prefix(segs.begin(), segs.begin() + static_cast<std::ptrdiff_t>(keep));
  return FieldPath(std::move(prefix)).render();
}

const std::vector<SchemaRegistry::DictUnion>& SchemaRegistry::dict_unions() const noexcept { return impl_->dicts; }
const std::vector<SchemaRegistry::Partition>& SchemaRegistry::partitions() const noexcept { return impl_->partitions; }

void SchemaRegistry::walk(const ValueNode& record, std::size_t max_depth, LeafSink& sink) const {
  Walker<const Impl> walker(*impl_, max_depth, sink);
  walker.record(record);
}

RecordShape SchemaRegistry::analyze(const ValueNode& record, LeafSink* forward, std::size_t max_depth) const {
  RecordShape shape;
  ShapeSink sink(impl_->nodes, impl_->dicts.size(), forward);
  try {
    walk(record, max_depth == 0 ? impl_->options.max_depth : max_depth, sink);
  } catch (const FlattenError& e) {
    shape.error = e.what();
    return shape;
  }
  shape.known = true;
  mark_present_dicts(*impl_, record, sink.present_);
  std::sort(sink.all.begin(), sink.all.end());
  if (auto it = impl_->schema_index.find(sink.all); it != impl_->schema_index.end()) shape.schema = it->second;

  std::vector<int> key;
  if (impl_->dicts.empty()) {
    sort_unique(sink.structure);
    auto it = impl_->structure_index.find(sink.structure);
    if (it == impl_->structure_index.end()) return shape;
    key.push_back(static_cast<int>(it->second));
  } else {
    for (std::size_t s = 0; s < impl_->dicts.size(); ++s) {
      if (!sink.present_[s]) {
        key.push_back(-1);
        continue;
      }
      auto& inner = sink.inner_[s];
      sort_unique(inner);
      auto it = impl_->dict_index[s].find(inner);
      if (it == impl_->dict_index[s].end()) {
        shape.inner = key;
        return shape;
      }
      key.push_back(static_cast<int>(it->second));
    }
    shape.inner = key;
  }
  if (auto it = impl_->partition_index.find(key); it != impl_->partition_index.end()) shape.partition = it->second;
  return shape;
}

std::optional<SchemaFingerprint> SchemaRegistry::fingerprint_of(const ValueNode& record) const {
  ShapeSink sink(impl_->nodes, impl_->dicts.size(), nullptr);
  try {
    walk(record, impl_->options.max_depth, sink);
  } catch (const FlattenError&) {
    return std::nullopt;
  }
  std::sort(sink.all.begin(), sink.all.end());
  return impl_->make_fingerprint(sink.all, 0);
}

SchemaRegistry build_registry(std::span<const ValueNode> records, const ClassifyOptions& options) {
  SchemaRegistry reg;
  auto& impl = *reg.impl_;
  impl.options = options;

  for (const auto& rec : records) {
    if (!rec.is_object()) throw StructureError("record is not an object");
    for (const auto& m : rec.as_object()) impl.observe(impl.key_child(0, m.name), m.value);
  }
  impl.classify_all();

  for (const auto& rec : records) {
    BuildSink sink(impl);
    Walker<SchemaRegistry::Impl> walker(impl, options.max_depth, sink);
    walker.record(rec);
    mark_present_dicts(impl, rec, sink.present_);

    std::sort(sink.all.begin(), sink.all.end());
    std::size_t schema;
    if (auto it = impl.schema_index.find(sink.all); it != impl.schema_index.end()) {
      schema = it->second;
    } else {
      schema = impl.schemas.size();
      impl.schemas.push_back({impl.make_fingerprint(sink.all, 0), 0});
      impl.schema_index.emplace(sink.all, schema);
    }
    ++impl.schemas[schema].count;

    std::vector<int> key;
    if (impl.dicts.empty()) {
      sort_unique(sink.structure);
      auto [it, inserted] = impl.structure_index.try_emplace(sink.structure, impl.structure_index.size());
      key.push_back(static_cast<int>(it->second));
    } else {
      for (std::size_t s = 0; s < impl.dicts.size(); ++s) {
        if (!sink.present_[s]) {
          key.push_back(-1);
          continue;
        }
        auto& inner = sink.inner_[s];
        sort_unique(inner);
        auto& index = impl.dict_index[s];
        std::size_t idx;
        if (auto it = index.find(inner); it != index.end()) {
          idx = it->second;
        } else {
          idx = impl.dicts[s].inner_schemas.size();
          impl.dicts[s].inner_schemas.push_back({impl.make_fingerprint(inner, impl.dicts[s].path), 0});
          index.emplace(inner, idx);
        }
        ++impl.dicts[s].inner_schemas[idx].count;
        key.push_back(static_cast<int>(idx));
      }
    }
    auto [it, inserted] = impl.partition_index.try_emplace(key, impl.partitions.size());
    if (inserted) impl.partitions.push_back({key, schema, 0});
    ++impl.partitions[it->second].count;
    ++impl.records;
  }
  return reg;
}

SchemaFingerprint fingerprint(const ValueNode& record, const ClassifyOptions& options) {
  const auto reg = build_registry(std::span<const ValueNode>(&record, 1), options);
  return reg.schemas().front().fingerprint;
}

}  // namespace logflat
