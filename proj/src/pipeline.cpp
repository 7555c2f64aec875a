#include "logflat/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "logflat/error.hpp"
#include "logflat/forest.hpp"
#include "logflat/frame_io.hpp"
#include "logflat/frame_ops.hpp"
#include "logflat/log.hpp"

namespace logflat {

using ojson = nlohmann::ordered_json;

OutputFormat parse_output_format(std::string_view text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "jsonl") return OutputFormat::Jsonl;
  throw ConfigError("unknown output format '" + std::string(text) + "' (expected csv or jsonl)");
}

std::string_view to_string(OutputFormat format) noexcept { return format == OutputFormat::Csv ? "csv" : "jsonl"; }

void SelectConfig::validate() const {
  if (max_categories < 2) throw ConfigError("max_categories must be at least 2");
  if (!(pearson_threshold > 0.0 && pearson_threshold <= 1.0)) {
    throw ConfigError("pearson_threshold must lie in (0, 1]");
  }
  if (n_trees < 1) throw ConfigError("n_trees must be at least 1");
  if (tree_max_depth < 1) throw ConfigError("tree_max_depth must be at least 1");
  if (!(name_threshold >= 0.0 && name_threshold <= 1.0)) throw ConfigError("name_threshold must lie in [0, 1]");
  if (!(value_threshold >= 0.0 && value_threshold <= 1.0)) throw ConfigError("value_threshold must lie in [0, 1]");
  if (sample_limit < 1) throw ConfigError("sample_limit must be at least 1");
  if (chi && !label) throw ConfigError("chi-square selection needs a label column");
}

// --- config ----------------------------------------------------------------

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "input",          "mode",           "error_policy",   "max_depth",       "workers",
      "null_fill",      "dict_paths",     "delimiters",     "candidate_delimiters",
      "time_formats",   "time_columns",   "strict_timestamps", "out",            "format",
      "report",         "pearson_threshold", "chi",         "label",           "seed",
      "n_trees",        "tree_max_depth", "max_categories", "pseudo_labels",   "accept_merges",
      "index_scale",    "name_threshold", "value_threshold", "sample_limit",   "abbreviations"};
  return keys;
}

std::string type_error(const std::string& key, const char* want) {
  return "config key '" + key + "' must be " + want;
}

std::string get_string(const nlohmann::json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(type_error(key, "a string"));
  return v.get<std::string>();
}

bool get_bool(const nlohmann::json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError(type_error(key, "true or false"));
  return v.get<bool>();
}

double get_number(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(type_error(key, "a number"));
  return v.get<double>();
}

std::uint64_t get_count(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_unsigned()) throw ConfigError(type_error(key, "a non-negative integer"));
  return v.get<std::uint64_t>();
}

std::vector<std::string> get_strings(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array()) throw ConfigError(type_error(key, "a string or a list of strings"));
  std::vector<std::string> out;
  for (const auto& e : v) out.push_back(get_string(e, key));
  return out;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  PipelineConfig c;
  for (const auto& [key, v] : doc.items()) {
    if (!known_keys().contains(key)) throw ConfigError("unknown config key '" + key + "'");
    if (key == "input") c.inputs = get_strings(v, key);
    else if (key == "mode") c.flatten.mode = parse_flatten_mode(get_string(v, key));
    else if (key == "error_policy") c.error_policy = parse_error_policy(get_string(v, key));
    else if (key == "max_depth") c.flatten.max_depth = c.flatten.classify.max_depth = get_count(v, key);
    else if (key == "workers") c.workers = get_count(v, key);
    else if (key == "null_fill") c.flatten.null_fill = NullFill::parse(get_string(v, key));
    else if (key == "dict_paths") {
      const auto paths = get_strings(v, key);
      c.flatten.classify.dict_paths = {paths.begin(), paths.end()};
    } else if (key == "delimiters") {
      if (!v.is_object()) throw ConfigError(type_error(key, "an object of path -> delimiter"));
      for (const auto& [path, d] : v.items()) {
        if (d.is_null()) {
          c.flatten.classify.delimiter_overrides[path] = std::nullopt;
          continue;
        }
        const std::string s = get_string(d, key + "." + path);
        if (s.size() != 1) throw ConfigError("delimiter for '" + path + "' must be one character or null");
        c.flatten.classify.delimiter_overrides[path] = s[0];
      }
    } else if (key == "candidate_delimiters") c.flatten.classify.candidate_delimiters = get_string(v, key);
    else if (key == "time_formats") c.time_formats = get_strings(v, key);
    else if (key == "time_columns") c.time_columns = get_strings(v, key);
    else if (key == "strict_timestamps") c.strict_timestamps = get_bool(v, key);
    else if (key == "out") c.out_dir = get_string(v, key);
    else if (key == "format") c.format = parse_output_format(get_string(v, key));
    else if (key == "report") c.report_path = get_string(v, key);
    else if (key == "pearson_threshold") c.select.pearson_threshold = get_number(v, key);
    else if (key == "chi") c.select.chi = ChiSelector::parse(get_string(v, key));
    else if (key == "label") c.select.label = get_string(v, key);
    else if (key == "seed") c.select.seed = get_count(v, key);
    else if (key == "n_trees") c.select.n_trees = get_count(v, key);
    else if (key == "tree_max_depth") c.select.tree_max_depth = get_count(v, key);
    else if (key == "max_categories") c.select.max_categories = get_count(v, key);
    else if (key == "pseudo_labels") c.select.pseudo_labels = get_bool(v, key);
    else if (key == "accept_merges") c.select.accept_merges = get_bool(v, key);
    else if (key == "index_scale") c.select.index_scale = get_bool(v, key);
    else if (key == "name_threshold") c.select.name_threshold = get_number(v, key);
    else if (key == "value_threshold") c.select.value_threshold = get_number(v, key);
    else if (key == "sample_limit") c.select.sample_limit = c.flatten.classify.sample_limit = get_count(v, key);
    else if (key == "abbreviations") c.select.abbreviations = get_string(v, key);
  }
  return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(doc);
}

ojson PipelineConfig::to_json() const {
  ojson j;
  j["input"] = inputs;
  j["mode"] = std::string(to_string(flatten.mode));
  j["error_policy"] = std::string(to_string(error_policy));
  j["max_depth"] = flatten.max_depth;
  j["workers"] = workers;
  j["null_fill"] = flatten.null_fill.describe();
  j["dict_paths"] = std::vector<std::string>(flatten.classify.dict_paths.begin(), flatten.classify.dict_paths.end());
  ojson delims = ojson::object();
  for (const auto& [path, d] : flatten.classify.delimiter_overrides) {
    delims[path] = d ? ojson(std::string(1, *d)) : ojson(nullptr);
  }
  j["delimiters"] = delims;
  j["candidate_delimiters"] = flatten.classify.candidate_delimiters;
  j["time_formats"] = time_formats;
  j["time_columns"] = time_columns;
  j["strict_timestamps"] = strict_timestamps;
  j["out"] = out_dir ? ojson(*out_dir) : ojson(nullptr);
  j["format"] = std::string(to_string(format));
  j["report"] = report_path ? ojson(*report_path) : ojson(nullptr);
  j["pearson_threshold"] = select.pearson_threshold;
  j["chi"] = select.chi ? ojson(select.chi->describe()) : ojson(nullptr);
  j["label"] = select.label ? ojson(*select.label) : ojson(nullptr);
  j["seed"] = select.seed;
  j["n_trees"] = select.n_trees;
  j["tree_max_depth"] = select.tree_max_depth;
  j["max_categories"] = select.max_categories;
  j["pseudo_labels"] = select.pseudo_labels;
  j["accept_merges"] = select.accept_merges;
  j["index_scale"] = select.index_scale;
  j["name_threshold"] = select.name_threshold;
  j["value_threshold"] = select.value_threshold;
  j["sample_limit"] = select.sample_limit;
  j["abbreviations"] = select.abbreviations ? ojson(*select.abbreviations) : ojson(nullptr);
  return j;
}

void PipelineConfig::validate() const {
  if (inputs.empty()) throw ConfigError("no input file given");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  flatten.validate();
  select.validate();
  for (const auto& f : time_formats) TimeFormat::parse(f);
}

// --- run -------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

class Timings {
 public:
  template <typename F>
  auto stage(const std::string& name, F&& fn) {
    const auto start = Clock::now();
    struct Record {
      Timings& t;
      const std::string& name;
      Clock::time_point start;
      ~Record() {
        const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        t.json_[name] = std::round(ms * 1000.0) / 1000.0;
      }
    } record{*this, name, start};
    return fn();
  }
  const ojson& json() const { return json_; }

 private:
  ojson json_ = ojson::object();
};

std::vector<std::string> without(const std::vector<std::string>& names, const std::set<std::string>& drop) {
  std::vector<std::string> out;
  for (const auto& n : names) {
    if (!drop.contains(n)) out.push_back(n);
  }
  return out;
}

// Per-frame fate of every column present right after flattening. Columns
// created later (time windows, merged names) are tracked as derived.
class ColumnLedger {
 public:
  explicit ColumnLedger(const Frame& frame) {
    for (const auto& name : frame.column_names()) {
      order_.push_back(name);
      origin_[name] = name;
    }
  }

  void converted(const TimeConversion& conv) {
    auto it = origin_.find(conv.source);
    if (it == origin_.end()) return;
    const std::string original = it->second;
    origin_.erase(it);
    origin_[conv.timestamp_column] = original;
    for (const auto& w : conv.window_columns) derived_[w] = {{"from", original}, {"stage", "time_conversion"}};
  }

  void dropped(const std::string& column, const std::string& stage, const std::string& reason) {
    auto it = origin_.find(column);
    if (it != origin_.end()) {
      ojson f;
      f["status"] = "dropped";
      f["stage"] = stage;
      f["reason"] = reason;
      if (column != it->second) f["as"] = column;
      fates_[it->second] = std::move(f);
      origin_.erase(it);
      return;
    }
    auto d = derived_.find(column);
    if (d != derived_.end()) {
      d->second["status"] = "dropped";
      d->second["dropped_by"] = stage;
      d->second["reason"] = reason;
    }
  }

  // `present` are the sources found in this frame before coalescing.
  void merged(const std::vector<std::string>& present, const std::string& canonical) {
    bool canonical_is_source = false;
    for (const auto& s : present) {
      if (s == canonical) {
        canonical_is_source = true;
        continue;
      }
      auto it = origin_.find(s);
      if (it != origin_.end()) {
        fates_[it->second] = ojson{{"status", "merged"}, {"stage", "namespace_merge"}, {"into", canonical}};
        origin_.erase(it);
      } else {
        derived_.erase(s);
      }
    }
    if (!canonical_is_source) derived_[canonical] = {{"from", present}, {"stage", "namespace_merge"}};
  }

  ojson json(const Frame& final_frame) const {
    ojson cols = ojson::object();
    for (const auto& name : order_) {
      auto f = fates_.find(name);
      if (f != fates_.end()) {
        cols[name] = f->second;
        continue;
      }
      for (const auto& [current, original] : origin_) {
        if (original != name) continue;
        ojson k{{"status", "kept"}};
        if (current != name) k["as"] = current;
        cols[name] = std::move(k);
      }
      if (!cols.contains(name)) cols[name] = ojson{{"status", "missing"}};
    }
    ojson derived = ojson::object();
    for (const auto& name : final_frame.column_names()) {
      auto d = derived_.find(name);
      if (d != derived_.end()) derived[name] = d->second;
    }
    for (const auto& [name, info] : derived_) {
      if (!derived.contains(name)) derived[name] = info;
    }
    return ojson{{"columns", cols}, {"derived", derived}};
  }

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::string> origin_;  // current name -> post-flatten name
  std::map<std::string, ojson> fates_;
  std::map<std::string, ojson> derived_;
};

ojson dropped_json(const std::vector<DroppedColumn>& dropped) {
  ojson a = ojson::array();
  for (const auto& d : dropped) a.push_back({{"column", d.column}, {"reason", d.reason}});
  return a;
}

double rounded(double v) {
  if (!std::isfinite(v)) return v;
  return std::round(v * 1e12) / 1e12;
}

// Collects, per registry partition, the columns its records fill, plus a
// bounded sample of distinct values per column.
class StructureSink final : public LeafSink {
 public:
  StructureSink(const SchemaRegistry& registry, std::vector<std::set<std::string>>* samples, std::size_t limit)
      : registry_(registry), samples_(samples), limit_(limit) {}

  void on_leaf(PathId path, Scalar value) override {
    const auto& col = registry_.path(path).column;
    if (!col) return;
    used.push_back(*col);
    if (samples_ == nullptr || std::holds_alternative<std::monostate>(value)) return;
    auto& s = (*samples_)[*col];
    if (s.size() < limit_) s.insert(render_scalar(value));
  }

  std::vector<ColumnId> used;

 private:
  const SchemaRegistry& registry_;
  std::vector<std::set<std::string>>* samples_;
  std::size_t limit_;
};

struct StructureSummary {
  std::vector<std::vector<ColumnId>> partition_columns;  // sorted
  std::vector<std::set<std::string>> samples;            // per registry column
  std::size_t unmatched = 0;
};

StructureSummary summarize_structure(std::span<const ValueNode> records, const SchemaRegistry& registry,
                                     std::size_t max_depth, bool want_samples, std::size_t limit) {
  StructureSummary out;
  const std::size_t n_parts = registry.partitions().size();
  std::vector<std::vector<bool>> used(n_parts, std::vector<bool>(registry.columns().size(), false));
  if (want_samples) out.samples.resize(registry.columns().size());
  for (const auto& rec : records) {
    StructureSink sink(registry, want_samples ? &out.samples : nullptr, limit);
    const RecordShape shape = registry.analyze(rec, &sink, max_depth);
    if (!shape.known || !shape.partition) {
      ++out.unmatched;
      continue;
    }
    for (auto c : sink.used) used[*shape.partition][c] = true;
  }
  out.partition_columns.resize(n_parts);
  for (std::size_t p = 0; p < n_parts; ++p) {
    for (ColumnId c = 0; c < used[p].size(); ++c) {
      if (used[p][c]) out.partition_columns[p].push_back(c);
    }
  }
  return out;
}

std::vector<std::string> fields_of(const SchemaRegistry& registry, std::span<const ColumnId> columns) {
  std::set<std::string> fields;
  for (auto c : columns) fields.insert(registry.field_of(c));
  return {fields.begin(), fields.end()};
}

std::vector<ColumnId> registry_columns_of(const SchemaRegistry& registry, const std::vector<std::string>& names) {
  std::vector<ColumnId> out;
  for (const auto& n : names) {
    if (auto id = registry.find_column(n)) out.push_back(*id);
  }
  return out;
}

ojson registry_json(const SchemaRegistry& registry, const StructureSummary& structure) {
  ojson j;
  j["records"] = registry.record_count();
  j["schema_count"] = registry.partitions().size();
  ojson schemas = ojson::array();
  for (std::size_t p = 0; p < registry.partitions().size(); ++p) {
    const auto& part = registry.partitions()[p];
    const auto& cols = structure.partition_columns[p];
    std::vector<SchemaFingerprint::Entry> entries;
    std::vector<std::string> names;
    for (auto c : cols) {
      const auto& col = registry.columns()[c];
      entries.push_back({col.name, col.kind});
      names.push_back(col.name);
    }
    const auto fp = SchemaFingerprint::from_entries(std::move(entries));
    ojson s;
    s["index"] = p;
    s["digest"] = fp.digest;
    s["count"] = part.count;
    s["inner"] = part.inner;
    s["fields"] = fields_of(registry, cols);
    s["columns"] = names;
    schemas.push_back(std::move(s));
  }
  j["schemas"] = std::move(schemas);

  ojson fps = ojson::array();
  for (const auto& e : registry.schemas()) {
    fps.push_back({{"digest", e.fingerprint.digest}, {"count", e.count}, {"entries", e.fingerprint.entries.size()}});
  }
  j["fingerprint_count"] = registry.schemas().size();
  j["fingerprints"] = std::move(fps);

  ojson unions = ojson::array();
  for (const auto& u : registry.dict_unions()) {
    ojson inner = ojson::array();
    for (const auto& e : u.inner_schemas) {
      std::vector<std::string> paths;
      for (const auto& entry : e.fingerprint.entries) paths.push_back(entry.path);
      inner.push_back({{"digest", e.fingerprint.digest}, {"count", e.count}, {"entries", paths}});
    }
    unions.push_back({{"path", registry.path(u.path).rendered}, {"inner_schemas", std::move(inner)}});
  }
  j["dict_unions"] = std::move(unions);

  ojson classes = ojson::object();
  for (PathId p = 1; p < registry.path_count(); ++p) {
    const auto& info = registry.path(p);
    if (info.cls.is_complex()) classes[info.rendered] = to_string(info.cls);
  }
  j["classifications"] = std::move(classes);
  j["unmatched_records"] = structure.unmatched;
  return j;
}

ojson columns_json(const SchemaRegistry& registry) {
  ojson j = ojson::object();
  for (const auto& col : registry.columns()) {
    const auto id = *registry.find_column(col.name);
    j[col.name] = {{"path", registry.path(col.path).rendered},
                   {"field", registry.field_of(id)},
                   {"kind", std::string(to_string(col.kind))}};
  }
  return j;
}

ojson widths_json(const SchemaRegistry& registry, const StructureSummary& structure) {
  ojson j;
  std::vector<ColumnId> all(registry.columns().size());
  for (ColumnId c = 0; c < all.size(); ++c) all[c] = c;
  j["global_columns"] = all.size();
  j["global_fields"] = fields_of(registry, all).size();
  ojson per = ojson::array();
  std::optional<std::size_t> min_cols, max_cols, min_fields, max_fields;
  for (std::size_t p = 0; p < structure.partition_columns.size(); ++p) {
    const auto& cols = structure.partition_columns[p];
    const std::size_t nf = fields_of(registry, cols).size();
    per.push_back({{"schema", p}, {"columns", cols.size()}, {"fields", nf}});
    min_cols = std::min(min_cols.value_or(cols.size()), cols.size());
    max_cols = std::max(max_cols.value_or(0), cols.size());
    min_fields = std::min(min_fields.value_or(nf), nf);
    max_fields = std::max(max_fields.value_or(0), nf);
  }
  j["min_local_columns"] = min_cols.value_or(0);
  j["max_local_columns"] = max_cols.value_or(0);
  j["min_local_fields"] = min_fields.value_or(0);
  j["max_local_fields"] = max_fields.value_or(0);
  j["per_schema"] = std::move(per);
  return j;
}

ojson candidates_json(const std::vector<MergeCandidate>& candidates) {
  ojson a = ojson::array();
  for (const auto& c : candidates) {
    a.push_back({{"left", c.left},
                 {"right", c.right},
                 {"name_score", rounded(c.name_score)},
                 {"value_score", rounded(c.value_score)},
                 {"canonical", c.canonical}});
  }
  return a;
}

// Numeric view for correlation: text becomes its category index and
// timestamps their nanosecond count.
Frame numeric_view(const Frame& frame, const std::vector<std::string>& columns) {
  std::vector<Column> cols;
  for (const auto& name : columns) {
    const Column& col = frame.column(name);
    if (col.kind() == ColumnKind::Text) {
      Frame one("view", {col});
      cols.push_back(string_index(one, name).first.column(0));
    } else if (col.kind() == ColumnKind::Timestamp) {
      ColumnBuilder b(name, ColumnKind::Int, col.size());
      for (std::size_t r = 0; r < col.size(); ++r) {
        if (col.is_null(r)) b.append_null();
        else b.append_int(col.int_at(r));
      }
      cols.push_back(std::move(b).build());
    } else {
      cols.push_back(col);
    }
  }
  return Frame(frame.name(), std::move(cols));
}

ojson importance_json(const ImportanceResult& r) {
  ojson imp = ojson::object();
  for (std::size_t i = 0; i < r.features.size(); ++i) imp[r.features[i]] = rounded(r.importance[i]);
  return ojson{{"label", r.label}, {"trees", r.trees.size()}, {"importance", imp}};
}

void write_frame(const Frame& frame, const std::filesystem::path& path, OutputFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  if (format == OutputFormat::Csv) write_csv(frame, out);
  else write_jsonl(frame, out);
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

// A column is single-valued when every frame carrying it holds at most one
// distinct value and those values agree: local frames partition one corpus,
// so a column constant inside one partition can still tell partitions apart.
std::map<std::string, std::string> corpus_single_valued(const std::vector<Frame>& frames,
                                                        const std::set<std::string>& skip) {
  std::map<std::string, std::set<std::string>> seen;
  std::vector<std::string> order;
  for (const auto& f : frames) {
    for (std::size_t c = 0; c < f.column_count(); ++c) {
      const Column& col = f.column(c);
      if (skip.contains(col.name())) continue;
      auto [it, inserted] = seen.try_emplace(col.name());
      if (inserted) order.push_back(col.name());
      for (std::size_t r = 0; r < col.size() && it->second.size() < 2; ++r) {
        if (!col.is_null(r)) it->second.insert(col.render(r));
      }
    }
  }
  std::map<std::string, std::string> out;
  for (const auto& name : order) {
    const auto& values = seen[name];
    if (values.size() <= 1) out[name] = values.empty() ? "all_null" : "single_valued";
  }
  return out;
}

// Columns that share their source field with another column (list slots,
// split parts). Namespace merging works on whole attributes, so these stay out.
std::set<std::string> multi_column_fields(const SchemaRegistry& registry) {
  std::map<std::string, std::vector<std::string>> by_field;
  for (ColumnId c = 0; c < registry.columns().size(); ++c) {
    by_field[registry.field_of(c)].push_back(registry.columns()[c].name);
  }
  std::set<std::string> out;
  for (const auto& [field, cols] : by_field) {
    if (cols.size() > 1) out.insert(cols.begin(), cols.end());
  }
  return out;
}

Corpus read_inputs(const PipelineConfig& config) {
  IngestOptions opts;
  opts.max_depth = config.flatten.max_depth;
  opts.policy = config.error_policy;
  opts.workers = static_cast<unsigned>(config.workers);
  Corpus all;
  for (const auto& path : config.inputs) {
    Corpus c = read_corpus_file(path, opts);
    for (auto& r : c.records) all.records.push_back(std::move(r));
    all.line_numbers.insert(all.line_numbers.end(), c.line_numbers.begin(), c.line_numbers.end());
    all.stats.records_ok += c.stats.records_ok;
    all.stats.records_failed += c.stats.records_failed;
    for (auto& f : c.stats.failed_lines) {
      f.error = path + ": " + f.error;
      all.stats.failed_lines.push_back(std::move(f));
    }
  }
  if (all.records.empty()) throw InputError("input contains no records");
  return all;
}

ojson ingest_json(const IngestStats& stats) {
  ojson failed = ojson::array();
  constexpr std::size_t kShown = 100;
  for (std::size_t i = 0; i < stats.failed_lines.size() && i < kShown; ++i) {
    failed.push_back({{"line", stats.failed_lines[i].line_number}, {"error", stats.failed_lines[i].error}});
  }
  return ojson{{"records_ok", stats.records_ok}, {"records_failed", stats.records_failed}, {"failed_lines", failed}};
}

}  // namespace

RunResult run(const PipelineConfig& config, RunKind kind) {
  config.validate();
  FlattenConfig fcfg = config.flatten;
  fcfg.workers = config.workers;
  TimeParseOptions time_opts;
  time_opts.strict = config.strict_timestamps;
  if (!config.time_formats.empty()) {
    time_opts.formats.clear();
    for (const auto& f : config.time_formats) time_opts.formats.push_back(TimeFormat::parse(f));
    fcfg.classify.time_formats = time_opts.formats;
  }
  MergeOptions merge_opts;
  merge_opts.name_threshold = config.select.name_threshold;
  merge_opts.value_threshold = config.select.value_threshold;
  if (config.select.abbreviations) merge_opts.abbreviations.merge(AbbreviationTable::load(*config.select.abbreviations));

  Timings timings;
  RunResult result;
  ojson& report = result.report;
  report["tool"] = {{"name", "logflat"}, {"version", std::string(kToolVersion)}};
  static constexpr const char* kKinds[] = {"inspect", "flatten", "select", "pipeline"};
  report["command"] = kKinds[static_cast<int>(kind)];
  report["config"] = config.to_json();

  const Corpus corpus = timings.stage("ingest", [&] { return read_inputs(config); });
  report["ingest"] = ingest_json(corpus.stats);

  const SchemaRegistry registry =
      timings.stage("registry", [&] { return build_registry(corpus.records, fcfg.classify); });
  const bool inspecting = kind == RunKind::Inspect;
  const StructureSummary structure = timings.stage("structure", [&] {
    return summarize_structure(corpus.records, registry, fcfg.max_depth, inspecting, config.select.sample_limit);
  });
  report["registry"] = registry_json(registry, structure);
  report["rename_map"] = columns_json(registry);
  report["widths"] = widths_json(registry, structure);

  if (inspecting) {
    std::vector<ColumnSample> samples;
    const auto skip = multi_column_fields(registry);
    for (ColumnId c = 0; c < registry.columns().size(); ++c) {
      if (skip.contains(registry.columns()[c].name)) continue;
      samples.push_back({registry.columns()[c].name, structure.samples[c]});
    }
    const auto candidates =
        timings.stage("namespace_merge", [&] { return propose_namespace_merges(samples, merge_opts); });
    report["merge_candidates"] = candidates_json(candidates);
    report["timings_ms"] = timings.json();
    return result;
  }

  // Flatten.
  std::vector<Frame> frames;
  std::vector<std::optional<std::size_t>> frame_partition;
  Frame rejected;
  std::size_t rejected_count = 0;
  timings.stage("flatten", [&] {
    if (fcfg.mode == FlattenMode::Local) {
      LocalFrames local = partition_by_schema(corpus.records, registry, fcfg);
      frames = std::move(local.frames);
      for (auto p : local.partition) frame_partition.push_back(p);
      rejected = std::move(local.rejected);
      rejected_count = local.rejected_count;
    } else {
      frames.push_back(unify_global(corpus.records, registry, fcfg));
      frame_partition.push_back(std::nullopt);
    }
    return 0;
  });

  std::set<std::string> protected_cols{std::string(SchemaRegistry::kSchemaTypeColumn)};
  if (config.select.label) protected_cols.insert(*config.select.label);

  std::vector<ColumnLedger> ledgers;
  std::vector<ojson> frame_reports;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    ledgers.emplace_back(frames[i]);
    ojson fr;
    fr["name"] = frames[i].name();
    fr["schema"] = frame_partition[i] ? ojson(*frame_partition[i]) : ojson(nullptr);
    fr["rows"] = frames[i].row_count();
    const auto names = frames[i].column_names();
    fr["columns_after_flatten"] = names;
    fr["fields"] = fields_of(registry, registry_columns_of(registry, names));
    frame_reports.push_back(std::move(fr));
  }
  report["rejected_records"] = rejected_count;

  // Time conversion.
  std::set<std::string> window_cols;
  timings.stage("time_conversion", [&] {
    for (std::size_t i = 0; i < frames.size(); ++i) {
      auto [converted, conversions] = convert_time_columns(frames[i], time_opts, config.time_columns);
      ojson a = ojson::array();
      for (const auto& conv : conversions) {
        ledgers[i].converted(conv);
        window_cols.insert(conv.window_columns.begin(), conv.window_columns.end());
        a.push_back({{"source", conv.source},
                     {"timestamp_column", conv.timestamp_column},
                     {"window_columns", conv.window_columns},
                     {"unparsed", conv.unparsed}});
      }
      frames[i] = std::move(converted);
      frame_reports[i]["time_conversions"] = std::move(a);
    }
    return 0;
  });

  const bool selecting = kind == RunKind::Select || kind == RunKind::Pipeline;
  ojson selection;
  if (selecting) {
    // Single-valued pruning.
    timings.stage("single_value", [&] {
      const auto single = corpus_single_valued(frames, protected_cols);
      for (std::size_t i = 0; i < frames.size(); ++i) {
        std::vector<DroppedColumn> dropped;
        std::vector<std::string> names;
        for (const auto& name : frames[i].column_names()) {
          auto it = single.find(name);
          if (it == single.end()) continue;
          ledgers[i].dropped(name, "single_value", it->second);
          dropped.push_back({name, it->second});
          names.push_back(name);
        }
        frames[i] = frames[i].without_columns(names);
        frame_reports[i]["single_value"] = dropped_json(dropped);
      }
      return 0;
    });

    // Namespace merge across frames.
    timings.stage("namespace_merge", [&] {
      std::set<std::string> skip = multi_column_fields(registry);
      skip.insert(protected_cols.begin(), protected_cols.end());
      skip.insert(window_cols.begin(), window_cols.end());
      const auto samples = sample_columns(frames, config.select.sample_limit, skip);
      const auto candidates = propose_namespace_merges(samples, merge_opts);
      ojson m;
      m["candidates"] = candidates_json(candidates);
      m["applied"] = config.select.accept_merges && !candidates.empty();
      ojson applied = ojson::array();
      if (config.select.accept_merges && !candidates.empty()) {
        std::vector<std::vector<std::string>> before;
        for (const auto& f : frames) before.push_back(f.column_names());
        MergeOutcome outcome = apply_merges(frames, candidates, merge_opts.abbreviations);
        for (std::size_t i = 0; i < frames.size(); ++i) {
          const auto after = outcome.frames[i].column_names();
          for (const auto& merge : outcome.merges) {
            std::vector<std::string> present;
            for (const auto& s : merge.sources) {
              if (std::find(before[i].begin(), before[i].end(), s) != before[i].end()) present.push_back(s);
            }
            const bool done = !present.empty() &&
                              std::find(after.begin(), after.end(), merge.canonical) != after.end() &&
                              std::none_of(present.begin(), present.end(), [&](const std::string& s) {
                                return s != merge.canonical &&
                                       std::find(after.begin(), after.end(), s) != after.end();
                              });
            if (done) ledgers[i].merged(present, merge.canonical);
          }
        }
        frames = std::move(outcome.frames);
        for (const auto& merge : outcome.merges) {
          applied.push_back(
              {{"canonical", merge.canonical}, {"sources", merge.sources}, {"conflicts", merge.conflicts}});
        }
      }
      m["merges"] = std::move(applied);
      selection["namespace_merge"] = std::move(m);
      return 0;
    });

    // Pearson pruning over a numeric view.
    timings.stage("pearson", [&] {
      for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto candidates = without(frames[i].column_names(), protected_cols);
        ojson p;
        if (candidates.size() >= 2) {
          const Frame view = numeric_view(frames[i], candidates);
          const auto matrix = pearson_matrix(view, candidates, config.workers);
          const auto prune = prune_by_correlation(matrix, config.select.pearson_threshold);
          std::vector<std::string> names;
          for (const auto& d : prune.dropped) {
            ledgers[i].dropped(d.column, "pearson", d.reason);
            names.push_back(d.column);
          }
          frames[i] = frames[i].without_columns(names);
          ojson pairs = ojson::array();
          for (const auto& pr : prune.pairs) pairs.push_back({{"a", pr.a}, {"b", pr.b}, {"r", rounded(pr.r)}});
          p["pairs"] = std::move(pairs);
          p["dropped"] = dropped_json(prune.dropped);
        } else {
          p["pairs"] = ojson::array();
          p["dropped"] = ojson::array();
        }
        frame_reports[i]["pearson"] = std::move(p);
      }
      return 0;
    });

    // Labeled chi-square selection and forest importance.
    if (config.select.label) {
      const std::string& label = *config.select.label;
      const ChiSelector selector = config.select.chi.value_or(ChiSelector{});
      TreeOptions topts;
      topts.n_trees = config.select.n_trees;
      topts.max_depth = config.select.tree_max_depth;
      topts.bootstrap = config.select.n_trees > 1;
      topts.seed = config.select.seed;
      topts.workers = config.workers;
      timings.stage("chi_square", [&] {
        for (std::size_t i = 0; i < frames.size(); ++i) {
          if (!frames[i].has_column(label)) {
            frame_reports[i]["chi_square"] = ojson{{"skipped", "label column absent"}};
            continue;
          }
          if (categories_of(frames[i].column(label)).size() < 2) {
            frame_reports[i]["chi_square"] = ojson{{"skipped", "label is constant"}};
            continue;
          }
          const auto features = without(frames[i].column_names(), protected_cols);
          const auto chi = chi_square_select(frames[i], features, label, selector);
          std::set<std::string> keep(chi.selected.begin(), chi.selected.end());
          std::vector<std::string> names;
          for (const auto& f : features) {
            if (keep.contains(f)) continue;
            ledgers[i].dropped(f, "chi_square", "not_selected_chi");
            names.push_back(f);
          }
          frames[i] = frames[i].without_columns(names);
          ojson table = ojson::array();
          for (const auto& f : chi.features) {
            table.push_back({{"feature", f.name},
                             {"statistic", rounded(f.statistic)},
                             {"dof", f.dof},
                             {"p_value", rounded(f.p_value)},
                             {"rows", f.rows}});
          }
          frame_reports[i]["chi_square"] =
              ojson{{"selector", selector.describe()}, {"table", table}, {"selected", chi.selected}};
        }
        return 0;
      });
      timings.stage("importance", [&] {
        for (std::size_t i = 0; i < frames.size(); ++i) {
          if (!frames[i].has_column(label) || categories_of(frames[i].column(label)).size() < 2) continue;
          const auto features = without(frames[i].column_names(), protected_cols);
          if (features.empty()) {
            frame_reports[i]["importance"] = ojson{{"skipped", "no features left"}};
            continue;
          }
          frame_reports[i]["importance"] = importance_json(tree_importance(frames[i], features, label, topts));
        }
        return 0;
      });
    }

    if (config.select.pseudo_labels) {
      TreeOptions topts;
      topts.n_trees = config.select.n_trees;
      topts.max_depth = config.select.tree_max_depth;
      topts.bootstrap = config.select.n_trees > 1;
      topts.seed = config.select.seed;
      topts.workers = config.workers;
      timings.stage("pseudo_label_importance", [&] {
        for (std::size_t i = 0; i < frames.size(); ++i) {
          const auto columns = without(frames[i].column_names(), protected_cols);
          ojson a = ojson::array();
          if (columns.size() >= 2) {
            for (const auto& r : pseudo_label_importance(frames[i], columns, config.select.max_categories, topts)) {
              a.push_back(importance_json(r));
            }
          }
          frame_reports[i]["pseudo_label_importance"] = std::move(a);
        }
        return 0;
      });
    }

    // Index and scale for output.
    if (config.select.index_scale) {
      timings.stage("index_scale", [&] {
        for (std::size_t i = 0; i < frames.size(); ++i) {
          ojson dicts = ojson::object();
          for (const auto& name : without(frames[i].column_names(), protected_cols)) {
            const Column& col = frames[i].column(name);
            if (col.kind() == ColumnKind::Text) {
              auto [indexed, dict] = string_index(frames[i], name);
              frames[i] = std::move(indexed);
              dicts[name] = dict.categories;
            }
            const Column& now = frames[i].column(name);
            if (is_numeric(now.kind()) && now.null_count() < now.size()) frames[i] = zscale(frames[i], name);
          }
          frame_reports[i]["index_dictionaries"] = std::move(dicts);
        }
        return 0;
      });
    }
  }

  ojson frames_json = ojson::array();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    ojson fr = std::move(frame_reports[i]);
    fr["final_columns"] = frames[i].column_names();
    const ojson fates = ledgers[i].json(frames[i]);
    fr["column_fates"] = fates["columns"];
    fr["derived_columns"] = fates["derived"];
    frames_json.push_back(std::move(fr));
  }
  report["frames"] = std::move(frames_json);
  if (selecting) report["selection"] = std::move(selection);

  if (config.out_dir) {
    timings.stage("write", [&] {
      const std::filesystem::path dir(*config.out_dir);
      std::error_code ec;
      std::filesystem::create_directories(dir, ec);
      if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
      const std::string ext = config.format == OutputFormat::Csv ? ".csv" : ".jsonl";
      for (const auto& f : frames) {
        const auto path = dir / (f.name() + ext);
        write_frame(f, path, config.format);
        result.written.push_back(path.string());
      }
      if (rejected_count > 0) {
        const auto path = dir / ("rejected" + ext);
        write_frame(rejected, path, config.format);
        result.written.push_back(path.string());
      }
      return 0;
    });
  }
  report["written"] = result.written;
  report["timings_ms"] = timings.json();
  result.frames = std::move(frames);
  return result;
}

}  // namespace logflat
