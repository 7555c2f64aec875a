#include "logflat/ingest.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <unordered_set>

#include <json.hpp>

#include "logflat/error.hpp"
#include "logflat/parallel.hpp"

namespace logflat {

namespace {

constexpr std::int64_t kExactIntLimit = std::int64_t{1} << 53;

// SAX handler building a ValueNode directly, so depth and duplicate keys are
// caught during the parse instead of after materializing an nlohmann tree.
class TreeBuilder {
 public:
  using json = nlohmann::json;
  using number_integer_t = json::number_integer_t;
  using number_unsigned_t = json::number_unsigned_t;
  using number_float_t = json::number_float_t;
  using string_t = json::string_t;
  using binary_t = json::binary_t;

  explicit TreeBuilder(std::size_t max_depth) : max_depth_(max_depth) {}

  bool null() { return put(ValueNode{}); }
  bool boolean(bool b) { return put(ValueNode{b}); }
  bool number_integer(number_integer_t v) {
    if (v > -kExactIntLimit && v < kExactIntLimit) return put(ValueNode{static_cast<std::int64_t>(v)});
    return put(ValueNode{static_cast<double>(v)});
  }
  bool number_unsigned(number_unsigned_t v) {
    if (v < static_cast<number_unsigned_t>(kExactIntLimit)) return put(ValueNode{static_cast<std::int64_t>(v)});
    return put(ValueNode{static_cast<double>(v)});
  }
  bool number_float(number_float_t v, const string_t&) { return put(ValueNode{v}); }
  bool string(string_t& s) { return put(ValueNode{std::move(s)}); }
  bool binary(binary_t&) { return fail("binary values are not JSON"); }

  bool start_object(std::size_t) { return open(ValueNode{Object{}}); }
  bool key(string_t& k) {
    auto& frame = stack_.back();
    if (!frame.keys.insert(k).second) return fail("duplicate object key '" + k + "'");
    frame.pending_key = std::move(k);
    return true;
  }
  bool end_object() { return close(); }
  bool start_array(std::size_t) { return open(ValueNode{Array{}}); }
  bool end_array() { return close(); }

  bool parse_error(std::size_t position, const std::string&, const nlohmann::detail::exception& ex) {
    if (!error_) error_ = "at byte " + std::to_string(position) + ": " + ex.what();
    return false;
  }

  const std::optional<std::string>& error() const { return error_; }
  ValueNode take() { return std::move(root_); }

 private:
  struct Frame {
    ValueNode node;
    std::string pending_key;
    std::unordered_set<std::string> keys;
  };

  bool fail(std::string msg) {
    if (!error_) error_ = std::move(msg);
    return false;
  }

  bool open(ValueNode container) {
    if (stack_.size() + 1 > max_depth_) {
      return fail("nesting exceeds max depth " + std::to_string(max_depth_));
    }
    stack_.push_back(Frame{std::move(container), {}, {}});
    return true;
  }

  bool close() {
    ValueNode done = std::move(stack_.back().node);
    stack_.pop_back();
    return put(std::move(done));
  }

  bool put(ValueNode v) {
    if (stack_.empty()) {
      root_ = std::move(v);
      return true;
    }
    auto& top = stack_.back();
    if (top.node.is_object()) {
      top.node.as_object().push_back(Member{std::move(top.pending_key), std::move(v)});
    } else {
      top.node.as_array().push_back(std::move(v));
    }
    return true;
  }

  std::size_t max_depth_;
  std::vector<Frame> stack_;
  ValueNode root_;
  std::optional<std::string> error_;
};

bool is_blank(std::string_view s) {
  for (char c : s) {
    if (c != ' ' && c != '\t' && c != '\r' && c != '\n') return false;
  }
  return true;
}

nlohmann::ordered_json to_nlohmann(const ValueNode& v) {
  switch (v.kind()) {
    case ValueKind::Null: return nullptr;
    case ValueKind::Bool: return v.as_bool();
    case ValueKind::Int: return v.as_int();
    case ValueKind::Float: return v.as_float();
    case ValueKind::Text: return v.as_text();
    case ValueKind::Array: {
      auto out = nlohmann::ordered_json::array();
      for (const auto& e : v.as_array()) out.push_back(to_nlohmann(e));
      return out;
    }
    case ValueKind::Object: {
      auto out = nlohmann::ordered_json::object();
      for (const auto& m : v.as_object()) out[m.name] = to_nlohmann(m.value);
      return out;
    }
  }
  return nullptr;
}

}  // namespace

ErrorPolicy parse_error_policy(std::string_view text) {
  if (text == "skip") return ErrorPolicy::Skip;
  if (text == "abort") return ErrorPolicy::Abort;
  throw ConfigError("unknown error policy '" + std::string(text) + "' (expected skip|abort)");
}

std::string_view to_string(ErrorPolicy policy) noexcept {
  return policy == ErrorPolicy::Skip ? "skip" : "abort";
}

ValueNode parse_record(std::string_view line, std::size_t line_number, std::size_t max_depth) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  TreeBuilder builder(max_depth);
  const bool ok = nlohmann::json::sax_parse(line.begin(), line.end(), &builder,
                                            nlohmann::json::input_format_t::json, true);
  if (!ok || builder.error()) {
    throw ParseError("line " + std::to_string(line_number) + ": " +
                         builder.error().value_or("malformed JSON"),
                     line_number);
  }
  ValueNode root = builder.take();
  if (!root.is_object()) {
    throw StructureError("line " + std::to_string(line_number) + ": top level is " +
                             std::string(to_string(root.kind())) + ", expected object",
                         line_number);
  }
  return root;
}

Corpus read_corpus(std::istream& source, const IngestOptions& options) {
  std::vector<std::string> lines;
  std::vector<std::size_t> numbers;
  std::string line;
  std::size_t n = 0;
  while (std::getline(source, line)) {
    ++n;
    if (is_blank(line)) continue;
    lines.push_back(std::move(line));
    numbers.push_back(n);
  }
  if (source.bad()) throw InputError("I/O failure while reading input");

  struct Outcome {
    std::optional<ValueNode> value;
    std::string error;
  };
  std::vector<Outcome> outcomes(lines.size());
  detail::parallel_chunks(lines.size(), options.workers, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      try {
        outcomes[i].value = parse_record(lines[i], numbers[i], options.max_depth);
      } catch (const InputError& err) {
        outcomes[i].error = err.what();
      }
    }
  });

  Corpus corpus;
  corpus.records.reserve(lines.size());
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto& o = outcomes[i];
    if (o.value) {
      corpus.records.push_back(std::move(*o.value));
      corpus.line_numbers.push_back(numbers[i]);
      ++corpus.stats.records_ok;
      continue;
    }
    if (options.policy == ErrorPolicy::Abort) throw ParseError(o.error, numbers[i]);
    ++corpus.stats.records_failed;
    corpus.stats.failed_lines.push_back({numbers[i], std::move(o.error)});
  }
  return corpus;
}

Corpus read_corpus_file(const std::string& path, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open input '" + path + "'");
  return read_corpus(in, options);
}

std::string to_json_text(const ValueNode& value) { return to_nlohmann(value).dump(); }

}  // namespace logflat
