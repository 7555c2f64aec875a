#include "logflat/value.hpp"

#include <algorithm>
#include <charconv>

namespace logflat {

std::string_view to_string(ValueKind kind) noexcept {
  switch (kind) {
    case ValueKind::Null: return "null";
    case ValueKind::Bool: return "bool";
    case ValueKind::Int: return "int";
    case ValueKind::Float: return "float";
    case ValueKind::Text: return "text";
    case ValueKind::Object: return "object";
    case ValueKind::Array: return "array";
  }
  return "unknown";
}

ValueKind kind_of(const Scalar& s) noexcept {
  switch (s.index()) {
    case 0: return ValueKind::Null;
    case 1: return ValueKind::Bool;
    case 2: return ValueKind::Int;
    case 3: return ValueKind::Float;
    default: return ValueKind::Text;
  }
}

std::string render_scalar(const Scalar& s) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const {
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof buf, d);
      return std::string(buf, res.ptr);
    }
    std::string operator()(const std::string& t) const { return t; }
  };
  return std::visit(Visitor{}, s);
}

ValueNode ValueNode::from_scalar(const Scalar& s) {
  return std::visit([](const auto& v) -> ValueNode {
    using T = std::decay_t<decltype(v)>;
    if constexpr (std::is_same_v<T, std::monostate>) {
      return ValueNode{};
    } else {
      return ValueNode{v};
    }
  }, s);
}

const ValueNode* ValueNode::find(std::string_view name) const {
  if (!is_object()) return nullptr;
  for (const auto& m : as_object()) {
    if (m.name == name) return &m.value;
  }
  return nullptr;
}

Scalar ValueNode::to_scalar() const {
  switch (kind()) {
    case ValueKind::Bool: return as_bool();
    case ValueKind::Int: return as_int();
    case ValueKind::Float: return as_float();
    case ValueKind::Text: return as_text();
    default: return std::monostate{};
  }
}

std::size_t ValueNode::depth() const {
  std::size_t inner = 0;
  if (is_object()) {
    for (const auto& m : as_object()) inner = std::max(inner, m.value.depth());
    return inner + 1;
  }
  if (is_array()) {
    for (const auto& e : as_array()) inner = std::max(inner, e.depth());
    return inner + 1;
  }
  return 0;
}

bool operator==(const ValueNode& a, const ValueNode& b) { return a.v_ == b.v_; }

bool equal_ignoring_key_order(const ValueNode& a, const ValueNode& b) {
  if (a.kind() != b.kind()) return false;
  if (a.is_array()) {
    const auto& x = a.as_array();
    const auto& y = b.as_array();
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!equal_ignoring_key_order(x[i], y[i])) return false;
    }
    return true;
  }
  if (a.is_object()) {
    const auto& x = a.as_object();
    const auto& y = b.as_object();
    if (x.size() != y.size()) return false;
    for (const auto& m : x) {
      const ValueNode* other = b.find(m.name);
      if (other == nullptr || !equal_ignoring_key_order(m.value, *other)) return false;
    }
    return true;
  }
  return a == b;
}

}  // namespace logflat
