#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace logflat {

enum class ValueKind : std::uint8_t { Null, Bool, Int, Float, Text, Object, Array };

std::string_view to_string(ValueKind kind) noexcept;

class ValueNode;
struct Member;

using Object = std::vector<Member>;
using Array = std::vector<ValueNode>;

// A flat scalar cell: what survives flattening.
using Scalar = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

ValueKind kind_of(const Scalar& s) noexcept;
// Text rendering used for delimited splitting and text widening. Floats use
// the shortest round-trip form.
std::string render_scalar(const Scalar& s);

// Parsed JSON value tree for one event record. Objects keep source field order.
class ValueNode {
 public:
  using Storage = std::variant<std::monostate, bool, std::int64_t, double, std::string, Object, Array>;

  ValueNode() = default;
  ValueNode(std::nullptr_t) {}
  ValueNode(bool b) : v_(b) {}
  ValueNode(std::int64_t i) : v_(i) {}
  ValueNode(int i) : v_(static_cast<std::int64_t>(i)) {}
  ValueNode(double d) : v_(d) {}
  ValueNode(std::string s) : v_(std::move(s)) {}
  ValueNode(const char* s) : v_(std::string(s)) {}
  ValueNode(Array a) : v_(std::move(a)) {}
  ValueNode(Object o) : v_(std::move(o)) {}
  static ValueNode from_scalar(const Scalar& s);

  ValueKind kind() const noexcept { return static_cast<ValueKind>(v_.index()); }
  bool is_null() const noexcept { return kind() == ValueKind::Null; }
  bool is_object() const noexcept { return kind() == ValueKind::Object; }
  bool is_array() const noexcept { return kind() == ValueKind::Array; }
  bool is_scalar() const noexcept { return !is_object() && !is_array(); }

  bool as_bool() const { return std::get<bool>(v_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
  double as_float() const { return std::get<double>(v_); }
  const std::string& as_text() const { return std::get<std::string>(v_); }
  const Array& as_array() const { return std::get<Array>(v_); }
  Array& as_array() { return std::get<Array>(v_); }
  const Object& as_object() const { return std::get<Object>(v_); }
  Object& as_object() { return std::get<Object>(v_); }

  // Object field lookup; nullptr when absent or when this is not an object.
  const ValueNode* find(std::string_view name) const;

  Scalar to_scalar() const;  // requires is_scalar()
  const Storage& storage() const noexcept { return v_; }

  // Number of nested containers along the deepest branch; scalars are 0.
  std::size_t depth() const;

  friend bool operator==(const ValueNode& a, const ValueNode& b);

 private:
  Storage v_;
};

struct Member {
  std::string name;
  ValueNode value;
  friend bool operator==(const Member& a, const Member& b) = default;
};

// Structural equality ignoring object key order.
bool equal_ignoring_key_order(const ValueNode& a, const ValueNode& b);

}  // namespace logflat
