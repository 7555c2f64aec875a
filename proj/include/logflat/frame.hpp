#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "logflat/time.hpp"
#include "logflat/value.hpp"

namespace logflat {

enum class ColumnKind : std::uint8_t { Text, Int, Float, Bool, Timestamp };

std::string_view to_string(ColumnKind kind) noexcept;
ColumnKind parse_column_kind(std::string_view text);
// Frame kind for a joined value kind; null-only and mixed columns are text.
ColumnKind column_kind_for(ValueKind kind) noexcept;
bool is_numeric(ColumnKind kind) noexcept;

// One typed column with a validity mask. Text cells live in a single buffer
// addressed by offsets, so wide sparse frames stay compact.
class Column {
 public:
  struct TextData {
    std::string chars;
    std::vector<std::uint64_t> offsets{0};
  };
  using Storage = std::variant<TextData, std::vector<std::int64_t>, std::vector<double>, std::vector<std::uint8_t>>;

  Column() : Column({}, ColumnKind::Text) {}
  Column(std::string name, ColumnKind kind);

  const std::string& name() const noexcept { return name_; }
  ColumnKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return valid_.size(); }
  bool is_null(std::size_t row) const { return valid_[row] == 0; }
  std::size_t null_count() const;

  std::string_view text(std::size_t row) const;
  std::int64_t int_at(std::size_t row) const;  // Int and Timestamp (ns since epoch)
  double float_at(std::size_t row) const;
  bool bool_at(std::size_t row) const;
  Instant timestamp_at(std::size_t row) const;
  // Int, Float, Bool and Timestamp as double.
  double numeric(std::size_t row) const;

  // Null cells come back as monostate; timestamps as their ns count.
  Scalar cell(std::size_t row) const;
  // Text form used by the writers and for value comparison: shortest
  // round-trip floats, RFC 3339 timestamps; empty for null.
  std::string render(std::size_t row) const;

  Column renamed(std::string name) const;

 private:
  friend class ColumnBuilder;
  std::string name_;
  ColumnKind kind_;
  std::vector<std::uint8_t> valid_;
  Storage data_;
};

class ColumnBuilder {
 public:
  ColumnBuilder(std::string name, ColumnKind kind, std::size_t reserve = 0);

  void append_null();
  // Widening append: text columns accept any scalar (rendered), float
  // columns accept ints, timestamp columns accept ns counts. Anything else
  // throws KindError.
  void append(const Scalar& value);
  void append_text(std::string_view v);
  void append_int(std::int64_t v);
  void append_float(double v);
  void append_bool(bool v);
  void append_timestamp(Instant v);

  std::size_t size() const noexcept { return col_.size(); }
  Column build() &&;

 private:
  Column col_;
};

// Immutable named table. Copies share column storage.
class Frame {
 public:
  Frame() = default;
  Frame(std::string name, std::vector<Column> columns);

  const std::string& name() const noexcept { return name_; }
  std::size_t row_count() const noexcept { return rows_; }
  std::size_t column_count() const noexcept { return columns_.size(); }

  const Column& column(std::size_t i) const { return *columns_.at(i); }
  const Column& column(std::string_view name) const;
  std::optional<std::size_t> find(std::string_view name) const;
  bool has_column(std::string_view name) const { return find(name).has_value(); }
  std::vector<std::string> column_names() const;

  Frame renamed(std::string name) const;
  // Replaces the same-named column in place or appends a new one.
  Frame with_column(Column column) const;
  Frame with_column_at(std::size_t position, Column column) const;
  Frame without_columns(std::span<const std::string> names) const;
  Frame without_column(std::string_view name) const;
  Frame with_renamed_column(std::string_view from, std::string to) const;
  Frame select(std::span<const std::string> names) const;

  // Cell-wise equality of names, kinds and values.
  friend bool operator==(const Frame& a, const Frame& b);

 private:
  Frame(std::string name, std::vector<std::shared_ptr<const Column>> cols, std::size_t rows);
  void index_names();

  std::string name_;
  std::vector<std::shared_ptr<const Column>> columns_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::size_t rows_ = 0;
};

}  // namespace logflat
