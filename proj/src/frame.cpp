#include "logflat/frame.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "logflat/error.hpp"

namespace logflat {

std::string_view to_string(ColumnKind kind) noexcept {
  switch (kind) {
    case ColumnKind::Text: return "text";
    case ColumnKind::Int: return "int";
    case ColumnKind::Float: return "float";
    case ColumnKind::Bool: return "bool";
    case ColumnKind::Timestamp: return "timestamp";
  }
  return "text";
}

ColumnKind parse_column_kind(std::string_view text) {
  if (text == "text") return ColumnKind::Text;
  if (text == "int") return ColumnKind::Int;
  if (text == "float") return ColumnKind::Float;
  if (text == "bool") return ColumnKind::Bool;
  if (text == "timestamp") return ColumnKind::Timestamp;
  throw ConfigError("unknown column kind '" + std::string(text) + "'");
}

ColumnKind column_kind_for(ValueKind kind) noexcept {
  switch (kind) {
    case ValueKind::Bool: return ColumnKind::Bool;
    case ValueKind::Int: return ColumnKind::Int;
    case ValueKind::Float: return ColumnKind::Float;
    default: return ColumnKind::Text;
  }
}

bool is_numeric(ColumnKind kind) noexcept {
  return kind == ColumnKind::Int || kind == ColumnKind::Float || kind == ColumnKind::Bool;
}

namespace {

Column::Storage storage_for(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::Text: return Column::TextData{};
    case ColumnKind::Int:
    case ColumnKind::Timestamp: return std::vector<std::int64_t>{};
    case ColumnKind::Float: return std::vector<double>{};
    case ColumnKind::Bool: return std::vector<std::uint8_t>{};
  }
  return Column::TextData{};
}

std::string shortest(double d) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, res.ptr);
}

}  // namespace

Column::Column(std::string name, ColumnKind kind)
    : name_(std::move(name)), kind_(kind), data_(storage_for(kind)) {}

std::size_t Column::null_count() const {
  return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{0}));
}

std::string_view Column::text(std::size_t row) const {
  const auto& t = std::get<TextData>(data_);
  return std::string_view(t.chars).substr(t.offsets[row], t.offsets[row + 1] - t.offsets[row]);
}

std::int64_t Column::int_at(std::size_t row) const { return std::get<std::vector<std::int64_t>>(data_)[row]; }
double Column::float_at(std::size_t row) const { return std::get<std::vector<double>>(data_)[row]; }
bool Column::bool_at(std::size_t row) const { return std::get<std::vector<std::uint8_t>>(data_)[row] != 0; }
Instant Column::timestamp_at(std::size_t row) const { return Instant{std::chrono::nanoseconds{int_at(row)}}; }

double Column::numeric(std::size_t row) const {
  switch (kind_) {
    case ColumnKind::Int:
    case ColumnKind::Timestamp: return static_cast<double>(int_at(row));
    case ColumnKind::Float: return float_at(row);
    case ColumnKind::Bool: return bool_at(row) ? 1.0 : 0.0;
    case ColumnKind::Text: break;
  }
  throw KindError("column '" + name_ + "' is not numeric");
}

Scalar Column::cell(std::size_t row) const {
  if (is_null(row)) return std::monostate{};
  switch (kind_) {
    case ColumnKind::Text: return std::string(text(row));
    case ColumnKind::Int:
    case ColumnKind::Timestamp: return int_at(row);
    case ColumnKind::Float: return float_at(row);
    case ColumnKind::Bool: return bool_at(row);
  }
  return std::monostate{};
}

std::string Column::render(std::size_t row) const {
  if (is_null(row)) return {};
  switch (kind_) {
    case ColumnKind::Text: return std::string(text(row));
    case ColumnKind::Int: return std::to_string(int_at(row));
    case ColumnKind::Float: return shortest(float_at(row));
    case ColumnKind::Bool: return bool_at(row) ? "true" : "false";
    case ColumnKind::Timestamp: return format_rfc3339(timestamp_at(row));
  }
  return {};
}

Column Column::renamed(std::string name) const {
  Column c = *this;
  c.name_ = std::move(name);
  return c;
}

ColumnBuilder::ColumnBuilder(std::string name, ColumnKind kind, std::size_t reserve) : col_(std::move(name), kind) {
  col_.valid_.reserve(reserve);
  std::visit([reserve](auto& d) {
    using T = std::decay_t<decltype(d)>;
    if constexpr (std::is_same_v<T, Column::TextData>) {
      d.offsets.reserve(reserve + 1);
    } else {
      d.reserve(reserve);
    }
  }, col_.data_);
}

void ColumnBuilder::append_null() {
  col_.valid_.push_back(0);
  std::visit([](auto& d) {
    using T = std::decay_t<decltype(d)>;
    if constexpr (std::is_same_v<T, Column::TextData>) {
      d.offsets.push_back(d.chars.size());
    } else {
      d.push_back({});
    }
  }, col_.data_);
}

void ColumnBuilder::append_text(std::string_view v) {
  auto& d = std::get<Column::TextData>(col_.data_);
  d.chars.append(v);
  d.offsets.push_back(d.chars.size());
  col_.valid_.push_back(1);
}

void ColumnBuilder::append_int(std::int64_t v) {
  std::get<std::vector<std::int64_t>>(col_.data_).push_back(v);
  col_.valid_.push_back(1);
}

void ColumnBuilder::append_float(double v) {
  std::get<std::vector<double>>(col_.data_).push_back(v);
  col_.valid_.push_back(1);
}

void ColumnBuilder::append_bool(bool v) {
  std::get<std::vector<std::uint8_t>>(col_.data_).push_back(v ? 1 : 0);
  col_.valid_.push_back(1);
}

void ColumnBuilder::append_timestamp(Instant v) { append_int(v.time_since_epoch().count()); }

void ColumnBuilder::append(const Scalar& value) {
  if (std::holds_alternative<std::monostate>(value)) {
    append_null();
    return;
  }
  switch (col_.kind_) {
    case ColumnKind::Text:
      if (const auto* s = std::get_if<std::string>(&value)) append_text(*s);
      else append_text(render_scalar(value));
      return;
    case ColumnKind::Int:
    case ColumnKind::Timestamp:
      if (const auto* i = std::get_if<std::int64_t>(&value)) {
        append_int(*i);
        return;
      }
      break;
    case ColumnKind::Float:
      if (const auto* f = std::get_if<double>(&value)) {
        append_float(*f);
        return;
      }
      if (const auto* i = std::get_if<std::int64_t>(&value)) {
        append_float(static_cast<double>(*i));
        return;
      }
      break;
    case ColumnKind::Bool:
      if (const auto* b = std::get_if<bool>(&value)) {
        append_bool(*b);
        return;
      }
      break;
  }
  throw KindError("value of kind " + std::string(to_string(kind_of(value))) + " does not fit " +
                  std::string(to_string(col_.kind_)) + " column '" + col_.name_ + "'");
}

Column ColumnBuilder::build() && { return std::move(col_); }

// ---------------------------------------------------------------------------

Frame::Frame(std::string name, std::vector<Column> columns) : name_(std::move(name)) {
  columns_.reserve(columns.size());
  for (auto& c : columns) columns_.push_back(std::make_shared<const Column>(std::move(c)));
  rows_ = columns_.empty() ? 0 : columns_.front()->size();
  for (const auto& c : columns_) {
    if (c->size() != rows_) {
      throw ProcessingError("column '" + c->name() + "' has " + std::to_string(c->size()) + " cells, frame '" +
                            name_ + "' has " + std::to_string(rows_) + " rows");
    }
  }
  index_names();
}

Frame::Frame(std::string name, std::vector<std::shared_ptr<const Column>> cols, std::size_t rows)
    : name_(std::move(name)), columns_(std::move(cols)), rows_(rows) {
  for (const auto& c : columns_) {
    if (c->size() != rows_) throw ProcessingError("column '" + c->name() + "' length mismatch in '" + name_ + "'");
  }
  index_names();
}

void Frame::index_names() {
  by_name_.clear();
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (!by_name_.emplace(columns_[i]->name(), i).second) {
      throw ProcessingError("duplicate column '" + columns_[i]->name() + "' in frame '" + name_ + "'");
    }
  }
}

const Column& Frame::column(std::string_view name) const {
  auto idx = find(name);
  if (!idx) throw ProcessingError("frame '" + name_ + "' has no column '" + std::string(name) + "'");
  return *columns_[*idx];
}

std::optional<std::size_t> Frame::find(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Frame::column_names() const {
  std::vector<std::string> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) out.push_back(c->name());
  return out;
}

Frame Frame::renamed(std::string name) const { return Frame(std::move(name), columns_, rows_); }

Frame Frame::with_column(Column column) const {
  if (!columns_.empty() && column.size() != rows_) {
    throw ProcessingError("column '" + column.name() + "' length mismatch in '" + name_ + "'");
  }
  auto cols = columns_;
  const std::size_t rows = columns_.empty() ? column.size() : rows_;
  if (auto idx = find(column.name())) {
    cols[*idx] = std::make_shared<const Column>(std::move(column));
  } else {
    cols.push_back(std::make_shared<const Column>(std::move(column)));
  }
  return Frame(name_, std::move(cols), rows);
}

Frame Frame::with_column_at(std::size_t position, Column column) const {
  if (has_column(column.name())) throw ProcessingError("column '" + column.name() + "' already exists");
  auto cols = columns_;
  const std::size_t rows = columns_.empty() ? column.size() : rows_;
  position = std::min(position, cols.size());
  cols.insert(cols.begin() + static_cast<std::ptrdiff_t>(position), std::make_shared<const Column>(std::move(column)));
  return Frame(name_, std::move(cols), rows);
}

Frame Frame::without_columns(std::span<const std::string> names) const {
  const std::set<std::string_view> drop(names.begin(), names.end());
  std::vector<std::shared_ptr<const Column>> cols;
  for (const auto& c : columns_) {
    if (!drop.contains(c->name())) cols.push_back(c);
  }
  return Frame(name_, std::move(cols), rows_);
}

Frame Frame::without_column(std::string_view name) const {
  const std::string n(name);
  return without_columns(std::span<const std::string>(&n, 1));
}

Frame Frame::with_renamed_column(std::string_view from, std::string to) const {
  auto idx = find(from);
  if (!idx) throw ProcessingError("frame '" + name_ + "' has no column '" + std::string(from) + "'");
  auto cols = columns_;
  cols[*idx] = std::make_shared<const Column>(columns_[*idx]->renamed(std::move(to)));
  return Frame(name_, std::move(cols), rows_);
}

Frame Frame::select(std::span<const std::string> names) const {
  std::vector<std::shared_ptr<const Column>> cols;
  for (const auto& n : names) {
    auto idx = find(n);
    if (!idx) throw ProcessingError("frame '" + name_ + "' has no column '" + n + "'");
    cols.push_back(columns_[*idx]);
  }
  return Frame(name_, std::move(cols), rows_);
}

bool operator==(const Frame& a, const Frame& b) {
  if (a.name_ != b.name_ || a.rows_ != b.rows_ || a.columns_.size() != b.columns_.size()) return false;
  for (std::size_t i = 0; i < a.columns_.size(); ++i) {
    const Column& x = *a.columns_[i];
    const Column& y = *b.columns_[i];
    if (x.name() != y.name() || x.kind() != y.kind()) return false;
    for (std::size_t r = 0; r < a.rows_; ++r) {
      if (x.cell(r) != y.cell(r)) return false;
    }
  }
  return true;
}

}  // namespace logflat
