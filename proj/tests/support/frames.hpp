#pragma once

#include <optional>
#include <string>
#include <vector>

#include "logflat/frame.hpp"

namespace testsupport {

inline logflat::Column text_col(std::string name, const std::vector<std::optional<std::string>>& values) {
  logflat::ColumnBuilder b(std::move(name), logflat::ColumnKind::Text);
  for (const auto& v : values) {
    if (v) b.append_text(*v);
    else b.append_null();
  }
  return std::move(b).build();
}

inline logflat::Column int_col(std::string name, const std::vector<std::optional<std::int64_t>>& values) {
  logflat::ColumnBuilder b(std::move(name), logflat::ColumnKind::Int);
  for (const auto& v : values) {
    if (v) b.append_int(*v);
    else b.append_null();
  }
  return std::move(b).build();
}

inline logflat::Column float_col(std::string name, const std::vector<std::optional<double>>& values) {
  logflat::ColumnBuilder b(std::move(name), logflat::ColumnKind::Float);
  for (const auto& v : values) {
    if (v) b.append_float(*v);
    else b.append_null();
  }
  return std::move(b).build();
}

inline logflat::Column bool_col(std::string name, const std::vector<std::optional<bool>>& values) {
  logflat::ColumnBuilder b(std::move(name), logflat::ColumnKind::Bool);
  for (const auto& v : values) {
    if (v) b.append_bool(*v);
    else b.append_null();
  }
  return std::move(b).build();
}

template <typename... Cols>
logflat::Frame make_frame(std::string name, Cols&&... cols) {
  std::vector<logflat::Column> v;
  (v.push_back(std::forward<Cols>(cols)), ...);
  return logflat::Frame(std::move(name), std::move(v));
}

}  // namespace testsupport
