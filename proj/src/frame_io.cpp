#include "logflat/frame_io.hpp"

#include <charconv>
#include <istream>
#include <iterator>
#include <map>
#include <ostream>

#include <json.hpp>

#include "logflat/error.hpp"
#include "logflat/ingest.hpp"
#include "logflat/schema.hpp"

namespace logflat {

namespace {

bool needs_quotes(std::string_view s) {
  return s.empty() || s.find_first_of(",\"\r\n") != std::string_view::npos;
}

void write_csv_field(std::string& out, std::string_view s) {
  if (!needs_quotes(s)) {
    out.append(s);
    return;
  }
  out += '"';
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

struct CsvField {
  std::string text;
  bool quoted = false;
};

std::vector<std::vector<CsvField>> parse_csv(const std::string& data) {
  std::vector<std::vector<CsvField>> rows;
  std::vector<CsvField> row;
  CsvField field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field = CsvField{};
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };
  while (i < data.size()) {
    const char c = data[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field.text += '"';
          i += 2;
          continue;
        }
        in_quotes = false;
      } else {
        field.text += c;
      }
      ++i;
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field.quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r' && i + 1 < data.size() && data[i + 1] == '\n') {
      end_row();
      ++i;
    } else if (c == '\n') {
      end_row();
    } else {
      field.text += c;
      field_started = true;
    }
    ++i;
  }
  if (in_quotes) throw InputError("CSV: unterminated quoted field");
  if (field_started || !row.empty()) end_row();
  return rows;
}

void append_parsed(ColumnBuilder& b, ColumnKind kind, const std::string& text, const std::string& column) {
  auto bad = [&] { throw InputError("cannot read '" + text + "' as " + std::string(to_string(kind)) + " in column '" + column + "'"); };
  switch (kind) {
    case ColumnKind::Text: b.append_text(text); return;
    case ColumnKind::Int: {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || p != text.data() + text.size()) bad();
      b.append_int(v);
      return;
    }
    case ColumnKind::Float: {
      double v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || p != text.data() + text.size()) bad();
      b.append_float(v);
      return;
    }
    case ColumnKind::Bool:
      if (text == "true") b.append_bool(true);
      else if (text == "false") b.append_bool(false);
      else bad();
      return;
    case ColumnKind::Timestamp: {
      auto t = try_parse_timestamp(text, default_time_formats());
      if (!t) bad();
      b.append_timestamp(*t);
      return;
    }
  }
}

nlohmann::ordered_json cell_json(const Column& col, std::size_t r) {
  switch (col.kind()) {
    case ColumnKind::Text: return std::string(col.text(r));
    case ColumnKind::Int: return col.int_at(r);
    case ColumnKind::Float: return col.float_at(r);
    case ColumnKind::Bool: return col.bool_at(r);
    case ColumnKind::Timestamp: return format_rfc3339(col.timestamp_at(r));
  }
  return nullptr;
}

bool is_canonical_timestamp(const std::string& s) {
  if (s.empty() || s.back() != 'Z') return false;
  auto t = try_parse_timestamp(s, default_time_formats());
  return t && format_rfc3339(*t) == s;
}

}  // namespace

FrameSchema schema_of(const Frame& frame) {
  FrameSchema s;
  for (std::size_t i = 0; i < frame.column_count(); ++i) s.emplace_back(frame.column(i).name(), frame.column(i).kind());
  return s;
}

std::size_t write_csv(const Frame& frame, std::ostream& sink) {
  std::string out;
  for (std::size_t i = 0; i < frame.column_count(); ++i) {
    if (i > 0) out += ',';
    write_csv_field(out, frame.column(i).name());
  }
  out += '\n';
  std::size_t written = 0;
  for (std::size_t r = 0; r < frame.row_count(); ++r) {
    for (std::size_t i = 0; i < frame.column_count(); ++i) {
      if (i > 0) out += ',';
      const Column& col = frame.column(i);
      if (col.is_null(r)) continue;
      write_csv_field(out, col.render(r));
    }
    out += '\n';
    if (out.size() > (1u << 20)) {
      sink.write(out.data(), static_cast<std::streamsize>(out.size()));
      written += out.size();
      out.clear();
    }
  }
  sink.write(out.data(), static_cast<std::streamsize>(out.size()));
  written += out.size();
  if (!sink) throw ProcessingError("I/O failure writing CSV for frame '" + frame.name() + "'");
  return written;
}

std::size_t write_jsonl(const Frame& frame, std::ostream& sink) {
  std::size_t written = 0;
  for (std::size_t r = 0; r < frame.row_count(); ++r) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < frame.column_count(); ++i) {
      const Column& col = frame.column(i);
      if (!col.is_null(r)) obj[col.name()] = cell_json(col, r);
    }
    std::string line = obj.dump();
    line += '\n';
    sink.write(line.data(), static_cast<std::streamsize>(line.size()));
    written += line.size();
  }
  if (!sink) throw ProcessingError("I/O failure writing JSONL for frame '" + frame.name() + "'");
  return written;
}

Frame read_csv(std::istream& source, std::string name, const FrameSchema& schema) {
  const std::string data((std::istreambuf_iterator<char>(source)), std::istreambuf_iterator<char>());
  auto rows = parse_csv(data);
  if (rows.empty()) throw InputError("CSV: missing header row");
  const auto& header = rows.front();
  if (header.size() != schema.size()) throw InputError("CSV: header has " + std::to_string(header.size()) + " columns, schema " + std::to_string(schema.size()));
  std::vector<ColumnBuilder> builders;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (header[i].text != schema[i].first) throw InputError("CSV: header column '" + header[i].text + "' does not match schema '" + schema[i].first + "'");
    builders.emplace_back(schema[i].first, schema[i].second, rows.size() - 1);
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != schema.size()) throw InputError("CSV: row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) + " fields", r + 1);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i].text.empty() && !row[i].quoted) builders[i].append_null();
      else append_parsed(builders[i], schema[i].second, row[i].text, schema[i].first);
    }
  }
  std::vector<Column> cols;
  for (auto& b : builders) cols.push_back(std::move(b).build());
  return Frame(std::move(name), std::move(cols));
}

Frame read_jsonl(std::istream& source, std::string name, const std::optional<FrameSchema>& schema) {
  IngestOptions opts;
  opts.policy = ErrorPolicy::Abort;
  opts.max_depth = 1;
  Corpus corpus = read_corpus(source, opts);

  FrameSchema effective;
  if (schema) {
    effective = *schema;
  } else {
    std::vector<std::string> order;
    std::map<std::string, ValueKind> kinds;
    std::map<std::string, bool> all_timestamps;
    for (const auto& rec : corpus.records) {
      for (const auto& m : rec.as_object()) {
        if (!kinds.contains(m.name)) {
          order.push_back(m.name);
          kinds[m.name] = ValueKind::Null;
          all_timestamps[m.name] = true;
        }
        kinds[m.name] = join_kinds(kinds[m.name], m.value.kind());
        if (m.value.kind() == ValueKind::Text && !is_canonical_timestamp(m.value.as_text())) all_timestamps[m.name] = false;
      }
    }
    for (const auto& n : order) {
      ColumnKind k = column_kind_for(kinds[n]);
      if (kinds[n] == ValueKind::Text && all_timestamps[n]) k = ColumnKind::Timestamp;
      effective.emplace_back(n, k);
    }
  }

  std::vector<ColumnBuilder> builders;
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < effective.size(); ++i) {
    builders.emplace_back(effective[i].first, effective[i].second, corpus.records.size());
    index.emplace(effective[i].first, i);
  }
  for (std::size_t r = 0; r < corpus.records.size(); ++r) {
    std::vector<bool> seen(builders.size(), false);
    for (const auto& m : corpus.records[r].as_object()) {
      auto it = index.find(m.name);
      if (it == index.end()) throw InputError("JSONL: key '" + m.name + "' not in schema", corpus.line_numbers[r]);
      const std::size_t i = it->second;
      seen[i] = true;
      const ColumnKind kind = effective[i].second;
      if (m.value.is_null()) {
        builders[i].append_null();
      } else if (kind == ColumnKind::Timestamp && m.value.kind() == ValueKind::Text) {
        append_parsed(builders[i], kind, m.value.as_text(), m.name);
      } else {
        builders[i].append(m.value.to_scalar());
      }
    }
    for (std::size_t i = 0; i < builders.size(); ++i) {
      if (!seen[i]) builders[i].append_null();
    }
  }
  std::vector<Column> cols;
  for (auto& b : builders) cols.push_back(std::move(b).build());
  return Frame(std::move(name), std::move(cols));
}

}  // namespace logflat
