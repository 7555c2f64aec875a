#include "logflat/select.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "logflat/error.hpp"
#include "logflat/log.hpp"
#include "logflat/parallel.hpp"
#include "logflat/stats.hpp"

namespace logflat {

PruneOutcome drop_single_valued(const Frame& frame) {
  PruneOutcome out;
  std::vector<std::string> drop;
  for (std::size_t c = 0; c < frame.column_count(); ++c) {
    const Column& col = frame.column(c);
    std::optional<std::string> first;
    bool multi = false;
    for (std::size_t r = 0; r < col.size() && !multi; ++r) {
      if (col.is_null(r)) continue;
      std::string v = col.render(r);
      if (!first) first = std::move(v);
      else if (v != *first) multi = true;
    }
    if (multi) continue;
    drop.push_back(col.name());
    out.dropped.push_back({col.name(), first ? "single_valued" : "all_null"});
  }
  out.frame = frame.without_columns(drop);
  return out;
}

// --- namespace correlation -------------------------------------------------

AbbreviationTable AbbreviationTable::defaults() {
  AbbreviationTable t;
  t.add("proto", "protocol");
  t.add("prot", "protocol");
  t.add("conn", "connection");
  t.add("src", "source");
  t.add("dst", "destination");
  t.add("addr", "address");
  t.add("cmd", "command");
  t.add("msg", "message");
  return t;
}

AbbreviationTable AbbreviationTable::parse(std::string_view text) {
  AbbreviationTable t;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("abbreviation line " + std::to_string(number) + " has no '='");
    std::string s = trim(line.substr(0, eq));
    std::string l = trim(line.substr(eq + 1));
    if (s.empty() || l.empty()) throw ConfigError("abbreviation line " + std::to_string(number) + " is incomplete");
    t.add(std::move(s), std::move(l));
  }
  return t;
}

AbbreviationTable AbbreviationTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read abbreviation file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void AbbreviationTable::add(std::string short_form, std::string long_form) {
  auto lower = [](std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  entries_[lower(std::move(short_form))] = lower(std::move(long_form));
}

void AbbreviationTable::merge(const AbbreviationTable& other) {
  for (const auto& [s, l] : other.entries_) entries_[s] = l;
}

std::string AbbreviationTable::expand(const std::string& token) const {
  auto it = entries_.find(token);
  return it == entries_.end() ? token : it->second;
}

namespace {

std::vector<std::string> split_words(std::string_view name) {
  std::vector<std::string> raw;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) raw.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < name.size(); ++i) {
    const auto c = static_cast<unsigned char>(name[i]);
    if (!std::isalnum(c)) {
      flush();
      continue;
    }
    if (!cur.empty()) {
      const auto prev = static_cast<unsigned char>(name[i - 1]);
      const bool next_lower = i + 1 < name.size() && std::islower(static_cast<unsigned char>(name[i + 1]));
      const bool boundary = (std::isupper(c) && (std::islower(prev) || std::isdigit(prev))) ||
                            (std::isupper(c) && std::isupper(prev) && next_lower) ||
                            (std::isdigit(c) != 0) != (std::isdigit(prev) != 0);
      if (boundary) flush();
    }
    cur += static_cast<char>(std::tolower(c));
  }
  flush();
  return raw;
}

}  // namespace

std::vector<std::string> name_tokens(std::string_view name, const AbbreviationTable& table) {
  std::vector<std::string> out;
  for (const auto& t : split_words(name)) {
    // An expansion may hold several words ("srcip=source_ip").
    for (auto& piece : split_words(table.expand(t))) out.push_back(std::move(piece));
  }
  return out;
}

std::string expanded_name(std::string_view name, const AbbreviationTable& table) {
  std::string out;
  for (const auto& t : name_tokens(name, table)) {
    if (!out.empty()) out += '_';
    out += t;
  }
  return out;
}

std::vector<ColumnSample> sample_columns(std::span<const Frame> frames, std::size_t limit,
                                         const std::set<std::string>& skip) {
  std::vector<ColumnSample> out;
  std::map<std::string, std::size_t> index;
  for (const auto& f : frames) {
    for (std::size_t c = 0; c < f.column_count(); ++c) {
      const Column& col = f.column(c);
      if (skip.contains(col.name())) continue;
      auto [it, inserted] = index.try_emplace(col.name(), out.size());
      if (inserted) out.push_back({col.name(), {}});
      auto& values = out[it->second].values;
      for (std::size_t r = 0; r < col.size() && values.size() < limit; ++r) {
        if (!col.is_null(r)) values.insert(col.render(r));
      }
    }
  }
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& v : a) common += b.count(v);
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

namespace {

// Longer expanded form wins; ties go to the lexicographically smaller one.
bool better_canonical(const std::string& a, const std::string& b) {
  return a.size() != b.size() ? a.size() > b.size() : a < b;
}

}  // namespace

std::vector<MergeCandidate> propose_namespace_merges(std::span<const ColumnSample> columns,
                                                     const MergeOptions& options) {
  std::vector<std::set<std::string>> tokens;
  std::vector<std::string> expanded;
  for (const auto& c : columns) {
    const auto t = name_tokens(c.name, options.abbreviations);
    tokens.emplace_back(t.begin(), t.end());
    expanded.push_back(expanded_name(c.name, options.abbreviations));
  }
  std::vector<MergeCandidate> out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    for (std::size_t j = i + 1; j < columns.size(); ++j) {
      if (columns[i].name == columns[j].name) continue;
      const double name_score = jaccard(tokens[i], tokens[j]);
      if (name_score < options.name_threshold) continue;
      const double value_score = jaccard(columns[i].values, columns[j].values);
      if (value_score < options.value_threshold) continue;
      MergeCandidate m;
      m.left = columns[i].name;
      m.right = columns[j].name;
      m.name_score = name_score;
      m.value_score = value_score;
      m.canonical = better_canonical(expanded[i], expanded[j]) ? expanded[i] : expanded[j];
      out.push_back(std::move(m));
    }
  }
  return out;
}

namespace {

class UnionFind {
 public:
  std::size_t id(const std::string& name) {
    auto [it, inserted] = index_.try_emplace(name, parent_.size());
    if (inserted) {
      parent_.push_back(parent_.size());
      names_.push_back(name);
    }
    return it->second;
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }
  std::size_t size() const { return parent_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }

 private:
  std::map<std::string, std::size_t> index_;
  std::vector<std::size_t> parent_;
  std::vector<std::string> names_;
};

Column coalesce(const std::vector<const Column*>& sources, const std::string& name, std::size_t& conflicts) {
  ColumnKind kind = sources.front()->kind();
  for (const auto* s : sources) {
    if (s->kind() != kind) kind = ColumnKind::Text;
  }
  const std::size_t rows = sources.front()->size();
  ColumnBuilder b(name, kind, rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const Column* winner = nullptr;
    for (const auto* s : sources) {
      if (s->is_null(r)) continue;
      if (winner == nullptr) winner = s;
      else if (s->render(r) != winner->render(r)) ++conflicts;
    }
    if (winner == nullptr) b.append_null();
    else if (kind == ColumnKind::Text) b.append_text(winner->render(r));
    else if (kind == ColumnKind::Timestamp) b.append_timestamp(winner->timestamp_at(r));
    else b.append(winner->cell(r));
  }
  return std::move(b).build();
}

}  // namespace

MergeOutcome apply_merges(std::span<const Frame> frames, std::span<const MergeCandidate> candidates,
                          const AbbreviationTable& table) {
  UnionFind uf;
  for (const auto& c : candidates) uf.unite(uf.id(c.left), uf.id(c.right));
  std::map<std::size_t, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < uf.size(); ++i) groups[uf.find(i)].push_back(uf.name(i));

  MergeOutcome out;
  std::map<std::string, std::size_t> merge_of;  // source name -> index into out.merges
  for (auto& [root, members] : groups) {
    if (members.size() < 2) continue;
    std::sort(members.begin(), members.end());
    std::string canonical;
    for (const auto& m : members) {
      const std::string e = expanded_name(m, table);
      if (canonical.empty() || better_canonical(e, canonical)) canonical = e;
    }
    for (const auto& m : members) merge_of[m] = out.merges.size();
    out.merges.push_back({canonical, members, 0});
  }

  for (const auto& f : frames) {
    Frame cur = f;
    for (std::size_t g = 0; g < out.merges.size(); ++g) {
      auto& merge = out.merges[g];
      std::vector<std::size_t> positions;
      for (std::size_t c = 0; c < cur.column_count(); ++c) {
        auto it = merge_of.find(cur.column(c).name());
        if (it != merge_of.end() && it->second == g) positions.push_back(c);
      }
      if (positions.empty()) continue;
      const bool clash = cur.has_column(merge.canonical) &&
                         std::none_of(positions.begin(), positions.end(),
                                      [&](std::size_t p) { return cur.column(p).name() == merge.canonical; });
      if (clash) {
        log::warn("frame '" + cur.name() + "' already has a column '" + merge.canonical + "'; merge skipped there");
        continue;
      }
      std::vector<const Column*> sources;
      std::vector<std::string> names;
      for (auto p : positions) {
        sources.push_back(&cur.column(p));
        names.push_back(cur.column(p).name());
      }
      Column merged = coalesce(sources, merge.canonical, merge.conflicts);
      Frame without = cur.without_columns(names);
      cur = without.with_column_at(positions.front(), std::move(merged));
    }
    out.frames.push_back(std::move(cur));
  }
  return out;
}

// --- Pearson ---------------------------------------------------------------

CorrelationMatrix pearson_matrix(const Frame& frame, std::span<const std::string> columns, std::size_t workers) {
  const std::size_t p = columns.size();
  const std::size_t n = frame.row_count();
  std::vector<std::vector<double>> data(p);
  std::vector<std::vector<std::uint8_t>> present(p);
  CorrelationMatrix m;
  for (std::size_t i = 0; i < p; ++i) {
    const Column& col = frame.column(columns[i]);
    if (!is_numeric(col.kind())) {
      throw KindError("column '" + col.name() + "' is " + std::string(to_string(col.kind())) + ", not numeric");
    }
    m.labels.push_back(col.name());
    data[i].resize(n);
    present[i].resize(n);
    for (std::size_t r = 0; r < n; ++r) {
      present[i][r] = col.is_null(r) ? 0 : 1;
      data[i][r] = present[i][r] ? col.numeric(r) : 0.0;
    }
  }
  m.r.assign(p, std::vector<std::optional<double>>(p));

  auto pair = [&](std::size_t a, std::size_t b) -> std::optional<double> {
    double sx = 0, sy = 0;
    std::size_t k = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (!present[a][r] || !present[b][r]) continue;
      sx += data[a][r];
      sy += data[b][r];
      ++k;
    }
    if (k < 2) return std::nullopt;
    const double mx = sx / static_cast<double>(k), my = sy / static_cast<double>(k);
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t r = 0; r < n; ++r) {
      if (!present[a][r] || !present[b][r]) continue;
      const double dx = data[a][r] - mx, dy = data[b][r] - my;
      sxx += dx * dx;
      syy += dy * dy;
      sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  };

  detail::parallel_chunks(p, static_cast<unsigned>(workers), [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const auto self = pair(i, i);
      m.r[i][i] = self ? std::optional<double>(1.0) : std::nullopt;
      for (std::size_t j = i + 1; j < p; ++j) m.r[i][j] = pair(i, j);
    }
  });
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) m.r[j][i] = m.r[i][j];
  }
  return m;
}

CorrelationPrune prune_by_correlation(const CorrelationMatrix& matrix, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("correlation threshold must be in (0, 1]");
  const std::size_t p = matrix.size();
  struct Pair {
    std::size_t i, j;
    double abs_r;
  };
  std::vector<Pair> pairs;
  CorrelationPrune out;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) {
      const auto& r = matrix.at(i, j);
      if (r && std::abs(*r) >= threshold) {
        // Keep the lexicographically smaller label first for tie ordering.
        const bool swap = matrix.labels[j] < matrix.labels[i];
        pairs.push_back({swap ? j : i, swap ? i : j, std::abs(*r)});
        out.pairs.push_back({matrix.labels[swap ? j : i], matrix.labels[swap ? i : j], *r});
      }
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [&](const Pair& a, const Pair& b) {
    if (a.abs_r != b.abs_r) return a.abs_r > b.abs_r;
    if (matrix.labels[a.i] != matrix.labels[b.i]) return matrix.labels[a.i] < matrix.labels[b.i];
    return matrix.labels[a.j] < matrix.labels[b.j];
  });
  std::sort(out.pairs.begin(), out.pairs.end(), [](const CorrelatedPair& a, const CorrelatedPair& b) {
    if (std::abs(a.r) != std::abs(b.r)) return std::abs(a.r) > std::abs(b.r);
    return std::tie(a.a, a.b) < std::tie(b.a, b.b);
  });

  std::vector<bool> alive(p, true);
  auto mean_abs = [&](std::size_t x) {
    double sum = 0;
    std::size_t k = 0;
    for (std::size_t y = 0; y < p; ++y) {
      if (y == x || !alive[y] || !matrix.at(x, y)) continue;
      sum += std::abs(*matrix.at(x, y));
      ++k;
    }
    return k == 0 ? 0.0 : sum / static_cast<double>(k);
  };
  for (const auto& pr : pairs) {
    if (!alive[pr.i] || !alive[pr.j]) continue;
    const double mi = mean_abs(pr.i), mj = mean_abs(pr.j);
    std::size_t drop, keep;
    if (mi != mj) {
      drop = mi > mj ? pr.i : pr.j;
    } else {
      drop = matrix.labels[pr.i] > matrix.labels[pr.j] ? pr.i : pr.j;
    }
    keep = drop == pr.i ? pr.j : pr.i;
    alive[drop] = false;
    out.dropped.push_back({matrix.labels[drop], "correlated_with:" + matrix.labels[keep]});
  }
  for (std::size_t i = 0; i < p; ++i) {
    if (alive[i]) out.kept.push_back(matrix.labels[i]);
  }
  return out;
}

// --- chi-square ------------------------------------------------------------

ChiSelector ChiSelector::parse(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) throw ConfigError("chi selector must look like mode=value, got '" + std::string(text) + "'");
  const std::string_view mode = text.substr(0, eq);
  const std::string_view value = text.substr(eq + 1);
  ChiSelector s;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), s.param);
  if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(s.param)) {
    throw ConfigError("chi selector value '" + std::string(value) + "' is not a number");
  }
  if (mode == "numTopFeatures") {
    s.mode = ChiMode::NumTopFeatures;
    if (s.param < 0 || s.param != std::floor(s.param)) throw ConfigError("numTopFeatures needs a non-negative integer");
  } else if (mode == "percentile") {
    s.mode = ChiMode::Percentile;
  } else if (mode == "fpr") {
    s.mode = ChiMode::Fpr;
  } else if (mode == "fdr") {
    s.mode = ChiMode::Fdr;
  } else {
    throw ConfigError("unknown chi selector mode '" + std::string(mode) + "'");
  }
  if (s.mode != ChiMode::NumTopFeatures && (s.param < 0 || s.param > 1)) {
    throw ConfigError(std::string(mode) + " needs a value in [0, 1]");
  }
  return s;
}

std::string ChiSelector::describe() const {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, param);
  const std::string v(buf, res.ptr);
  switch (mode) {
    case ChiMode::NumTopFeatures: return "numTopFeatures=" + v;
    case ChiMode::Percentile: return "percentile=" + v;
    case ChiMode::Fpr: return "fpr=" + v;
    case ChiMode::Fdr: return "fdr=" + v;
  }
  return v;
}

ChiFeature chi_square_table(const std::vector<std::vector<double>>& counts) {
  std::vector<double> row_tot, col_tot;
  std::vector<std::size_t> rows, cols;
  const std::size_t nc = counts.empty() ? 0 : counts.front().size();
  col_tot.assign(nc, 0.0);
  double total = 0;
  for (const auto& row : counts) {
    double t = 0;
    for (std::size_t j = 0; j < nc; ++j) {
      t += row[j];
      col_tot[j] += row[j];
    }
    row_tot.push_back(t);
    total += t;
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (row_tot[i] > 0) rows.push_back(i);
  }
  for (std::size_t j = 0; j < nc; ++j) {
    if (col_tot[j] > 0) cols.push_back(j);
  }
  ChiFeature f;
  f.rows = static_cast<std::size_t>(total);
  if (rows.size() < 2 || cols.size() < 2) return f;
  double stat = 0;
  for (auto i : rows) {
    for (auto j : cols) {
      const double e = row_tot[i] * col_tot[j] / total;
      const double d = counts[i][j] - e;
      stat += d * d / e;
    }
  }
  f.statistic = stat;
  f.dof = (rows.size() - 1) * (cols.size() - 1);
  f.p_value = stats::chi_square_sf(stat, static_cast<double>(f.dof));
  return f;
}

std::vector<std::size_t> select_by_p_values(std::span<const double> p_values, const ChiSelector& selector) {
  std::vector<std::size_t> order(p_values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  const std::size_t m = order.size();
  std::size_t take = 0;
  switch (selector.mode) {
    case ChiMode::NumTopFeatures: take = std::min(m, static_cast<std::size_t>(selector.param)); break;
    case ChiMode::Percentile:
      take = std::min(m, static_cast<std::size_t>(std::ceil(selector.param * static_cast<double>(m) - 1e-9)));
      break;
    case ChiMode::Fpr:
      while (take < m && p_values[order[take]] < selector.param) ++take;
      break;
    case ChiMode::Fdr:
      for (std::size_t i = m; i >= 1; --i) {
        if (p_values[order[i - 1]] <= static_cast<double>(i) * selector.param / static_cast<double>(m)) {
          take = i;
          break;
        }
      }
      break;
  }
  order.resize(take);
  return order;
}

ChiSquareResult chi_square_select(const Frame& frame, std::span<const std::string> features, const std::string& label,
                                  const ChiSelector& selector) {
  const Column& lab = frame.column(label);
  std::map<std::string, std::size_t> label_index;
  std::vector<int> label_code(frame.row_count(), -1);
  for (std::size_t r = 0; r < lab.size(); ++r) {
    if (lab.is_null(r)) continue;
    auto [it, inserted] = label_index.try_emplace(lab.render(r), label_index.size());
    label_code[r] = static_cast<int>(it->second);
  }
  if (label_index.size() < 2) throw ProcessingError("label '" + label + "' is constant; no chi-square test possible");

  ChiSquareResult out;
  out.selector = selector;
  std::vector<double> p;
  for (const auto& name : features) {
    const Column& col = frame.column(name);
    std::map<std::string, std::size_t> cats;
    std::vector<std::vector<double>> table;
    for (std::size_t r = 0; r < col.size(); ++r) {
      if (col.is_null(r) || label_code[r] < 0) continue;
      auto [it, inserted] = cats.try_emplace(col.render(r), table.size());
      if (inserted) table.emplace_back(label_index.size(), 0.0);
      table[it->second][static_cast<std::size_t>(label_code[r])] += 1.0;
    }
    ChiFeature f = chi_square_table(table);
    f.name = name;
    p.push_back(f.p_value);
    out.features.push_back(std::move(f));
  }
  for (auto i : select_by_p_values(p, selector)) out.selected.push_back(out.features[i].name);
  return out;
}

// --- category partitioning --------------------------------------------------

std::vector<std::string> categories_of(const Column& column) {
  std::set<std::string> cats;
  for (std::size_t r = 0; r < column.size(); ++r) {
    if (!column.is_null(r)) cats.insert(column.render(r));
  }
  return {cats.begin(), cats.end()};
}

std::vector<CategoryPartition> partition_by_category(const Frame& frame, const std::string& column,
                                                     std::size_t max_categories) {
  const Column& col = frame.column(column);
  const auto cats = categories_of(col);
  const std::size_t n = cats.size();
  if (n > max_categories) {
    throw ProcessingError("column '" + column + "' has " + std::to_string(n) + " categories, more than the " +
                          std::to_string(max_categories) +
                          " allowed; pick a column with fewer categories or raise max_categories");
  }
  std::vector<std::string> rendered(col.size());
  for (std::size_t r = 0; r < col.size(); ++r) rendered[r] = col.render(r);
  const Frame base = frame.without_column(column);
  std::vector<CategoryPartition> out;
  if (n < 2) return out;
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
    std::set<std::string> in;
    std::string label;
    for (std::size_t k = 0; k < n; ++k) {
      if (mask & (std::size_t{1} << k)) {
        in.insert(cats[k]);
        label += (label.empty() ? "" : "+") + cats[k];
      }
    }
    ColumnBuilder b("in_S", ColumnKind::Int, col.size());
    for (std::size_t r = 0; r < col.size(); ++r) {
      if (col.is_null(r)) b.append_null();
      else b.append_int(in.contains(rendered[r]) ? 1 : 0);
    }
    Frame f = base.with_column(std::move(b).build()).renamed(frame.name() + "_" + column + "_in_" + label);
    out.push_back({{in.begin(), in.end()}, std::move(f)});
  }
  return out;
}

}  // namespace logflat
