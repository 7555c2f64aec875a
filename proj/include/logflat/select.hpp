#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "logflat/frame.hpp"

namespace logflat {

// Reason codes: single_valued, all_null, correlated_with:<col>, not_selected_chi.
struct DroppedColumn {
  std::string column;
  std::string reason;
  friend bool operator==(const DroppedColumn&, const DroppedColumn&) = default;
};

struct PruneOutcome {
  Frame frame;
  std::vector<DroppedColumn> dropped;
};

// Removes every column with at most one distinct non-null value.
PruneOutcome drop_single_valued(const Frame& frame);

// --- namespace correlation -------------------------------------------------

class AbbreviationTable {
 public:
  // proto, conn, src, dst, addr, cmd, msg, prot.
  static AbbreviationTable defaults();
  // `short=long` lines; blank lines and lines starting with '#' ignored.
  static AbbreviationTable parse(std::string_view text);
  static AbbreviationTable load(const std::string& path);

  void add(std::string short_form, std::string long_form);
  void merge(const AbbreviationTable& other);
  std::string expand(const std::string& token) const;
  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

// Lowercased, camelCase and snake_case split, digits and punctuation as
// separators, abbreviations expanded.
std::vector<std::string> name_tokens(std::string_view name, const AbbreviationTable& table);
std::string expanded_name(std::string_view name, const AbbreviationTable& table);

struct ColumnSample {
  std::string name;
  std::set<std::string> values;  // distinct rendered non-null values
};

// Distinct values per column name across frames, at most `limit` each.
// Columns named in `skip` are left out.
std::vector<ColumnSample> sample_columns(std::span<const Frame> frames, std::size_t limit = 1000,
                                         const std::set<std::string>& skip = {});

struct MergeCandidate {
  std::string left;
  std::string right;
  double name_score = 0;
  double value_score = 0;
  std::string canonical;
};

struct MergeOptions {
  double name_threshold = 0.5;
  double value_threshold = 0.5;
  AbbreviationTable abbreviations = AbbreviationTable::defaults();
};

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

std::vector<MergeCandidate> propose_namespace_merges(std::span<const ColumnSample> columns,
                                                     const MergeOptions& options = {});

struct AppliedMerge {
  std::string canonical;
  std::vector<std::string> sources;  // sorted
  std::size_t conflicts = 0;         // rows where two sources disagreed
};

struct MergeOutcome {
  std::vector<Frame> frames;
  std::vector<AppliedMerge> merges;
};

// Candidates are joined transitively; each group takes the longest expanded
// name among its members (ties: lexicographically smaller). Within a frame,
// group members coalesce left to right, first non-null wins.
MergeOutcome apply_merges(std::span<const Frame> frames, std::span<const MergeCandidate> candidates,
                          const AbbreviationTable& table = AbbreviationTable::defaults());

// --- Pearson ---------------------------------------------------------------

struct CorrelationMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::optional<double>>> r;

  std::size_t size() const noexcept { return labels.size(); }
  const std::optional<double>& at(std::size_t i, std::size_t j) const { return r[i][j]; }
};

// Sample Pearson r over pairwise-complete rows. Undefined (nullopt) when
// fewer than two complete rows exist or either side is constant over them.
CorrelationMatrix pearson_matrix(const Frame& frame, std::span<const std::string> columns, std::size_t workers = 1);

struct CorrelatedPair {
  std::string a;
  std::string b;
  double r;
};

struct CorrelationPrune {
  std::vector<std::string> kept;
  std::vector<DroppedColumn> dropped;  // reason correlated_with:<partner>
  std::vector<CorrelatedPair> pairs;   // every defined pair with |r| >= threshold
};

CorrelationPrune prune_by_correlation(const CorrelationMatrix& matrix, double threshold);

// --- chi-square ------------------------------------------------------------

enum class ChiMode { NumTopFeatures, Percentile, Fpr, Fdr };

struct ChiSelector {
  ChiMode mode = ChiMode::NumTopFeatures;
  double param = 50;

  // numTopFeatures=<k> | percentile=<f> | fpr=<alpha> | fdr=<q>
  static ChiSelector parse(std::string_view text);
  std::string describe() const;
};

struct ChiFeature {
  std::string name;
  double statistic = 0;
  std::size_t dof = 0;
  double p_value = 1;
  std::size_t rows = 0;  // complete rows used
};

struct ChiSquareResult {
  std::vector<ChiFeature> features;  // input order
  std::vector<std::string> selected;
  ChiSelector selector;
};

// Pearson chi-square statistic of an r x c table of counts. Rows or columns
// with zero total are ignored.
ChiFeature chi_square_table(const std::vector<std::vector<double>>& counts);

// Indices of the selected tests, ordered by ascending p (ties: input order).
std::vector<std::size_t> select_by_p_values(std::span<const double> p_values, const ChiSelector& selector);

ChiSquareResult chi_square_select(const Frame& frame, std::span<const std::string> features, const std::string& label,
                                  const ChiSelector& selector);

// --- category partitioning --------------------------------------------------

struct CategoryPartition {
  std::vector<std::string> subset;  // categories in S, sorted
  Frame frame;                      // input minus the column, plus int `in_S`
};

// One frame per non-empty proper subset of the column's categories
// (2^n - 2 frames). Refuses n > max_categories.
std::vector<CategoryPartition> partition_by_category(const Frame& frame, const std::string& column,
                                                     std::size_t max_categories = 4);

// Distinct non-null values of a column in sorted rendered form.
std::vector<std::string> categories_of(const Column& column);

}  // namespace logflat
