#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "logflat/frame.hpp"

namespace logflat {

struct TreeOptions {
  std::size_t n_trees = 1;
  std::size_t max_depth = 5;
  std::size_t min_samples_split = 2;
  bool bootstrap = false;
  // Features tried per split; default all for one tree, ceil(sqrt(p)) for a forest.
  std::optional<std::size_t> features_per_split;
  std::uint64_t seed = 42;
  std::size_t workers = 1;
};

// Encoded training data: numeric features as doubles (NaN for null), text and
// bool features as category codes (-1 for null). Rows with a null label are
// left out.
struct TrainingSet {
  std::vector<std::string> features;
  std::vector<bool> categorical;
  std::vector<std::vector<double>> x;  // x[feature][row]
  std::vector<int> y;
  std::vector<std::string> classes;

  static TrainingSet from_frame(const Frame& frame, std::span<const std::string> features, const std::string& label);
  std::size_t rows() const noexcept { return y.size(); }
};

class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1: leaf
    bool categorical = false;
    double threshold = 0;  // numeric: go left when x <= threshold; categorical: left when x == threshold
    int left = -1;
    int right = -1;
    int prediction = 0;
  };

  // Grows a CART tree with Gini impurity on the given row indices.
  static DecisionTree fit(const TrainingSet& data, std::span<const std::size_t> rows, const TreeOptions& options,
                          std::uint64_t seed);

  int predict(const TrainingSet& data, std::size_t row) const;
  // Total weighted impurity decrease per feature (unnormalized).
  const std::vector<double>& impurity_decrease() const noexcept { return decrease_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

 private:
  std::vector<Node> nodes_;
  std::vector<double> decrease_;
};

struct ImportanceResult {
  std::string label;
  std::vector<std::string> features;
  std::vector<double> importance;  // sums to 1, or all zero when no split helped
  std::vector<DecisionTree> trees;
};

// Per-tree importances are normalized, averaged over trees and renormalized.
ImportanceResult tree_importance(const Frame& frame, std::span<const std::string> features, const std::string& label,
                                 const TreeOptions& options);

// Majority vote of the trees in `result` for one encoded row.
int predict(const ImportanceResult& result, const TrainingSet& data, std::size_t row);

// Each column with 2..max_categories categories serves once as the label,
// with every other listed column as features.
std::vector<ImportanceResult> pseudo_label_importance(const Frame& frame, std::span<const std::string> columns,
                                                      std::size_t max_categories, const TreeOptions& options);

}  // namespace logflat
