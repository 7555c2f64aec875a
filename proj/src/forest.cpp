#include "logflat/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "logflat/error.hpp"
#include "logflat/parallel.hpp"
#include "logflat/select.hpp"

namespace logflat {

namespace {

constexpr double kMinGain = 1e-12;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double gini(const std::vector<double>& counts, double n) {
  if (n <= 0) return 0.0;
  double sq = 0;
  for (double c : counts) sq += (c / n) * (c / n);
  return 1.0 - sq;
}

struct Split {
  int feature = -1;
  bool categorical = false;
  double threshold = 0;
  double impurity = std::numeric_limits<double>::infinity();  // weighted child impurity
};

class Grower {
 public:
  Grower(const TrainingSet& data, const TreeOptions& options, std::size_t per_split, std::uint64_t seed)
      : data_(data), options_(options), per_split_(per_split), rng_(seed), classes_(data.classes.size()) {}

  void grow(std::vector<DecisionTree::Node>& nodes, std::vector<double>& decrease, std::vector<std::size_t> rows) {
    decrease.assign(data_.features.size(), 0.0);
    build(nodes, decrease, std::move(rows), 0);
  }

 private:
  int build(std::vector<DecisionTree::Node>& nodes, std::vector<double>& decrease, std::vector<std::size_t> rows,
            std::size_t depth) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    std::vector<double> counts(classes_, 0.0);
    for (auto r : rows) counts[static_cast<std::size_t>(data_.y[r])] += 1.0;
    const double n = static_cast<double>(rows.size());
    nodes[static_cast<std::size_t>(id)].prediction =
        static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    const double impurity = gini(counts, n);
    if (depth >= options_.max_depth || rows.size() < options_.min_samples_split || impurity <= 0.0) return id;

    const Split best = best_split(rows, impurity);
    if (best.feature < 0 || impurity - best.impurity <= kMinGain) return id;

    std::vector<std::size_t> left, right;
    const auto& x = data_.x[static_cast<std::size_t>(best.feature)];
    for (auto r : rows) {
      const bool go_left = best.categorical ? x[r] == best.threshold : x[r] <= best.threshold;
      (go_left ? left : right).push_back(r);
    }
    decrease[static_cast<std::size_t>(best.feature)] += n * (impurity - best.impurity);
    rows.clear();
    rows.shrink_to_fit();
    {
      auto& node = nodes[static_cast<std::size_t>(id)];
      node.feature = best.feature;
      node.categorical = best.categorical;
      node.threshold = best.threshold;
    }
    const int l = build(nodes, decrease, std::move(left), depth + 1);
    const int r = build(nodes, decrease, std::move(right), depth + 1);
    nodes[static_cast<std::size_t>(id)].left = l;
    nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> all(data_.features.size());
    std::iota(all.begin(), all.end(), 0);
    if (per_split_ >= all.size()) return all;
    for (std::size_t i = 0; i < per_split_; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, all.size() - 1);
      std::swap(all[i], all[pick(rng_)]);
    }
    all.resize(per_split_);
    std::sort(all.begin(), all.end());
    return all;
  }

  Split best_split(const std::vector<std::size_t>& rows, double) {
    Split best;
    const double n = static_cast<double>(rows.size());
    for (auto f : candidate_features()) {
      const auto& x = data_.x[f];
      if (data_.categorical[f]) {
        std::map<double, std::vector<double>> per_cat;
        std::vector<double> total(classes_, 0.0);
        for (auto r : rows) {
          total[static_cast<std::size_t>(data_.y[r])] += 1.0;
          if (x[r] >= 0) {
            auto& c = per_cat[x[r]];
            if (c.empty()) c.assign(classes_, 0.0);
            c[static_cast<std::size_t>(data_.y[r])] += 1.0;
          }
        }
        for (const auto& [cat, in] : per_cat) {
          const double nl = std::accumulate(in.begin(), in.end(), 0.0);
          const double nr = n - nl;
          if (nl <= 0 || nr <= 0) continue;
          std::vector<double> out(classes_);
          for (std::size_t k = 0; k < classes_; ++k) out[k] = total[k] - in[k];
          const double imp = (nl * gini(in, nl) + nr * gini(out, nr)) / n;
          if (imp < best.impurity - kMinGain) best = {static_cast<int>(f), true, cat, imp};
        }
        continue;
      }
      std::vector<std::pair<double, int>> vals;
      std::vector<double> right(classes_, 0.0);
      for (auto r : rows) {
        right[static_cast<std::size_t>(data_.y[r])] += 1.0;
        if (!std::isnan(x[r])) vals.emplace_back(x[r], data_.y[r]);
      }
      std::sort(vals.begin(), vals.end());
      std::vector<double> left(classes_, 0.0);
      double nl = 0;
      for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        left[static_cast<std::size_t>(vals[i].second)] += 1.0;
        right[static_cast<std::size_t>(vals[i].second)] -= 1.0;
        nl += 1.0;
        if (vals[i].first == vals[i + 1].first) continue;
        const double nr = n - nl;
        const double imp = (nl * gini(left, nl) + nr * gini(right, nr)) / n;
        if (imp < best.impurity - kMinGain) {
          double t = vals[i].first + (vals[i + 1].first - vals[i].first) / 2.0;
          if (!(t < vals[i + 1].first)) t = vals[i].first;
          best = {static_cast<int>(f), false, t, imp};
        }
      }
    }
    return best;
  }

  const TrainingSet& data_;
  const TreeOptions& options_;
  std::size_t per_split_;
  std::mt19937_64 rng_;
  std::size_t classes_;
};

std::size_t default_per_split(const TreeOptions& options, std::size_t p) {
  if (options.features_per_split) return std::clamp<std::size_t>(*options.features_per_split, 1, p);
  if (options.n_trees <= 1) return p;
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p))));
}

}  // namespace

TrainingSet TrainingSet::from_frame(const Frame& frame, std::span<const std::string> features, const std::string& label) {
  if (features.empty()) throw ProcessingError("tree importance needs at least one feature");
  const Column& lab = frame.column(label);
  TrainingSet t;
  t.classes = categories_of(lab);
  if (t.classes.size() < 2) throw ProcessingError("label '" + label + "' is constant; nothing to learn");
  std::map<std::string, int> class_index;
  for (std::size_t i = 0; i < t.classes.size(); ++i) class_index[t.classes[i]] = static_cast<int>(i);
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < lab.size(); ++r) {
    if (lab.is_null(r)) continue;
    rows.push_back(r);
    t.y.push_back(class_index[lab.render(r)]);
  }
  for (const auto& name : features) {
    const Column& col = frame.column(name);
    const bool cat = col.kind() == ColumnKind::Text;
    t.features.push_back(name);
    t.categorical.push_back(cat);
    std::vector<double> x;
    x.reserve(rows.size());
    if (cat) {
      std::map<std::string, double> codes;
      for (const auto& c : categories_of(col)) codes.emplace(c, static_cast<double>(codes.size()));
      for (auto r : rows) x.push_back(col.is_null(r) ? -1.0 : codes[std::string(col.text(r))]);
    } else {
      for (auto r : rows) x.push_back(col.is_null(r) ? std::numeric_limits<double>::quiet_NaN() : col.numeric(r));
    }
    t.x.push_back(std::move(x));
  }
  return t;
}

DecisionTree DecisionTree::fit(const TrainingSet& data, std::span<const std::size_t> rows, const TreeOptions& options,
                               std::uint64_t seed) {
  DecisionTree tree;
  Grower grower(data, options, default_per_split(options, data.features.size()), seed);
  grower.grow(tree.nodes_, tree.decrease_, std::vector<std::size_t>(rows.begin(), rows.end()));
  return tree;
}

int DecisionTree::predict(const TrainingSet& data, std::size_t row) const {
  int id = 0;
  while (nodes_[static_cast<std::size_t>(id)].feature >= 0) {
    const auto& node = nodes_[static_cast<std::size_t>(id)];
    const double v = data.x[static_cast<std::size_t>(node.feature)][row];
    const bool left = node.categorical ? v == node.threshold : v <= node.threshold;
    id = left ? node.left : node.right;
  }
  return nodes_[static_cast<std::size_t>(id)].prediction;
}

ImportanceResult tree_importance(const Frame& frame, std::span<const std::string> features, const std::string& label,
                                 const TreeOptions& options) {
  if (options.n_trees < 1) throw ConfigError("n_trees must be at least 1");
  const TrainingSet data = TrainingSet::from_frame(frame, features, label);
  const std::size_t n = data.rows();
  ImportanceResult out;
  out.label = label;
  out.features = data.features;
  out.trees.resize(options.n_trees);
  detail::parallel_chunks(options.n_trees, static_cast<unsigned>(options.workers),
                          [&](std::size_t, std::size_t b, std::size_t e) {
                            for (std::size_t t = b; t < e; ++t) {
                              const std::uint64_t seed = splitmix64(options.seed + 0x9e3779b97f4a7c15ull * t);
                              std::vector<std::size_t> rows(n);
                              if (options.bootstrap) {
                                std::mt19937_64 rng(splitmix64(seed));
                                std::uniform_int_distribution<std::size_t> pick(0, n - 1);
                                for (auto& r : rows) r = pick(rng);
                                std::sort(rows.begin(), rows.end());
                              } else {
                                std::iota(rows.begin(), rows.end(), 0);
                              }
                              out.trees[t] = DecisionTree::fit(data, rows, options, seed);
                            }
                          });

  out.importance.assign(data.features.size(), 0.0);
  for (const auto& tree : out.trees) {
    const auto& d = tree.impurity_decrease();
    const double sum = std::accumulate(d.begin(), d.end(), 0.0);
    if (sum <= 0) continue;
    for (std::size_t f = 0; f < d.size(); ++f) out.importance[f] += d[f] / sum;
  }
  const double total = std::accumulate(out.importance.begin(), out.importance.end(), 0.0);
  if (total > 0) {
    for (auto& v : out.importance) v /= total;
  }
  return out;
}

int predict(const ImportanceResult& result, const TrainingSet& data, std::size_t row) {
  std::vector<std::size_t> votes(data.classes.size(), 0);
  for (const auto& t : result.trees) ++votes[static_cast<std::size_t>(t.predict(data, row))];
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

std::vector<ImportanceResult> pseudo_label_importance(const Frame& frame, std::span<const std::string> columns,
                                                      std::size_t max_categories, const TreeOptions& options) {
  std::vector<ImportanceResult> out;
  for (const auto& label : columns) {
    const std::size_t n = categories_of(frame.column(label)).size();
    if (n < 2 || n > max_categories) continue;
    std::vector<std::string> features;
    for (const auto& c : columns) {
      if (c != label) features.push_back(c);
    }
    if (features.empty()) continue;
    out.push_back(tree_importance(frame, features, label, options));
  }
  return out;
}

}  // namespace logflat
