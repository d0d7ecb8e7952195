#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>
#include <vector>

#include "misspec/estimators.hpp"
#include "misspec/rng.hpp"

namespace misspec {

namespace {

struct Split {
  int feature = -1;
  Eigen::Index position = 0;  // rows [begin, begin + position) go left
  double threshold = 0.0;
  double gain = 0.0;
};

// CART builder over one bootstrap sample. For each feature `order_[f]`
// holds sample indices sorted by that feature; a node owns the same
// [begin, end) range in every ordering, and splits partition each range
// stably so the orderings stay sorted.
class TreeBuilder {
 public:
  TreeBuilder(const Mat& features, const Vec& y, std::vector<Eigen::Index> sample,
              const ForestParams& params)
      : features_(features), y_(y), sample_(std::move(sample)), params_(params) {
    const auto m = sample_.size();
    goes_left_.assign(m, 0);
    scratch_.resize(m);
    order_.resize(static_cast<std::size_t>(features_.cols()));
    for (Eigen::Index f = 0; f < features_.cols(); ++f) {
      auto& ord = order_[static_cast<std::size_t>(f)];
      ord.resize(m);
      std::iota(ord.begin(), ord.end(), std::size_t{0});
      std::stable_sort(ord.begin(), ord.end(), [&](std::size_t l, std::size_t r) {
        return value(l, f) < value(r, f);
      });
    }
  }

  RegressionTree build() {
    RegressionTree tree;
    grow(tree, 0, sample_.size(), 0);
    return tree;
  }

 private:
  double value(std::size_t s, Eigen::Index f) const { return features_(sample_[s], f); }
  double target(std::size_t s) const { return y_(sample_[s]); }

  int grow(RegressionTree& tree, std::size_t begin, std::size_t end, int depth) {
    const auto count = static_cast<Eigen::Index>(end - begin);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
      const double t = target(order_[0][k]);
      sum += t;
      sum_sq += t * t;
    }
    const int id = static_cast<int>(tree.nodes.size());
    TreeNode node;
    node.value = sum / static_cast<double>(count);
    node.count = count;
    tree.nodes.push_back(node);

    if (depth >= params_.max_depth || count < 2 * params_.min_leaf) return id;
    // Gains below the rounding level of the node's sum of squares are noise.
    const Split split = best_split(begin, end, sum, 1e-12 * sum_sq);
    if (split.feature < 0) return id;

    const auto& chosen = order_[static_cast<std::size_t>(split.feature)];
    for (std::size_t k = begin; k < end; ++k) goes_left_[chosen[k]] = k < begin + split.position;
    for (auto& ord : order_) {
      auto out = scratch_.begin();
      for (std::size_t k = begin; k < end; ++k) {
        if (goes_left_[ord[k]]) *out++ = ord[k];
      }
      for (std::size_t k = begin; k < end; ++k) {
        if (!goes_left_[ord[k]]) *out++ = ord[k];
      }
      std::copy(scratch_.begin(), out, ord.begin() + static_cast<std::ptrdiff_t>(begin));
    }
    const std::size_t mid = begin + static_cast<std::size_t>(split.position);
    const int left = grow(tree, begin, mid, depth + 1);
    const int right = grow(tree, mid, end, depth + 1);
    auto& parent = tree.nodes[static_cast<std::size_t>(id)];
    parent.feature = split.feature;
    parent.threshold = split.threshold;
    parent.left = left;
    parent.right = right;
    return id;
  }

  // Maximizes the reduction in squared error, sumL^2/nL + sumR^2/nR - sum^2/n.
  Split best_split(std::size_t begin, std::size_t end, double sum, double min_gain) const {
    const auto count = static_cast<Eigen::Index>(end - begin);
    const double base = sum * sum / static_cast<double>(count);
    Split best;
    for (Eigen::Index f = 0; f < features_.cols(); ++f) {
      const auto& ord = order_[static_cast<std::size_t>(f)];
      double left_sum = 0.0;
      for (Eigen::Index k = 1; k < count; ++k) {
        const std::size_t prev = ord[begin + static_cast<std::size_t>(k) - 1];
        left_sum += target(prev);
        if (k < params_.min_leaf || count - k < params_.min_leaf) continue;
        const double lo = value(prev, f);
        const double hi = value(ord[begin + static_cast<std::size_t>(k)], f);
        if (!(lo < hi)) continue;
        const double right_sum = sum - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(k) +
                            right_sum * right_sum / static_cast<double>(count - k) - base;
        if (gain > best.gain && gain > min_gain) {
          double threshold = lo + 0.5 * (hi - lo);
          if (!(threshold < hi)) threshold = lo;
          best = {static_cast<int>(f), k, threshold, gain};
        }
      }
    }
    return best;
  }

  const Mat& features_;
  const Vec& y_;
  std::vector<Eigen::Index> sample_;
  const ForestParams& params_;
  std::vector<std::vector<std::size_t>> order_;
  std::vector<char> goes_left_;
  std::vector<std::size_t> scratch_;
};

}  // namespace

FittedModel fit_forest(const Dataset& data, FeatureSet features, const ForestParams& params,
                       std::uint64_t seed) {
  const Eigen::Index n = data.size();
  if (params.trees < 1 || params.max_depth < 0 || params.min_leaf < 1 ||
      !(params.bootstrap_ratio > 0.0)) {
    throw ValidationError("invalid forest hyperparameters");
  }
  if (n < 2 * params.min_leaf) throw ValidationError("forest needs at least 2 * min_leaf rows");
  const Mat x = feature_matrix(data.x, features);
  const auto draws = std::max<Eigen::Index>(
      params.min_leaf, static_cast<Eigen::Index>(std::llround(params.bootstrap_ratio * static_cast<double>(n))));

  Forest forest;
  forest.trees.resize(static_cast<std::size_t>(params.trees));
  auto build_tree = [&](std::size_t t) {
    CounterRng rng(derive_seed(seed, t));
    std::vector<Eigen::Index> sample(static_cast<std::size_t>(draws));
    for (auto& s : sample) s = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    forest.trees[t] = TreeBuilder(x, data.y, std::move(sample), params).build();
  };

  const int workers = std::clamp(params.threads, 1, params.trees);
  if (workers == 1) {
    for (std::size_t t = 0; t < forest.trees.size(); ++t) build_tree(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < forest.trees.size(); t = next++) build_tree(t);
      });
    }
  }

  FittedModel model;
  model.family = ModelFamily::forest;
  model.features = features;
  model.forest = std::move(forest);
  return model;
}

}  // namespace misspec
