#include "rfflab/classifier.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace rfflab {

std::string knn_classify(std::span<const LabeledFeature> train, double qx, double qy, int k) {
  if (train.empty()) throw InputSizeError("knn_classify: empty training set");
  if (k < 1 || static_cast<std::size_t>(k) > train.size()) {
    throw ConfigError("knn_classify: k must lie in [1, " + std::to_string(train.size()) + "]");
  }
  std::set<std::string_view> labels;
  for (const auto& f : train) labels.insert(f.label);
  if (labels.size() == 2 && k % 2 == 0) {
    throw ConfigError("knn_classify: k must be odd for two classes");
  }

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> dist(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    dist[i] = std::hypot(train[i].x - qx, train[i].y - qy);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });

  std::map<std::string_view, int> votes;
  for (int i = 0; i < k; ++i) ++votes[train[order[static_cast<std::size_t>(i)]].label];
  int best = 0;
  for (const auto& [label, count] : votes) best = std::max(best, count);
  for (int i = 0; i < k; ++i) {
    const auto& label = train[order[static_cast<std::size_t>(i)]].label;
    if (votes[label] == best) return label;
  }
  return train[order.front()].label;  // unreachable
}

double evaluate_split(const SamplesByClass& samples, int k, Seed split_seed) {
  if (samples.empty()) throw InputSizeError("evaluate_split: no classes");
  std::mt19937_64 rng(split_seed);
  std::vector<LabeledFeature> train;
  std::vector<LabeledFeature> test;
  for (const auto& cls : samples) {
    if (cls.size() < 2 || cls.size() % 2 != 0 || cls.size() != samples.front().size()) {
      throw InputSizeError("evaluate_split: every class needs the same even, non-zero count");
    }
    std::vector<std::size_t> idx(cls.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t half = cls.size() / 2;
    for (std::size_t i = 0; i < cls.size(); ++i) (i < half ? train : test).push_back(cls[idx[i]]);
  }
  std::size_t correct = 0;
  for (const auto& q : test) correct += knn_classify(train, q.x, q.y, k) == q.label ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

double separability_ratio(const std::vector<LabeledFeature>& a,
                          const std::vector<LabeledFeature>& b) {
  if (a.size() < 2 || b.size() < 2) {
    throw InputSizeError("separability_ratio: each class needs at least two samples");
  }
  auto stats = [](const std::vector<LabeledFeature>& s) {
    double mx = 0.0;
    double my = 0.0;
    for (const auto& f : s) {
      mx += f.x;
      my += f.y;
    }
    mx /= static_cast<double>(s.size());
    my /= static_cast<double>(s.size());
    double ss = 0.0;
    for (const auto& f : s) ss += (f.x - mx) * (f.x - mx) + (f.y - my) * (f.y - my);
    return std::array<double, 3>{mx, my, ss / static_cast<double>(s.size() - 1)};
  };
  const auto sa = stats(a);
  const auto sb = stats(b);
  const double between = std::hypot(sa[0] - sb[0], sa[1] - sb[1]);
  const double pooled = std::sqrt(0.5 * (sa[2] + sb[2]));
  return pooled > 0.0 ? between / pooled : std::numeric_limits<double>::infinity();
}

}  // namespace rfflab
