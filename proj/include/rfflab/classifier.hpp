#pragma once

#include <span>
#include <string>
#include <vector>

#include "rfflab/common.hpp"

namespace rfflab {

struct LabeledFeature {
  double x = 0.0;
  double y = 0.0;
  std::string label;
};

/// Majority vote among the k nearest training points (Euclidean). Equal
/// distances keep training-set order; a vote tie between labels goes to the
/// label of the nearest tied neighbour.
std::string knn_classify(std::span<const LabeledFeature> train, double qx, double qy, int k);

/// Samples grouped by class; every class must hold the same even count.
using SamplesByClass = std::vector<std::vector<LabeledFeature>>;

/// Random half/half split inside every class (seeded), k-NN on the training
/// halves, fraction of test points classified correctly.
double evaluate_split(const SamplesByClass& samples, int k, Seed split_seed);

/// Distance between the two class means divided by the pooled within-class
/// standard deviation (2-D, unbiased per class).
double separability_ratio(const std::vector<LabeledFeature>& a,
                          const std::vector<LabeledFeature>& b);

}  // namespace rfflab
