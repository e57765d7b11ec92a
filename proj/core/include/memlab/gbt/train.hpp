#pragma once

#include <span>
#include <vector>

#include "memlab/gbt/feature_matrix.hpp"
#include "memlab/gbt/model.hpp"

namespace memlab::gbt {

struct TrainingTrace {
  double initial_mse = 0.0;             // training MSE of the base score alone
  std::vector<double> train_mse;        // after each round, over the training rows
  std::vector<double> validation_mse;   // filled only with early stopping
  int best_round = 0;                   // number of trees kept
};

/// Squared-error boosting with g = prediction - y and h = 1. Trees grow
/// level by level with exact greedy splits over the rows and columns sampled
/// for that round. Deterministic given params.seed.
///
/// Throws InvalidInput when fewer than two rows, a label count mismatch,
/// non-finite labels or invalid params.
GbtModel train(const FeatureMatrix& x, std::span<const double> y, const GbtParams& params,
               TrainingTrace* trace = nullptr);

}  // namespace memlab::gbt
