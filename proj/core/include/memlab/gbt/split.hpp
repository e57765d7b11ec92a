#pragma once

#include <optional>
#include <span>

namespace memlab::gbt {

/// Optimal leaf value -G/(H+lambda) of the second-order objective.
/// Throws NumericalError when H + lambda <= 0.
double leaf_weight(double g_sum, double h_sum, double lambda);

/// 1/2 [GL^2/(HL+l) + GR^2/(HR+l) - (GL+GR)^2/(HL+HR+l)] - gamma.
double split_gain(double gl, double hl, double gr, double hr, double lambda, double gamma);

struct SplitSettings {
  double lambda = 1.0;
  double gamma = 0.0;
  double min_child_weight = 1.0;
};

struct SplitCandidate {
  double threshold = 0.0;  // rows with x < threshold go left
  double gain = 0.0;
  bool default_left = true;  // where missing values go
  double g_left = 0.0;
  double h_left = 0.0;
  double g_right = 0.0;
  double h_right = 0.0;
};

/// Exact greedy search over one feature. `values` is ascending with `g` and
/// `h` aligned to it; `missing_g` / `missing_h` are the gradient sums of rows
/// whose value is missing, which are tried on both sides.
///
/// Thresholds are midpoints of adjacent distinct values. Both children need
/// hessian mass >= min_child_weight. Returns nullopt unless the best gain is
/// positive; among equal gains the smaller threshold wins, then default-left.
std::optional<SplitCandidate> best_split(std::span<const double> values, std::span<const double> g,
                                         std::span<const double> h, const SplitSettings& settings,
                                         double missing_g = 0.0, double missing_h = 0.0);

/// As best_split, with the node totals (missing rows included) supplied by
/// the caller so every feature is scored against the same parent term.
std::optional<SplitCandidate> best_split_with_totals(std::span<const double> values, std::span<const double> g,
                                                     std::span<const double> h, const SplitSettings& settings,
                                                     double g_total, double h_total, double missing_g,
                                                     double missing_h);

}  // namespace memlab::gbt
