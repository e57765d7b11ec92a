#include "memlab/gbt/split.hpp"

#include <cmath>

#include "memlab/error.hpp"

namespace memlab::gbt {
namespace {

double score(double g, double h, double lambda) { return g * g / (h + lambda); }

double midpoint(double a, double b) {
  const double mid = a + (b - a) / 2.0;
  return mid > a ? mid : b;
}

}  // namespace

double leaf_weight(double g_sum, double h_sum, double lambda) {
  const double denom = h_sum + lambda;
  if (!(denom > 0.0)) fail(ErrorCode::kNumericalError, "leaf weight undefined: H + lambda <= 0");
  return -g_sum / denom;
}

double split_gain(double gl, double hl, double gr, double hr, double lambda, double gamma) {
  return 0.5 * (score(gl, hl, lambda) + score(gr, hr, lambda) - score(gl + gr, hl + hr, lambda)) - gamma;
}

std::optional<SplitCandidate> best_split(std::span<const double> values, std::span<const double> g,
                                         std::span<const double> h, const SplitSettings& settings, double missing_g,
                                         double missing_h) {
  double g_total = missing_g;
  double h_total = missing_h;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g_total += g[i];
    h_total += h[i];
  }
  return best_split_with_totals(values, g, h, settings, g_total, h_total, missing_g, missing_h);
}

std::optional<SplitCandidate> best_split_with_totals(std::span<const double> values, std::span<const double> g,
                                                     std::span<const double> h, const SplitSettings& settings,
                                                     double g_total, double h_total, double missing_g,
                                                     double missing_h) {
  if (values.size() != g.size() || values.size() != h.size()) {
    fail(ErrorCode::kInvalidInput, "feature column, gradients and hessians differ in length");
  }
  const bool has_missing = missing_h != 0.0 || missing_g != 0.0;
  std::optional<SplitCandidate> best;
  double gl = 0.0;
  double hl = 0.0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    gl += g[i];
    hl += h[i];
    if (!(values[i] < values[i + 1])) continue;
    for (const bool left : {true, false}) {
      if (!left && !has_missing) break;
      const double cand_gl = left ? gl + missing_g : gl;
      const double cand_hl = left ? hl + missing_h : hl;
      const double cand_gr = g_total - cand_gl;
      const double cand_hr = h_total - cand_hl;
      if (cand_hl < settings.min_child_weight || cand_hr < settings.min_child_weight) continue;
      if (!(cand_hl + settings.lambda > 0.0) || !(cand_hr + settings.lambda > 0.0)) continue;
      const double gain = split_gain(cand_gl, cand_hl, cand_gr, cand_hr, settings.lambda, settings.gamma);
      if (!std::isfinite(gain) || gain <= 0.0) continue;
      if (!best || gain > best->gain) {
        best = SplitCandidate{midpoint(values[i], values[i + 1]), gain, left, cand_gl, cand_hl, cand_gr, cand_hr};
      }
    }
  }
  return best;
}

}  // namespace memlab::gbt
