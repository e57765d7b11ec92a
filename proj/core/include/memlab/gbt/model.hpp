#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "memlab/gbt/feature_matrix.hpp"

namespace memlab::gbt {

struct GbtParams {
  int n_rounds = 500;
  int max_depth = 6;
  double learning_rate = 0.05;  // eta
  double lambda = 1.0;
  double gamma = 0.0;
  double min_child_weight = 1.0;
  double subsample = 0.8;
  double colsample = 0.8;
  std::optional<double> base_score;  // mean of the labels when unset
  std::uint64_t seed = 0;
  /// 0 disables early stopping. Otherwise a holdout of validation_fraction
  /// of the rows is scored every round and training stops after this many
  /// rounds without improvement, keeping the best prefix.
  int early_stopping_rounds = 0;
  double validation_fraction = 0.2;
  bool standardize = false;  // per-feature mean/std scaling fitted on the training rows

  /// Throws InvalidInput when a field is outside its documented range.
  void validate() const;
  bool operator==(const GbtParams&) const = default;
};

/// Internal nodes have feature >= 0; leaves have feature == -1 and use `weight`.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  bool default_left = true;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double weight = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // root at index 0

  /// Raw leaf weight reached by `row`, already in the model's feature scale.
  double evaluate(std::span<const double> row) const;
  int depth() const;
  bool operator==(const Tree&) const = default;
};

class GbtModel {
 public:
  GbtModel() = default;
  GbtModel(std::size_t n_features, double base_score, GbtParams params, FeatureScaling scaling,
           std::vector<Tree> trees);

  std::size_t n_features() const noexcept { return n_features_; }
  double base_score() const noexcept { return base_score_; }
  const GbtParams& params() const noexcept { return params_; }
  const FeatureScaling& scaling() const noexcept { return scaling_; }
  const std::vector<Tree>& trees() const noexcept { return trees_; }

  /// base_score + eta * sum of leaf weights. Throws InvalidInput on a
  /// feature-count mismatch.
  double predict_row(std::span<const double> row) const;
  std::vector<double> predict(const FeatureMatrix& x) const;

  bool operator==(const GbtModel&) const = default;

 private:
  std::size_t n_features_ = 0;
  double base_score_ = 0.0;
  GbtParams params_;
  FeatureScaling scaling_;
  std::vector<Tree> trees_;
};

/// Little-endian binary: "MLGB" magic, u32 format version, the parameter
/// snapshot, base score, scaling, trees (u32 node count, then per node
/// i32 feature, f64 threshold, u8 default_left, i32 left, i32 right,
/// f64 weight), and a trailing FNV-1a 64 checksum of everything before it.
std::string serialize(const GbtModel& model);
/// Throws FormatError on bad magic, unknown version, truncation, checksum
/// mismatch or structurally invalid trees.
GbtModel deserialize(std::string_view bytes);

void save_model(const GbtModel& model, const std::filesystem::path& path);
GbtModel load_model(const std::filesystem::path& path);

inline constexpr std::uint32_t kModelFormatVersion = 1;

}  // namespace memlab::gbt
