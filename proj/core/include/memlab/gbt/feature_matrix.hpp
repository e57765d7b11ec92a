#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace memlab::gbt {

/// In-memory marker for a missing feature value. Trees route it along the
/// default direction learned at each split. Every other value must be finite.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) noexcept { return v != v; }

/// Dense n x d feature matrix, row-major, one row per item.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  /// Throws InvalidInput on shape mismatch, duplicate item ids or infinite values.
  FeatureMatrix(std::vector<std::string> item_ids, std::size_t n_features, std::vector<double> values,
                std::vector<std::string> feature_names = {});

  std::size_t rows() const noexcept { return item_ids_.size(); }
  std::size_t cols() const noexcept { return n_features_; }
  double at(std::size_t row, std::size_t col) const { return values_[row * n_features_ + col]; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * n_features_, n_features_}; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<std::string>& item_ids() const noexcept { return item_ids_; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }

  std::optional<std::size_t> find(std::string_view item_id) const;
  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;

  bool operator==(const FeatureMatrix& other) const;

 private:
  std::vector<std::string> item_ids_;
  std::size_t n_features_ = 0;
  std::vector<double> values_;
  std::vector<std::string> feature_names_;
};

/// Columns of `a` followed by columns of `b`, rows in `a`'s order. Throws
/// InvalidInput unless both cover the same items.
FeatureMatrix concat_columns(const FeatureMatrix& a, const FeatureMatrix& b);

/// Per-column affine map x -> (x - shift) / scale, fitted as mean / population
/// std over present values (scale 1 for constant columns).
struct FeatureScaling {
  std::vector<double> shift;
  std::vector<double> scale;

  bool empty() const noexcept { return shift.empty(); }
  static FeatureScaling fit(const FeatureMatrix& x);
  double apply(std::size_t col, double v) const { return is_missing(v) ? v : (v - shift[col]) / scale[col]; }
  bool operator==(const FeatureScaling&) const = default;
};

/// CSV with header `item_id,<name0>,<name1>,...`. Empty, "NA", "NaN" or "nan"
/// cells are missing values.
FeatureMatrix read_features_csv(std::istream& in);
void write_features_csv(std::ostream& out, const FeatureMatrix& x);

/// Binary layout, little-endian:
///   "MLFM" magic, u32 n, u32 d, n*d f32 row-major (NaN = missing),
///   then optionally n item ids, each u32 byte length + UTF-8 bytes.
/// Without the id block, rows are named "0".."n-1". Throws FormatError on
/// bad magic or truncation.
FeatureMatrix read_features_binary(std::istream& in);
void write_features_binary(std::ostream& out, const FeatureMatrix& x);

/// Dispatches on the binary magic; anything else is parsed as CSV.
FeatureMatrix load_features(const std::filesystem::path& path);

}  // namespace memlab::gbt
