#include "memlab/gbt/feature_matrix.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "memlab/error.hpp"
#include "memlab/io/csv.hpp"

namespace memlab::gbt {
namespace {

constexpr char kMagic[4] = {'M', 'L', 'F', 'M'};

template <typename T>
T from_le(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <typename T>
void put(std::ostream& out, T v) {
  v = from_le(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::istream& in, T& v) {
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) return false;
  v = from_le(v);
  return true;
}

bool is_missing_token(std::string_view s) { return s.empty() || s == "NA" || s == "NaN" || s == "nan"; }

}  // namespace

FeatureMatrix::FeatureMatrix(std::vector<std::string> item_ids, std::size_t n_features, std::vector<double> values,
                             std::vector<std::string> feature_names)
    : item_ids_(std::move(item_ids)),
      n_features_(n_features),
      values_(std::move(values)),
      feature_names_(std::move(feature_names)) {
  if (values_.size() != item_ids_.size() * n_features_) {
    fail(ErrorCode::kInvalidInput, "feature matrix holds " + std::to_string(values_.size()) + " values for " +
                                       std::to_string(item_ids_.size()) + " x " + std::to_string(n_features_));
  }
  if (!feature_names_.empty() && feature_names_.size() != n_features_) {
    fail(ErrorCode::kInvalidInput, "feature name count does not match the column count");
  }
  std::set<std::string_view> seen;
  for (const auto& id : item_ids_) {
    if (!seen.insert(id).second) fail(ErrorCode::kInvalidInput, "duplicate item id '" + id + "' in feature matrix");
  }
  for (double v : values_) {
    if (std::isinf(v)) fail(ErrorCode::kInvalidInput, "feature matrix contains an infinite value");
  }
}

std::optional<std::size_t> FeatureMatrix::find(std::string_view item_id) const {
  for (std::size_t i = 0; i < item_ids_.size(); ++i) {
    if (item_ids_[i] == item_id) return i;
  }
  return std::nullopt;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::string> ids;
  std::vector<double> values;
  ids.reserve(rows.size());
  values.reserve(rows.size() * n_features_);
  for (std::size_t r : rows) {
    ids.push_back(item_ids_.at(r));
    const auto src = row(r);
    values.insert(values.end(), src.begin(), src.end());
  }
  return FeatureMatrix(std::move(ids), n_features_, std::move(values), feature_names_);
}

bool FeatureMatrix::operator==(const FeatureMatrix& other) const {
  if (item_ids_ != other.item_ids_ || n_features_ != other.n_features_ || feature_names_ != other.feature_names_) {
    return false;
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double a = values_[i];
    const double b = other.values_[i];
    if (!(a == b || (is_missing(a) && is_missing(b)))) return false;
  }
  return true;
}

FeatureMatrix concat_columns(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.rows() != b.rows()) fail(ErrorCode::kInvalidInput, "feature sets cover different numbers of items");
  const std::size_t d = a.cols() + b.cols();
  std::vector<double> values;
  values.reserve(a.rows() * d);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto j = b.find(a.item_ids()[i]);
    if (!j) fail(ErrorCode::kInvalidInput, "item '" + a.item_ids()[i] + "' missing from the second feature set");
    const auto ra = a.row(i);
    const auto rb = b.row(*j);
    values.insert(values.end(), ra.begin(), ra.end());
    values.insert(values.end(), rb.begin(), rb.end());
  }
  std::vector<std::string> names;
  if (!a.feature_names().empty() && !b.feature_names().empty()) {
    names = a.feature_names();
    names.insert(names.end(), b.feature_names().begin(), b.feature_names().end());
  }
  return FeatureMatrix(a.item_ids(), d, std::move(values), std::move(names));
}

FeatureScaling FeatureScaling::fit(const FeatureMatrix& x) {
  FeatureScaling s;
  s.shift.assign(x.cols(), 0.0);
  s.scale.assign(x.cols(), 1.0);
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double sum = 0.0;
    double count = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      if (!is_missing(x.at(r, c))) {
        sum += x.at(r, c);
        count += 1.0;
      }
    }
    if (count == 0.0) continue;
    const double mean = sum / count;
    double ss = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      if (!is_missing(x.at(r, c))) ss += (x.at(r, c) - mean) * (x.at(r, c) - mean);
    }
    s.shift[c] = mean;
    const double sd = std::sqrt(ss / count);
    s.scale[c] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

FeatureMatrix read_features_csv(std::istream& in) {
  const io::CsvTable table = io::read_csv(in);
  if (table.header.empty() || table.header[0] != "item_id") {
    fail(ErrorCode::kFormatError, "feature CSV must start with an 'item_id' column");
  }
  const std::size_t d = table.header.size() - 1;
  std::vector<std::string> names(table.header.begin() + 1, table.header.end());
  std::vector<std::string> ids;
  std::vector<double> values;
  ids.reserve(table.rows.size());
  values.reserve(table.rows.size() * d);
  for (const auto& row : table.rows) {
    ids.push_back(row[0]);
    for (std::size_t c = 1; c <= d; ++c) {
      values.push_back(is_missing_token(row[c]) ? kMissing : io::parse_number(row[c], "feature " + names[c - 1]));
    }
  }
  return FeatureMatrix(std::move(ids), d, std::move(values), std::move(names));
}

void write_features_csv(std::ostream& out, const FeatureMatrix& x) {
  std::vector<std::string> fields{"item_id"};
  for (std::size_t c = 0; c < x.cols(); ++c) {
    fields.push_back(x.feature_names().empty() ? "f" + std::to_string(c) : x.feature_names()[c]);
  }
  io::write_csv_row(out, fields);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    fields.assign(1, x.item_ids()[r]);
    for (double v : x.row(r)) fields.push_back(is_missing(v) ? std::string() : io::format_number(v));
    io::write_csv_row(out, fields);
  }
}

FeatureMatrix read_features_binary(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    fail(ErrorCode::kFormatError, "not a binary feature file (bad magic)");
  }
  std::uint32_t n = 0;
  std::uint32_t d = 0;
  if (!get(in, n) || !get(in, d)) fail(ErrorCode::kFormatError, "binary feature file truncated in header");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n) * d);
  for (std::size_t i = 0; i < static_cast<std::size_t>(n) * d; ++i) {
    float f = 0.0F;
    if (!get(in, f)) fail(ErrorCode::kFormatError, "binary feature file truncated in values");
    values.push_back(std::isnan(f) ? kMissing : static_cast<double>(f));
  }
  std::vector<std::string> ids;
  ids.reserve(n);
  std::uint32_t len = 0;
  if (get(in, len)) {
    for (std::uint32_t i = 0; i < n; ++i) {
      if (i > 0 && !get(in, len)) fail(ErrorCode::kFormatError, "binary feature file truncated in item ids");
      std::string id(len, '\0');
      if (!in.read(id.data(), len)) fail(ErrorCode::kFormatError, "binary feature file truncated in item ids");
      ids.push_back(std::move(id));
    }
  } else {
    for (std::uint32_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
  }
  return FeatureMatrix(std::move(ids), d, std::move(values));
}

void write_features_binary(std::ostream& out, const FeatureMatrix& x) {
  out.write(kMagic, 4);
  put(out, static_cast<std::uint32_t>(x.rows()));
  put(out, static_cast<std::uint32_t>(x.cols()));
  for (double v : x.values()) put(out, static_cast<float>(v));
  for (const auto& id : x.item_ids()) {
    put(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
}

FeatureMatrix load_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kInvalidInput, "cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  const bool binary = in.gcount() == 4 && std::memcmp(magic, kMagic, 4) == 0;
  in.clear();
  in.seekg(0);
  return binary ? read_features_binary(in) : read_features_csv(in);
}

}  // namespace memlab::gbt
