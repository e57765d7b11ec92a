#include "memlab/gbt/model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "memlab/error.hpp"

namespace memlab::gbt {
namespace {

constexpr char kMagic[4] = {'M', 'L', 'G', 'B'};

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  template <typename T>
  void put(T v) {
    auto u = std::bit_cast<std::array<char, sizeof(T)>>(v);
    if constexpr (std::endian::native == std::endian::big) std::reverse(u.begin(), u.end());
    out_.append(u.data(), u.size());
  }
  void put_f64(double v) { put(v); }
  void put_bool(bool v) { put(static_cast<std::uint8_t>(v ? 1 : 0)); }
  std::string& str() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : in_(bytes) {}

  template <typename T>
  T get() {
    if (in_.size() - pos_ < sizeof(T)) fail(ErrorCode::kFormatError, "model stream truncated");
    std::array<char, sizeof(T)> u;
    std::memcpy(u.data(), in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    if constexpr (std::endian::native == std::endian::big) std::reverse(u.begin(), u.end());
    return std::bit_cast<T>(u);
  }
  bool get_bool() {
    const auto v = get<std::uint8_t>();
    if (v > 1) fail(ErrorCode::kFormatError, "model stream has an invalid boolean");
    return v == 1;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

void require(bool ok, const char* what) {
  if (!ok) fail(ErrorCode::kFormatError, std::string("invalid model: ") + what);
}

void check_range(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::kInvalidInput, "invalid boosting parameter: " + what);
}

int depth_from(const Tree& t, std::int32_t node) {
  const auto& n = t.nodes[static_cast<std::size_t>(node)];
  if (n.is_leaf()) return 0;
  return 1 + std::max(depth_from(t, n.left), depth_from(t, n.right));
}

}  // namespace

void GbtParams::validate() const {
  check_range(n_rounds >= 0, "n_rounds must be >= 0");
  check_range(max_depth >= 0, "max_depth must be >= 0");
  check_range(learning_rate > 0.0 && learning_rate <= 1.0, "learning_rate must be in (0, 1]");
  check_range(lambda >= 0.0 && std::isfinite(lambda), "lambda must be >= 0");
  check_range(gamma >= 0.0 && std::isfinite(gamma), "gamma must be >= 0");
  check_range(min_child_weight >= 0.0 && std::isfinite(min_child_weight), "min_child_weight must be >= 0");
  check_range(subsample > 0.0 && subsample <= 1.0, "subsample must be in (0, 1]");
  check_range(colsample > 0.0 && colsample <= 1.0, "colsample must be in (0, 1]");
  check_range(!base_score || std::isfinite(*base_score), "base_score must be finite");
  check_range(early_stopping_rounds >= 0, "early_stopping_rounds must be >= 0");
  check_range(validation_fraction > 0.0 && validation_fraction < 1.0, "validation_fraction must be in (0, 1)");
}

double Tree::evaluate(std::span<const double> row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    const double x = row[static_cast<std::size_t>(n.feature)];
    const bool go_left = is_missing(x) ? n.default_left : x < n.threshold;
    i = static_cast<std::size_t>(go_left ? n.left : n.right);
  }
  return nodes[i].weight;
}

int Tree::depth() const { return nodes.empty() ? 0 : depth_from(*this, 0); }

GbtModel::GbtModel(std::size_t n_features, double base_score, GbtParams params, FeatureScaling scaling,
                   std::vector<Tree> trees)
    : n_features_(n_features),
      base_score_(base_score),
      params_(std::move(params)),
      scaling_(std::move(scaling)),
      trees_(std::move(trees)) {}

double GbtModel::predict_row(std::span<const double> row) const {
  if (row.size() != n_features_) {
    fail(ErrorCode::kInvalidInput, "model expects " + std::to_string(n_features_) + " features, got " +
                                       std::to_string(row.size()));
  }
  std::vector<double> scaled;
  if (!scaling_.empty()) {
    scaled.resize(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) scaled[c] = scaling_.apply(c, row[c]);
    row = scaled;
  }
  double sum = 0.0;
  for (const Tree& t : trees_) sum += t.evaluate(row);
  return base_score_ + params_.learning_rate * sum;
}

std::vector<double> GbtModel::predict(const FeatureMatrix& x) const {
  if (x.cols() != n_features_) {
    fail(ErrorCode::kInvalidInput, "model expects " + std::to_string(n_features_) + " features, got " +
                                       std::to_string(x.cols()));
  }
  std::vector<double> out;
  out.reserve(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out.push_back(predict_row(x.row(r)));
  return out;
}

std::string serialize(const GbtModel& model) {
  Writer w;
  w.str().append(kMagic, 4);
  w.put(kModelFormatVersion);
  const GbtParams& p = model.params();
  w.put(static_cast<std::int32_t>(p.n_rounds));
  w.put(static_cast<std::int32_t>(p.max_depth));
  w.put_f64(p.learning_rate);
  w.put_f64(p.lambda);
  w.put_f64(p.gamma);
  w.put_f64(p.min_child_weight);
  w.put_f64(p.subsample);
  w.put_f64(p.colsample);
  w.put_bool(p.base_score.has_value());
  w.put_f64(p.base_score.value_or(0.0));
  w.put(p.seed);
  w.put(static_cast<std::int32_t>(p.early_stopping_rounds));
  w.put_f64(p.validation_fraction);
  w.put_bool(p.standardize);

  w.put(static_cast<std::uint32_t>(model.n_features()));
  w.put_f64(model.base_score());
  const FeatureScaling& s = model.scaling();
  w.put(static_cast<std::uint32_t>(s.shift.size()));
  for (std::size_t c = 0; c < s.shift.size(); ++c) {
    w.put_f64(s.shift[c]);
    w.put_f64(s.scale[c]);
  }
  w.put(static_cast<std::uint32_t>(model.trees().size()));
  for (const Tree& t : model.trees()) {
    w.put(static_cast<std::uint32_t>(t.nodes.size()));
    for (const TreeNode& n : t.nodes) {
      w.put(n.feature);
      w.put_f64(n.threshold);
      w.put_bool(n.default_left);
      w.put(n.left);
      w.put(n.right);
      w.put_f64(n.weight);
    }
  }
  w.put(fnv1a(w.str()));
  return std::move(w.str());
}

GbtModel deserialize(std::string_view bytes) {
  require(bytes.size() >= 4 + sizeof(std::uint64_t), "stream too short");
  require(std::memcmp(bytes.data(), kMagic, 4) == 0, "bad magic");
  const std::string_view body = bytes.substr(0, bytes.size() - sizeof(std::uint64_t));
  Reader tail(bytes.substr(body.size()));
  require(tail.get<std::uint64_t>() == fnv1a(body), "checksum mismatch");

  Reader r(body.substr(4));
  const auto version = r.get<std::uint32_t>();
  if (version != kModelFormatVersion) {
    fail(ErrorCode::kFormatError, "unsupported model format version " + std::to_string(version));
  }
  GbtParams p;
  p.n_rounds = r.get<std::int32_t>();
  p.max_depth = r.get<std::int32_t>();
  p.learning_rate = r.get<double>();
  p.lambda = r.get<double>();
  p.gamma = r.get<double>();
  p.min_child_weight = r.get<double>();
  p.subsample = r.get<double>();
  p.colsample = r.get<double>();
  const bool has_base = r.get_bool();
  const double base_value = r.get<double>();
  if (has_base) p.base_score = base_value;
  p.seed = r.get<std::uint64_t>();
  p.early_stopping_rounds = r.get<std::int32_t>();
  p.validation_fraction = r.get<double>();
  p.standardize = r.get_bool();
  try {
    p.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kFormatError, std::string("invalid model parameters: ") + e.what());
  }

  const auto d = r.get<std::uint32_t>();
  const double base_score = r.get<double>();
  require(std::isfinite(base_score), "non-finite base score");
  FeatureScaling scaling;
  const auto n_scaling = r.get<std::uint32_t>();
  require(n_scaling == 0 || n_scaling == d, "scaling size differs from feature count");
  for (std::uint32_t c = 0; c < n_scaling; ++c) {
    scaling.shift.push_back(r.get<double>());
    scaling.scale.push_back(r.get<double>());
    require(std::isfinite(scaling.shift.back()) && scaling.scale.back() > 0.0, "bad scaling entry");
  }
  const auto n_trees = r.get<std::uint32_t>();
  std::vector<Tree> trees;
  for (std::uint32_t t = 0; t < n_trees; ++t) {
    const auto n_nodes = r.get<std::uint32_t>();
    require(n_nodes >= 1, "empty tree");
    require(r.remaining() / 29 >= n_nodes, "tree larger than the remaining stream");
    Tree tree;
    tree.nodes.reserve(n_nodes);
    for (std::uint32_t i = 0; i < n_nodes; ++i) {
      TreeNode n;
      n.feature = r.get<std::int32_t>();
      n.threshold = r.get<double>();
      n.default_left = r.get_bool();
      n.left = r.get<std::int32_t>();
      n.right = r.get<std::int32_t>();
      n.weight = r.get<double>();
      if (n.is_leaf()) {
        require(n.feature == -1 && n.left == -1 && n.right == -1, "malformed leaf");
        require(std::isfinite(n.weight), "non-finite leaf weight");
      } else {
        require(static_cast<std::uint32_t>(n.feature) < d, "feature index out of range");
        require(!std::isnan(n.threshold), "NaN threshold");
        const auto self = static_cast<std::int32_t>(i);
        require(n.left > self && n.right > self && n.left != n.right, "child index must follow its parent");
        require(static_cast<std::uint32_t>(n.left) < n_nodes && static_cast<std::uint32_t>(n.right) < n_nodes,
                "child index out of range");
      }
      tree.nodes.push_back(n);
    }
    require(tree.depth() <= p.max_depth, "tree deeper than max_depth");
    trees.push_back(std::move(tree));
  }
  require(r.remaining() == 0, "trailing bytes");
  return GbtModel(d, base_score, p, std::move(scaling), std::move(trees));
}

void save_model(const GbtModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kInvalidInput, "cannot write " + path.string());
  const std::string bytes = serialize(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kInvalidInput, "failed writing " + path.string());
}

GbtModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kInvalidInput, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace memlab::gbt
