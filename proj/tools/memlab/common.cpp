#include "common.hpp"

#include <cmath>

#include "memlab/error.hpp"
#include "memlab/io/csv.hpp"
#include "memlab/io/records.hpp"
#include "memlab/protocol/scoring.hpp"

namespace memlab::cli {

Output::Output(const std::string& path) : path_(path) {
  if (path.empty() || path == "-") return;
  file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
  if (!*file_) fail(ErrorCode::kInvalidInput, "cannot write " + path);
}

void Output::close() {
  stream().flush();
  if (!stream()) fail(ErrorCode::kInvalidInput, "failed writing " + (path_.empty() ? std::string("stdout") : path_));
}

void SequenceOptions::add_to(CLI::App& app, bool with_counts) {
  if (with_counts) {
    app.add_option("--targets", params.n_targets, "Target images per sequence")->capture_default_str();
  }
  app.add_option("--fillers", params.n_fillers, "Plain fillers per sequence")->capture_default_str();
  app.add_option("--vigilance", params.n_vigilance, "Vigilance fillers per sequence")->capture_default_str();
  app.add_option("--target-spacing", target_spacing, "Target repeat distance in slots, min,max")
      ->capture_default_str();
  app.add_option("--vigilance-spacing", vigilance_spacing, "Vigilance repeat distance in slots, min,max")
      ->capture_default_str();
  app.add_option("--display-ms", params.display_ms, "Image display time")->capture_default_str();
  app.add_option("--gap-ms", params.gap_ms, "Blank gap after each image")->capture_default_str();
}

protocol::SequenceParams SequenceOptions::resolve() const {
  auto range = [](const std::string& text, const char* name) {
    const auto v = io::parse_int_list(text, name);
    if (v.size() != 2) fail(ErrorCode::kInvalidInput, std::string(name) + " must be min,max");
    return protocol::SpacingRange{v[0], v[1]};
  };
  protocol::SequenceParams p = params;
  p.target_spacing = range(target_spacing, "--target-spacing");
  p.vigilance_spacing = range(vigilance_spacing, "--vigilance-spacing");
  p.validate();
  return p;
}

void AttentivenessOptions::add_to(CLI::App& app) {
  app.add_option("--min-vigilance", value.min_vigilance_hit_rate, "Exclude sessions below this vigilance hit rate")
      ->capture_default_str();
  app.add_option("--max-false-alarms", value.max_false_alarm_rate, "Exclude sessions above this false-alarm rate")
      ->capture_default_str();
}

void BoostOptions::add_to(CLI::App& app, const std::string& seed_flag) {
  app.add_option("--rounds", params.n_rounds, "Boosting rounds")->capture_default_str();
  app.add_option("--max-depth", params.max_depth, "Maximum tree depth")->capture_default_str();
  app.add_option("--eta", params.learning_rate, "Learning rate (shrinkage)")->capture_default_str();
  app.add_option("--lambda", params.lambda, "L2 penalty on leaf weights")->capture_default_str();
  app.add_option("--gamma", params.gamma, "Minimum gain to keep a split")->capture_default_str();
  app.add_option("--min-child-weight", params.min_child_weight, "Minimum hessian mass per child")
      ->capture_default_str();
  app.add_option("--subsample", params.subsample, "Row fraction per round")->capture_default_str();
  app.add_option("--colsample", params.colsample, "Column fraction per tree")->capture_default_str();
  base_score_opt = app.add_option("--base-score", base_score, "Initial prediction (default: label mean)");
  app.add_option(seed_flag, params.seed, "Seed for row/column sampling")->capture_default_str();
  app.add_option("--early-stopping", params.early_stopping_rounds,
                 "Stop after this many rounds without holdout improvement (0 = off)")
      ->capture_default_str();
  app.add_option("--validation-fraction", params.validation_fraction, "Holdout share used by --early-stopping")
      ->capture_default_str();
  app.add_flag("--standardize", params.standardize, "Standardize each feature before training");
}

gbt::GbtParams BoostOptions::resolve() const {
  gbt::GbtParams p = params;
  if (base_score_opt && base_score_opt->count() > 0) p.base_score = base_score;
  p.validate();
  return p;
}

void EvalOptions::add_to(CLI::App& app) {
  app.add_option("--splits", config.n_splits, "Random train/test splits")->capture_default_str();
  app.add_option("--test-fraction", config.test_fraction, "Share of items held out per split")->capture_default_str();
  app.add_option("--seed", config.seed, "Seed for the splits")->capture_default_str();
}

void MatrixInput::add_to(CLI::App& app) {
  auto* in = app.add_option("--in", sessions, "Session files (JSONL) to aggregate")->check(CLI::ExistingFile);
  auto* m = app.add_option("--matrix", matrix, "Response matrix CSV instead of sessions")->check(CLI::ExistingFile);
  in->excludes(m);
  attentiveness.add_to(app);
}

stats::ResponseMatrix MatrixInput::load() const {
  if (!matrix.empty()) {
    auto in = io::open_input(matrix);
    return io::read_matrix_csv(in);
  }
  if (sessions.empty()) fail(ErrorCode::kInvalidInput, "give --in session files or --matrix");
  std::vector<std::filesystem::path> paths(sessions.begin(), sessions.end());
  const io::Bundle bundle = io::read_bundle_files(paths);
  return protocol::aggregate_scores(bundle.sequences, bundle.sessions, attentiveness.value).matrix;
}

std::vector<double> aligned_labels(const gbt::FeatureMatrix& x, const eval::ItemScores& labels) {
  std::vector<double> y;
  y.reserve(x.rows());
  for (const auto& id : x.item_ids()) {
    const auto it = labels.find(id);
    if (it == labels.end()) fail(ErrorCode::kInvalidInput, "no label for item '" + id + "'");
    y.push_back(it->second);
  }
  return y;
}

std::string fmt(double v) { return std::isnan(v) ? std::string() : io::format_number(v); }

std::vector<std::string> row(std::initializer_list<std::string> fields) { return fields; }

}  // namespace memlab::cli
