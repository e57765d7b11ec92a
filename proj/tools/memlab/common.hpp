#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "memlab/eval/evaluation.hpp"
#include "memlab/gbt/model.hpp"
#include "memlab/protocol/types.hpp"
#include "memlab/stats/response_matrix.hpp"

namespace memlab::cli {

/// Output sink: a file, or stdout for "" and "-".
class Output {
 public:
  explicit Output(const std::string& path);
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  /// Flushes and reports write failures as exceptions.
  void close();

 private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
};

/// Sequence layout flags shared by gen-seq, simulate and serve.
struct SequenceOptions {
  protocol::SequenceParams params;
  std::string target_spacing = "36,108";
  std::string vigilance_spacing = "1,7";

  void add_to(CLI::App& app, bool with_counts);
  /// Parses the spacing strings into params.
  protocol::SequenceParams resolve() const;
};

struct AttentivenessOptions {
  protocol::Attentiveness value;
  void add_to(CLI::App& app);
};

struct BoostOptions {
  gbt::GbtParams params;
  double base_score = 0.0;
  CLI::Option* base_score_opt = nullptr;

  void add_to(CLI::App& app, const std::string& seed_flag);
  gbt::GbtParams resolve() const;
};

struct EvalOptions {
  eval::EvalConfig config;
  void add_to(CLI::App& app);
};

/// Participants x targets input: either session files to aggregate or a
/// matrix CSV.
struct MatrixInput {
  std::vector<std::string> sessions;
  std::string matrix;
  AttentivenessOptions attentiveness;

  void add_to(CLI::App& app);
  stats::ResponseMatrix load() const;
};

/// Labels for every row of `x`, in row order. Throws InvalidInput when an
/// item has no label.
std::vector<double> aligned_labels(const gbt::FeatureMatrix& x, const eval::ItemScores& labels);

std::string fmt(double v);
std::vector<std::string> row(std::initializer_list<std::string> fields);

void register_protocol_commands(CLI::App& app);
void register_study_commands(CLI::App& app);
void register_model_commands(CLI::App& app);

}  // namespace memlab::cli
