#include "memlab/stats/response_matrix.hpp"

#include <limits>

#include "memlab/error.hpp"

namespace memlab::stats {

ResponseMatrix::ResponseMatrix(std::vector<std::string> participant_ids, std::vector<std::string> target_ids)
    : participant_ids_(std::move(participant_ids)),
      target_ids_(std::move(target_ids)),
      cells_(participant_ids_.size() * target_ids_.size(), Response::kMissing) {}

ResponseMatrix::ResponseMatrix(std::vector<std::string> participant_ids, std::vector<std::string> target_ids,
                               std::vector<Response> cells)
    : participant_ids_(std::move(participant_ids)), target_ids_(std::move(target_ids)), cells_(std::move(cells)) {
  if (cells_.size() != participant_ids_.size() * target_ids_.size()) {
    fail(ErrorCode::kInvalidInput, "response matrix has " + std::to_string(cells_.size()) + " cells, expected " +
                                       std::to_string(participant_ids_.size() * target_ids_.size()));
  }
  for (Response r : cells_) {
    if (r != Response::kMissing && r != Response::kMiss && r != Response::kHit) {
      fail(ErrorCode::kInvalidInput, "response matrix cell outside {missing, 0, 1}");
    }
  }
}

std::vector<double> ResponseMatrix::group_means(std::span<const std::size_t> rows) const {
  const std::size_t t = target_ids_.size();
  std::vector<double> hits(t, 0.0);
  std::vector<double> seen(t, 0.0);
  for (std::size_t p : rows) {
    const Response* cell = cells_.data() + p * t;
    for (std::size_t j = 0; j < t; ++j) {
      if (cell[j] == Response::kMissing) continue;
      seen[j] += 1.0;
      if (cell[j] == Response::kHit) hits[j] += 1.0;
    }
  }
  std::vector<double> means(t);
  for (std::size_t j = 0; j < t; ++j) {
    means[j] = seen[j] > 0.0 ? hits[j] / seen[j] : std::numeric_limits<double>::quiet_NaN();
  }
  return means;
}

std::vector<std::size_t> ResponseMatrix::observer_counts() const {
  const std::size_t t = target_ids_.size();
  std::vector<std::size_t> counts(t, 0);
  for (std::size_t p = 0; p < participant_ids_.size(); ++p) {
    for (std::size_t j = 0; j < t; ++j) {
      if (cells_[p * t + j] != Response::kMissing) ++counts[j];
    }
  }
  return counts;
}

}  // namespace memlab::stats
