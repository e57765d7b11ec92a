#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace memlab::stats {

/// One participant's outcome on one target: detected the repeat, missed it,
/// or never saw that target's repeat.
enum class Response : std::int8_t { kMissing = -1, kMiss = 0, kHit = 1 };

/// Participants x targets hit matrix, row-major.
class ResponseMatrix {
 public:
  ResponseMatrix() = default;
  /// All cells start as kMissing.
  ResponseMatrix(std::vector<std::string> participant_ids, std::vector<std::string> target_ids);
  ResponseMatrix(std::vector<std::string> participant_ids, std::vector<std::string> target_ids,
                 std::vector<Response> cells);

  std::size_t participant_count() const noexcept { return participant_ids_.size(); }
  std::size_t target_count() const noexcept { return target_ids_.size(); }
  const std::vector<std::string>& participant_ids() const noexcept { return participant_ids_; }
  const std::vector<std::string>& target_ids() const noexcept { return target_ids_; }

  Response at(std::size_t participant, std::size_t target) const {
    return cells_[participant * target_ids_.size() + target];
  }
  void set(std::size_t participant, std::size_t target, Response r) {
    cells_[participant * target_ids_.size() + target] = r;
  }
  std::span<const Response> row(std::size_t participant) const {
    return {cells_.data() + participant * target_ids_.size(), target_ids_.size()};
  }

  /// Hit rate per target over the given participant rows, ignoring missing
  /// cells. Targets nobody in `rows` observed come out as NaN.
  std::vector<double> group_means(std::span<const std::size_t> rows) const;

  /// Number of non-missing cells per target over all participants.
  std::vector<std::size_t> observer_counts() const;

  bool operator==(const ResponseMatrix&) const = default;

 private:
  std::vector<std::string> participant_ids_;
  std::vector<std::string> target_ids_;
  std::vector<Response> cells_;
};

}  // namespace memlab::stats
