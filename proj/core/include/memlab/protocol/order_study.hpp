#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "memlab/protocol/scoring.hpp"
#include "memlab/protocol/types.hpp"

namespace memlab::protocol {

struct RhoSummary {
  double mean_rho = 0.0;
  double sigma_rho = 0.0;  // population std
  std::vector<double> per_split_rhos;
  int discarded_splits = 0;
};

struct OrderStudyReport {
  std::vector<std::string> order_ids;
  std::vector<MemorabilityTable> per_order_tables;  // aligned with order_ids
  int group_size = 0;
  int n_splits = 0;
  std::uint64_t seed = 0;
  /// Split-half consistency inside each order; the per-split values of all
  /// orders are pooled.
  RhoSummary within_order;
  /// Spearman between a group of K from one order and a group of K from
  /// another, over n_splits random pairings.
  RhoSummary cross_order;
};

/// Display-order study. Each key of `grouped` is one fixed order (the CLI
/// uses the sequence id). Throws InvalidInput with fewer than two orders and
/// InsufficientParticipants when an order has fewer than 2 * group_size
/// attentive sessions.
OrderStudyReport order_study_report(const SequenceLibrary& sequences,
                                    const std::map<std::string, std::vector<SessionRecord>>& grouped, int group_size,
                                    int n_splits, std::uint64_t seed, const Attentiveness& attentiveness = {});

}  // namespace memlab::protocol
