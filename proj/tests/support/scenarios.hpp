#pragma once

// Simulation setups shared by the acceptance binary and the unit tests.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "memlab/protocol/order_study.hpp"
#include "memlab/protocol/scoring.hpp"
#include "memlab/protocol/simulate.hpp"
#include "memlab/random.hpp"

namespace memlab::test_support {

// Typical spread of target scores on a scene dataset.
inline constexpr double kTargetScoreMean = 0.66;
inline constexpr double kTargetScoreSd = 0.14;

inline std::string item_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "item-%04d", i);
  return buf;
}

/// n true scores drawn from a normal clipped into [0, 1].
inline std::map<std::string, double> clipped_normal_truth(int n, double mean, double sd, std::uint64_t seed) {
  Engine engine = make_engine(seed, 0x7472757468);
  std::normal_distribution<double> draw(mean, sd);
  std::map<std::string, double> truth;
  for (int i = 0; i < n; ++i) truth.emplace(item_name(i), std::clamp(draw(engine), 0.0, 1.0));
  return truth;
}

/// Detection probability the simulator actually uses for a true score.
inline double effective_prob(double p) {
  return std::clamp(p, protocol::kMinDetectionProb, protocol::kMaxDetectionProb);
}

/// Pools sessions of a simulation into a response matrix.
inline protocol::AggregateResult aggregate(const protocol::SimulatedSessions& sim) {
  return protocol::aggregate_scores(sim.sequences, sim.sessions);
}

/// Two fixed orders over the same items. On a random half of the targets,
/// order 0 adds sign * delta and order 1 subtracts it.
struct OrderScenario {
  protocol::SequenceLibrary sequences;
  std::map<std::string, std::vector<protocol::SessionRecord>> grouped;
};

inline OrderScenario two_order_scenario(const std::map<std::string, double>& truth, double delta,
                                        int participants_per_order, std::uint64_t seed) {
  Engine engine = make_engine(seed, 0x6f72646572);
  std::vector<std::string> ids;
  for (const auto& [id, p] : truth) ids.push_back(id);
  std::shuffle(ids.begin(), ids.end(), engine);
  std::bernoulli_distribution coin(0.5);
  protocol::OrderEffect effect;
  for (std::size_t i = 0; i < ids.size() / 2; ++i) {
    const double sign = coin(engine) ? 1.0 : -1.0;
    effect[{0, ids[i]}] = sign * delta;
    effect[{1, ids[i]}] = -sign * delta;
  }

  OrderScenario out;
  for (std::int64_t order = 0; order < 2; ++order) {
    protocol::SequenceParams params;
    params.fixed_order = order;
    auto sim = protocol::simulate_sessions(truth, participants_per_order, effect, params, {},
                                           derive_seed(seed, static_cast<std::uint64_t>(order) + 1));
    for (auto& [id, seq] : sim.sequences) {
      out.grouped[id] = std::move(sim.sessions);
      out.sequences.emplace(id, std::move(seq));
    }
  }
  return out;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("memlab-" + name + "-" + std::to_string(std::random_device{}()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace memlab::test_support
