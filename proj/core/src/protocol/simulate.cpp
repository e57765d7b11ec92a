#include "memlab/protocol/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "memlab/error.hpp"
#include "memlab/protocol/sequence.hpp"
#include "memlab/random.hpp"

namespace memlab::protocol {
namespace {

constexpr std::uint64_t kRandomizedStream = 0xffffffffffffffffULL;

std::string numbered(const char* prefix, int i, int width) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%s%0*d", prefix, width, i);
  return buffer;
}

void require_probability(double p, const std::string& what) {
  if (!std::isfinite(p) || p < 0.0 || p > 1.0) fail(ErrorCode::kInvalidInput, what + " must lie in [0, 1]");
}

}  // namespace

std::vector<StimulusItem> synthetic_pool(const std::vector<std::string>& target_ids, int n_fillers, int n_vigilance) {
  std::vector<StimulusItem> pool;
  pool.reserve(target_ids.size() + static_cast<std::size_t>(n_fillers + n_vigilance));
  for (const std::string& id : target_ids) pool.push_back({id, id + ".jpg", StimulusRole::kTarget});
  for (int i = 0; i < n_fillers; ++i) {
    std::string id = numbered("filler-", i, 4);
    pool.push_back({id, id + ".jpg", StimulusRole::kFiller});
  }
  for (int i = 0; i < n_vigilance; ++i) {
    std::string id = numbered("vigilance-", i, 4);
    pool.push_back({id, id + ".jpg", StimulusRole::kVigilance});
  }
  return pool;
}

SimulatedSessions simulate_sessions(const std::map<std::string, double>& true_scores, int n_participants,
                                    const OrderEffect& order_effect, const SequenceParams& params,
                                    const ObserverModel& observers, std::uint64_t seed) {
  if (n_participants < 1) fail(ErrorCode::kInvalidInput, "need at least one participant");
  for (const auto& [id, p] : true_scores) require_probability(p, "true score of '" + id + "'");
  for (const auto& [key, delta] : order_effect) {
    if (!std::isfinite(delta)) fail(ErrorCode::kInvalidInput, "order effect for '" + key.second + "' is not finite");
  }
  require_probability(observers.false_alarm_prob, "false-alarm probability");
  require_probability(observers.vigilance_prob, "vigilance probability");
  if (observers.latency_mean_ms < 0 || observers.latency_jitter_ms < 0) {
    fail(ErrorCode::kInvalidInput, "latency parameters must be non-negative");
  }

  SequenceParams effective = params;
  effective.n_targets = static_cast<int>(true_scores.size());
  std::vector<std::string> target_ids;
  for (const auto& [id, p] : true_scores) target_ids.push_back(id);
  const std::vector<StimulusItem> pool = synthetic_pool(target_ids, effective.n_fillers, effective.n_vigilance);

  const std::uint64_t order_stream =
      effective.fixed_order ? static_cast<std::uint64_t>(*effective.fixed_order) : kRandomizedStream;
  const std::uint64_t base = derive_seed(seed, order_stream);
  const std::string prefix = effective.fixed_order ? "o" + std::to_string(*effective.fixed_order) + "-" : "";

  // Detection probability per target under this order.
  std::map<std::string, double, std::less<>> detection;
  for (const auto& [id, p] : true_scores) {
    double shifted = p;
    if (effective.fixed_order) {
      const auto it = order_effect.find({*effective.fixed_order, id});
      if (it != order_effect.end()) shifted += it->second;
    }
    detection[id] = std::clamp(shifted, kMinDetectionProb, kMaxDetectionProb);
  }

  SimulatedSessions out;
  const TrialSequence* shared = nullptr;
  if (effective.fixed_order) {
    TrialSequence seq = generate_sequence(pool, effective, seed);
    shared = &out.sequences.emplace(seq.sequence_id, std::move(seq)).first->second;
  }

  std::uniform_int_distribution<int> jitter(-observers.latency_jitter_ms, observers.latency_jitter_ms);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  out.sessions.reserve(static_cast<std::size_t>(n_participants));
  for (int i = 0; i < n_participants; ++i) {
    const std::uint64_t participant_seed = derive_seed(base, static_cast<std::uint64_t>(i));
    const TrialSequence* sequence = shared;
    if (sequence == nullptr) {
      TrialSequence seq = generate_sequence(pool, effective, derive_seed(participant_seed, 0));
      sequence = &out.sequences.emplace(seq.sequence_id, std::move(seq)).first->second;
    }

    SessionRecord record;
    record.session_id = prefix + numbered("s", i, 6);
    record.participant_id = prefix + numbered("p", i, 6);
    record.sequence_id = sequence->sequence_id;
    record.completed = true;

    Engine engine = make_engine(participant_seed, 1);
    for (const Presentation& p : sequence->presentations) {
      const StimulusItem* item = sequence->find_item(p.item_id);
      double prob = observers.false_alarm_prob;
      if (p.is_repeat && item->role == StimulusRole::kTarget) {
        prob = detection.find(p.item_id)->second;
      } else if (p.is_repeat && item->role == StimulusRole::kVigilance) {
        prob = observers.vigilance_prob;
      }
      const double u = unit(engine);
      const int latency = std::max(0, observers.latency_mean_ms + jitter(engine));
      if (u < prob) record.events.push_back({record.session_id, p.slot, true, latency});
    }
    out.sessions.push_back(std::move(record));
  }
  return out;
}

}  // namespace memlab::protocol
