#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>

#include "memlab/error.hpp"
#include "memlab/protocol/sequence.hpp"
#include "memlab/server/experiment_service.hpp"
#include "scenarios.hpp"

namespace {

using namespace memlab;
using namespace memlab::server;
using protocol::StimulusRole;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no memlab::Error thrown";
  return ErrorCode::kInvalidInput;
}

ServiceOptions ticking_clock(int snapshot_every = 0) {
  ServiceOptions options;
  options.snapshot_every = snapshot_every;
  options.clock = [t = std::int64_t{1'000}]() mutable { return t += 10; };
  return options;
}

std::vector<protocol::StimulusItem> pool(int targets, int fillers) {
  std::vector<protocol::StimulusItem> out;
  for (int i = 0; i < targets; ++i) out.push_back({"t" + std::to_string(i), "t.jpg", StimulusRole::kTarget});
  for (int i = 0; i < fillers; ++i) out.push_back({"f" + std::to_string(i), "f.jpg", StimulusRole::kFiller});
  return out;
}

ExperimentConfig small_config(const std::string& id) {
  ExperimentConfig config;
  config.experiment_id = id;
  config.pool = pool(4, 8);
  config.params.n_targets = 3;
  config.params.n_fillers = 6;
  config.params.target_spacing = {2, 6};
  config.seed = 5;
  return config;
}

// One target t0 with fillers; its repeat slot is known from the fixed sequence.
ExperimentConfig single_target_config(const std::string& id) {
  ExperimentConfig config;
  config.experiment_id = id;
  protocol::SequenceParams params;
  params.n_targets = 1;
  params.n_fillers = 4;
  params.target_spacing = {2, 4};
  config.fixed_sequence = protocol::generate_sequence(pool(1, 4), params, 3);
  config.fixed_sequence->sequence_id = "fixed";
  config.seed = 1;
  return config;
}

int repeat_slot(const protocol::TrialSequence& seq) {
  for (const auto& p : seq.presentations) {
    if (p.is_repeat) return p.slot;
  }
  return -1;
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = memlab::test_support::scratch_dir("service"); }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::filesystem::path dir_;
};

TEST_F(ServiceTest, CreateExperimentValidates) {
  ExperimentService service(dir_, ticking_clock());
  EXPECT_EQ(service.create_experiment(small_config("e1")), "e1");
  EXPECT_EQ(code_of([&] { service.create_experiment(small_config("e1")); }), ErrorCode::kConflict);
  EXPECT_EQ(code_of([&] { service.create_experiment(small_config("bad id")); }), ErrorCode::kInvalidInput);
  auto too_few = small_config("e2");
  too_few.params.n_targets = 10;
  EXPECT_THROW(service.create_experiment(too_few), Error);
  auto unnamed = small_config("");
  const auto generated = service.create_experiment(unnamed);
  EXPECT_FALSE(generated.empty());
  EXPECT_EQ(service.experiment_ids().size(), 2u);
  EXPECT_EQ(service.experiment_config("e1").params, small_config("e1").params);
  EXPECT_EQ(code_of([&] { service.experiment_config("nope"); }), ErrorCode::kNotFound);
}

TEST_F(ServiceTest, RandomizedSessionsDifferFixedOrderSessionsMatch) {
  ExperimentService service(dir_, ticking_clock());
  service.create_experiment(small_config("rand"));
  const auto a = service.create_session("rand", "p1");
  const auto b = service.create_session("rand", "p2");
  EXPECT_NE(a.seed, b.seed);
  EXPECT_NE(a.session_id, b.session_id);
  EXPECT_EQ(a.slots.size(), 12u);

  auto fixed = small_config("fixed");
  fixed.params.fixed_order = 1;
  service.create_experiment(fixed);
  const auto c = service.create_session("fixed", "p1");
  const auto d = service.create_session("fixed", "p2");
  EXPECT_EQ(c.sequence_id, d.sequence_id);
  for (std::size_t i = 0; i < c.slots.size(); ++i) {
    EXPECT_EQ(service.stimulus_uri(c.session_id, static_cast<int>(i)),
              service.stimulus_uri(d.session_id, static_cast<int>(i)));
  }
}

TEST_F(ServiceTest, CapacityIsEnforced) {
  ExperimentService service(dir_, ticking_clock());
  service.create_experiment(small_config("cap"));
  for (int i = 0; i < 120; ++i) service.create_session("cap", "p" + std::to_string(i));
  EXPECT_EQ(code_of([&] { service.create_session("cap", "late"); }), ErrorCode::kConflict);
  EXPECT_EQ(code_of([&] { service.create_session("missing", "p"); }), ErrorCode::kNotFound);
  EXPECT_EQ(code_of([&] { service.create_session("cap", ""); }), ErrorCode::kInvalidInput);
}

TEST_F(ServiceTest, SlotUrisDoNotRevealRepeats) {
  ExperimentService service(dir_, ticking_clock());
  service.create_experiment(single_target_config("x"));
  const auto desc = service.create_session("x", "p");
  std::set<std::string> uris;
  for (const auto& s : desc.slots) uris.insert(s.image_uri);
  EXPECT_EQ(uris.size(), desc.slots.size());
}

TEST_F(ServiceTest, ResponsesAreCheckedAndIdempotent) {
  ExperimentService service(dir_, ticking_clock());
  const auto config = single_target_config("x");
  service.create_experiment(config);
  const int repeat = repeat_slot(*config.fixed_sequence);
  const int first = repeat == 0 ? 1 : 0;
  const auto desc = service.create_session("x", "p");

  const auto hit = service.record_response(desc.session_id, repeat, true, 420);
  EXPECT_TRUE(hit.correct);
  EXPECT_FALSE(service.record_response(desc.session_id, first, true, 300).correct);

  const auto log = dir_ / "x" / "events.jsonl";
  const auto size_before = std::filesystem::file_size(log);
  EXPECT_EQ(service.record_response(desc.session_id, repeat, true, 420), hit);
  EXPECT_EQ(service.record_response(desc.session_id, repeat, false, 10), hit);
  EXPECT_EQ(std::filesystem::file_size(log), size_before);

  EXPECT_EQ(code_of([&] { service.record_response(desc.session_id, 99, true, 1); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([&] { service.record_response(desc.session_id, 2, true, -1); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of([&] { service.record_response("ghost", 0, true, 1); }), ErrorCode::kNotFound);

  const auto score = service.complete_session(desc.session_id);
  EXPECT_EQ(score.target_hits.at("t0"), 1);
  EXPECT_EQ(service.complete_session(desc.session_id), score);
  std::string line, last;
  for (std::ifstream in(log); std::getline(in, line);) {

    last = line;
  }
  EXPECT_NE(last.find("session_completed"), std::string::npos);
  EXPECT_EQ(std::filesystem::file_size(log), size_before + last.size() + 1);
  EXPECT_EQ(code_of([&] { service.record_response(desc.session_id, 3, true, 1); }), ErrorCode::kGone);
  EXPECT_TRUE(service.schedule(desc.session_id).completed);
}

TEST_F(ServiceTest, ExportScoresCompletedSessions) {
  ExperimentService service(dir_, ticking_clock());
  const auto config = single_target_config("five");
  service.create_experiment(config);
  EXPECT_EQ(code_of([&] { service.export_data("five", ExportFormat::kCsv, ExportWhat::kTable); }),
            ErrorCode::kEmptyAggregate);
  const int repeat = repeat_slot(*config.fixed_sequence);
  for (int p = 0; p < 5; ++p) {
    const auto desc = service.create_session("five", "p" + std::to_string(p));
    if (p < 3) service.record_response(desc.session_id, repeat, true, 500);
    service.complete_session(desc.session_id);
  }
  service.create_session("five", "unfinished");
  const auto table = service.export_data("five", ExportFormat::kCsv, ExportWhat::kTable);
  EXPECT_EQ(table.rfind("item_id,score,n_observers,variance,false_alarms\nt0,0.6,5,", 0), 0u) << table;
  EXPECT_EQ(service.export_data("five", ExportFormat::kCsv, ExportWhat::kTable), table);
  const auto matrix = service.export_data("five", ExportFormat::kCsv, ExportWhat::kMatrix);
  EXPECT_EQ(std::count(matrix.begin(), matrix.end(), '\n'), 6);
}

TEST_F(ServiceTest, NoAttentiveSessionIsEmptyAggregate) {
  ExperimentService service(dir_, ticking_clock());
  const auto config = single_target_config("lazy");
  service.create_experiment(config);
  const auto desc = service.create_session("lazy", "p");
  for (const auto& s : desc.slots) service.record_response(desc.session_id, s.slot, true, 100);
  EXPECT_FALSE(service.complete_session(desc.session_id).attentive);
  EXPECT_EQ(code_of([&] { service.export_data("lazy", ExportFormat::kCsv, ExportWhat::kTable); }),
            ErrorCode::kEmptyAggregate);
}

TEST_F(ServiceTest, RestartReplaysState) {
  std::vector<std::string> before;
  std::string open_session;
  {
    ExperimentService service(dir_, ticking_clock(3));
    service.create_experiment(small_config("r"));
    for (int p = 0; p < 4; ++p) {
      const auto desc = service.create_session("r", "p" + std::to_string(p));
      for (const auto& s : desc.slots) {
        if ((s.slot + p) % 4 == 0) service.record_response(desc.session_id, s.slot, true, 200);
      }
      if (p < 3) service.complete_session(desc.session_id);
      else open_session = desc.session_id;
    }
    for (auto what : {ExportWhat::kTable, ExportWhat::kMatrix}) {
      before.push_back(service.export_data("r", ExportFormat::kCsv, what));
    }
    before.push_back(service.export_data("r", ExportFormat::kJsonl, ExportWhat::kTable));
  }
  EXPECT_TRUE(std::filesystem::exists(dir_ / "r" / "snapshot.json"));
  ExperimentService replayed(dir_, ticking_clock(3));
  std::vector<std::string> after;
  for (auto what : {ExportWhat::kTable, ExportWhat::kMatrix}) {
    after.push_back(replayed.export_data("r", ExportFormat::kCsv, what));
  }
  after.push_back(replayed.export_data("r", ExportFormat::kJsonl, ExportWhat::kTable));
  EXPECT_EQ(after, before);
  // The open session keeps accepting responses and the next session id is fresh.
  EXPECT_FALSE(replayed.schedule(open_session).completed);
  replayed.record_response(open_session, 1, true, 10);
  const auto next = replayed.create_session("r", "p4");
  EXPECT_NE(next.session_id, open_session);
}

}  // namespace
