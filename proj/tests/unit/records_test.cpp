#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "memlab/error.hpp"
#include "memlab/io/records.hpp"
#include "memlab/protocol/scoring.hpp"
#include "memlab/protocol/sequence.hpp"
#include "memlab/protocol/simulate.hpp"
#include "scenarios.hpp"

namespace {

using namespace memlab;
using namespace memlab::protocol;

SimulatedSessions small_sim() {
  SequenceParams params;
  params.n_fillers = 12;
  params.n_vigilance = 2;
  params.target_spacing = {3, 9};
  const std::map<std::string, double> truth{{"a", 0.2}, {"b", 0.5}, {"c", 0.9}, {"d", 0.6}};
  return simulate_sessions(truth, 6, {}, params, {}, 4);
}

TEST(Pool, RoundTripAndErrors) {
  const std::vector<StimulusItem> pool{{"x", "img/x.jpg", StimulusRole::kTarget},
                                       {"y", "img/y,2.jpg", StimulusRole::kFiller},
                                       {"z", "", StimulusRole::kVigilance}};
  std::ostringstream out;
  io::write_pool_csv(out, pool);
  std::istringstream in(out.str());
  EXPECT_EQ(io::read_pool_csv(in), pool);

  std::istringstream dup("item_id,image_uri,role\na,,target\na,,filler\n");
  EXPECT_THROW(io::read_pool_csv(dup), Error);
  std::istringstream role("item_id,image_uri,role\na,,decoy\n");
  EXPECT_THROW(io::read_pool_csv(role), Error);
}

TEST(Bundle, RoundTrip) {
  const auto sim = small_sim();
  io::Bundle bundle{sim.sequences, sim.sessions};
  std::ostringstream out;
  io::write_bundle_jsonl(out, bundle);
  std::istringstream in(out.str());
  const auto back = io::read_bundle_jsonl(in);
  EXPECT_EQ(back.sequences, bundle.sequences);
  EXPECT_EQ(back.sessions, bundle.sessions);
  const auto& seq = back.sequences.begin()->second;
  EXPECT_TRUE(validate_sequence(seq).empty());
  EXPECT_EQ(aggregate_scores(back.sequences, back.sessions).table,
            aggregate_scores(sim.sequences, sim.sessions).table);
}

TEST(Bundle, SequenceFileHasOneLinePerSlot) {
  SequenceParams params;
  params.n_targets = 0;
  params.n_fillers = 5;
  const auto seq = generate_sequence(synthetic_pool({}, 5, 0), params, 1);
  std::ostringstream out;
  io::write_sequence_jsonl(out, seq);
  const std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}

TEST(Bundle, ReadErrorsNameTheLine) {
  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      io::read_bundle_jsonl(in);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kFormatError);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("{\"type\":\"presentation\"\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("\n{\"type\":\"event\",\"session_id\":\"s\",\"slot\":0,\"pressed\":true,\"latency_ms\":1}\n")
                .find("line 2"),
            std::string::npos);
  EXPECT_NE(message("{\"type\":\"mystery\"}\n").find("line 1"), std::string::npos);
}

TEST(Bundle, MergesFiles) {
  const auto sim = small_sim();
  const auto dir = test_support::scratch_dir("bundle");
  {
    std::ofstream seqs(dir / "seq.jsonl");
    for (const auto& [id, s] : sim.sequences) io::write_sequence_jsonl(seqs, s);
    std::ofstream sess(dir / "sess.jsonl");
    for (const auto& s : sim.sessions) io::write_session_jsonl(sess, s);
  }
  const auto merged = io::read_bundle_files({dir / "seq.jsonl", dir / "sess.jsonl"});
  EXPECT_EQ(merged.sequences, sim.sequences);
  EXPECT_EQ(merged.sessions, sim.sessions);
  std::filesystem::remove_all(dir);
}

TEST(TableCsv, ExactHeaderAndRoundTrip) {
  const auto sim = small_sim();
  const auto table = aggregate_scores(sim.sequences, sim.sessions).table;
  std::ostringstream out;
  io::write_table_csv(out, table);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "item_id,score,n_observers,variance,false_alarms");
  std::istringstream in(out.str());
  EXPECT_EQ(io::read_table_csv(in), table);
}

TEST(MatrixCsv, RoundTripWithMissing) {
  stats::ResponseMatrix m({"p1", "p2"}, {"t1", "t2"});
  m.set(0, 0, stats::Response::kHit);
  m.set(1, 1, stats::Response::kMiss);
  std::ostringstream out;
  io::write_matrix_csv(out, m);
  EXPECT_EQ(out.str(), "participant_id,t1,t2\np1,1,\np2,,0\n");
  std::istringstream in(out.str());
  EXPECT_EQ(io::read_matrix_csv(in), m);
  std::istringstream bad("participant_id,t1\np1,2\n");
  EXPECT_THROW(io::read_matrix_csv(bad), Error);
}

TEST(ScoresCsv, ColumnPreference) {
  std::istringstream table("item_id,score,n_observers\na,0.5,3\n");
  EXPECT_EQ(io::read_scores_csv(table).at("a"), 0.5);
  std::istringstream truth("item_id,p\na,0.25\n");
  EXPECT_EQ(io::read_scores_csv(truth).at("a"), 0.25);
  std::istringstream preds("item_id,prediction,seed\na,0.75,3\n");
  EXPECT_EQ(io::read_scores_csv(preds).at("a"), 0.75);
  std::istringstream pair("value,item_id\n0.1,a\n");
  EXPECT_EQ(io::read_scores_csv(pair).at("a"), 0.1);
  std::istringstream ambiguous("item_id,x,y\na,1,2\n");
  EXPECT_THROW(io::read_scores_csv(ambiguous), Error);
  std::istringstream dup("item_id,score\na,1\na,2\n");
  EXPECT_THROW(io::read_scores_csv(dup), Error);
}

TEST(OrderEffectCsv, Parses) {
  std::istringstream in("order_id,item_id,delta\n0,a,0.3\n1,a,-0.3\n");
  const auto effect = io::read_order_effect_csv(in);
  EXPECT_EQ(effect.at({0, "a"}), 0.3);
  EXPECT_EQ(effect.at({1, "a"}), -0.3);
}

}  // namespace
