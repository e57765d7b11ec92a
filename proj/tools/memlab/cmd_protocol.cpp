#include <csignal>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include <pthread.h>

#include "common.hpp"
#include "memlab/error.hpp"
#include "memlab/io/csv.hpp"
#include "memlab/io/records.hpp"
#include "memlab/protocol/scoring.hpp"
#include "memlab/protocol/sequence.hpp"
#include "memlab/protocol/simulate.hpp"
#include "memlab/random.hpp"
#include "memlab/server/experiment_service.hpp"
#include "memlab/server/http_server.hpp"

namespace memlab::cli {
namespace {

constexpr std::uint64_t kTruthStream = 0x7472757468ULL;

std::string numbered(const char* prefix, int i) {
  std::ostringstream s;
  s << prefix << std::setw(4) << std::setfill('0') << i;
  return s.str();
}

void add_gen_seq(CLI::App& app) {
  struct State {
    std::string pool;
    SequenceOptions seq;
    std::vector<std::int64_t> orders;
    int count = 1;
    std::uint64_t seed = 0;
    std::string out;
  };
  auto st = std::make_shared<State>();
  auto* cmd = app.add_subcommand("gen-seq", "Generate memory-game sequences as JSONL, one presentation per line");
  cmd->add_option("--pool", st->pool, "Pool manifest CSV (item_id,image_uri,role); synthetic ids when omitted")
      ->check(CLI::ExistingFile);
  st->seq.add_to(*cmd, true);
  cmd->add_option("--order", st->orders, "Fixed order id(s); one sequence per id")->delimiter(',');
  cmd->add_option("--count", st->count, "Randomized sequences to emit; sequence i uses derive_seed(seed, i) when > 1")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", st->seed, "Seed for randomized sequences")->capture_default_str();
  cmd->add_option("--out", st->out, "Output file (stdout when omitted)");
  cmd->callback([st] {
    protocol::SequenceParams params = st->seq.resolve();
    std::vector<protocol::StimulusItem> pool;
    if (!st->pool.empty()) {
      pool = io::read_pool_file(st->pool);
    } else {
      std::vector<std::string> targets;
      for (int i = 0; i < params.n_targets; ++i) targets.push_back(numbered("target-", i));
      pool = protocol::synthetic_pool(targets, params.n_fillers, params.n_vigilance);
    }
    Output out(st->out);
    if (!st->orders.empty()) {
      for (std::int64_t order : st->orders) {
        params.fixed_order = order;
        io::write_sequence_jsonl(out.stream(), protocol::generate_sequence(pool, params, st->seed));
      }
    } else {
      for (int i = 0; i < st->count; ++i) {
        const std::uint64_t seed = st->count == 1 ? st->seed : derive_seed(st->seed, static_cast<std::uint64_t>(i));
        io::write_sequence_jsonl(out.stream(), protocol::generate_sequence(pool, params, seed));
      }
    }
    out.close();
  });
}

void add_simulate(CLI::App& app) {
  struct State {
    std::string truth;
    int items = 45;
    double score_mean = 0.66;
    double score_sd = 0.14;
    std::string truth_out;
    int participants = 270;
    std::vector<std::int64_t> orders;
    std::string order_effect;
    protocol::ObserverModel observers;
    SequenceOptions seq;
    std::uint64_t seed = 0;
    std::string out;
  };
  auto st = std::make_shared<State>();
  auto* cmd = app.add_subcommand("simulate", "Simulate synthetic observers playing the memory game");
  auto* truth = cmd->add_option("--truth", st->truth, "True detection probability per target (item_id,p)")
                    ->check(CLI::ExistingFile);
  auto* items = cmd->add_option("--items", st->items, "Synthetic targets when --truth is omitted")
                    ->capture_default_str();
  truth->excludes(items);
  cmd->add_option("--score-mean", st->score_mean, "Mean of the synthetic true scores")->capture_default_str();
  cmd->add_option("--score-sd", st->score_sd, "Std of the synthetic true scores (clipped to [0,1])")
      ->capture_default_str();
  cmd->add_option("--truth-out", st->truth_out, "Write the true scores used (item_id,p)");
  cmd->add_option("--participants", st->participants, "Participants (per order when --order is given)")
      ->capture_default_str();
  cmd->add_option("--order", st->orders, "Fixed order id(s); randomized sequences when omitted")->delimiter(',');
  cmd->add_option("--order-effect", st->order_effect, "Per-order detection shifts (order_id,item_id,delta)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--fa-prob", st->observers.false_alarm_prob, "Press probability on non-repeat slots")
      ->capture_default_str();
  cmd->add_option("--vigilance-prob", st->observers.vigilance_prob, "Press probability on vigilance repeats")
      ->capture_default_str();
  st->seq.add_to(*cmd, false);
  cmd->add_option("--seed", st->seed, "Master seed")->capture_default_str();
  cmd->add_option("--out", st->out, "Sessions JSONL (stdout when omitted)");
  cmd->callback([st] {
    std::map<std::string, double> truth_map;
    if (!st->truth.empty()) {
      for (const auto& [id, p] : io::read_scores_file(st->truth)) truth_map.emplace(id, p);
    } else {
      if (st->items < 1) fail(ErrorCode::kInvalidInput, "--items must be >= 1");
      if (!(st->score_sd >= 0.0)) fail(ErrorCode::kInvalidInput, "--score-sd must be >= 0");
      Engine engine = make_engine(st->seed, kTruthStream);
      std::normal_distribution<double> draw(st->score_mean, st->score_sd);
      for (int i = 0; i < st->items; ++i) truth_map.emplace(numbered("item-", i), std::clamp(draw(engine), 0.0, 1.0));
    }
    if (!st->truth_out.empty()) {
      Output t(st->truth_out);
      io::write_csv_row(t.stream(), row({"item_id", "p", "seed"}));
      for (const auto& [id, p] : truth_map) io::write_csv_row(t.stream(), row({id, fmt(p), std::to_string(st->seed)}));
      t.close();
    }
    protocol::OrderEffect effect;
    if (!st->order_effect.empty()) {
      auto in = io::open_input(st->order_effect);
      effect = io::read_order_effect_csv(in);
    }
    protocol::SequenceParams params = st->seq.resolve();
    io::Bundle bundle;
    auto merge = [&](protocol::SimulatedSessions sim) {
      for (auto& [id, s] : sim.sequences) bundle.sequences.emplace(id, std::move(s));
      for (auto& s : sim.sessions) bundle.sessions.push_back(std::move(s));
    };
    if (st->orders.empty()) {
      merge(protocol::simulate_sessions(truth_map, st->participants, effect, params, st->observers, st->seed));
    } else {
      for (std::int64_t order : st->orders) {
        params.fixed_order = order;
        merge(protocol::simulate_sessions(truth_map, st->participants, effect, params, st->observers, st->seed));
      }
    }
    Output out(st->out);
    io::write_bundle_jsonl(out.stream(), bundle);
    out.close();
  });
}

void add_score(CLI::App& app) {
  struct State {
    std::vector<std::string> in;
    AttentivenessOptions attentiveness;
    std::string table_out;
    std::string matrix_out;
    std::string sessions_out;
  };
  auto st = std::make_shared<State>();
  auto* cmd = app.add_subcommand("score", "Score sessions into a memorability table and response matrix");
  cmd->add_option("--in", st->in, "Sequence and session files (JSONL)")->required()->check(CLI::ExistingFile);
  st->attentiveness.add_to(*cmd);
  cmd->add_option("--table-out", st->table_out, "Memorability table CSV (stdout when omitted)");
  cmd->add_option("--matrix-out", st->matrix_out, "Response matrix CSV");
  cmd->add_option("--sessions-out", st->sessions_out, "Per-session scores CSV");
  cmd->callback([st] {
    const io::Bundle bundle = io::read_bundle_files({st->in.begin(), st->in.end()});
    const auto agg = protocol::aggregate_scores(bundle.sequences, bundle.sessions, st->attentiveness.value);
    Output table(st->table_out);
    io::write_table_csv(table.stream(), agg.table);
    table.close();
    if (!st->matrix_out.empty()) {
      Output m(st->matrix_out);
      io::write_matrix_csv(m.stream(), agg.matrix);
      m.close();
    }
    if (!st->sessions_out.empty()) {
      Output s(st->sessions_out);
      io::write_csv_row(s.stream(), row({"session_id", "participant_id", "sequence_id", "completed",
                                         "false_alarm_rate", "vigilance_hit_rate", "attentive"}));
      for (const auto& rec : bundle.sessions) {
        const auto it = bundle.sequences.find(rec.sequence_id);
        if (it == bundle.sequences.end()) continue;
        const auto sc = protocol::score_session(it->second, rec, st->attentiveness.value);
        io::write_csv_row(s.stream(), row({rec.session_id, rec.participant_id, rec.sequence_id,
                                           rec.completed ? "1" : "0", fmt(sc.false_alarm_rate),
                                           fmt(sc.vigilance_hit_rate), sc.attentive ? "1" : "0"}));
      }
      s.close();
    }
    std::cerr << "attentive sessions: " << agg.attentive_sessions << ", excluded: " << agg.excluded_sessions << '\n';
  });
}

void add_serve(CLI::App& app) {
  struct State {
    std::string data_dir = "memlab-data";
    server::HttpOptions http;
    std::string stimuli_dir;
    int snapshot_every = 256;
    std::string experiment;
    std::string pool;
    std::string sequence;
    std::int64_t order = 0;
    CLI::Option* order_opt = nullptr;
    SequenceOptions seq;
    AttentivenessOptions attentiveness;
    int max_sessions = 120;
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;
  };
  auto st = std::make_shared<State>();
  auto* cmd = app.add_subcommand("serve", "Run the HTTP experiment server");
  cmd->add_option("--data-dir", st->data_dir, "Directory holding experiment logs")->capture_default_str();
  cmd->add_option("--host", st->http.host, "Listen address")->capture_default_str();
  cmd->add_option("--port", st->http.port, "Listen port (0 picks a free one)")->capture_default_str();
  cmd->add_option("--stimuli-dir", st->stimuli_dir, "Image directory served under /stimuli/")
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--snapshot-every", st->snapshot_every, "Log entries between snapshots (0 = never)")
      ->capture_default_str();
  cmd->add_option("--experiment", st->experiment, "Create this experiment at startup unless it exists");
  cmd->add_option("--pool", st->pool, "Pool manifest for --experiment")->check(CLI::ExistingFile);
  cmd->add_option("--sequence", st->sequence, "Serve this gen-seq file to every session of --experiment")
      ->check(CLI::ExistingFile);
  st->order_opt = cmd->add_option("--order", st->order, "Fixed order id for --experiment");
  st->seq.add_to(*cmd, true);
  st->attentiveness.add_to(*cmd);
  cmd->add_option("--max-sessions", st->max_sessions, "Session capacity of --experiment")->capture_default_str();
  st->seed_opt = cmd->add_option("--seed", st->seed, "Master seed of --experiment (random when omitted)");
  cmd->callback([st] {
    server::ServiceOptions options;
    options.snapshot_every = st->snapshot_every;
    server::ExperimentService service(st->data_dir, options);
    if (!st->experiment.empty()) {
      const auto ids = service.experiment_ids();
      if (std::find(ids.begin(), ids.end(), st->experiment) == ids.end()) {
        server::ExperimentConfig config;
        config.experiment_id = st->experiment;
        config.params = st->seq.resolve();
        if (st->order_opt->count() > 0) config.params.fixed_order = st->order;
        if (!st->pool.empty()) config.pool = io::read_pool_file(st->pool);
        if (!st->sequence.empty()) {
          auto bundle = io::read_bundle_files({st->sequence});
          if (bundle.sequences.size() != 1) fail(ErrorCode::kInvalidInput, "--sequence must hold one sequence");
          config.fixed_sequence = bundle.sequences.begin()->second;
        }
        config.attentiveness = st->attentiveness.value;
        config.max_sessions = st->max_sessions;
        if (st->seed_opt->count() > 0) config.seed = st->seed;
        service.create_experiment(std::move(config));
      }
    }
    if (!st->stimuli_dir.empty()) st->http.stimuli_dir = st->stimuli_dir;

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    server::HttpServer http(service, st->http);
    const int port = http.bind();
    std::cout << "listening on " << st->http.host << ":" << port << std::endl;
    std::thread waiter([&] {
      int sig = 0;
      sigwait(&signals, &sig);
      http.stop();
    });
    http.run();
    // run() also returns if the listener fails; wake the waiter either way.
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    service.snapshot_all();
  });
}

}  // namespace

void register_protocol_commands(CLI::App& app) {
  add_gen_seq(app);
  add_simulate(app);
  add_score(app);
  add_serve(app);
}

}  // namespace memlab::cli
