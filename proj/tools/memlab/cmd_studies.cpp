#include <map>

#include "common.hpp"
#include "memlab/error.hpp"
#include "memlab/eval/evaluation.hpp"
#include "memlab/io/csv.hpp"
#include "memlab/io/records.hpp"
#include "memlab/protocol/order_study.hpp"
#include "memlab/stats/consistency.hpp"

namespace memlab::cli {
namespace {

void write_rhos(const std::string& path, const std::vector<stats::ConsistencyReport>& reports, std::uint64_t seed) {
  if (path.empty()) return;
  Output out(path);
  io::write_csv_row(out.stream(), row({"K", "split", "rho", "seed"}));
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.per_split_rhos.size(); ++i) {
      io::write_csv_row(out.stream(), row({std::to_string(r.group_size), std::to_string(i), fmt(r.per_split_rhos[i]),
                                           std::to_string(seed)}));
    }
  }
  out.close();
}

void write_consistency(Output& out, const std::vector<stats::ConsistencyReport>& reports, std::uint64_t seed) {
  io::write_csv_row(out.stream(),
                    row({"K", "mean_rho", "sigma_rho", "n_splits", "discarded_splits", "subsampled", "seed"}));
  for (const auto& r : reports) {
    io::write_csv_row(out.stream(), row({std::to_string(r.group_size), fmt(r.mean_rho), fmt(r.sigma_rho),
                                         std::to_string(r.n_splits), std::to_string(r.discarded_splits),
                                         r.subsampled ? "1" : "0", std::to_string(seed)}));
  }
  out.close();
}

void add_consistency(CLI::App& app) {
  struct State {
    MatrixInput input;
    std::string k = "40,100,135";
    int splits = 100;
    std::uint64_t seed = 0;
    std::string out;
    std::string per_split_out;
  };
  auto st = std::make_shared<State>();
  auto* cmd = app.add_subcommand("consistency", "Split-half consistency for each group size K");
  st->input.add_to(*cmd);
  cmd->add_option("--k", st->k, "Group sizes, comma separated")->capture_default_str();
  cmd->add_option("--splits", st->splits, "Random splits per K")->capture_default_str();
  cmd->add_option("--seed", st->seed, "Master seed; K uses derive_seed(seed, K)")->capture_default_str();
  cmd->add_option("--out", st->out, "Summary CSV (stdout when omitted)");
  cmd->add_option("--per-split-out", st->per_split_out, "Tidy CSV of every split's rho");
  cmd->callback([st] {
    const auto m = st->input.load();
    const auto ks = io::parse_int_list(st->k, "--k");
    const auto reports = stats::consistency_curve(m, ks, st->splits, st->seed);
    Output out(st->out);
    write_consistency(out, reports, st->seed);
    write_rhos(st->per_split_out, reports, st->seed);
  });
}

void add_upper_bound(CLI::App& app) {
  struct State {
    MatrixInput input;
    int splits = 100;
    std::uint64_t seed = 0;
    std::string out;
  };
  auto st = std::make_shared<State>();
  auto* cmd = app.add_subcommand("upper-bound", "Human consistency: split-half at K = floor(N/2)");
  st->input.add_to(*cmd);
  cmd->add_option("--splits", st->splits, "Random splits")->capture_default_str();
  cmd->add_option("--seed", st->seed, "Seed")->capture_default_str();
  cmd->add_option("--out", st->out, "CSV (stdout when omitted)");
  cmd->callback([st] {
    const auto report = eval::human_upper_bound(st->input.load(), st->splits, st->seed);
    Output out(st->out);
    write_consistency(out, {report}, st->seed);
  });
}

void add_variance(CLI::App& app) {
  struct State {
    MatrixInput input;
    std::string k = "40,130";
    int groups = 1000;
    std::uint64_t seed = 0;
    std::string out;
  };
  auto st = std::make_shared<State>();
  auto* cmd = app.add_subcommand("variance", "Across-group variance of per-image scores for each group size K");
  st->input.add_to(*cmd);
  cmd->add_option("--k", st->k, "Group sizes, comma separated")->capture_default_str();
  cmd->add_option("--groups", st->groups, "Random groups per K")->capture_default_str();
  cmd->add_option("--seed", st->seed, "Master seed")->capture_default_str();
  cmd->add_option("--out", st->out, "Tidy CSV, one row per (K, item) (stdout when omitted)");
  cmd->callback([st] {
    const auto ks = io::parse_int_list(st->k, "--k");
    const auto curves = stats::group_variance_analysis(st->input.load(), ks, st->groups, st->seed);
    Output out(st->out);
    io::write_csv_row(out.stream(), row({"K", "item_id", "mean_score", "variance", "corrected_variance",
                                         "n_observers", "n_groups", "seed"}));
    for (const auto& c : curves) {
      for (const auto& p : c.points) {
        io::write_csv_row(out.stream(), row({std::to_string(c.group_size), p.item_id, fmt(p.mean_score),
                                             fmt(p.across_group_variance), fmt(p.corrected_variance),
                                             std::to_string(p.n_observers), std::to_string(c.n_groups),
                                             std::to_string(st->seed)}));
      }
    }
    out.close();
  });
}

void add_order_study(CLI::App& app) {
  struct State {
    std::vector<std::string> in;
    AttentivenessOptions attentiveness;
    int group_size = 25;
    int splits = 100;
    std::uint64_t seed = 0;
    std::string out;
    std::string tables_prefix;
  };
  auto st = std::make_shared<State>();
  auto* cmd = app.add_subcommand("order-study", "Within- vs cross-order consistency; sessions grouped by sequence");
  cmd->add_option("--in", st->in, "Sequence and session files (JSONL)")->required()->check(CLI::ExistingFile);
  st->attentiveness.add_to(*cmd);
  cmd->add_option("--group-size", st->group_size, "Participants per group")->capture_default_str();
  cmd->add_option("--splits", st->splits, "Random splits / pairings")->capture_default_str();
  cmd->add_option("--seed", st->seed, "Seed")->capture_default_str();
  cmd->add_option("--out", st->out, "Summary CSV (stdout when omitted)");
  cmd->add_option("--tables-prefix", st->tables_prefix, "Write each order's table to <prefix><sequence_id>.csv");
  cmd->callback([st] {
    const io::Bundle bundle = io::read_bundle_files({st->in.begin(), st->in.end()});
    std::map<std::string, std::vector<protocol::SessionRecord>> grouped;
    for (const auto& s : bundle.sessions) grouped[s.sequence_id].push_back(s);
    const auto report = protocol::order_study_report(bundle.sequences, grouped, st->group_size, st->splits, st->seed,
                                                     st->attentiveness.value);
    Output out(st->out);
    io::write_csv_row(out.stream(), row({"measure", "mean_rho", "sigma_rho", "n_values", "discarded_splits",
                                         "group_size", "n_orders", "seed"}));
    auto line = [&](const char* name, const protocol::RhoSummary& r) {
      io::write_csv_row(out.stream(), row({name, fmt(r.mean_rho), fmt(r.sigma_rho),
                                           std::to_string(r.per_split_rhos.size()), std::to_string(r.discarded_splits),
                                           std::to_string(report.group_size), std::to_string(report.order_ids.size()),
                                           std::to_string(st->seed)}));
    };
    line("within_order", report.within_order);
    line("cross_order", report.cross_order);
    out.close();
    if (!st->tables_prefix.empty()) {
      for (std::size_t i = 0; i < report.order_ids.size(); ++i) {
        Output t(st->tables_prefix + report.order_ids[i] + ".csv");
        io::write_table_csv(t.stream(), report.per_order_tables[i]);
        t.close();
      }
    }
  });
}

}  // namespace

void register_study_commands(CLI::App& app) {
  add_consistency(app);
  add_variance(app);
  add_order_study(app);
  add_upper_bound(app);
}

}  // namespace memlab::cli
