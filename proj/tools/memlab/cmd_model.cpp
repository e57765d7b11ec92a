#include "common.hpp"
#include "memlab/error.hpp"
#include "memlab/eval/evaluation.hpp"
#include "memlab/gbt/train.hpp"
#include "memlab/io/csv.hpp"
#include "memlab/io/records.hpp"

namespace memlab::cli {
namespace {

eval::ItemScores load_scores(const std::string& path) { return io::read_scores_file(path); }

void add_train(CLI::App& app) {
  struct State {
    std::string features;
    std::string labels;
    BoostOptions boost;
    std::string out;
    std::string trace_out;
  };
  auto st = std::make_shared<State>();
  auto* cmd = app.add_subcommand("train", "Train a boosted-tree regressor on a feature file");
  cmd->add_option("--features", st->features, "Feature CSV or binary file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--labels", st->labels, "Labels (memorability table or item_id,score)")
      ->required()
      ->check(CLI::ExistingFile);
  st->boost.add_to(*cmd, "--seed");
  cmd->add_option("--out", st->out, "Model file")->required();
  cmd->add_option("--trace-out", st->trace_out, "Per-round training MSE CSV");
  cmd->callback([st] {
    const auto x = gbt::load_features(st->features);
    const auto y = aligned_labels(x, load_scores(st->labels));
    const auto params = st->boost.resolve();
    gbt::TrainingTrace trace;
    const auto model = gbt::train(x, y, params, &trace);
    gbt::save_model(model, st->out);
    if (!st->trace_out.empty()) {
      Output t(st->trace_out);
      io::write_csv_row(t.stream(), row({"round", "train_mse", "validation_mse", "seed"}));
      io::write_csv_row(t.stream(), row({"0", fmt(trace.initial_mse), "", std::to_string(params.seed)}));
      for (std::size_t i = 0; i < trace.train_mse.size(); ++i) {
        io::write_csv_row(t.stream(), row({std::to_string(i + 1), fmt(trace.train_mse[i]),
                                           i < trace.validation_mse.size() ? fmt(trace.validation_mse[i]) : "",
                                           std::to_string(params.seed)}));
      }
      t.close();
    }
    std::cerr << "trained " << model.trees().size() << " trees on " << x.rows() << " items, seed " << params.seed
              << '\n';
  });
}

void add_predict(CLI::App& app) {
  struct State {
    std::string model;
    std::string features;
    std::string out;
  };
  auto st = std::make_shared<State>();
  auto* cmd = app.add_subcommand("predict", "Predict memorability scores with a trained model");
  cmd->add_option("--model", st->model, "Model file from train")->required()->check(CLI::ExistingFile);
  cmd->add_option("--features", st->features, "Feature CSV or binary file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", st->out, "Predictions CSV (stdout when omitted)");
  cmd->callback([st] {
    const auto model = gbt::load_model(st->model);
    const auto x = gbt::load_features(st->features);
    const auto pred = model.predict(x);
    Output out(st->out);
    io::write_csv_row(out.stream(), row({"item_id", "prediction", "seed"}));
    for (std::size_t i = 0; i < x.rows(); ++i) {
      io::write_csv_row(out.stream(), row({x.item_ids()[i], fmt(pred[i]), std::to_string(model.params().seed)}));
    }
    out.close();
  });
}

void write_summary_header(Output& out) {
  io::write_csv_row(out.stream(), row({"rank", "name", "mean_rho", "sigma_rho", "n_splits", "resampled_splits",
                                       "test_fraction", "seed"}));
}

void write_summary(Output& out, std::size_t rank, const eval::EvalReport& r) {
  io::write_csv_row(out.stream(), row({std::to_string(rank), r.name, fmt(r.mean_rho), fmt(r.sigma_rho),
                                       std::to_string(r.per_split_rho.size()), std::to_string(r.resampled_splits),
                                       fmt(r.config.test_fraction), std::to_string(r.config.seed)}));
}

void add_evaluate(CLI::App& app) {
  struct State {
    std::string features;
    std::string labels;
    BoostOptions boost;
    EvalOptions eval;
    std::string out;
    std::string splits_out;
    std::string membership_out;
  };
  auto st = std::make_shared<State>();
  auto* cmd = app.add_subcommand("evaluate", "Repeated random train/test splits scored by Spearman rho");
  cmd->add_option("--features", st->features, "Feature CSV or binary file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--labels", st->labels, "Ground-truth scores")->required()->check(CLI::ExistingFile);
  st->boost.add_to(*cmd, "--train-seed");
  st->eval.add_to(*cmd);
  cmd->add_option("--out", st->out, "Summary CSV (stdout when omitted)");
  cmd->add_option("--splits-out", st->splits_out, "Per-split CSV (split, test rho, train rho)");
  cmd->add_option("--membership-out", st->membership_out, "Split membership CSV (split, item_id, part)");
  cmd->callback([st] {
    const auto x = gbt::load_features(st->features);
    const auto report = eval::eval_protocol(x, load_scores(st->labels), st->boost.resolve(), st->eval.config,
                                            std::filesystem::path(st->features).stem().string());
    Output out(st->out);
    write_summary_header(out);
    write_summary(out, 1, report);
    out.close();
    if (!st->splits_out.empty()) {
      Output s(st->splits_out);
      io::write_csv_row(s.stream(), row({"split", "rho", "train_rho", "n_train", "n_test", "seed"}));
      for (std::size_t i = 0; i < report.per_split_rho.size(); ++i) {
        io::write_csv_row(s.stream(), row({std::to_string(i), fmt(report.per_split_rho[i]),
                                           fmt(report.per_split_train_rho[i]),
                                           std::to_string(report.splits[i].train.size()),
                                           std::to_string(report.splits[i].test.size()),
                                           std::to_string(report.config.seed)}));
      }
      s.close();
    }
    if (!st->membership_out.empty()) {
      Output m(st->membership_out);
      io::write_csv_row(m.stream(), row({"split", "item_id", "part"}));
      for (std::size_t i = 0; i < report.splits.size(); ++i) {
        for (std::size_t r : report.splits[i].train) {
          io::write_csv_row(m.stream(), row({std::to_string(i), x.item_ids()[r], "train"}));
        }
        for (std::size_t r : report.splits[i].test) {
          io::write_csv_row(m.stream(), row({std::to_string(i), x.item_ids()[r], "test"}));
        }
      }
      m.close();
    }
  });
}

void add_compare(CLI::App& app) {
  struct State {
    std::vector<std::string> features;
    std::string labels;
    bool concat = false;
    BoostOptions boost;
    EvalOptions eval;
    std::string out;
  };
  auto st = std::make_shared<State>();
  auto* cmd = app.add_subcommand("compare", "Rank several feature files by evaluation rho");
  cmd->add_option("--features", st->features, "Feature files, each as path or name=path (at least two)")
      ->required()
      ->expected(2, -1);
  cmd->add_option("--labels", st->labels, "Ground-truth scores")->required()->check(CLI::ExistingFile);
  cmd->add_flag("--concat", st->concat, "Also evaluate the column-wise concatenation of all feature files");
  st->boost.add_to(*cmd, "--train-seed");
  st->eval.add_to(*cmd);
  cmd->add_option("--out", st->out, "Ranking CSV (stdout when omitted)");
  cmd->callback([st] {
    std::vector<eval::NamedFeatures> sets;
    for (const auto& arg : st->features) {
      const auto eq = arg.find('=');
      const std::string path = eq == std::string::npos ? arg : arg.substr(eq + 1);
      const std::string name = eq == std::string::npos ? std::filesystem::path(arg).stem().string() : arg.substr(0, eq);
      sets.push_back({name, gbt::load_features(path)});
    }
    if (st->concat) {
      eval::NamedFeatures all = sets.front();
      for (std::size_t i = 1; i < sets.size(); ++i) {
        all.name += "+" + sets[i].name;
        all.features = gbt::concat_columns(all.features, sets[i].features);
      }
      sets.push_back(std::move(all));
    }
    const auto reports = eval::compare_feature_sets(sets, load_scores(st->labels), st->boost.resolve(), st->eval.config);
    Output out(st->out);
    write_summary_header(out);
    for (std::size_t i = 0; i < reports.size(); ++i) write_summary(out, i + 1, reports[i]);
    out.close();
  });
}

void add_errdiff(CLI::App& app) {
  struct State {
    std::string a;
    std::string b;
    std::string truth;
    double bin_width = 0.05;
    std::string edges;
    std::string out;
    std::string items_out;
  };
  auto st = std::make_shared<State>();
  auto* cmd = app.add_subcommand("errdiff", "Per-item |A - truth| - |B - truth|, binned by true score");
  cmd->add_option("--pred-a", st->a, "Predictions of A (item_id,prediction)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--pred-b", st->b, "Predictions of B")->required()->check(CLI::ExistingFile);
  cmd->add_option("--truth", st->truth, "Ground-truth scores")->required()->check(CLI::ExistingFile);
  auto* width = cmd->add_option("--bin-width", st->bin_width, "Equal bins over [0,1]")->capture_default_str();
  cmd->add_option("--edges", st->edges, "Explicit bin edges, comma separated")->excludes(width);
  cmd->add_option("--out", st->out, "Histogram CSV (stdout when omitted)");
  cmd->add_option("--items-out", st->items_out, "Per-item differences CSV");
  cmd->callback([st] {
    std::vector<double> edges;
    if (!st->edges.empty()) {
      std::string_view rest = st->edges;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        edges.push_back(io::parse_number(rest.substr(0, comma), "--edges"));
        rest = comma == std::string_view::npos ? std::string_view() : rest.substr(comma + 1);
      }
    } else {
      if (!(st->bin_width > 0.0 && st->bin_width <= 1.0)) fail(ErrorCode::kInvalidInput, "--bin-width must be in (0, 1]");
      const auto n = static_cast<int>(std::ceil(1.0 / st->bin_width - 1e-9));
      for (int i = 0; i <= n; ++i) edges.push_back(std::min(1.0, i * st->bin_width));
      if (n == 20 && st->bin_width == 0.05) edges = eval::default_bin_edges();
    }
    const auto report = eval::error_difference(load_scores(st->a), load_scores(st->b), load_scores(st->truth), edges);
    Output out(st->out);
    io::write_csv_row(out.stream(), row({"bin_lo", "bin_hi", "a_better", "b_better", "ties"}));
    for (const auto& b : report.bins) {
      io::write_csv_row(out.stream(), row({fmt(b.lo), fmt(b.hi), std::to_string(b.a_better),
                                           std::to_string(b.b_better), std::to_string(b.ties)}));
    }
    out.close();
    if (!st->items_out.empty()) {
      Output items(st->items_out);
      io::write_csv_row(items.stream(), row({"item_id", "truth", "difference"}));
      for (const auto& it : report.items) {
        io::write_csv_row(items.stream(), row({it.item_id, fmt(it.truth), fmt(it.difference)}));
      }
      items.close();
    }
  });
}

}  // namespace

void register_model_commands(CLI::App& app) {
  add_train(app);
  add_predict(app);
  add_evaluate(app);
  add_compare(app);
  add_errdiff(app);
}

}  // namespace memlab::cli
