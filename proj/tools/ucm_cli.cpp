// Command-line front end: estimate channels, decide causal direction,
// reproduce the synthetic accuracy curves, and evaluate pair corpora.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ucm/bench.hpp"
#include "ucm/core.hpp"
#include "ucm/estimation.hpp"
#include "ucm/inference.hpp"
#include "ucm/synthetic.hpp"
#include "ucm/testing.hpp"

namespace {

using nlohmann::json;

struct LoadFlags {
  std::string delimiter = "auto";
  std::string missing = "?";
  int bin_x = 0;
  int bin_y = 0;
  int bin_both = 0;

  ucm::LoadOptions options() const {
    ucm::LoadOptions opts;
    opts.delimiter = ucm::delimiter_from_name(delimiter);
    opts.missing_sentinel = missing;
    opts.bin_x = bin_both > 0 ? bin_both : bin_x;
    opts.bin_y = bin_both > 0 ? bin_both : bin_y;
    return opts;
  }
};

void add_load_flags(CLI::App* cmd, LoadFlags& flags) {
  cmd->add_option("--delim", flags.delimiter,
                  "field delimiter: auto, tab, comma, space, or a character");
  cmd->add_option("--missing", flags.missing,
                  "missing-value sentinel (default '?')");
  cmd->add_option("--bin-x", flags.bin_x,
                  "equal-frequency bins for a numeric X column");
  cmd->add_option("--bin-y", flags.bin_y,
                  "equal-frequency bins for a numeric Y column");
  cmd->add_option("--bin", flags.bin_both,
                  "equal-frequency bins for both columns");
}

json estimate_to_json(const ucm::UcmEstimate& estimate) {
  json taus = json::array();
  for (const auto& tau : estimate.taus()) taus.push_back(tau.mapping());
  json doc{{"kind", ucm::to_string(estimate.kind())},
           {"gamma", estimate.gamma().probs()},
           {"taus", taus},
           {"log_likelihood", estimate.log_likelihood()}};
  if (estimate.kind() == ucm::PermutationKind::cyclic) {
    json shifts = json::array();
    for (const auto& tau : estimate.taus()) shifts.push_back(tau.shift());
    doc["shifts"] = shifts;
  }
  return doc;
}

json channel_to_json(const ucm::ChannelMatrix& channel) {
  json rows = json::array();
  for (std::size_t x = 0; x < channel.input_size(); ++x) {
    rows.push_back(channel.row(x).probs());
  }
  return rows;
}

std::vector<ucm::GridCell> parse_sizes(const std::string& text) {
  std::vector<ucm::GridCell> cells;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string token = text.substr(pos, comma - pos);
    const std::size_t x_pos = token.find('x');
    if (x_pos == std::string::npos) {
      throw ucm::Error("sizes must look like 2x2,3x3: bad token '" + token +
                       "'");
    }
    cells.push_back(ucm::GridCell{
        static_cast<std::size_t>(std::stoul(token.substr(0, x_pos))),
        static_cast<std::size_t>(std::stoul(token.substr(x_pos + 1)))});
    pos = comma + 1;
  }
  if (cells.empty()) {
    throw ucm::Error("no support sizes given");
  }
  return cells;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream file(path);
  if (!file) {
    throw ucm::Error("cannot write " + path);
  }
  file << content;
}

int run_estimate(const std::string& path, const std::string& kind,
                 const LoadFlags& flags, const ucm::EstimationConfig& config) {
  const ucm::PairDataset pair = ucm::load_pair(path, flags.options());
  const ucm::ContingencyTable table = pair.table.smoothed(config.smoothing);
  json doc{{"file", path},
           {"n", pair.table.total()},
           {"x_labels", pair.x_labels},
           {"y_labels", pair.y_labels},
           {"smoothing", config.smoothing},
           {"marginal", ucm::estimate_marginal(table).probs()}};
  if (kind == "arbitrary") {
    const ucm::ArbitraryEstimate fit = ucm::estimate_arbitrary(table);
    doc["channel"] = channel_to_json(fit.channel);
    doc["log_likelihood"] = fit.log_likelihood;
  } else if (kind == "uc") {
    doc.update(estimate_to_json(ucm::estimate_uc(table)));
  } else if (kind == "cuc") {
    doc.update(estimate_to_json(ucm::estimate_cuc(table, config)));
  } else {
    throw ucm::Error("unknown kind: " + kind + " (use uc, cuc, or arbitrary)");
  }
  doc["kind"] = kind;
  std::cout << doc.dump(2) << '\n';
  return 0;
}

int run_decide(const std::string& path, const LoadFlags& flags,
               const ucm::DecisionConfig& config) {
  const ucm::PairDataset pair = ucm::load_pair(path, flags.options());
  const ucm::Decision decision = ucm::decide(pair.table, config);
  json doc{{"file", path},
           {"verdict", ucm::to_string(decision.verdict)},
           {"alpha", config.alpha},
           {"forced", config.forced},
           {"p_xy", decision.p_xy},
           {"p_yx", decision.p_yx},
           {"g2_xy", decision.g2_xy},
           {"g2_yx", decision.g2_yx},
           {"df_xy", decision.xy.test.df},
           {"df_yx", decision.yx.test.df},
           {"x_labels", pair.x_labels},
           {"y_labels", pair.y_labels}};
  doc["directions"] = {{"x_to_y", estimate_to_json(decision.xy.estimate)},
                       {"y_to_x", estimate_to_json(decision.yx.estimate)}};
  std::cout << doc.dump(2) << '\n';
  return 0;  // the verdict travels in the payload, not the exit code
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uniform-channel causal direction inference"};
  app.require_subcommand(1);

  // estimate
  std::string est_file;
  std::string est_kind = "uc";
  LoadFlags est_flags;
  ucm::EstimationConfig est_config;
  CLI::App* estimate =
      app.add_subcommand("estimate", "fit a channel to a two-column file");
  estimate->add_option("file", est_file, "pair file")->required();
  estimate->add_option("--kind", est_kind, "uc, cuc, or arbitrary");
  estimate->add_option("--smoothing", est_config.smoothing,
                       "pseudo-count added to every cell");
  estimate->add_option("--restarts", est_config.cuc_restarts,
                       "extra random restarts for the cyclic fit");
  estimate->add_option("--max-iters", est_config.cuc_max_iters,
                       "iteration cap per cyclic fit");
  estimate->add_option("--seed", est_config.rng_seed, "random seed");
  add_load_flags(estimate, est_flags);

  // decide
  std::string dec_file;
  LoadFlags dec_flags;
  ucm::DecisionConfig dec_config;
  CLI::App* decide =
      app.add_subcommand("decide", "infer the causal direction of a pair");
  decide->add_option("file", dec_file, "pair file")->required();
  decide->add_option("--alpha", dec_config.alpha, "significance level");
  decide->add_flag("--forced", dec_config.forced,
                   "always pick a direction (larger p wins)");
  decide->add_flag("--x-cyclic", dec_config.x_cyclic, "X is cyclic");
  decide->add_flag("--y-cyclic", dec_config.y_cyclic, "Y is cyclic");
  decide->add_option("--smoothing", dec_config.estimation.smoothing,
                     "pseudo-count added to every cell");
  decide->add_option("--restarts", dec_config.estimation.cuc_restarts,
                     "extra random restarts for cyclic fits");
  decide->add_option("--seed", dec_config.estimation.rng_seed, "random seed");
  add_load_flags(decide, dec_flags);

  // simulate
  std::string sim_sizes = "2x2,3x3,5x5";
  std::vector<std::size_t> sim_ns;
  int sim_trials = 100;
  bool sim_cyclic = false;
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  std::string sim_json;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "direction-identification accuracy on synthetic data");
  simulate->add_option("--sizes", sim_sizes, "support grid, e.g. 2x2,3x3");
  simulate->add_option("--ns", sim_ns, "sample sizes")
      ->required()
      ->delimiter(',');
  simulate->add_option("--trials", sim_trials, "datasets per grid point");
  simulate->add_flag("--cyclic", sim_cyclic,
                     "cyclic ground truth and cyclic tests");
  simulate->add_option("--seed", sim_seed, "random seed");
  simulate->add_option("--out", sim_out, "write the data table as TSV");
  simulate->add_option("--json", sim_json, "write the full report as JSON");

  // benchmark
  std::string bm_manifest;
  std::string bm_pairmeta;
  std::string bm_dir = ".";
  double bm_indep_alpha = 0.05;
  std::string bm_out;
  std::string bm_tsv;
  ucm::DecisionConfig bm_config;
  CLI::App* benchmark =
      app.add_subcommand("benchmark", "evaluate a corpus of pair files");
  benchmark->add_option("--manifest", bm_manifest,
                        "JSON manifest of pairs and ground truths");
  benchmark->add_option("--pairmeta", bm_pairmeta,
                        "pairmeta-style ground-truth file");
  benchmark->add_option("--dir", bm_dir, "data directory for --pairmeta");
  benchmark->add_option("--alpha", bm_config.alpha, "significance level");
  benchmark->add_flag("--forced", bm_config.forced, "forced-choice decisions");
  benchmark->add_option("--indep-alpha", bm_indep_alpha,
                        "independence pre-filter level");
  benchmark->add_option("--smoothing", bm_config.estimation.smoothing,
                        "pseudo-count added to every cell");
  benchmark->add_option("--restarts", bm_config.estimation.cuc_restarts,
                        "extra random restarts for cyclic fits");
  benchmark->add_option("--seed", bm_config.estimation.rng_seed, "random seed");
  benchmark->add_option("--out", bm_out, "write the report as JSON");
  benchmark->add_option("--tsv", bm_tsv, "write per-pair rows as TSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (estimate->parsed()) {
      return run_estimate(est_file, est_kind, est_flags, est_config);
    }
    if (decide->parsed()) {
      return run_decide(dec_file, dec_flags, dec_config);
    }
    if (simulate->parsed()) {
      const ucm::BenchmarkReport report = ucm::run_synthetic_experiment(
          parse_sizes(sim_sizes), sim_ns, sim_trials,
          sim_cyclic ? ucm::PermutationKind::cyclic
                     : ucm::PermutationKind::general,
          sim_seed);
      std::cout << report.to_text();
      if (!sim_out.empty()) write_file(sim_out, report.to_tsv());
      if (!sim_json.empty()) write_file(sim_json, report.to_json().dump(2));
      return 0;
    }
    if (benchmark->parsed()) {
      std::vector<ucm::CorpusEntry> entries;
      if (!bm_manifest.empty()) {
        entries = ucm::load_manifest(bm_manifest);
      } else if (!bm_pairmeta.empty()) {
        entries = ucm::pairmeta_entries(bm_pairmeta, bm_dir);
      } else {
        throw ucm::Error("benchmark needs --manifest or --pairmeta");
      }
      const ucm::BenchmarkReport report =
          ucm::run_corpus(entries, bm_config, bm_indep_alpha);
      std::cout << report.to_text();
      if (!bm_out.empty()) write_file(bm_out, report.to_json().dump(2));
      if (!bm_tsv.empty()) write_file(bm_tsv, report.to_tsv());
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
