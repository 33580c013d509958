#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "votebias/pipeline.hpp"

using namespace votebias;

int main(int argc, char** argv) {
  CLI::App app{"Voting-bias networks, communities and rank prediction"};
  app.set_version_flag("--version", "votebias 1.0");

  std::string command_text;
  app.add_option("command", command_text,
                 "ingest | thresholds | networks | stats | communities | mine | correlate | evaluate | "
                 "export | all")
      ->required();

  std::string config_path;
  std::string votes, adjacency, odds, aliases, schemes, out;
  std::vector<int> lengths;
  std::vector<std::string> methods, stages;
  std::vector<double> betas;
  int iterations = 0, workers = 0, lookback = 0;
  double conf_up = 0, conf_low = 0, min_support = 0, overshoot = 0;
  std::uint64_t seed = 0;

  app.add_option("--config", config_path, "JSON config file (flags override its values)");
  auto* o_votes = app.add_option("--votes", votes, "votes CSV");
  auto* o_adj = app.add_option("--adjacency", adjacency, "borders CSV");
  auto* o_odds = app.add_option("--odds", odds, "betting odds CSV");
  auto* o_aliases = app.add_option("--aliases", aliases, "country alias CSV");
  auto* o_schemes = app.add_option("--schemes", schemes, "voting scheme timeline CSV");
  auto* o_lengths = app.add_option("--lengths", lengths, "window lengths, e.g. 1,5,10")->delimiter(',');
  auto* o_methods = app.add_option("--methods", methods, "gatherer,average")->delimiter(',');
  auto* o_iter = app.add_option("--iterations", iterations, "Monte-Carlo iterations (100000)");
  auto* o_up = app.add_option("--conf-up", conf_up, "bias percentile (1)");
  auto* o_low = app.add_option("--conf-low", conf_low, "neglect percentile (90)");
  auto* o_seed = app.add_option("--seed", seed, "master seed (required)");
  auto* o_beta = app.add_option("--beta", betas, "blend weights, e.g. 0,0.2,0.5,1.0")->delimiter(',');
  auto* o_stages = app.add_option("--stages", stages, "final[,semi1,semi2]")->delimiter(',');
  auto* o_out = app.add_option("--out", out, "output directory");
  auto* o_workers = app.add_option("--workers", workers, "worker threads (1)");
  auto* o_support = app.add_option("--min-support", min_support, "itemset support cutoff (0.05)");
  auto* o_lookback = app.add_option("--lookback", lookback, "model history in years (20)");
  auto* o_overshoot = app.add_option("--overshoot", overshoot, "average-method fraction (0.75)");

  CLI11_PARSE(app, argc, argv);

  RunConfig config;
  Subcommand command{};
  try {
    command = parse_subcommand(command_text);
    if (!config_path.empty()) config = load_config(config_path);
    if (*o_votes) config.votes = votes;
    if (*o_adj) config.adjacency = adjacency;
    if (*o_odds) config.odds = odds;
    if (*o_aliases) config.aliases = aliases;
    if (*o_schemes) config.schemes = schemes;
    if (*o_out) config.out = out;
    if (*o_lengths) config.lengths = lengths;
    if (*o_methods) {
      config.methods.clear();
      for (const auto& m : methods) config.methods.push_back(parse_method(m));
    }
    if (*o_iter) config.iterations = iterations;
    if (*o_up) config.conf_up = conf_up;
    if (*o_low) config.conf_low = conf_low;
    if (*o_seed) config.seed = seed;
    if (*o_beta) config.betas = betas;
    if (*o_stages) {
      config.stages.clear();
      for (const auto& s : stages) config.stages.insert(parse_stage(s));
    }
    if (*o_workers) config.workers = workers;
    if (*o_support) config.min_support = min_support;
    if (*o_lookback) config.lookback_years = lookback;
    if (*o_overshoot) config.overshoot_fraction = overshoot;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  if (const auto problems = validate(config, command); !problems.empty()) {
    for (const auto& p : problems) std::cerr << "error: " << p << '\n';
    return 2;
  }

  try {
    const auto result = run(config, command, std::cerr);
    std::cerr << "wrote " << result.artifacts.size() << " artifacts to " << config.out.string() << '\n';
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
