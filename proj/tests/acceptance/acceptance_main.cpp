// Runs the acceptance criteria and prints one PASS / FAIL / SKIP line each.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <bit>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include <json.hpp>
#include <unistd.h>

#include "synthetic.hpp"
#include "votebias/community.hpp"
#include "votebias/csv.hpp"
#include "votebias/netbuild.hpp"
#include "votebias/pipeline.hpp"
#include "votebias/predict.hpp"

using namespace votebias;
namespace fs = std::filesystem;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

Outcome fail(std::string d) { return {Verdict::Fail, std::move(d)}; }
Outcome check(bool ok, std::string d) { return {ok ? Verdict::Pass : Verdict::Fail, std::move(d)}; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

SimulatedThresholds modern_provider(int iterations, std::uint64_t seed) {
  SimulationOptions options;
  options.iterations = iterations;
  options.seed = seed;
  return SimulatedThresholds(SchemeTimeline::uniform(VotingScheme::modern()), options);
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("votebias_acceptance_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
  }
  return out;
}

/// Writes a synthetic corpus plus chain borders, identity aliases and odds.
RunConfig synthetic_workspace(const fs::path& dir, const synth::SyntheticSpec& spec) {
  save_votes(synth::synthetic_corpus(spec), dir / "votes.csv");
  synth::write_identity_aliases(spec.countries, (dir / "aliases.csv").string());
  std::ofstream borders(dir / "borders.csv");
  borders << "country_a,country_b\n";
  for (int i = 0; i + 1 < spec.countries; ++i) {
    borders << synth::country(i).name() << ',' << synth::country(i + 1).name() << '\n';
  }
  borders.close();
  std::mt19937 gen(static_cast<unsigned>(spec.seed));
  std::ofstream odds(dir / "odds.csv");
  odds << "year,country,decimal_odds\n";
  for (int y = spec.first_year; y < spec.first_year + spec.years; ++y) {
    for (int i = 0; i < spec.countries; ++i) odds << y << ',' << synth::country(i).name() << ',' << 1 + gen() % 50 << '\n';
  }
  odds.close();
  RunConfig config;
  config.votes = dir / "votes.csv";
  config.aliases = dir / "aliases.csv";
  config.adjacency = dir / "borders.csv";
  config.odds = dir / "odds.csv";
  config.seed = spec.seed;
  return config;
}

// 1
Outcome null_model_calibration() {
  synth::SyntheticSpec spec;
  spec.countries = 25;
  spec.years = 20;
  spec.seed = 2024;
  const auto votes = synth::synthetic_corpus(spec);
  const auto start = std::chrono::steady_clock::now();
  auto provider = modern_provider(10000, spec.seed);
  const auto nets = build_gatherer(votes, YearWindow(spec.first_year, spec.first_year + spec.years - 1), provider,
                                   synth::chain_adjacency(spec.countries));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::size_t flagged = 0;
  const auto names = synth::country_names(spec.countries);
  for (const auto& a : names) {
    for (const auto& b : names) {
      if (a != b && (nets.directed.weight(a, b) || nets.undirected.weight(a, b))) ++flagged;
    }
  }
  const double rate = static_cast<double>(flagged) / static_cast<double>(names.size() * (names.size() - 1));
  return check(rate <= 0.02 && seconds < 60.0,
               fmt("%zu of %zu ordered pairs flagged (%.2f%%, limit 2%%), %.1f s (limit 60 s)", flagged,
                   names.size() * (names.size() - 1), 100 * rate, seconds));
}

// 2
Outcome injected_collusion() {
  int bias_hits = 0, neglect_hits = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    synth::SyntheticSpec spec;
    spec.countries = 12;
    spec.years = 10;
    spec.seed = seed;
    spec.forced = {{0, 1}};
    spec.excluded = {{5, 8}};  // three hops apart on the chain
    const auto votes = synth::synthetic_corpus(spec);
    auto provider = modern_provider(10000, seed);
    const auto nets = build_gatherer(votes, YearWindow(spec.first_year, spec.first_year + spec.years - 1), provider,
                                     synth::chain_adjacency(spec.countries));
    bias_hits += nets.undirected.weight(synth::country(0), synth::country(1)) ? 1 : 0;
    neglect_hits += nets.neglect.weight(synth::country(5), synth::country(8)) ? 1 : 0;
  }
  return check(bias_hits == 10 && neglect_hits == 10,
               fmt("colluding pair found in %d/10 seeds, zero-exchange pair in %d/10", bias_hits, neglect_hits));
}

// 3
Outcome hop_constraint() {
  synth::SyntheticSpec spec;
  spec.countries = 16;
  spec.years = 15;
  spec.seed = 99;
  for (int i = 0; i < 16; ++i) {
    for (int j = i + 1; j < 16; j += 2) spec.excluded.push_back({i, j});
  }
  const auto votes = synth::synthetic_corpus(spec);
  const auto adj = synth::chain_adjacency(spec.countries);
  auto provider = modern_provider(5000, spec.seed);
  const std::vector<int> lengths{1, 5, 10, 15};
  const auto windows = enumerate_windows(spec.first_year, spec.first_year + spec.years - 1, lengths);
  std::size_t edges = 0, violations = 0, far_pairs_zero = 0;
  for (const auto& w : windows) {
    const auto nets = build_gatherer(votes, w, provider, adj);
    for (const auto& e : nets.neglect.edges()) {
      ++edges;
      const auto d = hop_distance(e.u, e.v, adj);
      if (!d || *d > kNeglectMaxHops) ++violations;
    }
  }
  for (const auto& p : spec.excluded) far_pairs_zero += (p.b - p.a) > kNeglectMaxHops ? 1 : 0;
  return check(violations == 0 && edges > 0,
               fmt("%zu neglect edges over %zu windows, %zu beyond 3 hops (%zu silent pairs lie beyond 3 hops)", edges,
                   windows.size(), violations, far_pairs_zero));
}

// 4
Outcome metric_oracles() {
  std::size_t checked = 0, mismatches = 0;
  for (int n = 1; n <= 8; ++n) {
    Ranking actual{2000, {}, RankingSource::Actual};
    for (int i = 0; i < n; ++i) actual.order.push_back(synth::country(i));
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      Ranking pred{2000, {}, RankingSource::Odds};
      for (int p : perm) pred.order.push_back(synth::country(p));
      const auto got = evaluate(pred, actual);
      // Brute force: perm[i] is the true index of the country predicted at position i.
      double full = 0, top = 0;
      for (int i = 0; i < n; ++i) {
        const double err = std::abs(perm[i] - i);
        full += err;
        if (perm[i] < 10) top += err;
      }
      bool ok = got.mae_full == full / n && got.mae_top10 == top / std::min(n, 10);
      for (int k : kRecallCutoffs) {
        const int m = std::min(k, n);
        int hits = 0;
        for (int i = 0; i < m; ++i) hits += perm[i] < m ? 1 : 0;
        ok = ok && got.recall_at.at(k) == static_cast<double>(hits) / m;
      }
      mismatches += ok ? 0 : 1;
      ++checked;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  std::mt19937 gen(12);
  std::size_t blend_mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + trial % 30;
    Ranking model{2000, synth::country_names(n), RankingSource::Model};
    Ranking odds = model;
    odds.source = RankingSource::Odds;
    std::shuffle(model.order.begin(), model.order.end(), gen);
    std::shuffle(odds.order.begin(), odds.order.end(), gen);
    const auto joined = [](const Ranking& r) {
      std::string s;
      for (const auto& c : r.order) s += c.name() + "\n";
      return s;
    };
    if (joined(blend(model, odds, 0.0)) != joined(odds)) ++blend_mismatches;
    if (joined(blend(model, odds, 1.0)) != joined(model)) ++blend_mismatches;
  }
  return check(mismatches == 0 && blend_mismatches == 0,
               fmt("%zu permutations, %zu metric mismatches; 1000 blend endpoints, %zu mismatches", checked, mismatches,
                   blend_mismatches));
}

/// Dense modularity from the adjacency matrix.
double dense_modularity(const BiasNetwork& net, std::span<const Group> groups) {
  std::map<CountryId, int> label;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const auto& c : groups[g]) label[c] = static_cast<int>(g);
  }
  std::vector<CountryId> nodes(net.nodes().begin(), net.nodes().end());
  const std::size_t n = nodes.size();
  std::map<CountryId, std::size_t> at;
  for (std::size_t i = 0; i < n; ++i) at[nodes[i]] = i;
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (const auto& e : net.edges()) {
    a[at[e.u]][at[e.v]] += e.weight;
    if (!net.directed()) a[at[e.v]][at[e.u]] += e.weight;
  }
  std::vector<double> out(n, 0.0), in(n, 0.0);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out[i] += a[i][j];
      in[j] += a[i][j];
      total += a[i][j];
    }
  }
  if (total == 0) return 0;
  double q = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (label.at(nodes[i]) == label.at(nodes[j])) q += a[i][j] - out[i] * in[j] / total;
    }
  }
  return q / total;
}

std::set<std::set<std::string>> group_names(const CommunityPartition& p) {
  std::set<std::set<std::string>> out;
  for (const auto& g : p.groups) {
    std::set<std::string> s;
    for (const auto& c : g) s.insert(c.name());
    out.insert(s);
  }
  return out;
}

// 5
Outcome community_oracles() {
  const NetworkId uid{YearWindow(2000, 2000), NetworkKind::UndirectedBias, Method::Gatherer};
  const NetworkId did{YearWindow(2000, 2000), NetworkKind::DirectedBias, Method::Gatherer};
  const std::set<std::set<std::string>> blocs{{"C00", "C01", "C02", "C03"}, {"C04", "C05", "C06", "C07"}};

  BiasNetwork cliques(uid);
  for (int base : {0, 4}) {
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) cliques.add_edge(synth::country(base + i), synth::country(base + j), 1.0);
    }
  }
  cliques.add_edge(synth::country(3), synth::country(4), 1.0);
  const bool louvain_planted = group_names(louvain(cliques, 1)) == blocs;

  BiasNetwork digraph(did);
  for (int base : {0, 4}) {
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        if (i != j) digraph.add_edge(synth::country(base + i), synth::country(base + j), 1.0);
      }
    }
  }
  digraph.add_edge(synth::country(0), synth::country(4), 1.0);
  const auto spectral = leading_eigenvector(digraph);
  const bool spectral_planted = group_names(spectral) == blocs;

  std::mt19937 gen(2718);
  std::uniform_real_distribution<double> weight(0.5, 4.0);
  int below_singletons = 0;
  double worst = std::abs(spectral.modularity - dense_modularity(digraph, spectral.groups));
  for (int trial = 0; trial < 100; ++trial) {
    BiasNetwork net(uid);
    const int n = 5 + trial % 26;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (static_cast<int>(gen() % 100) < 8 + trial % 30) net.add_edge(synth::country(i), synth::country(j), weight(gen));
      }
    }
    const auto p = louvain(net, static_cast<std::uint64_t>(trial));
    std::vector<Group> singletons;
    for (const auto& c : net.nodes()) singletons.push_back({c});
    if (p.modularity < dense_modularity(net, singletons) - 1e-12) ++below_singletons;
    worst = std::max(worst, std::abs(p.modularity - dense_modularity(net, p.groups)));
  }
  return check(louvain_planted && spectral_planted && below_singletons == 0 && worst <= 1e-9,
               fmt("planted blocs: louvain %s, eigenvector %s; %d/100 random graphs below singletons; "
                   "max modularity error %.2e (limit 1e-9)",
                   louvain_planted ? "recovered" : "missed", spectral_planted ? "recovered" : "missed",
                   below_singletons, worst));
}

// 6
Outcome apriori_oracle() {
  std::mt19937 gen(31);
  int fixtures = 0, mismatches = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<CommunityPartition> parts;
    std::vector<std::set<int>> transactions;
    int communities = 0;
    const int target = 1 + trial % 15;
    while (communities < target) {
      CommunityPartition p;
      std::vector<std::vector<int>> groups(1 + gen() % 3);
      for (int c = 0; c < 10; ++c) {
        if (gen() % 4) groups[gen() % groups.size()].push_back(c);
      }
      std::erase_if(groups, [](const auto& g) { return g.empty(); });
      if (groups.empty() || communities + static_cast<int>(groups.size()) > target) continue;
      for (const auto& g : groups) {
        Group group;
        for (int c : g) group.push_back(synth::country(c));
        p.groups.push_back(group);
        if (g.size() >= 2) transactions.emplace_back(g.begin(), g.end());
      }
      communities += static_cast<int>(groups.size());
      parts.push_back(p);
    }
    if (transactions.empty()) continue;
    for (double min_support : {0.1, 0.25, 0.5}) {
      ++fixtures;
      std::vector<ItemsetSupport> expected;
      for (unsigned mask = 0; mask < 1024u; ++mask) {
        if (std::popcount(mask) < 2) continue;
        std::size_t count = 0;
        for (const auto& t : transactions) {
          bool all = true;
          for (int i = 0; i < 10; ++i) all = all && (!(mask & (1u << i)) || t.contains(i));
          count += all ? 1 : 0;
        }
        const double support = static_cast<double>(count) / static_cast<double>(transactions.size());
        if (count == 0 || support < min_support) continue;
        ItemsetSupport s;
        for (int i = 0; i < 10; ++i) {
          if (mask & (1u << i)) s.countries.push_back(synth::country(i));
        }
        s.relative_support = support;
        s.count = count;
        expected.push_back(s);
      }
      std::sort(expected.begin(), expected.end(), [](const ItemsetSupport& a, const ItemsetSupport& b) {
        return a.count != b.count ? a.count > b.count : a.countries < b.countries;
      });
      if (mine_cooccurrence(parts, min_support) != expected) ++mismatches;
    }
  }
  return check(mismatches == 0, fmt("%d fixtures of up to 15 communities over 10 countries, %d mismatches", fixtures,
                                    mismatches));
}

// 7
Outcome window_inventory() {
  const auto windows = enumerate_windows(1957, 2019, kDefaultWindowLengths);
  const std::size_t expected = 433 * 2 * 3;
  const auto inventory = network_inventory_size(windows.size(), std::size(kAllMethods), std::size(kAllKinds));

  const auto dir = scratch("inventory");
  synth::SyntheticSpec spec;
  spec.countries = 4;
  spec.first_year = 1957;
  spec.years = 63;
  spec.seed = 3;
  auto config = synthetic_workspace(dir, spec);
  std::ofstream(dir / "schemes.csv") << "year_from,year_to,kind,point_values,recipients_per_ballot\n"
                                        "1957,2019,rated,12 10 8 7 6 5 4 3 2 1,10\n";
  config.schemes = dir / "schemes.csv";
  config.out = dir / "out";
  config.iterations = 200;
  std::ostringstream log;
  run(config, Subcommand::Networks, log);
  const auto manifest = nlohmann::json::parse(slurp(config.out / "manifest.json"));
  const std::size_t run_inventory = manifest.value("network_inventory", std::size_t{0});
  return check(windows.size() == 433 && inventory == expected && run_inventory == expected,
               fmt("%zu windows, inventory %zu, pipeline manifest %zu (expected 433 and %zu)", windows.size(),
                   inventory, run_inventory, expected));
}

// 8
Outcome determinism() {
  const auto dir = scratch("determinism");
  synth::SyntheticSpec spec;
  spec.countries = 10;
  spec.years = 12;
  spec.seed = 8;
  spec.forced = {{0, 1}, {2, 3}};
  spec.excluded = {{4, 5}};
  auto config = synthetic_workspace(dir, spec);
  config.lengths = {1, 5, 10};
  config.iterations = 3000;
  std::ostringstream log;
  std::vector<std::map<std::string, std::string>> trees;
  for (int workers : {1, 1, 8, 8}) {
    config.workers = workers;
    config.out = dir / ("out" + std::to_string(trees.size()));
    run(config, Subcommand::All, log);
    trees.push_back(tree(config.out));
  }
  const bool same = std::all_of(trees.begin(), trees.end(), [&](const auto& t) { return t == trees.front(); });
  return check(same && !trees.front().empty(),
               fmt("%zu artifacts per run, 4 runs (workers 1, 1, 8, 8) %s", trees.front().size(),
                   same ? "byte-identical" : "differ"));
}

double csv_value(const fs::path& path, const std::function<bool(const std::vector<std::string>&)>& match,
                 std::size_t column) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto f = csv::split_line(line);
    if (match(f)) return std::stod(f.at(column));
  }
  throw std::runtime_error("row not found in " + path.string());
}

// 9
Outcome official_reproduction() {
  const char* env = std::getenv("VOTEBIAS_OFFICIAL_DIR");
  if (env == nullptr || *env == '\0') {
    return {Verdict::Skip, "official corpus not shipped; set VOTEBIAS_OFFICIAL_DIR to a directory with votes.csv "
                           "and odds.csv"};
  }
  const fs::path dir(env);
  RunConfig config;
  config.votes = dir / "votes.csv";
  config.odds = dir / "odds.csv";
  config.aliases = fs::path(VOTEBIAS_DATA_DIR) / "aliases.csv";
  config.adjacency = fs::path(VOTEBIAS_DATA_DIR) / "borders.csv";
  config.seed = 1;
  config.betas = {0.0};
  config.out = scratch("official");
  config.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::ostringstream log;
  run(config, Subcommand::All, log);

  const auto report = config.out / "report.csv";
  const auto baseline = [&](const std::string& metric) {
    return csv_value(report, [&](const auto& f) { return f[0] == metric && f[1].empty(); }, 2);
  };
  const std::vector<std::pair<std::string, double>> table{
      {"mae_full", 4.3391}, {"mae_top10", 4.0421}, {"recall@3", 0.4386}, {"recall@5", 0.54737}, {"recall@10", 0.56842}};
  bool ok = true;
  std::string detail;
  for (const auto& [metric, reference] : table) {
    const double got = baseline(metric);
    ok = ok && std::abs(got - reference) <= 0.01;
    detail += fmt("%s %.4f (ref %.4f); ", metric.c_str(), got, reference);
  }
  std::ifstream items(config.out / "itemsets.csv");
  std::string line;
  std::getline(items, line);
  std::getline(items, line);
  const auto top = csv::split_line(line);
  const bool pair_ok = top.size() == 3 && top[1] == "Cyprus|Greece" && std::abs(std::stod(top[2]) - 0.108919) <= 0.01;
  detail += "top itemset " + (top.size() == 3 ? top[1] + " " + top[2] : std::string("none")) + "; ";
  const double pct = csv_value(config.out / "aggregates.csv", [](const auto& f) {
    return f[0] == "25" && f[1] == "undirected_neglect" && f[2] == "pct_from_community";
  }, 3);
  const bool pct_ok = std::abs(pct - 0.061314) <= 0.01;
  detail += fmt("25-year neglect pct_from_community %.6f (ref 0.061314)", pct);
  return check(ok && pair_ok && pct_ok, detail);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"null-model calibration", null_model_calibration},
      {"injected collusion and neglect", injected_collusion},
      {"neglect hop constraint", hop_constraint},
      {"ranking metric oracles", metric_oracles},
      {"community oracles", community_oracles},
      {"itemset oracle", apriori_oracle},
      {"window inventory", window_inventory},
      {"determinism across worker counts", determinism},
      {"official dataset reproduction", official_reproduction},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = fail(std::string("exception: ") + e.what());
    }
    const char* tag = outcome.verdict == Verdict::Pass ? "PASS" : outcome.verdict == Verdict::Fail ? "FAIL" : "SKIP";
    failures += outcome.verdict == Verdict::Fail ? 1 : 0;
    std::cout << tag << " [" << i + 1 << "] " << criteria[i].first << ": " << outcome.detail << std::endl;
  }
  fs::remove_all(fs::temp_directory_path() / ("votebias_acceptance_" + std::to_string(::getpid())));
  return failures == 0 ? 0 : 1;
}
