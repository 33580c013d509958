#include "votebias/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "votebias/community.hpp"
#include "votebias/corpus.hpp"
#include "votebias/csv.hpp"
#include "votebias/export.hpp"
#include "votebias/graphstats.hpp"
#include "votebias/rng.hpp"
#include "votebias/scheme.hpp"

namespace votebias {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Subcommand command) {
  switch (command) {
    case Subcommand::Ingest:
      return "ingest";
    case Subcommand::Thresholds:
      return "thresholds";
    case Subcommand::Networks:
      return "networks";
    case Subcommand::Stats:
      return "stats";
    case Subcommand::Communities:
      return "communities";
    case Subcommand::Mine:
      return "mine";
    case Subcommand::Correlate:
      return "correlate";
    case Subcommand::Evaluate:
      return "evaluate";
    case Subcommand::Export:
      return "export";
    case Subcommand::All:
      return "all";
  }
  return "all";
}

Subcommand parse_subcommand(std::string_view text) {
  for (auto command : kAllSubcommands) {
    if (to_string(command) == text) return command;
  }
  throw std::invalid_argument("unknown subcommand '" + std::string(text) + "'");
}

namespace {

std::string hex(const unsigned char* data, std::size_t size) {
  std::ostringstream out;
  out << std::hex << std::setfill('0');
  for (std::size_t i = 0; i < size; ++i) out << std::setw(2) << static_cast<int>(data[i]);
  return out.str();
}

std::string sha256_bytes(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int size = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &size, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  return hex(digest, size);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool needs_adjacency(Subcommand c) {
  return c != Subcommand::Ingest && c != Subcommand::Thresholds;
}

bool needs_odds(Subcommand c) { return c == Subcommand::Evaluate || c == Subcommand::All; }

}  // namespace

std::string sha256_file(const fs::path& path) { return sha256_bytes(read_file(path)); }

RunConfig load_config(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw InputError(path.string(), 0, e.what());
  }
  if (!doc.is_object()) {
    throw InputError(path.string(), 0, "config must be a JSON object");
  }
  const fs::path base = path.parent_path();
  const auto resolve = [&](const json& v) {
    fs::path p = v.get<std::string>();
    return p.is_relative() ? base / p : p;
  };

  RunConfig config;
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "votes") {
        config.votes = resolve(value);
      } else if (key == "adjacency") {
        config.adjacency = resolve(value);
      } else if (key == "odds") {
        config.odds = resolve(value);
      } else if (key == "aliases") {
        config.aliases = resolve(value);
      } else if (key == "schemes") {
        config.schemes = resolve(value);
      } else if (key == "out") {
        config.out = resolve(value);
      } else if (key == "lengths") {
        config.lengths = value.get<std::vector<int>>();
      } else if (key == "methods") {
        config.methods.clear();
        for (const auto& m : value) config.methods.push_back(parse_method(m.get<std::string>()));
      } else if (key == "iterations") {
        config.iterations = value.get<int>();
      } else if (key == "conf_up") {
        config.conf_up = value.get<double>();
      } else if (key == "conf_low") {
        config.conf_low = value.get<double>();
      } else if (key == "seed") {
        if (!value.is_number_unsigned()) {
          throw std::invalid_argument("seed must be a non-negative integer");
        }
        config.seed = value.get<std::uint64_t>();
      } else if (key == "betas") {
        config.betas = value.get<std::vector<double>>();
      } else if (key == "stages") {
        config.stages.clear();
        for (const auto& s : value) config.stages.insert(parse_stage(s.get<std::string>()));
      } else if (key == "min_support") {
        config.min_support = value.get<double>();
      } else if (key == "lookback_years") {
        config.lookback_years = value.get<int>();
      } else if (key == "overshoot_fraction") {
        config.overshoot_fraction = value.get<double>();
      } else if (key == "workers") {
        config.workers = value.get<int>();
      } else {
        throw std::invalid_argument("unknown key");
      }
    } catch (const std::exception& e) {
      throw InputError(path.string(), 0, "key '" + key + "': " + e.what());
    }
  }
  return config;
}

std::vector<std::string> validate(const RunConfig& config, Subcommand command) {
  std::vector<std::string> problems;
  const auto need_file = [&](const fs::path& p, std::string_view what) {
    if (p.empty()) {
      problems.push_back(std::string(what) + " file is required");
    } else if (!fs::is_regular_file(p)) {
      problems.push_back(std::string(what) + " file not found: " + p.string());
    }
  };
  if (!config.seed) {
    problems.push_back("seed is required (--seed or \"seed\" in the config)");
  }
  need_file(config.votes, "votes");
  need_file(config.aliases, "aliases");
  if (!config.schemes.empty()) need_file(config.schemes, "schemes");
  if (needs_adjacency(command)) need_file(config.adjacency, "adjacency");
  if (needs_odds(command)) need_file(config.odds, "odds");
  if (config.out.empty()) problems.push_back("output directory is required");

  if (config.iterations < 1) problems.push_back("iterations must be at least 1");
  if (!(config.conf_up > 0.0 && config.conf_up < 100.0)) problems.push_back("conf-up must lie in (0, 100)");
  if (!(config.conf_low > 0.0 && config.conf_low < 100.0)) problems.push_back("conf-low must lie in (0, 100)");
  if (config.lengths.empty()) problems.push_back("at least one window length is required");
  if (std::any_of(config.lengths.begin(), config.lengths.end(), [](int l) { return l < 1; })) {
    problems.push_back("window lengths must be positive");
  }
  if (config.methods.empty()) problems.push_back("at least one method is required");
  if (config.stages.empty()) problems.push_back("at least one stage is required");
  if (needs_odds(command) && config.betas.empty()) problems.push_back("at least one beta is required");
  if (std::any_of(config.betas.begin(), config.betas.end(), [](double b) { return !(b >= 0.0 && b <= 1.0); })) {
    problems.push_back("beta values must lie in [0, 1]");
  }
  if (!(config.min_support > 0.0 && config.min_support <= 1.0)) {
    problems.push_back("min-support must lie in (0, 1]");
  }
  if (config.lookback_years < 1) problems.push_back("lookback years must be at least 1");
  if (!(config.overshoot_fraction > 0.0)) problems.push_back("overshoot fraction must be positive");
  if (config.workers < 1) problems.push_back("workers must be at least 1");
  return problems;
}

std::string config_hash(const RunConfig& config) {
  json doc;
  json inputs = json::object();
  const auto add_input = [&](const char* role, const fs::path& p) {
    if (!p.empty() && fs::is_regular_file(p)) inputs[role] = sha256_file(p);
  };
  add_input("votes", config.votes);
  add_input("adjacency", config.adjacency);
  add_input("odds", config.odds);
  add_input("aliases", config.aliases);
  add_input("schemes", config.schemes);
  doc["inputs"] = inputs;
  doc["lengths"] = config.lengths;
  json methods = json::array();
  for (auto m : config.methods) methods.push_back(std::string(to_string(m)));
  doc["methods"] = methods;
  doc["iterations"] = config.iterations;
  doc["conf_up"] = config.conf_up;
  doc["conf_low"] = config.conf_low;
  doc["seed"] = config.seed ? json(*config.seed) : json();
  doc["betas"] = config.betas;
  json stages = json::array();
  for (auto s : config.stages) stages.push_back(std::string(to_string(s)));
  doc["stages"] = stages;
  doc["min_support"] = config.min_support;
  doc["lookback_years"] = config.lookback_years;
  doc["overshoot_fraction"] = config.overshoot_fraction;
  return sha256_bytes(doc.dump());
}

namespace {

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception
/// thrown by any task is rethrown after all threads finish.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::string network_label(const NetworkId& id) {
  return std::string(to_string(id.method)) + "_" + std::string(to_string(id.kind)) + "_" +
         std::to_string(id.window.start_year) + "_" + std::to_string(id.window.end_year);
}

/// Keeps track of written files so a failed run can remove them.
class Outputs {
 public:
  explicit Outputs(fs::path root) : root_(std::move(root)) {}

  fs::path claim(const fs::path& relative) {
    const fs::path full = root_ / relative;
    fs::create_directories(full.parent_path());
    written_.push_back(relative);
    return full;
  }

  const std::vector<fs::path>& written() const noexcept { return written_; }
  const fs::path& root() const noexcept { return root_; }

  void rollback() noexcept {
    std::error_code ec;
    for (auto it = written_.rbegin(); it != written_.rend(); ++it) {
      if (fs::is_regular_file(root_ / *it, ec)) fs::remove(root_ / *it, ec);
      for (fs::path dir = (root_ / *it).parent_path(); dir != root_ && fs::is_empty(dir, ec);
           dir = dir.parent_path()) {
        fs::remove(dir, ec);
      }
    }
    written_.clear();
  }

 private:
  fs::path root_;
  std::vector<fs::path> written_;
};

class Pipeline {
 public:
  Pipeline(const RunConfig& config, Outputs& outputs, RunResult& result, std::ostream& log)
      : config_(config), seed_(*config.seed), outputs_(outputs), result_(result), log_(log) {}

  void run(Subcommand command) {
    load();
    const bool all = command == Subcommand::All;
    if (all || command == Subcommand::Ingest) ingest();
    if (all || command == Subcommand::Thresholds) thresholds();
    if (all || command == Subcommand::Networks) write_networks();
    if (all || command == Subcommand::Stats) write_stats();
    if (all || command == Subcommand::Communities) write_communities();
    if (all || command == Subcommand::Mine) mine();
    if (all || command == Subcommand::Correlate) correlate();
    if (all || command == Subcommand::Evaluate) evaluate();
    if (all || command == Subcommand::Export) export_gexf();
  }

  std::optional<std::size_t> inventory() const {
    return networks_ ? std::optional(networks_->size()) : std::nullopt;
  }

 private:
  void warn(std::string message) {
    log_ << "warning: " << message << '\n';
    result_.warnings.push_back(std::move(message));
  }

  void load() {
    aliases_ = AliasMap::load(config_.aliases);
    timeline_ = config_.schemes.empty() ? SchemeTimeline::defaults() : SchemeTimeline::load(config_.schemes);
    votes_ = load_votes(config_.votes, aliases_);
    validate_points(votes_, timeline_);
    if (!config_.adjacency.empty()) adjacency_ = AdjacencyMap::load(config_.adjacency, aliases_);
    if (!config_.odds.empty()) odds_ = OddsTable::load(config_.odds, aliases_);
    log_ << "loaded " << votes_.size() << " vote records\n";

    if (const auto span = votes_.span()) {
      std::vector<std::string> warnings;
      windows_ = enumerate_windows(span->start_year, span->end_year, config_.lengths, &warnings);
      for (auto& w : warnings) warn(std::move(w));
    }
    SimulationOptions options;
    options.iterations = config_.iterations;
    options.conf_up = config_.conf_up;
    options.conf_low = config_.conf_low;
    options.seed = derive_seed(seed_, "thresholds");
    options.workers = 1;  // parallelism is across windows
    provider_.emplace(timeline_, options);
  }

  void ingest() {
    save_votes(votes_, outputs_.claim("votes.csv"));
    std::ofstream out(outputs_.claim("participants.csv"), std::ios::binary);
    out << "year,country\n";
    for (const auto& [year, countries] : votes_.participants_by_year()) {
      for (const auto& c : countries) out << year << ',' << csv::escape(c.name()) << '\n';
    }
  }

  /// Contests of a window under the stage filter, as a pair entering all of
  /// them would see them.
  std::vector<ContestSlot> full_slots(const YearWindow& window) const {
    std::vector<ContestSlot> slots;
    for (int year = window.start_year; year <= window.end_year; ++year) {
      for (Stage stage : config_.stages) {
        if (votes_.contest_participants(year, stage).empty()) continue;
        const int recipients = static_cast<int>(votes_.contest_recipients(year, stage).size());
        slots.push_back({year, std::max(1, recipients - 1)});
      }
    }
    return slots;
  }

  void thresholds() {
    std::vector<std::optional<Thresholds>> rows(windows_.size());
    parallel_for(windows_.size(), config_.workers, [&](std::size_t i) {
      const auto slots = full_slots(windows_[i]);
      if (!slots.empty()) rows[i] = provider_->thresholds(slots);
    });
    std::ofstream out(outputs_.claim("thresholds.csv"), std::ios::binary);
    out << "start_year,end_year,length,contests,high,low\n";
    for (std::size_t i = 0; i < windows_.size(); ++i) {
      if (!rows[i]) continue;
      const auto& w = windows_[i];
      out << w.start_year << ',' << w.end_year << ',' << w.length() << ',' << full_slots(w).size() << ','
          << csv::format_double(rows[i]->high) << ',' << csv::format_double(rows[i]->low) << '\n';
    }
  }

  bool uses(Method method) const {
    return std::find(config_.methods.begin(), config_.methods.end(), method) != config_.methods.end();
  }

  /// Every configured network in (window, method, kind) order. Directed
  /// networks are pruned; the average method has an empty neglect network.
  const std::vector<BiasNetwork>& networks() {
    if (networks_) return *networks_;
    std::vector<std::vector<BiasNetwork>> per_window(windows_.size());
    parallel_for(windows_.size(), config_.workers, [&](std::size_t i) {
      const auto& w = windows_[i];
      auto& out = per_window[i];
      for (Method method : kAllMethods) {
        if (!uses(method)) continue;
        if (method == Method::Gatherer) {
          auto g = build_gatherer(votes_, w, *provider_, adjacency_, {config_.stages, kNeglectMaxHops});
          out.push_back(prune_below_mean(g.directed));
          out.push_back(std::move(g.undirected));
          out.push_back(std::move(g.neglect));
        } else {
          auto a = build_average(votes_, w, config_.overshoot_fraction, config_.stages);
          out.push_back(prune_below_mean(a.directed));
          out.push_back(std::move(a.undirected));
          out.emplace_back(NetworkId{w, NetworkKind::UndirectedNeglect, Method::Average});
        }
      }
    });
    networks_.emplace();
    for (auto& nets : per_window) {
      for (auto& n : nets) networks_->push_back(std::move(n));
    }
    log_ << "built " << networks_->size() << " networks over " << windows_.size() << " windows\n";
    return *networks_;
  }

  void write_networks() { write_edges_csv(networks(), outputs_.claim("edges.csv")); }

  void write_stats() { write_stats_csv(stats_series(networks()), outputs_.claim("stats.csv")); }

  const std::vector<CommunityPartition>& partitions() {
    if (partitions_) return *partitions_;
    const auto& nets = networks();
    const std::uint64_t louvain_seed = derive_seed(seed_, "louvain");
    std::vector<CommunityPartition> out(nets.size());
    parallel_for(nets.size(), config_.workers, [&](std::size_t i) {
      const auto& net = nets[i];
      out[i] = net.directed() ? leading_eigenvector(net)
                              : louvain(net, derive_seed(louvain_seed, network_label(net.id())));
    });
    partitions_ = std::move(out);
    return *partitions_;
  }

  void write_communities() { write_partitions_csv(partitions(), outputs_.claim("partitions.csv")); }

  void mine() {
    const auto& parts = partitions();
    std::vector<ItemsetSupport> itemsets;
    if (parts.empty()) {
      warn("no partitions to mine");
    } else {
      itemsets = mine_cooccurrence(parts, config_.min_support);
    }
    write_itemsets_csv(itemsets, outputs_.claim("itemsets.csv"));
  }

  void correlate() {
    const auto& nets = networks();
    const auto& parts = partitions();
    const auto places = derive_places(votes_);
    std::vector<std::vector<SuccessRow>> per_network(nets.size());
    parallel_for(nets.size(), config_.workers, [&](std::size_t i) {
      if (nets[i].method() == Method::Gatherer) {
        per_network[i] = success_aggregate(parts[i], nets[i], votes_, places);
      }
    });
    std::vector<SuccessRow> rows;
    for (auto& r : per_network) rows.insert(rows.end(), r.begin(), r.end());
    write_success_csv(rows, outputs_.claim("success.csv"));
    write_aggregates_csv(summarize_success(rows), outputs_.claim("aggregates.csv"));
  }

  void evaluate() {
    const auto odds_years = odds_.years();
    const std::vector<int> years(odds_years.begin(), odds_years.end());
    std::vector<std::string> warnings;
    const auto baseline = evaluate_baseline(odds_, votes_, years, &warnings);
    for (auto& w : warnings) warn(std::move(w));

    struct YearInputs {
      Ranking model;
      Ranking odds;
      Ranking actual;
    };
    const auto first_year = votes_.years().empty() ? 0 : *votes_.years().begin();
    std::vector<std::optional<YearInputs>> inputs(years.size());
    std::vector<std::string> skipped(years.size());
    parallel_for(years.size(), config_.workers, [&](std::size_t i) {
      const int year = years[i];
      auto actual = actual_ranking(votes_, year);
      if (actual.order.empty()) return;
      if (votes_.years().empty() || first_year >= year) {
        skipped[i] = "no history before " + std::to_string(year) + ", model skipped";
        return;
      }
      const YearWindow window(std::max(first_year, year - config_.lookback_years), year - 1);
      auto g = build_gatherer(votes_, window, *provider_, adjacency_, {config_.stages, kNeglectMaxHops});
      const std::vector<BiasNetwork> recent{prune_below_mean(g.directed), std::move(g.undirected)};
      auto model = model_ranking(votes_, recent, year, config_.lookback_years);
      auto odds = odds_ranking(odds_, year, actual.members());
      inputs[i] = YearInputs{std::move(model), std::move(odds), std::move(actual)};
    });
    for (auto& s : skipped) {
      if (!s.empty()) warn(std::move(s));
    }

    std::vector<ReportRow> rows = report_rows(baseline, std::nullopt);
    for (double beta : config_.betas) {
      std::vector<YearEvaluation> per_year;
      for (const auto& in : inputs) {
        if (in) per_year.push_back(votebias::evaluate(blend(in->model, in->odds, beta), in->actual));
      }
      const auto report = average_report(per_year);
      const auto labelled = report_rows(report, beta);
      rows.insert(rows.end(), labelled.begin(), labelled.end());
    }
    write_report_csv(rows, outputs_.claim("report.csv"));
  }

  void export_gexf() {
    for (const auto& net : networks()) {
      write_gexf(net, outputs_.claim(fs::path("gexf") / (network_label(net.id()) + ".gexf")));
    }
  }

  const RunConfig& config_;
  std::uint64_t seed_;
  Outputs& outputs_;
  RunResult& result_;
  std::ostream& log_;

  AliasMap aliases_;
  SchemeTimeline timeline_;
  VoteTable votes_;
  AdjacencyMap adjacency_;
  OddsTable odds_;
  std::vector<YearWindow> windows_;
  std::optional<SimulatedThresholds> provider_;
  std::optional<std::vector<BiasNetwork>> networks_;
  std::optional<std::vector<CommunityPartition>> partitions_;
};

}  // namespace

RunResult run(const RunConfig& config, Subcommand command, std::ostream& log) {
  if (const auto problems = validate(config, command); !problems.empty()) {
    throw std::invalid_argument(problems.front());
  }
  fs::create_directories(config.out);
  RunResult result;
  Outputs outputs(config.out);
  try {
    Pipeline pipeline(config, outputs, result, log);
    pipeline.run(command);

    json manifest;
    manifest["command"] = std::string(to_string(command));
    manifest["config_hash"] = config_hash(config);
    manifest["seed"] = *config.seed;
    if (const auto inventory = pipeline.inventory()) manifest["network_inventory"] = *inventory;
    json artifacts = json::array();
    for (const auto& rel : outputs.written()) {
      artifacts.push_back({{"path", rel.generic_string()}, {"sha256", sha256_file(config.out / rel)}});
    }
    manifest["artifacts"] = artifacts;
    manifest["warnings"] = result.warnings;
    result.artifacts = outputs.written();
    std::ofstream out(outputs.claim("manifest.json"), std::ios::binary);
    out << manifest.dump(2) << '\n';
    out.flush();
    if (!out) {
      throw std::runtime_error("cannot write manifest");
    }
  } catch (...) {
    outputs.rollback();
    throw;
  }
  return result;
}

}  // namespace votebias
