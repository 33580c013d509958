#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include "synthetic.hpp"
#include "votebias/pipeline.hpp"

using namespace votebias;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

/// Relative path -> bytes of every regular file under `root`.
std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  if (!fs::exists(root)) return out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) out[fs::relative(entry.path(), root).generic_string()] = slurp(entry.path());
  }
  return out;
}

struct CliResult {
  int status = -1;
  std::string err;
};

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("votebias_pipeline_" + std::to_string(::getpid()) + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  /// Synthetic corpus with a chain border map and random odds for every year.
  RunConfig synthetic_config(int countries = 8, int years = 6) {
    synth::SyntheticSpec spec;
    spec.countries = countries;
    spec.years = years;
    spec.seed = 77;
    spec.forced = {{0, 1}};
    save_votes(synth::synthetic_corpus(spec), dir_ / "votes.csv");
    synth::write_identity_aliases(countries, (dir_ / "aliases.csv").string());
    {
      std::ofstream b(dir_ / "borders.csv");
      b << "country_a,country_b\n";
      for (int i = 0; i + 1 < countries; ++i) b << synth::country(i).name() << ',' << synth::country(i + 1).name() << '\n';
    }
    {
      std::mt19937 gen(3);
      std::ofstream o(dir_ / "odds.csv");
      o << "year,country,decimal_odds\n";
      for (int y = spec.first_year; y < spec.first_year + years; ++y) {
        for (int i = 0; i < countries; ++i) o << y << ',' << synth::country(i).name() << ',' << 1 + gen() % 40 << '\n';
      }
    }
    RunConfig config;
    config.votes = dir_ / "votes.csv";
    config.aliases = dir_ / "aliases.csv";
    config.adjacency = dir_ / "borders.csv";
    config.odds = dir_ / "odds.csv";
    config.out = dir_ / "out";
    config.iterations = 2000;
    config.seed = 11;
    return config;
  }

  RunConfig fixture_config(const std::string& votes) {
    RunConfig config;
    config.votes = fs::path(VOTEBIAS_FIXTURE_DIR) / votes;
    config.aliases = fs::path(VOTEBIAS_DATA_DIR) / "aliases.csv";
    config.adjacency = fs::path(VOTEBIAS_DATA_DIR) / "borders.csv";
    config.odds = fs::path(VOTEBIAS_FIXTURE_DIR) / "two_year_odds.csv";
    config.out = dir_ / "out";
    config.iterations = 2000;
    config.seed = 5;
    return config;
  }

  CliResult cli(const std::string& args) {
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = std::string(VOTEBIAS_CLI) + " " + args + " 2> " + err.string() + " > /dev/null";
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(err)};
  }

  static std::string flags(const RunConfig& c) {
    std::string out = " --votes " + c.votes.string() + " --aliases " + c.aliases.string() + " --out " + c.out.string();
    if (!c.adjacency.empty()) out += " --adjacency " + c.adjacency.string();
    if (!c.odds.empty()) out += " --odds " + c.odds.string();
    return out;
  }

  fs::path dir_;
  std::ostringstream log_;
};

}  // namespace

TEST(Subcommands, NamesRoundTrip) {
  for (auto c : kAllSubcommands) EXPECT_EQ(parse_subcommand(to_string(c)), c);
  EXPECT_THROW(parse_subcommand("frobnicate"), std::invalid_argument);
}

TEST_F(PipelineTest, ValidationListsEveryProblem) {
  RunConfig config;
  const auto problems = validate(config, Subcommand::Evaluate);
  // seed, votes, aliases, adjacency, odds
  EXPECT_EQ(problems.size(), 5u);
  config = fixture_config("two_year_votes.csv");
  EXPECT_TRUE(validate(config, Subcommand::All).empty());
  config.workers = 0;
  config.betas = {1.5};
  EXPECT_EQ(validate(config, Subcommand::All).size(), 2u);
  EXPECT_THROW(run(config, Subcommand::All, log_), std::invalid_argument);
}

TEST_F(PipelineTest, ConfigFileResolvesPathsAndRejectsUnknownKeys) {
  std::ofstream(dir_ / "c.json") << R"({"votes": "v.csv", "aliases": "/abs/a.csv", "seed": 9,
    "lengths": [1, 5], "methods": ["average"], "betas": [0.5], "workers": 3})";
  const auto config = load_config(dir_ / "c.json");
  EXPECT_EQ(config.votes, dir_ / "v.csv");
  EXPECT_EQ(config.aliases, fs::path("/abs/a.csv"));
  EXPECT_EQ(config.seed, 9u);
  EXPECT_EQ(config.lengths, (std::vector<int>{1, 5}));
  EXPECT_EQ(config.methods, std::vector<Method>{Method::Average});
  EXPECT_EQ(config.workers, 3);

  std::ofstream(dir_ / "bad.json") << R"({"seed": 1, "sed": 2})";
  EXPECT_THROW(load_config(dir_ / "bad.json"), InputError);
  std::ofstream(dir_ / "neg.json") << R"({"seed": -1})";
  EXPECT_THROW(load_config(dir_ / "neg.json"), InputError);
}

TEST_F(PipelineTest, ConfigHashIgnoresWorkersAndOutput) {
  auto a = fixture_config("two_year_votes.csv");
  auto b = a;
  b.workers = 8;
  b.out = dir_ / "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 6;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 64u);
}

TEST_F(PipelineTest, EmptyCorpusGivesHeaderOnlyEdges) {
  const auto config = fixture_config("empty_votes.csv");
  const auto result = run(config, Subcommand::Networks, log_);
  ASSERT_EQ(result.artifacts.size(), 1u);
  EXPECT_EQ(lines(config.out / "edges.csv"), std::vector<std::string>{"u,v,weight,kind,method,start_year,end_year"});
  const auto manifest = nlohmann::json::parse(slurp(config.out / "manifest.json"));
  EXPECT_EQ(manifest["network_inventory"], 0);
  EXPECT_EQ(manifest["command"], "networks");
}

TEST_F(PipelineTest, IngestRoundTripsVotes) {
  const auto config = fixture_config("jury_televote_votes.csv");
  run(config, Subcommand::Ingest, log_);
  const auto aliases = AliasMap::load(config.aliases);
  EXPECT_EQ(load_votes(config.out / "votes.csv", aliases), load_votes(config.votes, aliases));
  EXPECT_TRUE(fs::exists(config.out / "participants.csv"));
}

TEST_F(PipelineTest, ManifestListsArtifactsWithHashes) {
  auto config = synthetic_config();
  config.lengths = {1, 5};
  const auto result = run(config, Subcommand::Stats, log_);
  const auto manifest = nlohmann::json::parse(slurp(config.out / "manifest.json"));
  ASSERT_EQ(manifest["artifacts"].size(), 1u);
  EXPECT_EQ(manifest["artifacts"][0]["path"], "stats.csv");
  EXPECT_EQ(manifest["artifacts"][0]["sha256"], sha256_file(config.out / "stats.csv"));
  EXPECT_EQ(manifest["config_hash"], config_hash(config));
  EXPECT_EQ(manifest["seed"], 11);
  // 6 one-year and 2 five-year windows, two methods, three kinds.
  EXPECT_EQ(manifest["network_inventory"], 48);
  EXPECT_FALSE(fs::exists(config.out / "edges.csv"));
}

TEST_F(PipelineTest, EvaluateOnFixtureMatchesHandComputedBaseline) {
  auto config = fixture_config("two_year_votes.csv");
  config.betas = {0.0, 1.0};
  run(config, Subcommand::Evaluate, log_);
  const auto rows = lines(config.out / "report.csv");
  ASSERT_EQ(rows.size(), 16u);
  EXPECT_EQ(rows[0], "metric,beta,value");
  const std::vector<std::string> baseline{"mae_full,,1", "mae_top10,,1", "recall@3,,0.6666666666666666",
                                          "recall@5,,1", "recall@10,,1"};
  for (std::size_t i = 0; i < baseline.size(); ++i) {
    EXPECT_EQ(rows[1 + i], baseline[i]);
    // beta = 0 is the odds ranking itself.
    auto expected = baseline[i];
    expected.replace(expected.find(",,"), 2, ",0,");
    EXPECT_EQ(rows[6 + i], expected);
  }
}

TEST_F(PipelineTest, AllIsDeterministicAcrossWorkerCounts) {
  auto config = synthetic_config();
  config.lengths = {1, 5};
  config.workers = 1;
  run(config, Subcommand::All, log_);
  const auto first = tree(config.out);
  fs::remove_all(config.out);
  run(config, Subcommand::All, log_);
  EXPECT_EQ(tree(config.out), first);
  fs::remove_all(config.out);
  config.workers = 8;
  run(config, Subcommand::All, log_);
  EXPECT_EQ(tree(config.out), first);
  for (const auto* name : {"votes.csv", "participants.csv", "thresholds.csv", "edges.csv", "stats.csv",
                           "partitions.csv", "itemsets.csv", "success.csv", "aggregates.csv", "report.csv",
                           "manifest.json"}) {
    EXPECT_TRUE(first.contains(name)) << name;
  }
  EXPECT_TRUE(first.contains("gexf/gatherer_undirected_bias_2000_2004.gexf"));
}

TEST_F(PipelineTest, FailureRollsBackPartialOutputs) {
  auto config = synthetic_config();
  config.lengths = {5};
  fs::create_directories(config.out / "stats.csv");
  EXPECT_ANY_THROW(run(config, Subcommand::All, log_));
  std::vector<std::string> left;
  for (const auto& e : fs::directory_iterator(config.out)) left.push_back(e.path().filename().string());
  EXPECT_EQ(left, std::vector<std::string>{"stats.csv"});
}

TEST_F(PipelineTest, CliMissingSeedReportsEachProblem) {
  const auto r = cli("networks --votes " + (dir_ / "nope.csv").string());
  EXPECT_EQ(r.status, 2);
  std::size_t error_lines = 0;
  std::istringstream in(r.err);
  for (std::string line; std::getline(in, line);) error_lines += line.rfind("error: ", 0) == 0 ? 1 : 0;
  // seed, votes not found, aliases, adjacency
  EXPECT_EQ(error_lines, 4u);
  EXPECT_NE(r.err.find("seed"), std::string::npos);
}

TEST_F(PipelineTest, CliNetworksOnEmptyCorpus) {
  const auto config = fixture_config("empty_votes.csv");
  const auto r = cli("networks --seed 3" + flags(config));
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(lines(config.out / "edges.csv").size(), 1u);
}

TEST_F(PipelineTest, CliRuntimeErrorExitsOne) {
  const auto config = fixture_config("bad_row_votes.csv");
  const auto r = cli("ingest --seed 3" + flags(config));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("bad_row_votes.csv:3"), std::string::npos) << r.err;
}

TEST_F(PipelineTest, CliFlagsOverrideConfigFile) {
  const auto config = fixture_config("two_year_votes.csv");
  std::ofstream(dir_ / "c.json") << nlohmann::json{{"votes", config.votes.string()},
                                                    {"aliases", config.aliases.string()},
                                                    {"adjacency", config.adjacency.string()},
                                                    {"odds", config.odds.string()},
                                                    {"out", (dir_ / "from_config").string()},
                                                    {"seed", 1},
                                                    {"iterations", 500},
                                                    {"betas", nlohmann::json::array({0.5})}}
                                         .dump();
  const auto r = cli("evaluate --config " + (dir_ / "c.json").string() + " --beta 0,1 --seed 4 --out " +
                     (dir_ / "from_flag").string());
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "from_config"));
  const auto manifest = nlohmann::json::parse(slurp(dir_ / "from_flag" / "manifest.json"));
  EXPECT_EQ(manifest["seed"], 4);
  // Baseline plus two betas.
  EXPECT_EQ(lines(dir_ / "from_flag" / "report.csv").size(), 16u);
}

TEST_F(PipelineTest, CliRejectsUnknownCommand) {
  EXPECT_EQ(cli("frobnicate --seed 1").status, 2);
}
