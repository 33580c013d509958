#include "votebias/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

#include "votebias/csv.hpp"
#include "votebias/scheme.hpp"

namespace votebias {

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Final:
      return "final";
    case Stage::Semi1:
      return "semi1";
    case Stage::Semi2:
      return "semi2";
  }
  return "final";
}

std::string_view to_string(Source source) {
  switch (source) {
    case Source::Jury:
      return "jury";
    case Source::Televote:
      return "televote";
    case Source::Combined:
      return "combined";
  }
  return "combined";
}

Stage parse_stage(std::string_view text) {
  if (text == "final") return Stage::Final;
  if (text == "semi1") return Stage::Semi1;
  if (text == "semi2") return Stage::Semi2;
  throw std::invalid_argument("unknown stage '" + std::string(text) + "'");
}

Source parse_source(std::string_view text) {
  if (text == "jury") return Source::Jury;
  if (text == "televote") return Source::Televote;
  if (text == "combined") return Source::Combined;
  throw std::invalid_argument("unknown source '" + std::string(text) + "'");
}

InputError::InputError(const std::string& file, std::size_t line, const std::string& what)
    : std::runtime_error(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
      file_(file),
      line_(line) {}

// ---------------------------------------------------------------------------
// AliasMap

std::string AliasMap::normalize(std::string_view name) {
  std::string out;
  bool pending_space = false;
  for (char c : name) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return out;
}

std::string AliasMap::key_of(std::string_view name) {
  std::string key = normalize(name);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return key;
}

void AliasMap::add(std::string_view alias, std::string_view canonical) {
  const std::string canon = normalize(canonical);
  if (canon.empty() || normalize(alias).empty()) {
    throw std::invalid_argument("alias map entries must be non-empty");
  }
  // A canonical name that is itself registered as an alias is followed once
  // so chains collapse to a fixed point.
  std::string target = canon;
  if (auto it = by_key_.find(key_of(canon)); it != by_key_.end()) {
    target = it->second;
  }
  by_key_[key_of(alias)] = target;
  by_key_.try_emplace(key_of(target), target);
}

std::optional<CountryId> AliasMap::find(std::string_view name) const {
  if (auto it = by_key_.find(key_of(name)); it != by_key_.end()) {
    return CountryId(it->second);
  }
  return std::nullopt;
}

CountryId AliasMap::canonicalize(std::string_view name) const {
  if (auto id = find(name)) {
    return *id;
  }
  throw std::out_of_range("unknown country '" + normalize(name) + "'");
}

AliasMap AliasMap::load(const std::filesystem::path& path) {
  AliasMap map;
  for (const auto& row : csv::read(path, {"alias", "canonical"})) {
    try {
      map.add(row.fields[0], row.fields[1]);
    } catch (const std::invalid_argument& e) {
      throw InputError(path.string(), row.line, e.what());
    }
  }
  return map;
}

// ---------------------------------------------------------------------------
// VoteTable

namespace {

const std::set<CountryId> kNoCountries;

auto record_key(const VoteRecord& r) {
  return std::tie(r.year, r.stage, r.source, r.from, r.to);
}

std::string describe(const VoteRecord& r) {
  std::ostringstream out;
  out << r.year << "," << to_string(r.stage) << "," << to_string(r.source) << ","
      << r.from.name() << "," << r.to.name() << "," << r.points;
  return out.str();
}

}  // namespace

VoteTable VoteTable::from_records(std::vector<VoteRecord> records, const std::string& origin,
                                  const std::vector<std::size_t>& line_of) {
  const auto line = [&](std::size_t i) { return i < line_of.size() ? line_of[i] : 0; };

  std::map<std::tuple<int, Stage, Source, CountryId, CountryId>, std::size_t> seen;
  std::map<std::tuple<int, Stage, CountryId, CountryId>, int> split_sums;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = records[i];
    r.derived = false;
    if (r.from == r.to) {
      throw InputError(origin, line(i), "self-vote: " + describe(r));
    }
    if (r.from.empty() || r.to.empty()) {
      throw InputError(origin, line(i), "empty country name: " + describe(r));
    }
    if (r.points < 0) {
      throw InputError(origin, line(i), "negative points: " + describe(r));
    }
    auto [it, inserted] = seen.emplace(std::tuple{r.year, r.stage, r.source, r.from, r.to}, i);
    if (!inserted) {
      throw InputError(origin, line(i), "duplicate record: " + describe(r));
    }
    if (r.source != Source::Combined) {
      split_sums[{r.year, r.stage, r.from, r.to}] += r.points;
    }
  }
  for (const auto& [key, sum] : split_sums) {
    const auto& [year, stage, from, to] = key;
    if (auto it = seen.find({year, stage, Source::Combined, from, to}); it != seen.end()) {
      throw InputError(origin, line(it->second),
                       "combined row duplicates the sum of jury/televote rows: " +
                           describe(records[it->second]));
    }
    records.push_back(VoteRecord{year, stage, Source::Combined, from, to, sum, true});
  }
  std::sort(records.begin(), records.end(),
            [](const VoteRecord& a, const VoteRecord& b) { return record_key(a) < record_key(b); });

  VoteTable table;
  for (const auto& r : records) {
    table.participants_by_year_[r.year].insert(r.from);
    table.participants_by_year_[r.year].insert(r.to);
    auto& contest = table.contest_participants_[{r.year, r.stage}];
    contest.insert(r.from);
    contest.insert(r.to);
    table.contest_recipients_[{r.year, r.stage}].insert(r.to);
    if (r.source == Source::Combined) {
      table.combined_[{r.year, r.stage, r.from, r.to}] = r.points;
    }
  }
  table.records_ = std::move(records);
  return table;
}

const std::set<CountryId>& VoteTable::participants(int year) const {
  auto it = participants_by_year_.find(year);
  return it == participants_by_year_.end() ? kNoCountries : it->second;
}

const std::set<CountryId>& VoteTable::contest_participants(int year, Stage stage) const {
  auto it = contest_participants_.find({year, stage});
  return it == contest_participants_.end() ? kNoCountries : it->second;
}

const std::set<CountryId>& VoteTable::contest_recipients(int year, Stage stage) const {
  auto it = contest_recipients_.find({year, stage});
  return it == contest_recipients_.end() ? kNoCountries : it->second;
}

std::set<int> VoteTable::years() const {
  std::set<int> out;
  for (const auto& [year, _] : participants_by_year_) {
    out.insert(year);
  }
  return out;
}

std::optional<YearWindow> VoteTable::span() const {
  if (participants_by_year_.empty()) {
    return std::nullopt;
  }
  return YearWindow(participants_by_year_.begin()->first, participants_by_year_.rbegin()->first);
}

int VoteTable::combined(int year, Stage stage, const CountryId& from, const CountryId& to) const {
  auto it = combined_.find({year, stage, from, to});
  return it == combined_.end() ? 0 : it->second;
}

VoteTable load_votes(const std::filesystem::path& path, const AliasMap& aliases) {
  const std::string file = path.string();
  std::vector<VoteRecord> records;
  std::vector<std::size_t> lines;
  for (const auto& row : csv::read(path, {"year", "stage", "source", "from", "to", "points"})) {
    VoteRecord r;
    r.year = csv::parse_int(row.fields[0], file, row.line);
    try {
      r.stage = parse_stage(row.fields[1]);
      r.source = parse_source(row.fields[2]);
      r.from = aliases.canonicalize(row.fields[3]);
      r.to = aliases.canonicalize(row.fields[4]);
    } catch (const std::exception& e) {
      throw InputError(file, row.line, e.what());
    }
    r.points = csv::parse_int(row.fields[5], file, row.line);
    records.push_back(std::move(r));
    lines.push_back(row.line);
  }
  return VoteTable::from_records(std::move(records), file, lines);
}

void save_votes(const VoteTable& votes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InputError(path.string(), 0, "cannot write file");
  }
  out << "year,stage,source,from,to,points\n";
  for (const auto& r : votes.records()) {
    if (r.derived) continue;
    out << r.year << ',' << to_string(r.stage) << ',' << to_string(r.source) << ','
        << csv::escape(r.from.name()) << ',' << csv::escape(r.to.name()) << ',' << r.points << '\n';
  }
}

void validate_points(const VoteTable& votes, const SchemeTimeline& timeline) {
  std::map<int, std::set<int>> singles;
  std::map<int, std::set<int>> pairs;
  for (const auto& r : votes.records()) {
    if (r.derived) continue;
    if (!singles.contains(r.year)) {
      std::set<int> values;
      try {
        values = timeline.at(r.year).permitted_values();
      } catch (const std::out_of_range& e) {
        throw InputError("<votes>", 0, e.what());
      }
      std::set<int> sums;
      for (int a : values) {
        for (int b : values) {
          sums.insert(a + b);
        }
      }
      singles[r.year] = std::move(values);
      pairs[r.year] = std::move(sums);
    }
    const auto& allowed = r.source == Source::Combined ? pairs[r.year] : singles[r.year];
    if (!allowed.contains(r.points)) {
      throw InputError("<votes>", 0,
                       "points not permitted by the " + std::to_string(r.year) +
                           " voting scheme: " + describe(r));
    }
  }
}

int points_between(const VoteTable& votes, const CountryId& from, const CountryId& to,
                   const YearWindow& window, const StageSet& stages) {
  int total = 0;
  for (int year = window.start_year; year <= window.end_year; ++year) {
    for (Stage stage : stages) {
      total += votes.combined(year, stage, from, to);
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// AdjacencyMap

AdjacencyMap AdjacencyMap::load(const std::filesystem::path& path, const AliasMap& aliases) {
  AdjacencyMap adj;
  for (const auto& row : csv::read(path, {"country_a", "country_b"})) {
    try {
      const auto a = aliases.canonicalize(row.fields[0]);
      const auto b = aliases.canonicalize(row.fields[1]);
      if (a == b) {
        throw std::invalid_argument("self-border for '" + a.name() + "'");
      }
      adj.add_border(a, b);
    } catch (const std::exception& e) {
      throw InputError(path.string(), row.line, e.what());
    }
  }
  return adj;
}

void AdjacencyMap::add_border(const CountryId& a, const CountryId& b) {
  if (a == b) {
    throw std::invalid_argument("a country cannot border itself");
  }
  neighbors_[a].insert(b);
  neighbors_[b].insert(a);
}

bool AdjacencyMap::borders(const CountryId& a, const CountryId& b) const {
  auto it = neighbors_.find(a);
  return it != neighbors_.end() && it->second.contains(b);
}

const std::set<CountryId>& AdjacencyMap::neighbors(const CountryId& c) const {
  auto it = neighbors_.find(c);
  return it == neighbors_.end() ? kNoCountries : it->second;
}

std::set<CountryId> AdjacencyMap::countries() const {
  std::set<CountryId> out;
  for (const auto& [c, _] : neighbors_) out.insert(c);
  return out;
}

std::size_t AdjacencyMap::border_count() const {
  std::size_t twice = 0;
  for (const auto& [_, n] : neighbors_) twice += n.size();
  return twice / 2;
}

std::map<CountryId, int> hops_from(const CountryId& source, const AdjacencyMap& adj, int max_hops) {
  std::map<CountryId, int> dist{{source, 0}};
  std::deque<CountryId> queue{source};
  while (!queue.empty()) {
    const CountryId current = queue.front();
    queue.pop_front();
    const int d = dist[current];
    if (d >= max_hops) continue;
    for (const auto& next : adj.neighbors(current)) {
      if (dist.emplace(next, d + 1).second) {
        queue.push_back(next);
      }
    }
  }
  return dist;
}

std::optional<int> hop_distance(const CountryId& a, const CountryId& b, const AdjacencyMap& adj) {
  if (a == b) return 0;
  const auto dist = hops_from(a, adj, std::numeric_limits<int>::max());
  if (auto it = dist.find(b); it != dist.end()) {
    return it->second;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// OddsTable

OddsTable OddsTable::from_entries(std::vector<OddsEntry> entries) {
  std::set<std::pair<int, CountryId>> seen;
  for (const auto& e : entries) {
    if (!(e.decimal_odds >= 1.0)) {
      throw std::invalid_argument("decimal odds below 1.0 for " + e.country.name());
    }
    if (!seen.emplace(e.year, e.country).second) {
      throw std::invalid_argument("duplicate odds for " + e.country.name() + " in " +
                                  std::to_string(e.year));
    }
  }
  std::sort(entries.begin(), entries.end(), [](const OddsEntry& a, const OddsEntry& b) {
    return std::tie(a.year, a.country) < std::tie(b.year, b.country);
  });
  OddsTable table;
  table.entries_ = std::move(entries);
  return table;
}

OddsTable OddsTable::load(const std::filesystem::path& path, const AliasMap& aliases) {
  const std::string file = path.string();
  std::vector<OddsEntry> entries;
  std::set<std::pair<int, CountryId>> seen;
  for (const auto& row : csv::read(path, {"year", "country", "decimal_odds"})) {
    OddsEntry e;
    e.year = csv::parse_int(row.fields[0], file, row.line);
    try {
      e.country = aliases.canonicalize(row.fields[1]);
    } catch (const std::exception& ex) {
      throw InputError(file, row.line, ex.what());
    }
    e.decimal_odds = csv::parse_double(row.fields[2], file, row.line);
    if (e.decimal_odds < 1.0) {
      throw InputError(file, row.line, "decimal odds must be >= 1.0");
    }
    if (!seen.emplace(e.year, e.country).second) {
      throw InputError(file, row.line, "duplicate odds entry for " + e.country.name());
    }
    entries.push_back(std::move(e));
  }
  return from_entries(std::move(entries));
}

bool OddsTable::has_year(int year) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const OddsEntry& e) { return e.year == year; });
}

std::vector<OddsEntry> OddsTable::for_year(int year) const {
  std::vector<OddsEntry> out;
  std::copy_if(entries_.begin(), entries_.end(), std::back_inserter(out),
               [&](const OddsEntry& e) { return e.year == year; });
  return out;
}

std::set<int> OddsTable::years() const {
  std::set<int> out;
  for (const auto& e : entries_) out.insert(e.year);
  return out;
}

}  // namespace votebias
