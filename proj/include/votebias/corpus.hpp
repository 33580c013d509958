#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "votebias/types.hpp"

namespace votebias {

class SchemeTimeline;

/// Maps every spelling found in input files to one canonical country name.
/// Canonical names always resolve to themselves, so canonicalization is
/// idempotent. Lookups are case-insensitive after whitespace normalization.
class AliasMap {
 public:
  AliasMap() = default;

  static AliasMap load(const std::filesystem::path& path);

  void add(std::string_view alias, std::string_view canonical);

  /// Throws std::out_of_range for unknown names.
  CountryId canonicalize(std::string_view name) const;
  std::optional<CountryId> find(std::string_view name) const;

  std::size_t size() const noexcept { return by_key_.size(); }

  /// Trims, collapses internal whitespace runs to a single space.
  static std::string normalize(std::string_view name);

 private:
  static std::string key_of(std::string_view name);

  std::map<std::string, std::string> by_key_;
};

struct VoteRecord {
  int year = 0;
  Stage stage = Stage::Final;
  Source source = Source::Combined;
  CountryId from;
  CountryId to;
  int points = 0;
  /// True for combined rows materialized from jury + televote rows.
  bool derived = false;

  bool operator==(const VoteRecord&) const = default;
};

/// Validated, immutable vote corpus.
class VoteTable {
 public:
  VoteTable() = default;

  /// Validates (no self-votes, no negative points, one row per
  /// (year, stage, source, from, to)) and materializes combined rows for any
  /// (year, stage, from, to) that has jury or televote rows. Throws
  /// InputError naming the offending record; `line_of` may supply line
  /// numbers for diagnostics (indexed like `records`).
  static VoteTable from_records(std::vector<VoteRecord> records,
                                const std::string& origin = "<memory>",
                                const std::vector<std::size_t>& line_of = {});

  const std::vector<VoteRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  const std::map<int, std::set<CountryId>>& participants_by_year() const noexcept {
    return participants_by_year_;
  }
  const std::set<CountryId>& participants(int year) const;

  /// Countries appearing in any record of one contest.
  const std::set<CountryId>& contest_participants(int year, Stage stage) const;
  /// Countries receiving a row (including zero-point rows) in one contest.
  const std::set<CountryId>& contest_recipients(int year, Stage stage) const;

  std::set<int> years() const;
  std::optional<YearWindow> span() const;

  /// Combined points for one contest, 0 when no row exists.
  int combined(int year, Stage stage, const CountryId& from, const CountryId& to) const;

  bool operator==(const VoteTable& other) const { return records_ == other.records_; }

 private:
  using ContestKey = std::pair<int, Stage>;
  using PairKey = std::tuple<int, Stage, CountryId, CountryId>;

  std::vector<VoteRecord> records_;
  std::map<int, std::set<CountryId>> participants_by_year_;
  std::map<ContestKey, std::set<CountryId>> contest_participants_;
  std::map<ContestKey, std::set<CountryId>> contest_recipients_;
  std::map<PairKey, int> combined_;
};

VoteTable load_votes(const std::filesystem::path& path, const AliasMap& aliases);

/// Writes only source rows (derived combined rows are re-materialized on
/// load), sorted canonically.
void save_votes(const VoteTable& votes, const std::filesystem::path& path);

/// Checks that jury/televote points are permitted values (or 0) of the scheme
/// active in that year, and that combined points are a sum of at most two such
/// values. Throws InputError on the first violation.
void validate_points(const VoteTable& votes, const SchemeTimeline& timeline);

/// Sum of combined points from -> to over the window and stage filter.
int points_between(const VoteTable& votes, const CountryId& from, const CountryId& to,
                   const YearWindow& window, const StageSet& stages = default_stages());

class AdjacencyMap {
 public:
  static AdjacencyMap load(const std::filesystem::path& path, const AliasMap& aliases);

  void add_border(const CountryId& a, const CountryId& b);
  bool borders(const CountryId& a, const CountryId& b) const;
  const std::set<CountryId>& neighbors(const CountryId& c) const;
  std::set<CountryId> countries() const;
  std::size_t border_count() const;

 private:
  std::map<CountryId, std::set<CountryId>> neighbors_;
};

/// Shortest border path length; nullopt when unreachable (including unknown
/// countries). 0 iff a == b.
std::optional<int> hop_distance(const CountryId& a, const CountryId& b, const AdjacencyMap& adj);

/// All-pairs hop distances from one source, up to `max_hops`.
std::map<CountryId, int> hops_from(const CountryId& source, const AdjacencyMap& adj, int max_hops);

struct OddsEntry {
  int year = 0;
  CountryId country;
  double decimal_odds = 1.0;
};

class OddsTable {
 public:
  static OddsTable load(const std::filesystem::path& path, const AliasMap& aliases);
  static OddsTable from_entries(std::vector<OddsEntry> entries);

  const std::vector<OddsEntry>& entries() const noexcept { return entries_; }
  bool has_year(int year) const;
  std::vector<OddsEntry> for_year(int year) const;
  std::set<int> years() const;

 private:
  std::vector<OddsEntry> entries_;
};

}  // namespace votebias
