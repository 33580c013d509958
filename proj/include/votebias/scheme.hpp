#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "votebias/rng.hpp"

namespace votebias {

/// Voting rule families of the contest's history.
///  - allocated: `recipients_per_ballot` unit votes, each worth point_values[0],
///    cast independently (several may land on one recipient);
///  - sequential / rated: `recipients_per_ballot` distinct recipients receive
///    point_values in order.
enum class SchemeKind { Allocated, Sequential, Rated };

std::string_view to_string(SchemeKind kind);
SchemeKind parse_scheme_kind(std::string_view text);

struct VotingScheme {
  SchemeKind kind = SchemeKind::Rated;
  std::vector<int> point_values;
  int recipients_per_ballot = 0;

  /// 12, 10, 8..1 to ten recipients.
  static VotingScheme modern();

  /// Throws std::invalid_argument when the invariants do not hold.
  void validate() const;

  /// Total points one ballot hands out when at least recipients_per_ballot
  /// others compete.
  int budget() const;

  /// Values a single row may carry under this scheme (including 0).
  std::set<int> permitted_values() const;

  auto operator<=>(const VotingScheme&) const = default;
  bool operator==(const VotingScheme&) const = default;
};

class SchemeTimeline {
 public:
  SchemeTimeline() = default;

  /// CSV `year_from,year_to,kind,point_values,recipients_per_ballot`;
  /// point_values separated by spaces, '|' or ';' (or commas inside quotes).
  static SchemeTimeline load(const std::filesystem::path& path);

  /// One scheme for every year.
  static SchemeTimeline uniform(VotingScheme scheme);

  /// The shipped timeline (data/schemes.csv): the modern rated scheme from
  /// 1975, editable allocated/sequential placeholders before.
  static SchemeTimeline defaults();

  /// Later entries override earlier ones on overlapping years.
  void add(int year_from, int year_to, VotingScheme scheme);

  bool covers(int year) const;
  /// Throws std::out_of_range for uncovered years.
  const VotingScheme& at(int year) const;

 private:
  struct Entry {
    int year_from;
    int year_to;
    VotingScheme scheme;
  };
  std::vector<Entry> entries_;
};

/// One contest's worth of null-model draw for a fixed (voter, recipient).
struct ContestDraw {
  VotingScheme scheme;
  int n_others = 1;

  auto operator<=>(const ContestDraw&) const = default;
  bool operator==(const ContestDraw&) const = default;
};

struct Thresholds {
  double high = 0.0;
  double low = 0.0;
  double conf_up = 1.0;
  double conf_low = 90.0;
  int iterations = 0;
  std::uint64_t seed = 0;

  bool operator==(const Thresholds&) const = default;
};

struct SimulationOptions {
  int iterations = 100000;
  double conf_up = 1.0;
  double conf_low = 90.0;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Full random ballot of one voter over `n_others` candidates: element i is the
/// points candidate i receives.
std::vector<int> sample_ballot(const VotingScheme& scheme, int n_others, SplitMix64& rng);

/// Points a fixed voter gives a fixed candidate in one uniformly random
/// ballot. Same marginal law as reading one entry of sample_ballot, one draw
/// instead of a shuffle.
int sample_pair_points(const VotingScheme& scheme, int n_others, SplitMix64& rng);

/// Per-period totals of `iterations` independent simulations. Simulation i
/// uses substream(seed, i) and walks `draws` in order, so the result is
/// independent of `workers`.
std::vector<int> simulate_period_totals(std::span<const ContestDraw> draws, int iterations,
                                        std::uint64_t seed, int workers = 1);

/// Nearest-rank percentile on the descending-sorted values: the element at
/// 1-based rank ceil(conf/100 * n), clamped to [1, n].
double descending_percentile(std::vector<int> values, double conf);

/// Bias/neglect cutoffs for a sequence of contest draws.
Thresholds simulate_thresholds(std::span<const ContestDraw> draws, const SimulationOptions& options);

/// Thresholds for the period made of `active_years`, each drawn under the
/// timeline's scheme with that year's field size. Throws
/// std::invalid_argument for an empty year list.
Thresholds expected_thresholds(const SchemeTimeline& timeline, std::span<const int> active_years,
                               const std::map<int, int>& n_others_by_year,
                               const SimulationOptions& options);

/// One contest a pair entered together: its year and the number of other
/// candidates competing for the voter's points.
struct ContestSlot {
  int year = 0;
  int n_others = 1;

  auto operator<=>(const ContestSlot&) const = default;
  bool operator==(const ContestSlot&) const = default;
};

/// Source of thresholds for a pair's co-participation contests.
class ThresholdProvider {
 public:
  virtual ~ThresholdProvider() = default;
  virtual Thresholds thresholds(std::span<const ContestSlot> contests) = 0;
};

/// Simulates on demand and memoizes by the canonical (sorted) multiset of
/// draws: the distribution of a period total does not depend on contest order.
class SimulatedThresholds final : public ThresholdProvider {
 public:
  SimulatedThresholds(SchemeTimeline timeline, SimulationOptions options)
      : timeline_(std::move(timeline)), options_(options) {}

  Thresholds thresholds(std::span<const ContestSlot> contests) override;

  const SimulationOptions& options() const noexcept { return options_; }
  std::size_t cache_size() const;

 private:
  SchemeTimeline timeline_;
  SimulationOptions options_;
  mutable std::mutex mutex_;
  std::map<std::vector<ContestDraw>, Thresholds> cache_;
};

/// Constant thresholds regardless of the period.
class FixedThresholds final : public ThresholdProvider {
 public:
  FixedThresholds(double high, double low) {
    value_.high = high;
    value_.low = low;
  }

  Thresholds thresholds(std::span<const ContestSlot>) override { return value_; }

 private:
  Thresholds value_;
};

}  // namespace votebias
