#include "votebias/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

#include "votebias/csv.hpp"
#include "votebias/types.hpp"

namespace votebias {

std::string_view to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Allocated:
      return "allocated";
    case SchemeKind::Sequential:
      return "sequential";
    case SchemeKind::Rated:
      return "rated";
  }
  return "rated";
}

SchemeKind parse_scheme_kind(std::string_view text) {
  if (text == "allocated") return SchemeKind::Allocated;
  if (text == "sequential") return SchemeKind::Sequential;
  if (text == "rated") return SchemeKind::Rated;
  throw std::invalid_argument("unknown scheme kind '" + std::string(text) + "'");
}

VotingScheme VotingScheme::modern() {
  return VotingScheme{SchemeKind::Rated, {12, 10, 8, 7, 6, 5, 4, 3, 2, 1}, 10};
}

void VotingScheme::validate() const {
  if (point_values.empty()) {
    throw std::invalid_argument("voting scheme has no point values");
  }
  if (recipients_per_ballot < 1) {
    throw std::invalid_argument("recipients_per_ballot must be positive");
  }
  for (std::size_t i = 0; i < point_values.size(); ++i) {
    if (point_values[i] <= 0) {
      throw std::invalid_argument("point values must be positive");
    }
    if (i > 0 && point_values[i] >= point_values[i - 1]) {
      throw std::invalid_argument("point values must be strictly descending");
    }
  }
  if (kind == SchemeKind::Allocated) {
    if (point_values.size() != 1) {
      throw std::invalid_argument("allocated scheme takes exactly one per-vote value");
    }
  } else if (static_cast<std::size_t>(recipients_per_ballot) != point_values.size()) {
    throw std::invalid_argument("recipients_per_ballot must equal the number of point values");
  }
}

int VotingScheme::budget() const {
  if (kind == SchemeKind::Allocated) {
    return recipients_per_ballot * point_values.front();
  }
  return std::accumulate(point_values.begin(), point_values.end(), 0);
}

std::set<int> VotingScheme::permitted_values() const {
  std::set<int> out{0};
  if (kind == SchemeKind::Allocated) {
    for (int votes = 1; votes <= recipients_per_ballot; ++votes) {
      out.insert(votes * point_values.front());
    }
  } else {
    out.insert(point_values.begin(), point_values.end());
  }
  return out;
}

SchemeTimeline SchemeTimeline::defaults() {
  SchemeTimeline timeline;
  timeline.add(1956, 1961, {SchemeKind::Allocated, {1}, 10});
  timeline.add(1962, 1962, {SchemeKind::Sequential, {3, 2, 1}, 3});
  timeline.add(1963, 1963, {SchemeKind::Sequential, {5, 4, 3, 2, 1}, 5});
  timeline.add(1964, 1966, {SchemeKind::Sequential, {5, 3, 1}, 3});
  timeline.add(1967, 1974, {SchemeKind::Allocated, {1}, 10});
  timeline.add(1975, 9999, VotingScheme::modern());
  return timeline;
}

SchemeTimeline SchemeTimeline::load(const std::filesystem::path& path) {
  const std::string file = path.string();
  SchemeTimeline timeline;
  for (const auto& row : csv::read(path, {"year_from", "year_to", "kind", "point_values",
                                         "recipients_per_ballot"})) {
    VotingScheme scheme;
    try {
      scheme.kind = parse_scheme_kind(row.fields[2]);
    } catch (const std::invalid_argument& e) {
      throw InputError(file, row.line, e.what());
    }
    std::string token;
    const auto flush = [&] {
      if (!token.empty()) {
        scheme.point_values.push_back(csv::parse_int(token, file, row.line));
        token.clear();
      }
    };
    for (char c : row.fields[3]) {
      if (c == ' ' || c == '|' || c == ';' || c == ',') {
        flush();
      } else {
        token.push_back(c);
      }
    }
    flush();
    scheme.recipients_per_ballot = csv::parse_int(row.fields[4], file, row.line);
    const int from = csv::parse_int(row.fields[0], file, row.line);
    const int to = csv::parse_int(row.fields[1], file, row.line);
    try {
      timeline.add(from, to, std::move(scheme));
    } catch (const std::invalid_argument& e) {
      throw InputError(file, row.line, e.what());
    }
  }
  return timeline;
}

SchemeTimeline SchemeTimeline::uniform(VotingScheme scheme) {
  SchemeTimeline timeline;
  timeline.add(std::numeric_limits<int>::min(), std::numeric_limits<int>::max(), std::move(scheme));
  return timeline;
}

void SchemeTimeline::add(int year_from, int year_to, VotingScheme scheme) {
  if (year_from > year_to) {
    throw std::invalid_argument("scheme entry has year_from after year_to");
  }
  scheme.validate();
  entries_.push_back(Entry{year_from, year_to, std::move(scheme)});
}

bool SchemeTimeline::covers(int year) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return year >= e.year_from && year <= e.year_to; });
}

const VotingScheme& SchemeTimeline::at(int year) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (year >= it->year_from && year <= it->year_to) {
      return it->scheme;
    }
  }
  throw std::out_of_range("no voting scheme configured for year " + std::to_string(year));
}

std::vector<int> sample_ballot(const VotingScheme& scheme, int n_others, SplitMix64& rng) {
  if (n_others < 1) {
    throw std::invalid_argument("sample_ballot needs at least one candidate");
  }
  std::vector<int> points(static_cast<std::size_t>(n_others), 0);
  const auto n = static_cast<std::uint64_t>(n_others);
  if (scheme.kind == SchemeKind::Allocated) {
    for (int vote = 0; vote < scheme.recipients_per_ballot; ++vote) {
      points[rng.bounded(n)] += scheme.point_values.front();
    }
    return points;
  }
  // Partial Fisher-Yates: the first k slots of `order` are a uniform random
  // k-permutation of the candidates.
  std::vector<int> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  const auto k = std::min<std::size_t>(scheme.point_values.size(), order.size());
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.bounded(order.size() - i));
    std::swap(order[i], order[j]);
    points[static_cast<std::size_t>(order[i])] = scheme.point_values[i];
  }
  return points;
}

int sample_pair_points(const VotingScheme& scheme, int n_others, SplitMix64& rng) {
  const auto n = static_cast<std::uint64_t>(n_others);
  if (scheme.kind == SchemeKind::Allocated) {
    int total = 0;
    for (int vote = 0; vote < scheme.recipients_per_ballot; ++vote) {
      if (rng.bounded(n) == 0) {
        total += scheme.point_values.front();
      }
    }
    return total;
  }
  // The fixed candidate's position in a uniform random ordering of n_others.
  const auto position = rng.bounded(n);
  return position < scheme.point_values.size() ? scheme.point_values[position] : 0;
}

std::vector<int> simulate_period_totals(std::span<const ContestDraw> draws, int iterations,
                                        std::uint64_t seed, int workers) {
  if (iterations < 1) {
    throw std::invalid_argument("iterations must be positive");
  }
  for (const auto& draw : draws) {
    if (draw.n_others < 1) {
      throw std::invalid_argument("contest draw needs at least one other candidate");
    }
  }
  std::vector<int> totals(static_cast<std::size_t>(iterations), 0);
  const auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto rng = substream(seed, i);
      int total = 0;
      for (const auto& draw : draws) {
        total += sample_pair_points(draw.scheme, draw.n_others, rng);
      }
      totals[i] = total;
    }
  };

  const auto n_workers = static_cast<std::size_t>(std::clamp(workers, 1, iterations));
  if (n_workers == 1) {
    run_range(0, totals.size());
    return totals;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    const std::size_t chunk = (totals.size() + n_workers - 1) / n_workers;
    for (std::size_t w = 0; w < n_workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(totals.size(), begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(run_range, begin, end);
    }
  }
  return totals;
}

double descending_percentile(std::vector<int> values, double conf) {
  if (values.empty()) {
    throw std::invalid_argument("percentile of an empty sample");
  }
  if (!(conf > 0.0 && conf < 100.0)) {
    throw std::invalid_argument("percentile must lie in (0, 100)");
  }
  const double n = static_cast<double>(values.size());
  // The small epsilon keeps exact products such as 1/100 * 100000 from
  // rounding up a rank.
  auto rank = static_cast<std::size_t>(std::ceil(conf / 100.0 * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  auto nth = values.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(values.begin(), nth, values.end(), std::greater<>{});
  return static_cast<double>(*nth);
}

Thresholds simulate_thresholds(std::span<const ContestDraw> draws, const SimulationOptions& options) {
  if (draws.empty()) {
    throw std::invalid_argument("thresholds need at least one contest");
  }
  const auto totals = simulate_period_totals(draws, options.iterations, options.seed, options.workers);
  Thresholds out;
  out.high = descending_percentile(totals, options.conf_up);
  out.low = descending_percentile(totals, options.conf_low);
  out.conf_up = options.conf_up;
  out.conf_low = options.conf_low;
  out.iterations = options.iterations;
  out.seed = options.seed;
  return out;
}

Thresholds expected_thresholds(const SchemeTimeline& timeline, std::span<const int> active_years,
                               const std::map<int, int>& n_others_by_year,
                               const SimulationOptions& options) {
  if (active_years.empty()) {
    throw std::invalid_argument("expected_thresholds: no active years");
  }
  std::vector<ContestDraw> draws;
  draws.reserve(active_years.size());
  for (int year : active_years) {
    const auto it = n_others_by_year.find(year);
    if (it == n_others_by_year.end()) {
      throw std::invalid_argument("no field size for year " + std::to_string(year));
    }
    draws.push_back(ContestDraw{timeline.at(year), it->second});
  }
  return simulate_thresholds(draws, options);
}

Thresholds SimulatedThresholds::thresholds(std::span<const ContestSlot> contests) {
  std::vector<ContestDraw> key;
  key.reserve(contests.size());
  for (const auto& slot : contests) {
    key.push_back(ContestDraw{timeline_.at(slot.year), slot.n_others});
  }
  std::sort(key.begin(), key.end());
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) {
      return it->second;
    }
  }
  const Thresholds computed = simulate_thresholds(key, options_);
  std::lock_guard lock(mutex_);
  return cache_.emplace(std::move(key), computed).first->second;
}

std::size_t SimulatedThresholds::cache_size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

}  // namespace votebias
