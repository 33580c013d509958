#include "votebias/netbuild.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

namespace votebias {

std::string_view to_string(NetworkKind kind) {
  switch (kind) {
    case NetworkKind::DirectedBias:
      return "directed_bias";
    case NetworkKind::UndirectedBias:
      return "undirected_bias";
    case NetworkKind::UndirectedNeglect:
      return "undirected_neglect";
  }
  return "undirected_bias";
}

std::string_view to_string(Method method) {
  return method == Method::Gatherer ? "gatherer" : "average";
}

NetworkKind parse_network_kind(std::string_view text) {
  for (auto kind : kAllKinds) {
    if (to_string(kind) == text) return kind;
  }
  throw std::invalid_argument("unknown network kind '" + std::string(text) + "'");
}

Method parse_method(std::string_view text) {
  for (auto method : kAllMethods) {
    if (to_string(method) == text) return method;
  }
  throw std::invalid_argument("unknown method '" + std::string(text) + "'");
}

void BiasNetwork::add_edge(const CountryId& u, const CountryId& v, double weight) {
  if (u == v) {
    throw std::invalid_argument("self-loop on " + u.name());
  }
  if (!(weight > 0.0)) {
    throw std::invalid_argument("edge weight must be positive");
  }
  Edge edge{u, v, weight};
  if (!directed() && v < u) {
    std::swap(edge.u, edge.v);
  }
  auto pos = std::lower_bound(edges_.begin(), edges_.end(), edge, [](const Edge& a, const Edge& b) {
    return std::tie(a.u, a.v) < std::tie(b.u, b.v);
  });
  if (pos != edges_.end() && pos->u == edge.u && pos->v == edge.v) {
    throw std::invalid_argument("duplicate edge " + edge.u.name() + " - " + edge.v.name());
  }
  nodes_.insert(edge.u);
  nodes_.insert(edge.v);
  edges_.insert(pos, std::move(edge));
}

std::optional<double> BiasNetwork::weight(const CountryId& u, const CountryId& v) const {
  const bool swap = !directed() && v < u;
  const CountryId& a = swap ? v : u;
  const CountryId& b = swap ? u : v;
  for (const auto& e : edges_) {
    if (e.u == a && e.v == b) return e.weight;
  }
  return std::nullopt;
}

GathererVerdict classify_gatherer(double pa1, double pa2, const Thresholds& t, bool within_hops) {
  GathererVerdict verdict;
  if (pa1 > t.high && t.high > pa2) {
    verdict.directed_12 = pa1 - pa2;
  }
  if (pa2 > t.high && t.high > pa1) {
    verdict.directed_21 = pa2 - pa1;
  }
  if (pa1 > t.high && pa2 > t.high) {
    verdict.mutual = (pa1 + pa2) / 2.0 - t.high;
  }
  if (within_hops && pa1 < t.low && pa2 < t.low) {
    verdict.neglect = t.low - (pa1 + pa2) / 2.0;
  }
  return verdict;
}

namespace {

/// Dense view of one window: countries, their participation years, summed
/// combined points and the contests each pair entered together.
struct WindowIndex {
  struct Contest {
    int year;
    Stage stage;
    int n_others;
    std::vector<bool> present;
  };

  std::vector<CountryId> countries;
  std::map<CountryId, std::size_t> index;
  std::vector<std::set<int>> years;
  std::vector<std::vector<int>> points;  // points[i][j]: i -> j over the window
  std::vector<Contest> contests;

  WindowIndex(const VoteTable& votes, const YearWindow& window, const StageSet& stages) {
    std::set<CountryId> all;
    for (int year = window.start_year; year <= window.end_year; ++year) {
      for (Stage stage : stages) {
        const auto& p = votes.contest_participants(year, stage);
        all.insert(p.begin(), p.end());
      }
    }
    countries.assign(all.begin(), all.end());
    for (std::size_t i = 0; i < countries.size(); ++i) {
      index.emplace(countries[i], i);
    }
    const std::size_t n = countries.size();
    years.resize(n);
    points.assign(n, std::vector<int>(n, 0));

    for (int year = window.start_year; year <= window.end_year; ++year) {
      for (Stage stage : stages) {
        const auto& p = votes.contest_participants(year, stage);
        if (p.empty()) continue;
        Contest contest{year, stage, 1, std::vector<bool>(n, false)};
        const int recipients = static_cast<int>(votes.contest_recipients(year, stage).size());
        contest.n_others = std::max(1, recipients - 1);
        for (const auto& c : p) {
          const auto i = index.at(c);
          contest.present[i] = true;
          years[i].insert(year);
        }
        contests.push_back(std::move(contest));
      }
    }
    for (const auto& r : votes.records()) {
      if (r.source != Source::Combined || !window.contains(r.year) || !stages.contains(r.stage)) {
        continue;
      }
      points[index.at(r.from)][index.at(r.to)] += r.points;
    }
  }

  std::size_t years_together(std::size_t i, std::size_t j) const {
    std::size_t count = 0;
    for (int y : years[i]) {
      count += years[j].contains(y) ? 1 : 0;
    }
    return count;
  }

  std::vector<ContestSlot> slots_together(std::size_t i, std::size_t j) const {
    std::vector<ContestSlot> out;
    for (const auto& c : contests) {
      if (c.present[i] && c.present[j]) {
        out.push_back(ContestSlot{c.year, c.n_others});
      }
    }
    return out;
  }
};

struct YearOrder {
  bool operator()(const VoteRecord& r, int year) const { return r.year < year; }
  bool operator()(int year, const VoteRecord& r) const { return year < r.year; }
};

}  // namespace

std::vector<ContestSlot> co_participation_slots(const VoteTable& votes, const YearWindow& window,
                                                const CountryId& a, const CountryId& b,
                                                const StageSet& stages) {
  const WindowIndex idx(votes, window, stages);
  const auto ia = idx.index.find(a);
  const auto ib = idx.index.find(b);
  if (ia == idx.index.end() || ib == idx.index.end()) {
    return {};
  }
  return idx.slots_together(ia->second, ib->second);
}

GathererNetworks build_gatherer(const VoteTable& votes, const YearWindow& window,
                                ThresholdProvider& provider, const AdjacencyMap& adj,
                                const GathererOptions& options) {
  GathererNetworks out{
      BiasNetwork({window, NetworkKind::DirectedBias, Method::Gatherer}),
      BiasNetwork({window, NetworkKind::UndirectedBias, Method::Gatherer}),
      BiasNetwork({window, NetworkKind::UndirectedNeglect, Method::Gatherer}),
  };
  const WindowIndex idx(votes, window, options.stages);
  const std::size_t n = idx.countries.size();
  const double min_together = static_cast<double>(window.length()) / 5.0;

  for (std::size_t i = 0; i < n; ++i) {
    const auto near = hops_from(idx.countries[i], adj, options.neglect_max_hops);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!(static_cast<double>(idx.years_together(i, j)) > min_together)) {
        continue;
      }
      const auto slots = idx.slots_together(i, j);
      if (slots.empty()) {
        continue;
      }
      const Thresholds t = provider.thresholds(slots);
      const auto& ci = idx.countries[i];
      const auto& cj = idx.countries[j];
      const auto verdict = classify_gatherer(idx.points[i][j], idx.points[j][i], t, near.contains(cj));
      if (verdict.directed_12) out.directed.add_edge(ci, cj, *verdict.directed_12);
      if (verdict.directed_21) out.directed.add_edge(cj, ci, *verdict.directed_21);
      if (verdict.mutual) out.undirected.add_edge(ci, cj, *verdict.mutual);
      if (verdict.neglect) out.neglect.add_edge(ci, cj, *verdict.neglect);
    }
  }
  return out;
}

AverageNetworks build_average(const VoteTable& votes, const YearWindow& window,
                              double overshoot_fraction, const StageSet& stages) {
  AverageNetworks out{
      BiasNetwork({window, NetworkKind::DirectedBias, Method::Average}),
      BiasNetwork({window, NetworkKind::UndirectedBias, Method::Average}),
  };

  std::set<CountryId> all;
  for (int year = window.start_year; year <= window.end_year; ++year) {
    for (Stage stage : stages) {
      const auto& p = votes.contest_participants(year, stage);
      all.insert(p.begin(), p.end());
    }
  }
  const std::vector<CountryId> countries(all.begin(), all.end());
  const std::size_t n = countries.size();
  std::map<CountryId, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index.emplace(countries[i], i);

  std::vector<int> appearances(n, 0);
  std::vector<std::vector<int>> overshot(n, std::vector<int>(n, 0));

  for (int year = window.start_year; year <= window.end_year; ++year) {
    std::vector<std::vector<int>> given(n, std::vector<int>(n, 0));
    std::vector<bool> present(n, false);
    std::vector<bool> voter(n, false);
    for (Stage stage : stages) {
      for (const auto& c : votes.contest_participants(year, stage)) {
        present[index.at(c)] = true;
      }
    }
    const auto& records = votes.records();  // sorted by year first
    const auto [lo, hi] = std::equal_range(
        records.begin(), records.end(), year, YearOrder{});
    for (auto it = lo; it != hi; ++it) {
      const auto& r = *it;
      if (r.source != Source::Combined || !stages.contains(r.stage)) continue;
      const auto f = index.at(r.from);
      given[f][index.at(r.to)] += r.points;
      voter[f] = true;
    }
    const auto voters = static_cast<int>(std::count(voter.begin(), voter.end(), true));

    for (std::size_t j = 0; j < n; ++j) {
      if (!present[j]) continue;
      ++appearances[j];
      // Mean over this year's voters other than the recipient itself.
      const int eligible = voters - (voter[j] ? 1 : 0);
      if (eligible <= 0) continue;
      int received = 0;
      for (std::size_t i = 0; i < n; ++i) received += given[i][j];
      const double mean = static_cast<double>(received) / eligible;
      for (std::size_t i = 0; i < n; ++i) {
        if (i != j && voter[i] && given[i][j] > mean) {
          ++overshot[i][j];
        }
      }
    }
  }

  const double f = overshoot_fraction;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || appearances[i] == 0 || appearances[j] == 0) continue;
      const double o1 = overshot[i][j];
      const double o2 = overshot[j][i];
      const double need1 = f * appearances[j];
      const double need2 = f * appearances[i];
      if (o1 > need1 && o2 < need2 && o1 - o2 > 0.0) {
        out.directed.add_edge(countries[i], countries[j], o1 - o2);
      }
      if (i < j && o1 > need1 && o2 > need2) {
        out.undirected.add_edge(countries[i], countries[j], (o1 + o2 - need2 - need1) / 2.0);
      }
    }
  }
  return out;
}

BiasNetwork prune_below_mean(const BiasNetwork& net) {
  if (!net.directed()) {
    throw std::invalid_argument("prune_below_mean expects a directed bias network");
  }
  BiasNetwork out(net.id());
  if (net.empty()) {
    return out;
  }
  const auto& edges = net.edges();
  const double mean = std::accumulate(edges.begin(), edges.end(), 0.0,
                                      [](double acc, const Edge& e) { return acc + e.weight; }) /
                      static_cast<double>(edges.size());
  for (const auto& e : edges) {
    if (!(e.weight < mean)) {
      out.add_edge(e.u, e.v, e.weight);
    }
  }
  return out;
}

std::vector<YearWindow> enumerate_windows(int first_year, int last_year, std::span<const int> lengths,
                                          std::vector<std::string>* warnings) {
  std::vector<YearWindow> out;
  const int span = last_year - first_year + 1;
  for (int length : lengths) {
    if (length < 1 || length > span) {
      if (warnings) {
        warnings->push_back("window length " + std::to_string(length) + " skipped: corpus spans " +
                            std::to_string(std::max(span, 0)) + " years");
      }
      continue;
    }
    for (int start = first_year; start + length - 1 <= last_year; ++start) {
      out.emplace_back(start, start + length - 1);
    }
  }
  return out;
}

}  // namespace votebias
