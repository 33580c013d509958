#include "votebias/community.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "votebias/rng.hpp"

namespace votebias {

namespace {

struct NodeIndex {
  std::vector<CountryId> names;
  std::map<CountryId, std::size_t> index;

  explicit NodeIndex(const BiasNetwork& net) : names(net.nodes().begin(), net.nodes().end()) {
    for (std::size_t i = 0; i < names.size(); ++i) index.emplace(names[i], i);
  }
};

std::vector<Group> groups_from_labels(const std::vector<CountryId>& names, const std::vector<std::size_t>& label) {
  std::map<std::size_t, Group> by_label;
  for (std::size_t i = 0; i < names.size(); ++i) {
    by_label[label[i]].push_back(names[i]);
  }
  std::vector<Group> groups;
  for (auto& [_, g] : by_label) {
    std::sort(g.begin(), g.end());
    groups.push_back(std::move(g));
  }
  std::sort(groups.begin(), groups.end());
  return groups;
}

}  // namespace

double modularity(const BiasNetwork& net, std::span<const Group> groups) {
  if (net.empty()) {
    return 0.0;
  }
  std::map<CountryId, std::size_t> community;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const auto& c : groups[g]) community[c] = g;
  }
  std::size_t next_label = groups.size();
  for (const auto& c : net.nodes()) {
    if (!community.contains(c)) community[c] = next_label++;
  }

  double m = 0.0;
  std::vector<double> internal(next_label, 0.0);
  std::vector<double> out_strength(next_label, 0.0);
  std::vector<double> in_strength(next_label, 0.0);
  for (const auto& e : net.edges()) {
    const auto cu = community.at(e.u);
    const auto cv = community.at(e.v);
    m += e.weight;
    out_strength[cu] += e.weight;
    in_strength[cv] += e.weight;
    if (cu == cv) internal[cu] += e.weight;
  }
  double q = 0.0;
  if (net.directed()) {
    for (std::size_t c = 0; c < next_label; ++c) {
      q += internal[c] / m - out_strength[c] * in_strength[c] / (m * m);
    }
  } else {
    // Each undirected edge adds to both endpoints' degree.
    for (std::size_t c = 0; c < next_label; ++c) {
      const double degree = out_strength[c] + in_strength[c];
      q += internal[c] / m - (degree / (2.0 * m)) * (degree / (2.0 * m));
    }
  }
  return q;
}

// ---------------------------------------------------------------------------
// Louvain

namespace {

struct WeightedGraph {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj;  // no self entries
  std::vector<double> loops;                                     // self-loop weight

  std::size_t size() const { return adj.size(); }
  double degree(std::size_t i) const {
    double k = 2.0 * loops[i];
    for (const auto& [_, w] : adj[i]) k += w;
    return k;
  }
};

/// One level of node moves. Returns true when any node changed community.
bool move_nodes(const WeightedGraph& g, std::vector<std::size_t>& comm, SplitMix64& rng) {
  constexpr double kEps = 1e-12;
  const std::size_t n = g.size();
  std::vector<double> k(n);
  std::vector<double> tot(n, 0.0);
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    k[i] = g.degree(i);
    tot[comm[i]] += k[i];
    m2 += k[i];
  }
  if (m2 <= 0.0) return false;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);

  bool improved = false;
  bool moved = true;
  std::map<std::size_t, double> links;
  while (moved) {
    moved = false;
    for (std::size_t i : order) {
      const std::size_t own = comm[i];
      links.clear();
      links[own] = 0.0;
      for (const auto& [j, w] : g.adj[i]) links[comm[j]] += w;

      tot[own] -= k[i];
      const auto gain = [&](std::size_t c) { return links[c] - tot[c] * k[i] / m2; };
      std::size_t best = own;
      double best_gain = gain(own);
      // `links` iterates in ascending label order, so the first candidate
      // reaching a gain is the lowest label with that gain.
      for (const auto& [c, _] : links) {
        if (c == own) continue;
        const double gc = gain(c);
        if (gc > best_gain + kEps) {
          best = c;
          best_gain = gc;
        }
      }
      tot[best] += k[i];
      if (best != own) {
        comm[i] = best;
        moved = true;
        improved = true;
      }
    }
  }
  return improved;
}

WeightedGraph aggregate(const WeightedGraph& g, const std::vector<std::size_t>& comm, std::size_t communities) {
  WeightedGraph out;
  out.adj.resize(communities);
  out.loops.assign(communities, 0.0);
  std::vector<std::map<std::size_t, double>> acc(communities);
  for (std::size_t i = 0; i < g.size(); ++i) {
    out.loops[comm[i]] += g.loops[i];
    for (const auto& [j, w] : g.adj[i]) {
      if (comm[i] == comm[j]) {
        out.loops[comm[i]] += w / 2.0;  // each internal edge is seen from both ends
      } else {
        acc[comm[i]][comm[j]] += w;
      }
    }
  }
  for (std::size_t c = 0; c < communities; ++c) {
    out.adj[c].assign(acc[c].begin(), acc[c].end());
  }
  return out;
}

}  // namespace

CommunityPartition louvain(const BiasNetwork& net, std::uint64_t seed) {
  if (net.directed()) {
    throw std::invalid_argument("louvain expects an undirected network");
  }
  CommunityPartition result{net.id(), {}, 0.0};
  if (net.empty()) {
    return result;
  }
  const NodeIndex nodes(net);
  const std::size_t n = nodes.names.size();

  WeightedGraph graph;
  graph.adj.resize(n);
  graph.loops.assign(n, 0.0);
  for (const auto& e : net.edges()) {
    const auto u = nodes.index.at(e.u);
    const auto v = nodes.index.at(e.v);
    graph.adj[u].emplace_back(v, e.weight);
    graph.adj[v].emplace_back(u, e.weight);
  }

  SplitMix64 rng(seed);
  std::vector<std::size_t> membership(n);
  std::iota(membership.begin(), membership.end(), 0);

  while (true) {
    std::vector<std::size_t> comm(graph.size());
    std::iota(comm.begin(), comm.end(), 0);
    if (!move_nodes(graph, comm, rng)) break;

    // Relabel communities by their lowest member, which is the lowest
    // original node because level nodes are themselves ordered that way.
    std::vector<std::size_t> relabel(graph.size(), graph.size());
    std::size_t next = 0;
    for (std::size_t i = 0; i < graph.size(); ++i) {
      if (relabel[comm[i]] == graph.size()) relabel[comm[i]] = next++;
    }
    for (auto& c : comm) c = relabel[c];
    for (auto& m : membership) m = comm[m];
    graph = aggregate(graph, comm, next);
  }

  result.groups = groups_from_labels(nodes.names, membership);
  result.modularity = modularity(net, result.groups);
  return result;
}

// ---------------------------------------------------------------------------
// Leading eigenvector

EigenPair leading_eigenpair(const std::vector<std::vector<double>>& matrix, const EigenOptions& options) {
  const std::size_t n = matrix.size();
  EigenPair out;
  if (n == 0) {
    out.converged = true;
    return out;
  }
  double shift = 0.0;
  for (const auto& row : matrix) {
    double s = 0.0;
    for (double v : row) s += std::abs(v);
    shift = std::max(shift, s);
  }

  const auto multiply = [&](const std::vector<double>& x) {
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = shift * x[i];
      for (std::size_t j = 0; j < n; ++j) acc += matrix[i][j] * x[j];
      y[i] = acc;
    }
    return y;
  };
  const auto normalize = [](std::vector<double>& x) {
    double norm = 0.0;
    for (double v : x) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (double& v : x) v /= norm;
    }
    return norm;
  };

  // Fixed generic start vector: reproducible and (almost surely) not
  // orthogonal to the leading eigenvector.
  std::vector<double> x(n);
  auto rng = substream(0x1EADE16ULL, n);
  for (auto& v : x) v = 0.5 + rng.uniform();
  normalize(x);

  if (shift == 0.0) {
    out.vector = x;
    out.converged = true;
    return out;
  }
  for (int it = 1; it <= options.max_iterations; ++it) {
    auto y = multiply(x);
    if (normalize(y) == 0.0) {
      break;
    }
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(y[i] - x[i]));
    x = std::move(y);
    out.iterations = it;
    if (diff < options.tolerance) {
      out.converged = true;
      break;
    }
  }
  double rayleigh = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += matrix[i][j] * x[j];
    rayleigh += x[i] * row;
  }
  out.value = rayleigh;
  out.vector = std::move(x);
  return out;
}

CommunityPartition leading_eigenvector(const BiasNetwork& net, const EigenOptions& options) {
  if (!net.directed()) {
    throw std::invalid_argument("leading_eigenvector expects a directed network");
  }
  CommunityPartition result{net.id(), {}, 0.0};
  if (net.empty()) {
    return result;
  }
  const NodeIndex nodes(net);
  const std::size_t n = nodes.names.size();

  std::vector<std::vector<double>> adjacency(n, std::vector<double>(n, 0.0));
  std::vector<double> k_out(n, 0.0);
  std::vector<double> k_in(n, 0.0);
  double m = 0.0;
  for (const auto& e : net.edges()) {
    const auto u = nodes.index.at(e.u);
    const auto v = nodes.index.at(e.v);
    adjacency[u][v] += e.weight;
    k_out[u] += e.weight;
    k_in[v] += e.weight;
    m += e.weight;
  }
  // Symmetrized directed modularity matrix.
  std::vector<std::vector<double>> b(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double bij = adjacency[i][j] - k_out[i] * k_in[j] / m;
      const double bji = adjacency[j][i] - k_out[j] * k_in[i] / m;
      b[i][j] = 0.5 * (bij + bji);
    }
  }

  constexpr double kMinGain = 1e-12;
  std::vector<std::vector<std::size_t>> done;
  std::queue<std::vector<std::size_t>> pending;
  {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    pending.push(std::move(all));
  }
  while (!pending.empty()) {
    auto group = std::move(pending.front());
    pending.pop();
    const std::size_t g = group.size();
    if (g < 2) {
      done.push_back(std::move(group));
      continue;
    }
    // Generalized modularity matrix of the group.
    std::vector<std::vector<double>> bg(g, std::vector<double>(g, 0.0));
    for (std::size_t a = 0; a < g; ++a) {
      double row_sum = 0.0;
      for (std::size_t c = 0; c < g; ++c) {
        bg[a][c] = b[group[a]][group[c]];
        row_sum += bg[a][c];
      }
      bg[a][a] -= row_sum;
    }
    const auto eig = leading_eigenpair(bg, options);
    if (!(eig.value > options.tolerance)) {
      done.push_back(std::move(group));
      continue;
    }
    std::vector<double> s(g);
    for (std::size_t a = 0; a < g; ++a) s[a] = eig.vector[a] >= 0.0 ? 1.0 : -1.0;
    double gain = 0.0;
    for (std::size_t a = 0; a < g; ++a) {
      for (std::size_t c = 0; c < g; ++c) gain += s[a] * bg[a][c] * s[c];
    }
    gain /= 2.0 * m;
    std::vector<std::size_t> positive;
    std::vector<std::size_t> negative;
    for (std::size_t a = 0; a < g; ++a) (s[a] > 0 ? positive : negative).push_back(group[a]);
    if (positive.empty() || negative.empty() || !(gain > kMinGain)) {
      done.push_back(std::move(group));
      continue;
    }
    pending.push(std::move(positive));
    pending.push(std::move(negative));
  }

  std::vector<std::size_t> label(n);
  for (std::size_t c = 0; c < done.size(); ++c) {
    for (auto i : done[c]) label[i] = c;
  }
  result.groups = groups_from_labels(nodes.names, label);
  result.modularity = modularity(net, result.groups);
  return result;
}

// ---------------------------------------------------------------------------
// Co-occurrence mining

std::vector<ItemsetSupport> mine_cooccurrence(std::span<const CommunityPartition> partitions,
                                              double min_support) {
  if (partitions.empty()) {
    throw std::invalid_argument("mine_cooccurrence: no partitions");
  }
  if (!(min_support > 0.0 && min_support <= 1.0)) {
    throw std::invalid_argument("mine_cooccurrence: min_support must lie in (0, 1]");
  }
  std::map<CountryId, int> item_of;
  for (const auto& p : partitions) {
    for (const auto& g : p.groups) {
      for (const auto& c : g) item_of.emplace(c, 0);
    }
  }
  std::vector<CountryId> items;
  for (auto& [c, id] : item_of) {
    id = static_cast<int>(items.size());
    items.push_back(c);
  }

  using Itemset = std::vector<int>;
  std::vector<Itemset> transactions;
  for (const auto& p : partitions) {
    for (const auto& g : p.groups) {
      if (g.size() < 2) continue;
      Itemset t;
      for (const auto& c : g) t.push_back(item_of.at(c));
      std::sort(t.begin(), t.end());
      transactions.push_back(std::move(t));
    }
  }
  std::vector<ItemsetSupport> result;
  if (transactions.empty()) {
    return result;
  }
  const double total = static_cast<double>(transactions.size());
  const auto frequent = [&](std::size_t count) { return static_cast<double>(count) / total >= min_support; };

  std::map<Itemset, std::size_t> level;
  {
    std::map<Itemset, std::size_t> counts;
    for (const auto& t : transactions) {
      for (int item : t) ++counts[{item}];
    }
    for (auto& [set, count] : counts) {
      if (frequent(count)) level.emplace(set, count);
    }
  }

  while (!level.empty()) {
    // Join step: sets sharing all but their last item.
    std::vector<Itemset> previous;
    for (const auto& [set, _] : level) previous.push_back(set);
    std::vector<Itemset> candidates;
    for (std::size_t a = 0; a < previous.size(); ++a) {
      for (std::size_t b = a + 1; b < previous.size(); ++b) {
        if (!std::equal(previous[a].begin(), previous[a].end() - 1, previous[b].begin())) break;
        Itemset joined = previous[a];
        joined.push_back(previous[b].back());
        // Prune: every (k-1)-subset must be frequent.
        bool keep = true;
        for (std::size_t drop = 0; keep && drop + 2 < joined.size(); ++drop) {
          Itemset subset;
          for (std::size_t i = 0; i < joined.size(); ++i) {
            if (i != drop) subset.push_back(joined[i]);
          }
          keep = level.contains(subset);
        }
        if (keep) candidates.push_back(std::move(joined));
      }
    }
    std::map<Itemset, std::size_t> next;
    for (const auto& candidate : candidates) {
      std::size_t count = 0;
      for (const auto& t : transactions) {
        count += std::includes(t.begin(), t.end(), candidate.begin(), candidate.end()) ? 1 : 0;
      }
      if (frequent(count)) next.emplace(candidate, count);
    }
    for (const auto& [set, count] : next) {
      ItemsetSupport s;
      for (int item : set) s.countries.push_back(items[static_cast<std::size_t>(item)]);
      s.count = count;
      s.relative_support = static_cast<double>(count) / total;
      result.push_back(std::move(s));
    }
    level = std::move(next);
  }

  std::sort(result.begin(), result.end(), [](const ItemsetSupport& a, const ItemsetSupport& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.countries < b.countries;
  });
  return result;
}

// ---------------------------------------------------------------------------
// Success vs community

PlaceTable derive_places(const VoteTable& votes) {
  std::map<int, std::map<CountryId, int>> totals;
  for (int year : votes.years()) {
    for (const auto& c : votes.contest_recipients(year, Stage::Final)) totals[year][c] = 0;
  }
  for (const auto& r : votes.records()) {
    if (r.stage == Stage::Final && r.source == Source::Combined) totals[r.year][r.to] += r.points;
  }
  PlaceTable places;
  for (const auto& [year, by_country] : totals) {
    std::vector<std::pair<CountryId, int>> order(by_country.begin(), by_country.end());
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    for (std::size_t i = 0; i < order.size(); ++i) {
      places[{year, order[i].first}] = static_cast<int>(i + 1);
    }
  }
  return places;
}

std::vector<SuccessRow> success_aggregate(const CommunityPartition& partition, const BiasNetwork& net,
                                          const VoteTable& votes, const PlaceTable& places) {
  const auto& window = partition.id.window;
  std::map<CountryId, std::size_t> community_of;
  for (std::size_t cid = 0; cid < partition.groups.size(); ++cid) {
    for (const auto& c : partition.groups[cid]) community_of.emplace(c, cid);
  }
  const auto same_community = [&](const CountryId& a, const CountryId& b) {
    const auto ia = community_of.find(a);
    const auto ib = community_of.find(b);
    return ia != community_of.end() && ib != community_of.end() && ia->second == ib->second;
  };

  std::map<CountryId, int> total;
  std::map<CountryId, int> from_community;
  const auto& records = votes.records();  // sorted by year first
  auto it = std::lower_bound(records.begin(), records.end(), window.start_year,
                             [](const VoteRecord& r, int year) { return r.year < year; });
  for (; it != records.end() && it->year <= window.end_year; ++it) {
    const auto& r = *it;
    if (r.source != Source::Combined || r.stage != Stage::Final || !community_of.contains(r.to)) {
      continue;
    }
    total[r.to] += r.points;
    if (same_community(r.from, r.to)) from_community[r.to] += r.points;
  }

  std::map<CountryId, std::set<CountryId>> linked;
  for (const auto& e : net.edges()) {
    if (same_community(e.u, e.v)) {
      linked[e.u].insert(e.v);
      linked[e.v].insert(e.u);
    }
  }

  std::vector<SuccessRow> rows;
  for (std::size_t cid = 0; cid < partition.groups.size(); ++cid) {
    const auto& group = partition.groups[cid];
    for (const auto& country : group) {
      SuccessRow row;
      row.id = partition.id;
      row.country = country;
      row.community_id = cid;
      row.community_size = group.size();
      if (auto l = linked.find(country); l != linked.end()) row.degree_in_community = l->second.size();
      if (auto t = total.find(country); t != total.end()) row.total_points = t->second;
      if (auto f = from_community.find(country); f != from_community.end()) {
        row.points_from_community = f->second;
      }
      row.pct_from_community = row.total_points > 0
                                   ? static_cast<double>(row.points_from_community) / row.total_points
                                   : 0.0;
      double place_sum = 0.0;
      for (int year = window.start_year; year <= window.end_year; ++year) {
        if (auto p = places.find({year, country}); p != places.end()) {
          place_sum += p->second;
          ++row.years_placed;
        }
      }
      row.final_place = row.years_placed ? place_sum / static_cast<double>(row.years_placed) : 0.0;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<SuccessSummary> summarize_success(std::span<const SuccessRow> rows) {
  static const char* const kMetrics[] = {"pct_from_community", "points_from_community", "total_points",
                                         "final_place", "points_per_degree"};
  std::map<std::tuple<int, NetworkKind, std::string>, std::vector<double>> samples;
  for (const auto& r : rows) {
    const int period = r.id.window.length();
    samples[{period, r.id.kind, kMetrics[0]}].push_back(r.pct_from_community);
    samples[{period, r.id.kind, kMetrics[1]}].push_back(r.points_from_community);
    samples[{period, r.id.kind, kMetrics[2]}].push_back(r.total_points);
    if (r.years_placed > 0) {
      samples[{period, r.id.kind, kMetrics[3]}].push_back(r.final_place);
    }
    if (r.degree_in_community > 0) {
      samples[{period, r.id.kind, kMetrics[4]}].push_back(static_cast<double>(r.total_points) /
                                                          static_cast<double>(r.degree_in_community));
    }
  }
  std::vector<SuccessSummary> out;
  for (const auto& [key, values] : samples) {
    SuccessSummary s;
    std::tie(s.period, s.kind, s.metric) = key;
    s.rows = values.size();
    s.average = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (values.size() > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - s.average) * (v - s.average);
      s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace votebias
