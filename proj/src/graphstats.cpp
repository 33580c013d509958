#include "votebias/graphstats.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <tuple>

#include "votebias/csv.hpp"

namespace votebias {

StatsRow stats(const BiasNetwork& net) {
  StatsRow row;
  row.id = net.id();
  row.n_nodes = net.nodes().size();
  row.n_edges = net.edges().size();
  if (row.n_nodes == 0) {
    return row;
  }
  const double n = static_cast<double>(row.n_nodes);
  const double m = static_cast<double>(row.n_edges);
  row.avg_degree = net.directed() ? m / n : 2.0 * m / n;

  std::map<CountryId, std::set<CountryId>> adjacent;
  for (const auto& e : net.edges()) {
    adjacent[e.u].insert(e.v);
    adjacent[e.v].insert(e.u);
  }
  double total = 0.0;
  for (const auto& [node, neighbours] : adjacent) {
    const std::size_t k = neighbours.size();
    if (k < 2) continue;
    std::size_t links = 0;
    for (auto a = neighbours.begin(); a != neighbours.end(); ++a) {
      const auto& around_a = adjacent.at(*a);
      for (auto b = std::next(a); b != neighbours.end(); ++b) {
        links += around_a.contains(*b) ? 1 : 0;
      }
    }
    total += 2.0 * static_cast<double>(links) / static_cast<double>(k * (k - 1));
  }
  row.avg_clustering = total / n;
  return row;
}

std::vector<StatsRow> stats_series(std::span<const BiasNetwork> networks) {
  std::vector<StatsRow> rows;
  rows.reserve(networks.size());
  for (const auto& net : networks) {
    rows.push_back(stats(net));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const StatsRow& a, const StatsRow& b) {
    return std::tuple(a.id.window.length(), a.id.kind, a.id.method, a.id.window.end_year) <
           std::tuple(b.id.window.length(), b.id.kind, b.id.method, b.id.window.end_year);
  });
  return rows;
}

void write_stats_csv(std::span<const StatsRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InputError(path.string(), 0, "cannot write file");
  }
  out << "end_year,length,kind,method,n_nodes,n_edges,avg_degree,avg_clustering\n";
  for (const auto& r : rows) {
    out << r.id.window.end_year << ',' << r.id.window.length() << ',' << to_string(r.id.kind) << ','
        << to_string(r.id.method) << ',' << r.n_nodes << ',' << r.n_edges << ','
        << csv::format_double(r.avg_degree) << ',' << csv::format_double(r.avg_clustering) << '\n';
  }
}

}  // namespace votebias
