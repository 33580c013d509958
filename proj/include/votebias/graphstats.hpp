#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "votebias/netbuild.hpp"

namespace votebias {

/// Descriptive statistics of one network. For directed networks
/// avg_degree = m / n (mean out-degree, which equals mean in-degree);
/// undirected networks use 2m / n. Clustering is the mean unweighted local
/// clustering coefficient of the undirected projection, with nodes of degree
/// below 2 contributing 0.
struct StatsRow {
  NetworkId id;
  std::size_t n_nodes = 0;
  std::size_t n_edges = 0;
  double avg_degree = 0.0;
  double avg_clustering = 0.0;

  bool operator==(const StatsRow&) const = default;
};

StatsRow stats(const BiasNetwork& net);

/// One row per network ordered by (length, kind, method, end year); the sort
/// is stable so identical identities keep their input order.
std::vector<StatsRow> stats_series(std::span<const BiasNetwork> networks);

/// `end_year,length,kind,method,n_nodes,n_edges,avg_degree,avg_clustering`
void write_stats_csv(std::span<const StatsRow> rows, const std::filesystem::path& path);

}  // namespace votebias
