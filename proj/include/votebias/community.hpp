#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "votebias/corpus.hpp"
#include "votebias/netbuild.hpp"

namespace votebias {

using Group = std::vector<CountryId>;

/// Disjoint groups covering a network's nodes. Members are sorted by name and
/// groups are ordered by their first member.
struct CommunityPartition {
  NetworkId id;
  std::vector<Group> groups;
  double modularity = 0.0;
};

/// Weighted modularity of `groups` on `net`.
///   undirected: Q = 1/(2m) sum_ij [A_ij - k_i k_j / 2m] d(c_i, c_j)
///   directed:   Q = 1/m    sum_ij [A_ij - kout_i kin_j / m] d(c_i, c_j)
/// with m the total edge weight. Nodes missing from `groups` count as
/// singletons. Returns 0 for an empty network.
double modularity(const BiasNetwork& net, std::span<const Group> groups);

/// Louvain on an undirected network: node-move passes to a local optimum,
/// then aggregation, repeated until no node moves. Visit order is shuffled
/// from `seed`; among equal-gain moves the community with the lowest label
/// wins, labels following canonical node order. Staying put wins ties.
CommunityPartition louvain(const BiasNetwork& net, std::uint64_t seed);

struct EigenOptions {
  double tolerance = 1e-9;
  int max_iterations = 10000;
};

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;  // unit 2-norm
  int iterations = 0;
  bool converged = false;
};

/// Largest algebraic eigenpair of a dense symmetric matrix by shifted power
/// iteration. The shift is the largest absolute row sum, which makes the
/// shifted matrix positive semidefinite; iteration stops when successive unit
/// vectors differ by less than `tolerance` in max-norm.
EigenPair leading_eigenpair(const std::vector<std::vector<double>>& matrix, const EigenOptions& options = {});

/// Recursive spectral bisection on a directed network using the symmetrized
/// directed modularity matrix (B + B^T) / 2, B_ij = A_ij - kout_i kin_j / m.
/// A group is left whole when its leading eigenvalue is not positive, the
/// eigenvector does not split it, or the split does not raise modularity.
CommunityPartition leading_eigenvector(const BiasNetwork& net, const EigenOptions& options = {});

struct ItemsetSupport {
  std::vector<CountryId> countries;  // sorted, size >= 2
  double relative_support = 0.0;
  std::size_t count = 0;

  bool operator==(const ItemsetSupport&) const = default;
};

/// Apriori over communities. Each non-singleton group of every partition is
/// one transaction; support = containing transactions / all transactions.
/// Returns every set of two or more countries with support >= min_support,
/// by descending support then lexicographic country order. Throws
/// std::invalid_argument for an empty partition list or min_support outside
/// (0, 1].
std::vector<ItemsetSupport> mine_cooccurrence(std::span<const CommunityPartition> partitions,
                                              double min_support);

/// Final place per (year, country).
using PlaceTable = std::map<std::pair<int, CountryId>, int>;

/// Places from final combined totals: descending points, ties by name.
PlaceTable derive_places(const VoteTable& votes);

struct SuccessRow {
  NetworkId id;
  CountryId country;
  std::size_t community_id = 0;
  std::size_t community_size = 0;
  std::size_t degree_in_community = 0;
  int total_points = 0;
  int points_from_community = 0;
  double pct_from_community = 0.0;
  double final_place = 0.0;  ///< mean over window years with a known place, 0 if none
  std::size_t years_placed = 0;
};

/// Per-country success within the partition's window. Points are final-stage
/// combined points.
std::vector<SuccessRow> success_aggregate(const CommunityPartition& partition, const BiasNetwork& net,
                                          const VoteTable& votes, const PlaceTable& places);

struct SuccessSummary {
  int period = 0;
  NetworkKind kind = NetworkKind::UndirectedBias;
  std::string metric;
  double average = 0.0;
  double stddev = 0.0;  ///< sample standard deviation, 0 for fewer than 2 rows
  std::size_t rows = 0;
};

/// Mean and sample stddev per (period length, kind) of pct_from_community,
/// points_from_community, total_points, final_place and points_per_degree
/// (the last over rows with a positive degree).
std::vector<SuccessSummary> summarize_success(std::span<const SuccessRow> rows);

}  // namespace votebias
