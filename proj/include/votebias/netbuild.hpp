#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "votebias/corpus.hpp"
#include "votebias/scheme.hpp"

namespace votebias {

enum class NetworkKind { DirectedBias, UndirectedBias, UndirectedNeglect };
enum class Method { Gatherer, Average };

std::string_view to_string(NetworkKind kind);
std::string_view to_string(Method method);
NetworkKind parse_network_kind(std::string_view text);
Method parse_method(std::string_view text);

inline constexpr NetworkKind kAllKinds[] = {NetworkKind::DirectedBias, NetworkKind::UndirectedBias,
                                            NetworkKind::UndirectedNeglect};
inline constexpr Method kAllMethods[] = {Method::Gatherer, Method::Average};

struct NetworkId {
  YearWindow window;
  NetworkKind kind = NetworkKind::UndirectedBias;
  Method method = Method::Gatherer;

  auto operator<=>(const NetworkId&) const = default;
  bool operator==(const NetworkId&) const = default;
};

struct Edge {
  CountryId u;
  CountryId v;
  double weight = 0.0;

  bool operator==(const Edge&) const = default;
};

/// Weighted bias or neglect graph for one window. Nodes are the endpoints of
/// the edges. Edges are kept sorted by (u, v); undirected edges are stored
/// once with u < v.
class BiasNetwork {
 public:
  BiasNetwork() = default;
  explicit BiasNetwork(NetworkId id) : id_(id) {}

  const NetworkId& id() const noexcept { return id_; }
  NetworkKind kind() const noexcept { return id_.kind; }
  Method method() const noexcept { return id_.method; }
  const YearWindow& window() const noexcept { return id_.window; }
  bool directed() const noexcept { return id_.kind == NetworkKind::DirectedBias; }

  /// Throws std::invalid_argument on self-loops, non-positive weights or a
  /// repeated edge.
  void add_edge(const CountryId& u, const CountryId& v, double weight);

  const std::set<CountryId>& nodes() const noexcept { return nodes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  bool empty() const noexcept { return edges_.empty(); }

  std::optional<double> weight(const CountryId& u, const CountryId& v) const;

  bool operator==(const BiasNetwork&) const = default;

 private:
  NetworkId id_;
  std::set<CountryId> nodes_;
  std::vector<Edge> edges_;
};

struct GathererNetworks {
  BiasNetwork directed;
  BiasNetwork undirected;
  BiasNetwork neglect;
};

struct AverageNetworks {
  BiasNetwork directed;
  BiasNetwork undirected;
};

/// Which Gatherer edges a pair earns, given c1 -> c2 points `pa1`, c2 -> c1
/// points `pa2` and whether the pair lies within the neglect hop limit.
struct GathererVerdict {
  std::optional<double> directed_12;  ///< one-way bias c1 -> c2
  std::optional<double> directed_21;  ///< one-way bias c2 -> c1
  std::optional<double> mutual;       ///< undirected bias
  std::optional<double> neglect;      ///< undirected neglect
};

GathererVerdict classify_gatherer(double pa1, double pa2, const Thresholds& thresholds, bool within_hops);

inline constexpr int kNeglectMaxHops = 3;

struct GathererOptions {
  StageSet stages = default_stages();
  int neglect_max_hops = kNeglectMaxHops;
};

/// Monte-Carlo null model networks. A pair qualifies when the two countries
/// took part together in more than a fifth of the window's years; its
/// thresholds come from `provider` for the contests both entered.
GathererNetworks build_gatherer(const VoteTable& votes, const YearWindow& window,
                                ThresholdProvider& provider, const AdjacencyMap& adj,
                                const GathererOptions& options = {});

/// Every contest (within the window and stage filter) both countries entered.
/// Field size is the contest's recipient count minus one, at least 1.
std::vector<ContestSlot> co_participation_slots(const VoteTable& votes, const YearWindow& window,
                                                const CountryId& a, const CountryId& b,
                                                const StageSet& stages = default_stages());

inline constexpr double kDefaultOvershootFraction = 0.75;

/// Networks from yearly above-mean awards (no neglect network).
AverageNetworks build_average(const VoteTable& votes, const YearWindow& window,
                              double overshoot_fraction = kDefaultOvershootFraction,
                              const StageSet& stages = default_stages());

/// Drops directed edges whose weight is below the mean edge weight of `net`.
/// Edges at exactly the mean survive.
BiasNetwork prune_below_mean(const BiasNetwork& net);

/// Every contiguous window of each length inside [first_year, last_year], in
/// the order of `lengths` and chronologically within one length. Lengths
/// that are non-positive or longer than the span are skipped and reported in
/// `warnings` when given.
std::vector<YearWindow> enumerate_windows(int first_year, int last_year, std::span<const int> lengths,
                                          std::vector<std::string>* warnings = nullptr);

inline std::size_t network_inventory_size(std::size_t windows, std::size_t methods, std::size_t kinds) {
  return windows * methods * kinds;
}

/// Window lengths analysed by default.
inline const std::vector<int> kDefaultWindowLengths{1, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 60, 63};

}  // namespace votebias
