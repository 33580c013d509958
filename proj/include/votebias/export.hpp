#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "votebias/community.hpp"
#include "votebias/netbuild.hpp"
#include "votebias/predict.hpp"

namespace votebias {

/// `u,v,weight,kind,method,start_year,end_year`, networks in the given order.
void write_edges_csv(std::span<const BiasNetwork> networks, const std::filesystem::path& path);

/// Reads an edge list back into networks, one per distinct identity, in
/// order of first appearance. Networks without edges cannot be recovered.
std::vector<BiasNetwork> read_edges_csv(const std::filesystem::path& path, const AliasMap& aliases);

/// GEXF 1.2 document with a `weight` edge attribute.
void write_gexf(const BiasNetwork& net, const std::filesystem::path& path);

/// `end_year,length,kind,method,community_id,country`
void write_partitions_csv(std::span<const CommunityPartition> partitions, const std::filesystem::path& path);

/// `rank,countries,relative_support` with countries joined by '|'.
void write_itemsets_csv(std::span<const ItemsetSupport> itemsets, const std::filesystem::path& path);

/// `period,kind,metric,average,stddev`
void write_aggregates_csv(std::span<const SuccessSummary> summaries, const std::filesystem::path& path);

/// Per-row success table backing the aggregates.
void write_success_csv(std::span<const SuccessRow> rows, const std::filesystem::path& path);

struct ReportRow {
  std::string metric;
  std::optional<double> beta;  ///< empty for the odds-only baseline
  double value = 0.0;
};

/// The five metrics of one report, labelled with `beta`.
std::vector<ReportRow> report_rows(const EvaluationReport& report, std::optional<double> beta);

/// `metric,beta,value`; a baseline row has an empty beta field.
void write_report_csv(std::span<const ReportRow> rows, const std::filesystem::path& path);

}  // namespace votebias
