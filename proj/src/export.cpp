#include "votebias/export.hpp"

#include <fstream>
#include <map>
#include <stdexcept>

#include "votebias/csv.hpp"

namespace votebias {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    switch (ch) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '\'':
        out += "&apos;";
        break;
      default:
        out += ch;
    }
  }
  return out;
}

std::string join_names(std::span<const CountryId> countries) {
  std::string out;
  for (const auto& c : countries) {
    if (!out.empty()) out += '|';
    out += c.name();
  }
  return out;
}

}  // namespace

void write_edges_csv(std::span<const BiasNetwork> networks, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "u,v,weight,kind,method,start_year,end_year\n";
  for (const auto& net : networks) {
    const auto kind = to_string(net.kind());
    const auto method = to_string(net.method());
    for (const auto& e : net.edges()) {
      out << csv::escape(e.u.name()) << ',' << csv::escape(e.v.name()) << ',' << csv::format_double(e.weight)
          << ',' << kind << ',' << method << ',' << net.window().start_year << ',' << net.window().end_year
          << '\n';
    }
  }
  finish(out, path);
}

std::vector<BiasNetwork> read_edges_csv(const std::filesystem::path& path, const AliasMap& aliases) {
  const std::string file = path.string();
  const auto rows = csv::read(path, {"u", "v", "weight", "kind", "method", "start_year", "end_year"});
  std::vector<BiasNetwork> out;
  std::map<NetworkId, std::size_t> slot;
  for (const auto& row : rows) {
    const auto& f = row.fields;
    try {
      const NetworkId id{YearWindow(csv::parse_int(f[5], file, row.line), csv::parse_int(f[6], file, row.line)),
                         parse_network_kind(f[3]), parse_method(f[4])};
      auto [it, inserted] = slot.emplace(id, out.size());
      if (inserted) out.emplace_back(id);
      out[it->second].add_edge(aliases.canonicalize(f[0]), aliases.canonicalize(f[1]),
                               csv::parse_double(f[2], file, row.line));
    } catch (const InputError&) {
      throw;
    } catch (const std::exception& e) {
      throw InputError(file, row.line, e.what());
    }
  }
  return out;
}

void write_gexf(const BiasNetwork& net, const std::filesystem::path& path) {
  auto out = open_out(path);
  const auto& window = net.window();
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<gexf xmlns=\"http://gexf.net/1.2\" version=\"1.2\">\n"
      << "  <meta>\n"
      << "    <description>" << to_string(net.kind()) << ' ' << to_string(net.method()) << ' '
      << window.start_year << '-' << window.end_year << "</description>\n"
      << "  </meta>\n"
      << "  <graph mode=\"static\" defaultedgetype=\"" << (net.directed() ? "directed" : "undirected") << "\">\n"
      << "    <attributes class=\"edge\">\n"
      << "      <attribute id=\"0\" title=\"weight\" type=\"double\"/>\n"
      << "    </attributes>\n"
      << "    <nodes>\n";
  std::map<CountryId, std::size_t> ids;
  for (const auto& node : net.nodes()) {
    const auto id = ids.size();
    ids.emplace(node, id);
    out << "      <node id=\"" << id << "\" label=\"" << xml_escape(node.name()) << "\"/>\n";
  }
  out << "    </nodes>\n"
      << "    <edges>\n";
  std::size_t edge_id = 0;
  for (const auto& e : net.edges()) {
    const auto w = csv::format_double(e.weight);
    out << "      <edge id=\"" << edge_id++ << "\" source=\"" << ids.at(e.u) << "\" target=\"" << ids.at(e.v)
        << "\" weight=\"" << w << "\">\n"
        << "        <attvalues><attvalue for=\"0\" value=\"" << w << "\"/></attvalues>\n"
        << "      </edge>\n";
  }
  out << "    </edges>\n"
      << "  </graph>\n"
      << "</gexf>\n";
  finish(out, path);
}

void write_partitions_csv(std::span<const CommunityPartition> partitions, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "end_year,length,kind,method,community_id,country\n";
  for (const auto& p : partitions) {
    for (std::size_t g = 0; g < p.groups.size(); ++g) {
      for (const auto& c : p.groups[g]) {
        out << p.id.window.end_year << ',' << p.id.window.length() << ',' << to_string(p.id.kind) << ','
            << to_string(p.id.method) << ',' << g << ',' << csv::escape(c.name()) << '\n';
      }
    }
  }
  finish(out, path);
}

void write_itemsets_csv(std::span<const ItemsetSupport> itemsets, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "rank,countries,relative_support\n";
  for (std::size_t i = 0; i < itemsets.size(); ++i) {
    out << i + 1 << ',' << csv::escape(join_names(itemsets[i].countries)) << ','
        << csv::format_double(itemsets[i].relative_support) << '\n';
  }
  finish(out, path);
}

void write_aggregates_csv(std::span<const SuccessSummary> summaries, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "period,kind,metric,average,stddev\n";
  for (const auto& s : summaries) {
    out << s.period << ',' << to_string(s.kind) << ',' << s.metric << ',' << csv::format_double(s.average) << ','
        << csv::format_double(s.stddev) << '\n';
  }
  finish(out, path);
}

void write_success_csv(std::span<const SuccessRow> rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "end_year,length,kind,method,country,community_id,community_size,degree_in_community,"
         "total_points,points_from_community,pct_from_community,final_place\n";
  for (const auto& r : rows) {
    out << r.id.window.end_year << ',' << r.id.window.length() << ',' << to_string(r.id.kind) << ','
        << to_string(r.id.method) << ',' << csv::escape(r.country.name()) << ',' << r.community_id << ','
        << r.community_size << ',' << r.degree_in_community << ',' << r.total_points << ','
        << r.points_from_community << ',' << csv::format_double(r.pct_from_community) << ','
        << csv::format_double(r.final_place) << '\n';
  }
  finish(out, path);
}

std::vector<ReportRow> report_rows(const EvaluationReport& report, std::optional<double> beta) {
  std::vector<ReportRow> rows{
      {"mae_full", beta, report.mae_full},
      {"mae_top10", beta, report.mae_top10},
  };
  for (int cutoff : kRecallCutoffs) {
    rows.push_back({"recall@" + std::to_string(cutoff), beta, report.recall_at.at(cutoff)});
  }
  return rows;
}

void write_report_csv(std::span<const ReportRow> rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "metric,beta,value\n";
  for (const auto& r : rows) {
    out << r.metric << ',' << (r.beta ? csv::format_double(*r.beta) : std::string{}) << ','
        << csv::format_double(r.value) << '\n';
  }
  finish(out, path);
}

}  // namespace votebias
