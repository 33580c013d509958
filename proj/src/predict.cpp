#include "votebias/predict.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace votebias {

std::string_view to_string(RankingSource source) {
  switch (source) {
    case RankingSource::Odds:
      return "odds";
    case RankingSource::Model:
      return "model";
    case RankingSource::Blend:
      return "blend";
    case RankingSource::Actual:
      return "actual";
  }
  return "actual";
}

std::map<CountryId, int> Ranking::ranks() const {
  std::map<CountryId, int> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.emplace(order[i], static_cast<int>(i + 1));
  }
  return out;
}

Ranking odds_ranking(const OddsTable& odds, int year, const std::optional<std::set<CountryId>>& finalists) {
  auto entries = odds.for_year(year);
  if (entries.empty()) {
    throw std::out_of_range("no odds for " + std::to_string(year));
  }
  if (finalists) {
    std::erase_if(entries, [&](const OddsEntry& e) { return !finalists->contains(e.country); });
  }
  std::sort(entries.begin(), entries.end(), [](const OddsEntry& a, const OddsEntry& b) {
    if (a.decimal_odds != b.decimal_odds) return a.decimal_odds < b.decimal_odds;
    return a.country < b.country;
  });
  Ranking ranking{year, {}, RankingSource::Odds};
  for (const auto& e : entries) ranking.order.push_back(e.country);
  if (finalists) {
    const std::set<CountryId> priced = ranking.members();
    for (const auto& c : *finalists) {
      if (!priced.contains(c)) ranking.order.push_back(c);
    }
  }
  return ranking;
}

Ranking actual_ranking(const VoteTable& votes, int year) {
  std::map<CountryId, int> totals;
  for (const auto& c : votes.contest_recipients(year, Stage::Final)) totals[c] = 0;
  for (const auto& r : votes.records()) {
    if (r.year == year && r.stage == Stage::Final && r.source == Source::Combined) {
      totals[r.to] += r.points;
    }
  }
  std::vector<std::pair<CountryId, int>> order(totals.begin(), totals.end());
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  Ranking ranking{year, {}, RankingSource::Actual};
  for (auto& [c, _] : order) ranking.order.push_back(c);
  return ranking;
}

Ranking model_ranking(const VoteTable& votes, std::span<const BiasNetwork> networks, int year,
                      int lookback_years) {
  if (lookback_years < 1) {
    throw std::invalid_argument("lookback must be at least one year");
  }
  const auto years = votes.years();
  if (years.empty() || *years.begin() >= year) {
    throw std::invalid_argument("model_ranking needs at least one year of history before " +
                                std::to_string(year));
  }
  const auto& finalists = votes.contest_recipients(year, Stage::Final);
  std::set<CountryId> voters;
  for (const auto& r : votes.records()) {
    if (r.year == year && r.stage == Stage::Final) voters.insert(r.from);
  }

  const int first = year - lookback_years;
  // given[(v, c)] = (points, years both took part)
  std::map<std::pair<CountryId, CountryId>, int> given;
  for (const auto& r : votes.records()) {
    if (r.year >= first && r.year < year && r.stage == Stage::Final && r.source == Source::Combined) {
      given[{r.from, r.to}] += r.points;
    }
  }
  const auto together = [&](const CountryId& a, const CountryId& b) {
    int count = 0;
    for (int y = first; y < year; ++y) {
      const auto& p = votes.contest_participants(y, Stage::Final);
      count += (p.contains(a) && p.contains(b)) ? 1 : 0;
    }
    return count;
  };

  struct Scored {
    CountryId country;
    double score = 0.0;
    bool cold = true;
  };
  std::vector<Scored> scored;
  for (const auto& c : finalists) {
    Scored s{c, 0.0, true};
    for (const auto& v : voters) {
      if (v == c) continue;
      if (const int n = together(v, c); n > 0) {
        s.cold = false;
        const auto it = given.find({v, c});
        s.score += (it == given.end() ? 0.0 : it->second) / static_cast<double>(n);
      }
      for (const auto& net : networks) {
        if (net.kind() == NetworkKind::UndirectedNeglect) continue;
        if (auto w = net.weight(v, c)) s.score += *w;
      }
    }
    scored.push_back(std::move(s));
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.cold != b.cold) return !a.cold;
    return a.country < b.country;
  });
  Ranking ranking{year, {}, RankingSource::Model};
  for (auto& s : scored) ranking.order.push_back(s.country);
  return ranking;
}

Ranking blend(const Ranking& model, const Ranking& odds, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("beta must lie in [0, 1]");
  }
  if (model.members() != odds.members() || model.order.size() != odds.order.size()) {
    throw std::invalid_argument("blend: rankings cover different countries");
  }
  const auto model_rank = model.ranks();
  const auto odds_rank = odds.ranks();
  struct Scored {
    CountryId country;
    double score;
    int odds_rank;
  };
  std::vector<Scored> scored;
  for (const auto& c : odds.order) {
    const int mr = model_rank.at(c);
    const int orank = odds_rank.at(c);
    scored.push_back({c, beta * -mr + (1.0 - beta) * -orank, orank});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.odds_rank != b.odds_rank) return a.odds_rank < b.odds_rank;
    return a.country < b.country;
  });
  Ranking out{odds.year, {}, RankingSource::Blend};
  for (auto& s : scored) out.order.push_back(s.country);
  return out;
}

YearEvaluation evaluate(const Ranking& predicted, const Ranking& actual) {
  if (predicted.members() != actual.members() || predicted.order.size() != actual.order.size()) {
    throw std::invalid_argument("evaluate: rankings cover different countries");
  }
  YearEvaluation out;
  out.year = actual.year;
  const std::size_t n = actual.order.size();
  for (int cutoff : kRecallCutoffs) out.recall_at[cutoff] = 0.0;
  if (n == 0) {
    return out;
  }
  const auto predicted_rank = predicted.ranks();

  double full = 0.0;
  double top = 0.0;
  std::size_t top_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double err = std::abs(predicted_rank.at(actual.order[i]) - static_cast<int>(i + 1));
    full += err;
    if (i < 10) {
      top += err;
      ++top_count;
    }
  }
  out.mae_full = full / static_cast<double>(n);
  out.mae_top10 = top / static_cast<double>(top_count);

  for (int cutoff : kRecallCutoffs) {
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(cutoff), n);
    const std::set<CountryId> top_actual(actual.order.begin(), actual.order.begin() + static_cast<std::ptrdiff_t>(k));
    std::size_t hits = 0;
    for (std::size_t i = 0; i < k; ++i) hits += top_actual.contains(predicted.order[i]) ? 1 : 0;
    out.recall_at[cutoff] = static_cast<double>(hits) / static_cast<double>(k);
  }
  return out;
}

EvaluationReport average_report(std::span<const YearEvaluation> per_year) {
  EvaluationReport report;
  for (int cutoff : kRecallCutoffs) report.recall_at[cutoff] = 0.0;
  if (per_year.empty()) {
    return report;
  }
  for (const auto& e : per_year) {
    report.mae_full += e.mae_full;
    report.mae_top10 += e.mae_top10;
    for (int cutoff : kRecallCutoffs) report.recall_at[cutoff] += e.recall_at.at(cutoff);
    report.years.push_back(e.year);
  }
  const double n = static_cast<double>(per_year.size());
  report.mae_full /= n;
  report.mae_top10 /= n;
  for (auto& [_, v] : report.recall_at) v /= n;
  return report;
}

EvaluationReport evaluate_baseline(const OddsTable& odds, const VoteTable& votes, std::span<const int> years,
                                   std::vector<std::string>* warnings) {
  std::vector<YearEvaluation> per_year;
  for (int year : years) {
    const auto actual = actual_ranking(votes, year);
    if (actual.order.empty()) {
      if (warnings) warnings->push_back("no final results for " + std::to_string(year) + ", skipped");
      continue;
    }
    if (!odds.has_year(year)) {
      if (warnings) warnings->push_back("no odds for " + std::to_string(year) + ", skipped");
      continue;
    }
    const auto predicted = odds_ranking(odds, year, actual.members());
    per_year.push_back(evaluate(predicted, actual));
  }
  return average_report(per_year);
}

}  // namespace votebias
