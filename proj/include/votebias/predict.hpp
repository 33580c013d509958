#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "votebias/corpus.hpp"
#include "votebias/netbuild.hpp"

namespace votebias {

enum class RankingSource { Odds, Model, Blend, Actual };

std::string_view to_string(RankingSource source);

/// Finishing order of one contest, rank 1 first.
struct Ranking {
  int year = 0;
  std::vector<CountryId> order;
  RankingSource source = RankingSource::Actual;

  /// 1-based rank per country.
  std::map<CountryId, int> ranks() const;
  std::set<CountryId> members() const { return {order.begin(), order.end()}; }

  bool operator==(const Ranking&) const = default;
};

/// Favourite first (ascending decimal odds), ties by name. With `finalists`
/// the ranking is restricted to them, and finalists without odds follow in
/// name order. Throws std::out_of_range when the year has no odds.
Ranking odds_ranking(const OddsTable& odds, int year,
                     const std::optional<std::set<CountryId>>& finalists = std::nullopt);

/// Final-night combined totals, descending, ties by name. Empty when the year
/// has no final.
Ranking actual_ranking(const VoteTable& votes, int year);

inline constexpr int kDefaultLookbackYears = 20;

/// Historical-bias score: for each of the year's final voters v,
/// score(c) += mean points v gave c over the lookback years both took part
/// in, plus the weight of any bias edge v -> c or {v, c} in `networks`.
/// Finalists sorted by descending score; countries without any history come
/// after others with the same score; then by name. Throws
/// std::invalid_argument when no year before `year` lies in the corpus.
Ranking model_ranking(const VoteTable& votes, std::span<const BiasNetwork> networks, int year,
                      int lookback_years = kDefaultLookbackYears);

/// Rank-space blend: score = beta * -model_rank + (1 - beta) * -odds_rank,
/// descending, ties by odds rank then name. Throws std::invalid_argument
/// when the rankings cover different countries or beta is outside [0, 1].
Ranking blend(const Ranking& model, const Ranking& odds, double beta);

inline constexpr int kRecallCutoffs[] = {3, 5, 10};

/// Metrics of one predicted ranking against the actual one.
struct YearEvaluation {
  int year = 0;
  double mae_full = 0.0;
  double mae_top10 = 0.0;
  std::map<int, double> recall_at;  ///< n -> |top-n(pred) & top-n(actual)| / min(n, size)

  bool operator==(const YearEvaluation&) const = default;
};

/// Throws std::invalid_argument when the rankings cover different countries.
YearEvaluation evaluate(const Ranking& predicted, const Ranking& actual);

struct EvaluationReport {
  double mae_full = 0.0;
  double mae_top10 = 0.0;
  std::map<int, double> recall_at;
  std::vector<int> years;

  bool operator==(const EvaluationReport&) const = default;
};

/// Unweighted mean over years, in year order.
EvaluationReport average_report(std::span<const YearEvaluation> per_year);

/// Odds-only baseline. Years without odds or without a final are skipped and
/// reported in `warnings` when given.
EvaluationReport evaluate_baseline(const OddsTable& odds, const VoteTable& votes, std::span<const int> years,
                                   std::vector<std::string>* warnings = nullptr);

}  // namespace votebias
