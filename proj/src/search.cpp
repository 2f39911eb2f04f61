#include "nqens/search.hpp"

#include <algorithm>
#include <numeric>

#include "nqens/errors.hpp"
#include "nqens/parallel.hpp"

namespace nqens {

Objective parse_objective(const std::string& name) {
  if (name == "short") return Objective::kShort;
  if (name == "long") return Objective::kLong;
  throw UsageError("unknown objective '" + name + "' (expected short|long)");
}

std::string objective_name(Objective o) {
  return o == Objective::kShort ? "short" : "long";
}

namespace {

double report_f1(const EvalReport& r, AnswerType t) { return r.f1(t); }

std::vector<int> canonical(std::vector<int> subset) {
  std::sort(subset.begin(), subset.end());
  return subset;
}

// Tie-break for equally scoring subsets: lexicographically smaller sorted
// member-id list.
bool id_list_before(const std::vector<std::string>& a,
                    const std::vector<std::string>& b) {
  auto sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return std::lexicographical_compare(sa.begin(), sa.end(), sb.begin(), sb.end());
}

void combinations(int n, int k, std::vector<std::vector<int>>& out) {
  std::vector<int> buf;
  buf.reserve(k);
  auto rec = [&](auto&& self, int offset, int remaining) -> void {
    if (remaining == 0) {
      out.push_back(buf);
      return;
    }
    for (int i = offset; i <= n - remaining; ++i) {
      buf.push_back(i);
      self(self, i + 1, remaining - 1);
      buf.pop_back();
    }
  };
  rec(rec, 0, k);
}

}  // namespace

EnsembleEvaluator::EnsembleEvaluator(const std::vector<ModelRun>& pool,
                                     const CombineSettings& settings,
                                     const CalibratorSet& calibrators,
                                     const GoldSet& gold_train, int threads)
    : gold_train_(&gold_train),
      require_containment_(settings.require_containment),
      threads_(threads) {
  prepared_.reserve(pool.size());
  for (const auto& run : pool) {
    ids_.push_back(run.model_id);
    prepared_.push_back(prepare_run(run, settings, calibrators));
  }
}

PredictionMap EnsembleEvaluator::combine_subset(
    const std::vector<int>& subset) const {
  std::vector<const ModelRun*> members;
  members.reserve(subset.size());
  for (int i : subset) members.push_back(&prepared_.at(static_cast<size_t>(i)));
  return combine_prepared(members, require_containment_);
}

std::vector<std::string> EnsembleEvaluator::member_ids(
    const std::vector<int>& subset) const {
  std::vector<std::string> out;
  out.reserve(subset.size());
  for (int i : subset) out.push_back(ids_.at(static_cast<size_t>(i)));
  return out;
}

const EvalReport& EnsembleEvaluator::report_for(const std::vector<int>& subset) {
  auto key = canonical(subset);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  EvalReport report = evaluate(combine_subset(key), *gold_train_);
  ++evaluations_;
  return cache_.emplace(std::move(key), report).first->second;
}

void EnsembleEvaluator::prefetch(const std::vector<std::vector<int>>& subsets) {
  std::vector<std::vector<int>> missing;
  for (const auto& s : subsets) {
    auto key = canonical(s);
    if (!cache_.count(key)) missing.push_back(std::move(key));
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());

  std::vector<EvalReport> reports(missing.size());
  parallel_for(missing.size(), threads_, [&](std::size_t i) {
    reports[i] = evaluate(combine_subset(missing[i]), *gold_train_);
  });
  for (std::size_t i = 0; i < missing.size(); ++i) {
    cache_.emplace(std::move(missing[i]), reports[i]);
    ++evaluations_;
  }
}

SearchResult seed_ensemble(EnsembleEvaluator& evaluator, int k) {
  if (k < 1) throw UsageError("seed ensemble: k must be >= 1");
  if (evaluator.pool_size() < k) {
    throw UsageError("seed ensemble: " + std::to_string(evaluator.pool_size()) +
                     " runs supplied, need k = " + std::to_string(k));
  }
  std::vector<int> subset(static_cast<size_t>(k));
  std::iota(subset.begin(), subset.end(), 0);

  SearchResult result;
  result.short_members = evaluator.member_ids(subset);
  result.long_members = result.short_members;
  result.train_report = evaluator.report_for(subset);
  result.objective_train_f1 = result.train_report.short_f1;
  return result;
}

std::pair<SearchResult, SearchResult> exhaustive_search(
    EnsembleEvaluator& evaluator, const SearchConfig& cfg) {
  const int n = evaluator.pool_size();
  if (n == 0) throw UsageError("exhaustive search: empty pool");
  if (cfg.k < 1 || cfg.k > n) {
    throw UsageError("exhaustive search: k must be in [1, pool size]");
  }
  if (n > cfg.pool_cap && !cfg.force) {
    throw UsageError("exhaustive search: pool of " + std::to_string(n) +
                     " exceeds cap " + std::to_string(cfg.pool_cap) +
                     " (use --force to override)");
  }

  std::vector<std::vector<int>> subsets;
  if (cfg.exact_size) {
    combinations(n, cfg.k, subsets);
  } else {
    for (int size = 1; size <= cfg.k; ++size) combinations(n, size, subsets);
  }
  evaluator.prefetch(subsets);

  auto pick = [&](AnswerType type) {
    const std::vector<int>* best = nullptr;
    double best_f1 = -1.0;
    std::vector<std::string> best_ids;
    for (const auto& s : subsets) {
      double f1 = report_f1(evaluator.report_for(s), type);
      auto ids = evaluator.member_ids(s);
      if (best == nullptr || f1 > best_f1 ||
          (f1 == best_f1 && id_list_before(ids, best_ids))) {
        best = &s;
        best_f1 = f1;
        best_ids = std::move(ids);
      }
    }
    SearchResult result;
    result.short_members = best_ids;
    result.long_members = best_ids;
    result.train_report = evaluator.report_for(*best);
    result.objective_train_f1 = best_f1;
    return result;
  };

  return {pick(AnswerType::kShort), pick(AnswerType::kLong)};
}

SearchResult greedy_search(EnsembleEvaluator& evaluator, const SearchConfig& cfg) {
  const int n = evaluator.pool_size();
  if (n == 0) throw UsageError("greedy search: empty pool");
  if (cfg.k < 1 || cfg.k > n) {
    throw UsageError("greedy search: k must be in [1, pool size]");
  }
  const AnswerType obj = objective_type(cfg.objective);
  const AnswerType opp = opposite_type(cfg.objective);

  SearchResult result;

  // Forward selection: at each step add the model whose addition maximizes
  // the objective F1 on dev-train; ties go to the smaller model_id.
  const std::size_t evals_before_chain = evaluator.evaluation_count();
  std::vector<int> chain;
  std::vector<double> chain_f1;
  std::vector<bool> used(static_cast<size_t>(n), false);
  for (int step = 0; step < cfg.k; ++step) {
    std::vector<int> candidates;
    std::vector<std::vector<int>> subsets;
    for (int i = 0; i < n; ++i) {
      if (used[static_cast<size_t>(i)]) continue;
      candidates.push_back(i);
      auto s = chain;
      s.push_back(i);
      subsets.push_back(std::move(s));
    }
    evaluator.prefetch(subsets);

    int best = -1;
    double best_f1 = -1.0;
    for (size_t c = 0; c < candidates.size(); ++c) {
      double f1 = report_f1(evaluator.report_for(subsets[c]), obj);
      if (best < 0 || f1 > best_f1 ||
          (f1 == best_f1 && evaluator.pool_ids()[static_cast<size_t>(candidates[c])] <
                                evaluator.pool_ids()[static_cast<size_t>(best)])) {
        best = candidates[c];
        best_f1 = f1;
      }
    }
    chain.push_back(best);
    chain_f1.push_back(best_f1);
    used[static_cast<size_t>(best)] = true;
    result.trace.push_back(
        GreedyStep{evaluator.pool_ids()[static_cast<size_t>(best)], best_f1});
  }

  result.chain_evaluations = evaluator.evaluation_count() - evals_before_chain;

  // Best-prefix rule: keep the first i <= k models maximizing the objective
  // F1 (ties to the shortest prefix).
  size_t best_prefix = 0;
  for (size_t i = 1; i < chain_f1.size(); ++i) {
    if (chain_f1[i] > chain_f1[best_prefix]) best_prefix = i;
  }
  std::vector<int> selected(chain.begin(),
                            chain.begin() + static_cast<long>(best_prefix) + 1);
  result.objective_train_f1 = chain_f1[best_prefix];

  // Powerset refinement for the opposite answer type over the selected set.
  std::vector<std::vector<int>> powerset;
  const size_t p = selected.size();
  if (p > 20) {
    throw UsageError("greedy search: refinement powerset of " +
                     std::to_string(p) + " members is too large");
  }
  for (std::uint64_t mask = 1; mask < (1ULL << p); ++mask) {
    std::vector<int> subset;
    for (size_t b = 0; b < p; ++b) {
      if (mask & (1ULL << b)) subset.push_back(selected[b]);
    }
    powerset.push_back(std::move(subset));
  }
  evaluator.prefetch(powerset);

  const std::vector<int>* refined = nullptr;
  double refined_f1 = -1.0;
  std::vector<std::string> refined_ids;
  for (const auto& s : powerset) {
    double f1 = report_f1(evaluator.report_for(s), opp);
    auto ids = evaluator.member_ids(s);
    if (refined == nullptr || f1 > refined_f1 ||
        (f1 == refined_f1 && id_list_before(ids, refined_ids))) {
      refined = &s;
      refined_f1 = f1;
      refined_ids = std::move(ids);
    }
  }

  auto selected_ids = evaluator.member_ids(selected);
  PredictionMap objective_preds = evaluator.combine_subset(selected);
  PredictionMap opposite_preds = evaluator.combine_subset(*refined);

  PredictionMap joined;
  if (cfg.objective == Objective::kShort) {
    result.short_members = selected_ids;
    result.long_members = refined_ids;
    joined = join_predictions(objective_preds, opposite_preds);
  } else {
    result.long_members = selected_ids;
    result.short_members = refined_ids;
    joined = join_predictions(opposite_preds, objective_preds);
  }
  result.train_report = evaluate(joined, evaluator.train_gold());
  return result;
}

std::string best_single_model(EnsembleEvaluator& evaluator) {
  const int n = evaluator.pool_size();
  if (n == 0) throw UsageError("best single model: empty pool");
  std::vector<std::vector<int>> singletons;
  for (int i = 0; i < n; ++i) singletons.push_back({i});
  evaluator.prefetch(singletons);

  int best = 0;
  double best_sum = -1.0;
  for (int i = 0; i < n; ++i) {
    const EvalReport& r = evaluator.report_for({i});
    double sum = r.short_f1 + r.long_f1;
    if (sum > best_sum ||
        (sum == best_sum && evaluator.pool_ids()[static_cast<size_t>(i)] <
                                evaluator.pool_ids()[static_cast<size_t>(best)])) {
      best = i;
      best_sum = sum;
    }
  }
  return evaluator.pool_ids()[static_cast<size_t>(best)];
}

PredictionMap join_predictions(const PredictionMap& short_preds,
                               const PredictionMap& long_preds) {
  for (const auto& [id, _] : short_preds) {
    if (!long_preds.count(id)) {
      throw DataError("join: example '" + id + "' missing from long predictions");
    }
  }
  for (const auto& [id, _] : long_preds) {
    if (!short_preds.count(id)) {
      throw DataError("join: example '" + id + "' missing from short predictions");
    }
  }

  PredictionMap joined;
  for (const auto& [id, lp] : long_preds) {
    const FinalPrediction& sp = short_preds.at(id);
    FinalPrediction fp;
    fp.example_id = id;
    fp.long_answer = lp.long_answer;
    fp.long_score = lp.long_score;
    if (lp.long_answer.is_null()) {
      fp.short_answer = kNullSpan;
      fp.short_score = sp.short_answer.is_null() ? sp.short_score : 0.0;
    } else {
      fp.short_answer = sp.short_answer;
      fp.short_score = sp.short_score;
    }
    joined.emplace(id, std::move(fp));
  }
  return joined;
}

void evaluate_on_test(SearchResult& result, EnsembleEvaluator& evaluator,
                      const GoldSet& gold_test) {
  auto to_indices = [&](const std::vector<std::string>& ids) {
    std::vector<int> idx;
    for (const auto& id : ids) {
      auto it = std::find(evaluator.pool_ids().begin(), evaluator.pool_ids().end(), id);
      if (it == evaluator.pool_ids().end()) {
        throw DataError("evaluate_on_test: unknown member '" + id + "'");
      }
      idx.push_back(static_cast<int>(it - evaluator.pool_ids().begin()));
    }
    return idx;
  };
  PredictionMap joined =
      join_predictions(evaluator.combine_subset(to_indices(result.short_members)),
                       evaluator.combine_subset(to_indices(result.long_members)));
  result.test_report = evaluate(joined, gold_test);
}

}  // namespace nqens
