#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nqens/combine.hpp"
#include "nqens/evaluate.hpp"
#include "nqens/model.hpp"

namespace nqens {

enum class Objective { kShort, kLong };

Objective parse_objective(const std::string& name);
std::string objective_name(Objective o);

inline AnswerType objective_type(Objective o) {
  return o == Objective::kShort ? AnswerType::kShort : AnswerType::kLong;
}
inline AnswerType opposite_type(Objective o) {
  return o == Objective::kShort ? AnswerType::kLong : AnswerType::kShort;
}

struct SearchConfig {
  int k = 4;
  Objective objective = Objective::kShort;
  bool exact_size = false;  // exhaustive: size exactly k instead of 1..k
  int pool_cap = 20;        // exhaustive guard against combinatorial blowup
  bool force = false;       // override pool_cap
};

struct GreedyStep {
  std::string added;
  double objective_f1 = 0.0;
};

struct SearchResult {
  std::vector<std::string> short_members;
  std::vector<std::string> long_members;
  EvalReport train_report;
  EvalReport test_report;
  // Objective F1 of the selected member subset itself on dev-train (the
  // quantity the search maximizes; train_report is for the joined output).
  double objective_train_f1 = 0.0;
  std::vector<GreedyStep> trace;           // greedy only
  std::size_t chain_evaluations = 0;       // greedy only; not serialized
};

// Combines and evaluates member subsets of a fixed pool against the
// dev-train gold, caching by member set so no subset is ever combined
// twice, including across searches sharing the evaluator. Holding only the
// train gold is what keeps test data out of the search path.
class EnsembleEvaluator {
 public:
  EnsembleEvaluator(const std::vector<ModelRun>& pool,
                    const CombineSettings& settings,
                    const CalibratorSet& calibrators, const GoldSet& gold_train,
                    int threads = 1);

  const std::vector<std::string>& pool_ids() const { return ids_; }
  int pool_size() const { return static_cast<int>(prepared_.size()); }

  // Subsets are index vectors into the pool; order is irrelevant.
  const EvalReport& report_for(const std::vector<int>& subset);
  void prefetch(const std::vector<std::vector<int>>& subsets);
  PredictionMap combine_subset(const std::vector<int>& subset) const;

  std::vector<std::string> member_ids(const std::vector<int>& subset) const;
  std::size_t evaluation_count() const { return evaluations_; }
  bool require_containment() const { return require_containment_; }
  const GoldSet& train_gold() const { return *gold_train_; }

 private:
  std::vector<ModelRun> prepared_;
  std::vector<std::string> ids_;
  const GoldSet* gold_train_;
  bool require_containment_;
  int threads_;
  std::map<std::vector<int>, EvalReport> cache_;
  std::size_t evaluations_ = 0;
};

// Ensembles the first k runs (seed variants of one configuration) with the
// core strategy.
SearchResult seed_ensemble(EnsembleEvaluator& evaluator, int k);

// Evaluates every subset of size exactly k (exact_size) or 1..k and returns
// (best by short F1, best by long F1). Ties go to the lexicographically
// smaller member list.
std::pair<SearchResult, SearchResult> exhaustive_search(
    EnsembleEvaluator& evaluator, const SearchConfig& cfg);

// Greedy forward selection on the objective F1 with the best-prefix rule,
// then powerset refinement of the selected set for the opposite answer
// type, then prediction joining with the null-join rule.
SearchResult greedy_search(EnsembleEvaluator& evaluator, const SearchConfig& cfg);

// argmax of (short F1 + long F1) over singletons; ties to the smaller id.
std::string best_single_model(EnsembleEvaluator& evaluator);

// Long answers from long_preds, short answers from short_preds; a null long
// forces a null short (score 0 unless the short source already abstained).
PredictionMap join_predictions(const PredictionMap& short_preds,
                               const PredictionMap& long_preds);

// Fills result.test_report by re-combining the result's member sets over
// the full pool and evaluating against the held-out gold.
void evaluate_on_test(SearchResult& result, EnsembleEvaluator& evaluator,
                      const GoldSet& gold_test);

}  // namespace nqens
