#pragma once

#include <string>
#include <vector>

#include "nqens/model.hpp"

namespace nqens {

// Optimal-threshold exact-match F1, reported separately per answer type.
struct EvalReport {
  double long_f1 = 0.0;
  double long_precision = 0.0;
  double long_recall = 0.0;
  double long_threshold = 0.0;
  double short_f1 = 0.0;
  double short_precision = 0.0;
  double short_recall = 0.0;
  double short_threshold = 0.0;
  int n_examples = 0;

  double f1(AnswerType t) const {
    return t == AnswerType::kLong ? long_f1 : short_f1;
  }

  bool operator==(const EvalReport&) const = default;
};

// Exact span match against any single annotator's long answer. Null never
// matches: a null prediction is an abstention, not an answer.
bool is_correct_long(const Span& pred,
                     const std::vector<GoldAnnotation>& annotations);

// Exact match against an annotator whose short-answer set is exactly the
// singleton {pred}. Annotators with multi-span sets never match (this
// pipeline scores single spans only).
bool is_correct_short(const Span& pred,
                      const std::vector<GoldAnnotation>& annotations);

bool is_correct(const Span& pred, const std::vector<GoldAnnotation>& annotations,
                AnswerType type);

// Sweeps candidate thresholds (the observed prediction scores plus -inf;
// a prediction attempts iff non-null and score strictly above threshold)
// and reports the threshold maximizing F1, ties to the higher threshold.
// A correct attempt must land on a gold-answerable example and match per
// is_correct_*. Missing predictions count as null with score -inf (a
// coverage warning goes to stderr).
EvalReport evaluate(const PredictionMap& preds, const GoldSet& gold);

}  // namespace nqens
