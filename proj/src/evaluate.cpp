#include "nqens/evaluate.hpp"

#include <algorithm>
#include <iostream>
#include <limits>

#include "nqens/errors.hpp"

namespace nqens {

bool is_correct_long(const Span& pred,
                     const std::vector<GoldAnnotation>& annotations) {
  if (pred.is_null()) return false;
  for (const auto& a : annotations) {
    if (a.long_answer.has_value() && *a.long_answer == pred) return true;
  }
  return false;
}

bool is_correct_short(const Span& pred,
                      const std::vector<GoldAnnotation>& annotations) {
  if (pred.is_null()) return false;
  for (const auto& a : annotations) {
    if (a.short_answers.size() == 1 && a.short_answers.front() == pred) {
      return true;
    }
  }
  return false;
}

bool is_correct(const Span& pred, const std::vector<GoldAnnotation>& annotations,
                AnswerType type) {
  return type == AnswerType::kLong ? is_correct_long(pred, annotations)
                                   : is_correct_short(pred, annotations);
}

namespace {

struct SweepItem {
  double score;
  bool attemptable;  // span is non-null
  bool correct;      // attemptable && gold-answerable && exact match
};

struct SweepOutcome {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double threshold = 0.0;
};

// F1(t) is piecewise constant in the threshold with breakpoints exactly at
// the observed scores, so sweeping the score set (plus -inf) visits every
// operating point. Iterating thresholds in descending order with a strict
// improvement test keeps the highest threshold on ties.
SweepOutcome sweep(std::vector<SweepItem> items, long answerable_count) {
  std::sort(items.begin(), items.end(),
            [](const SweepItem& a, const SweepItem& b) { return a.score > b.score; });

  std::vector<double> thresholds;
  thresholds.reserve(items.size() + 1);
  for (const auto& it : items) thresholds.push_back(it.score);
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());
  const double neg_inf = -std::numeric_limits<double>::infinity();
  if (thresholds.empty() || thresholds.back() != neg_inf) {
    thresholds.push_back(neg_inf);
  }

  SweepOutcome best;
  double best_f1 = -1.0;
  size_t next = 0;  // first item not yet counted as score > t
  long attempts = 0;
  long correct = 0;
  for (double t : thresholds) {
    while (next < items.size() && items[next].score > t) {
      if (items[next].attemptable) {
        ++attempts;
        if (items[next].correct) ++correct;
      }
      ++next;
    }
    double p = attempts > 0 ? static_cast<double>(correct) / attempts : 0.0;
    double r = answerable_count > 0
                   ? static_cast<double>(correct) / answerable_count
                   : 0.0;
    double f1 = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    if (f1 > best_f1) {
      best_f1 = f1;
      best = SweepOutcome{f1, p, r, t};
    }
  }
  return best;
}

}  // namespace

EvalReport evaluate(const PredictionMap& preds, const GoldSet& gold) {
  if (gold.annotations.empty()) throw DataError("evaluate: empty gold set");

  const double neg_inf = -std::numeric_limits<double>::infinity();
  size_t missing = 0;

  std::vector<SweepItem> long_items, short_items;
  long_items.reserve(gold.annotations.size());
  short_items.reserve(gold.annotations.size());
  long answerable_long = 0, answerable_short = 0;

  for (const auto& [id, annotations] : gold.annotations) {
    Span long_span = kNullSpan, short_span = kNullSpan;
    double long_score = neg_inf, short_score = neg_inf;
    auto it = preds.find(id);
    if (it == preds.end()) {
      ++missing;
    } else {
      long_span = it->second.long_answer;
      long_score = it->second.long_score;
      short_span = it->second.short_answer;
      short_score = it->second.short_score;
    }

    bool la = annotations_answerable(annotations, gold.min_agreement, AnswerType::kLong);
    bool sa = annotations_answerable(annotations, gold.min_agreement, AnswerType::kShort);
    if (la) ++answerable_long;
    if (sa) ++answerable_short;

    long_items.push_back(SweepItem{
        long_score, !long_span.is_null(),
        !long_span.is_null() && la && is_correct_long(long_span, annotations)});
    short_items.push_back(SweepItem{
        short_score, !short_span.is_null(),
        !short_span.is_null() && sa && is_correct_short(short_span, annotations)});
  }

  if (missing > 0) {
    std::cerr << "warning: " << missing << " of " << gold.annotations.size()
              << " gold examples have no prediction; treated as null\n";
  }

  SweepOutcome lo = sweep(std::move(long_items), answerable_long);
  SweepOutcome so = sweep(std::move(short_items), answerable_short);

  EvalReport report;
  report.long_f1 = lo.f1;
  report.long_precision = lo.precision;
  report.long_recall = lo.recall;
  report.long_threshold = lo.threshold;
  report.short_f1 = so.f1;
  report.short_precision = so.precision;
  report.short_recall = so.recall;
  report.short_threshold = so.threshold;
  report.n_examples = static_cast<int>(gold.annotations.size());
  return report;
}

}  // namespace nqens
