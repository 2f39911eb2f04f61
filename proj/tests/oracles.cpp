#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oracle {

using namespace nqens;

double aggregate(const std::vector<double>& scores_desc,
                 const AggregationStrategy& strategy) {
  switch (strategy.kind) {
    case AggregationKind::kMax: {
      double best = scores_desc.at(0);
      for (double s : scores_desc) best = s > best ? s : best;
      return best;
    }
    case AggregationKind::kReciprocalRankSum: {
      double sum = 0.0;
      for (size_t i = 1; i <= scores_desc.size(); ++i) {
        sum += scores_desc[i - 1] * (1.0 / static_cast<double>(i));
      }
      return sum;
    }
    case AggregationKind::kExponentialSum: {
      double sum = 0.0;
      for (size_t i = 1; i <= scores_desc.size(); ++i) {
        sum += scores_desc[i - 1] * std::pow(strategy.beta, static_cast<double>(i - 1));
      }
      return sum;
    }
    case AggregationKind::kNoisyOr: {
      double prod = 1.0;
      for (double s : scores_desc) {
        if (s < 0.0 || s > 1.0) throw std::runtime_error("oracle noisy-or range");
        prod *= (1.0 - s);
      }
      return 1.0 - prod;
    }
  }
  throw std::runtime_error("oracle aggregate: bad kind");
}

std::vector<Candidate> dedupe(const std::vector<Candidate>& in,
                              const AggregationStrategy& strategy) {
  std::vector<Span> spans;
  std::vector<std::vector<double>> vectors;
  for (const auto& c : in) {
    size_t at = spans.size();
    for (size_t i = 0; i < spans.size(); ++i) {
      if (spans[i] == c.span) {
        at = i;
        break;
      }
    }
    if (at == spans.size()) {
      spans.push_back(c.span);
      vectors.emplace_back();
    }
    vectors[at].push_back(c.score);
  }
  std::vector<Candidate> out;
  for (size_t i = 0; i < spans.size(); ++i) {
    std::sort(vectors[i].begin(), vectors[i].end());
    std::reverse(vectors[i].begin(), vectors[i].end());
    out.push_back(Candidate{spans[i], aggregate(vectors[i], strategy), 0});
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.span < b.span;
  });
  for (size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i) + 1;
  return out;
}

ModelRun prepare_run(const ModelRun& run, const AggregationStrategy& strategy,
                     const Calibrator& cal_long, const Calibrator& cal_short) {
  auto map_scores = [](const std::vector<Candidate>& list, const Calibrator& cal) {
    std::vector<Candidate> out = list;
    for (auto& c : out) {
      if (cal.kind == CalibrationKind::kLogistic) {
        c.score = 1.0 / (1.0 + std::exp(-(cal.weight * c.score + cal.bias)));
      }
    }
    return out;
  };
  ModelRun out;
  out.model_id = run.model_id;
  for (const auto& [id, ex] : run.predictions) {
    ExamplePredictions p;
    p.example_id = id;
    p.long_answers = ::oracle::dedupe(map_scores(ex.long_answers, cal_long), strategy);
    p.short_answers = ::oracle::dedupe(map_scores(ex.short_answers, cal_short), strategy);
    out.predictions.emplace(id, std::move(p));
  }
  return out;
}

namespace {

struct SpanScore {
  Span span;
  double sum = 0.0;
};

std::vector<SpanScore> union_means(
    const std::vector<const ExamplePredictions*>& per_system, AnswerType type,
    int k) {
  std::vector<SpanScore> acc;
  for (const auto* ex : per_system) {
    for (const auto& c : ex->answers(type)) {
      bool found = false;
      for (auto& s : acc) {
        if (s.span == c.span) {
          s.sum += c.score;
          found = true;
          break;
        }
      }
      if (!found) acc.push_back(SpanScore{c.span, c.score});
    }
  }
  for (auto& s : acc) s.sum /= static_cast<double>(k);
  return acc;
}

std::pair<Span, double> pick_best(const std::vector<SpanScore>& scored) {
  if (scored.empty()) return {kNullSpan, 0.0};
  Span best = scored[0].span;
  double best_score = scored[0].sum;
  for (const auto& s : scored) {
    if (s.sum > best_score || (s.sum == best_score && s.span < best)) {
      best = s.span;
      best_score = s.sum;
    }
  }
  return {best, best_score};
}

}  // namespace

PredictionMap combine(std::vector<const ModelRun*> members) {
  std::sort(members.begin(), members.end(),
            [](const ModelRun* a, const ModelRun* b) {
              return a->model_id < b->model_id;
            });
  const int k = static_cast<int>(members.size());
  PredictionMap out;
  for (const auto& [id, _] : members.front()->predictions) {
    std::vector<const ExamplePredictions*> per_system;
    for (const auto* run : members) per_system.push_back(&run->predictions.at(id));

    auto long_scored = union_means(per_system, AnswerType::kLong, k);
    auto short_scored = union_means(per_system, AnswerType::kShort, k);

    FinalPrediction fp;
    fp.example_id = id;
    std::tie(fp.long_answer, fp.long_score) = pick_best(long_scored);
    if (fp.long_answer.is_null()) {
      fp.short_answer = kNullSpan;
      fp.short_score = 0.0;
      for (const auto& s : short_scored) {
        if (s.span.is_null()) fp.short_score = s.sum;
      }
    } else {
      std::tie(fp.short_answer, fp.short_score) = pick_best(short_scored);
    }
    out.emplace(id, fp);
  }
  return out;
}

namespace {

struct EvalItem {
  double score;
  bool attempts;  // non-null span
  bool correct;
};

struct TypeData {
  std::vector<EvalItem> items;
  long answerable = 0;
};

bool matches_long(const Span& pred, const std::vector<GoldAnnotation>& gold) {
  for (const auto& a : gold) {
    if (a.long_answer && a.long_answer->start == pred.start &&
        a.long_answer->end == pred.end) {
      return true;
    }
  }
  return false;
}

bool matches_short(const Span& pred, const std::vector<GoldAnnotation>& gold) {
  for (const auto& a : gold) {
    if (a.short_answers.size() == 1 && a.short_answers[0].start == pred.start &&
        a.short_answers[0].end == pred.end) {
      return true;
    }
  }
  return false;
}

TypeData collect(const PredictionMap& preds, const GoldSet& gold, AnswerType type) {
  TypeData data;
  const double neg_inf = -std::numeric_limits<double>::infinity();
  for (const auto& [id, annotations] : gold.annotations) {
    int with_answer = 0;
    for (const auto& a : annotations) {
      if (type == AnswerType::kLong ? a.long_answer.has_value()
                                    : !a.short_answers.empty()) {
        ++with_answer;
      }
    }
    bool answerable = with_answer >= gold.min_agreement;
    if (answerable) ++data.answerable;

    Span span = kNullSpan;
    double score = neg_inf;
    auto it = preds.find(id);
    if (it != preds.end()) {
      span = type == AnswerType::kLong ? it->second.long_answer
                                       : it->second.short_answer;
      score = type == AnswerType::kLong ? it->second.long_score
                                        : it->second.short_score;
    }
    bool attempts = !span.is_null();
    bool match = type == AnswerType::kLong ? matches_long(span, annotations)
                                           : matches_short(span, annotations);
    data.items.push_back(EvalItem{score, attempts, attempts && answerable && match});
  }
  return data;
}

struct SweepBest {
  double f1 = 0.0, precision = 0.0, recall = 0.0, threshold = 0.0;
};

SweepBest sweep_thresholds(const TypeData& data,
                           const std::vector<double>& thresholds) {
  SweepBest best;
  double best_f1 = -1.0;
  bool first = true;
  for (double t : thresholds) {
    long attempts = 0, correct = 0;
    for (const auto& item : data.items) {
      if (item.attempts && item.score > t) {
        ++attempts;
        if (item.correct) ++correct;
      }
    }
    double p = attempts > 0 ? static_cast<double>(correct) / attempts : 0.0;
    double r = data.answerable > 0
                   ? static_cast<double>(correct) / data.answerable
                   : 0.0;
    double f1 = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    if (first || f1 > best_f1 || (f1 == best_f1 && t > best.threshold)) {
      best = SweepBest{f1, p, r, t};
      best_f1 = f1;
      first = false;
    }
  }
  return best;
}

EvalReport assemble(const SweepBest& lo, const SweepBest& so, int n) {
  EvalReport r;
  r.long_f1 = lo.f1;
  r.long_precision = lo.precision;
  r.long_recall = lo.recall;
  r.long_threshold = lo.threshold;
  r.short_f1 = so.f1;
  r.short_precision = so.precision;
  r.short_recall = so.recall;
  r.short_threshold = so.threshold;
  r.n_examples = n;
  return r;
}

}  // namespace

EvalReport evaluate_by_scores(const PredictionMap& preds, const GoldSet& gold) {
  auto run_type = [&](AnswerType type) {
    TypeData data = collect(preds, gold, type);
    std::vector<double> thresholds;
    thresholds.push_back(-std::numeric_limits<double>::infinity());
    for (const auto& item : data.items) thresholds.push_back(item.score);
    return sweep_thresholds(data, thresholds);
  };
  return assemble(run_type(AnswerType::kLong), run_type(AnswerType::kShort),
                  static_cast<int>(gold.annotations.size()));
}

EvalReport evaluate_dense_grid(const PredictionMap& preds, const GoldSet& gold,
                               int grid_points) {
  auto run_type = [&](AnswerType type) {
    TypeData data = collect(preds, gold, type);
    double lo = 0.0, hi = 1.0;
    bool any = false;
    for (const auto& item : data.items) {
      if (std::isfinite(item.score)) {
        lo = any ? std::min(lo, item.score) : item.score;
        hi = any ? std::max(hi, item.score) : item.score;
        any = true;
      }
    }
    lo -= 0.05;
    hi += 0.05;
    std::vector<double> thresholds;
    thresholds.reserve(static_cast<size_t>(grid_points) + 1);
    thresholds.push_back(-std::numeric_limits<double>::infinity());
    for (int g = 0; g < grid_points; ++g) {
      thresholds.push_back(lo + (hi - lo) * g / (grid_points - 1));
    }
    return sweep_thresholds(data, thresholds);
  };
  return assemble(run_type(AnswerType::kLong), run_type(AnswerType::kShort),
                  static_cast<int>(gold.annotations.size()));
}

namespace {

void subsets_up_to(int n, int k, bool exact_size,
                   std::vector<std::vector<int>>& out) {
  for (std::uint64_t mask = 1; mask < (1ULL << n); ++mask) {
    std::vector<int> subset;
    for (int b = 0; b < n; ++b) {
      if (mask & (1ULL << b)) subset.push_back(b);
    }
    int size = static_cast<int>(subset.size());
    if (exact_size ? size == k : size <= k) out.push_back(std::move(subset));
  }
}

}  // namespace

EnumerationBest enumerate_best(const std::vector<ModelRun>& pool,
                               const GoldSet& gold,
                               const AggregationStrategy& strategy,
                               AnswerType type, int k, bool exact_size) {
  Calibrator identity;
  std::vector<ModelRun> prepared;
  for (const auto& run : pool) {
    prepared.push_back(prepare_run(run, strategy, identity, identity));
  }

  std::vector<std::vector<int>> subsets;
  subsets_up_to(static_cast<int>(pool.size()), k, exact_size, subsets);

  EnumerationBest best;
  bool first = true;
  for (const auto& subset : subsets) {
    std::vector<const ModelRun*> members;
    std::vector<std::string> ids;
    for (int i : subset) {
      members.push_back(&prepared[static_cast<size_t>(i)]);
      ids.push_back(prepared[static_cast<size_t>(i)].model_id);
    }
    std::sort(ids.begin(), ids.end());
    EvalReport report = evaluate_by_scores(combine(members), gold);
    double f1 = type == AnswerType::kLong ? report.long_f1 : report.short_f1;
    if (first || f1 > best.f1 || (f1 == best.f1 && ids < best.members)) {
      best.members = ids;
      best.f1 = f1;
      first = false;
    }
  }
  return best;
}

}  // namespace oracle
