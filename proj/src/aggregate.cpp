#include "nqens/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "nqens/errors.hpp"

namespace nqens {

AggregationStrategy parse_aggregation(const std::string& name, double beta) {
  AggregationStrategy s;
  s.beta = beta;
  if (name == "max") {
    s.kind = AggregationKind::kMax;
  } else if (name == "rrs") {
    s.kind = AggregationKind::kReciprocalRankSum;
  } else if (name == "expsum") {
    s.kind = AggregationKind::kExponentialSum;
  } else if (name == "noisyor") {
    s.kind = AggregationKind::kNoisyOr;
  } else {
    throw UsageError("unknown aggregation strategy '" + name +
                     "' (expected max|rrs|expsum|noisyor)");
  }
  if (!(s.beta > 0.0 && s.beta < 1.0)) {
    throw UsageError("beta must lie in (0, 1)");
  }
  return s;
}

std::string aggregation_name(AggregationKind kind) {
  switch (kind) {
    case AggregationKind::kMax: return "max";
    case AggregationKind::kReciprocalRankSum: return "rrs";
    case AggregationKind::kExponentialSum: return "expsum";
    case AggregationKind::kNoisyOr: return "noisyor";
  }
  return "?";
}

double aggregate_score(const std::vector<double>& scores_desc,
                       const AggregationStrategy& strategy) {
  if (scores_desc.empty()) throw DataError("aggregate_score: empty score vector");
  for (size_t i = 0; i + 1 < scores_desc.size(); ++i) {
    if (scores_desc[i] < scores_desc[i + 1]) {
      throw DataError("aggregate_score: score vector not sorted descending");
    }
  }
  switch (strategy.kind) {
    case AggregationKind::kMax:
      return scores_desc.front();
    case AggregationKind::kReciprocalRankSum: {
      double sum = 0.0;
      for (size_t i = 0; i < scores_desc.size(); ++i) {
        sum += scores_desc[i] / static_cast<double>(i + 1);
      }
      return sum;
    }
    case AggregationKind::kExponentialSum: {
      double sum = 0.0;
      double decay = 1.0;
      for (double s : scores_desc) {
        sum += s * decay;
        decay *= strategy.beta;
      }
      return sum;
    }
    case AggregationKind::kNoisyOr: {
      double survive = 1.0;
      for (double s : scores_desc) {
        if (!(s >= 0.0 && s <= 1.0)) {
          throw DataError("noisy-or requires scores in [0, 1], got " +
                          std::to_string(s) +
                          " (apply logistic calibration first)");
        }
        survive *= 1.0 - s;
      }
      return 1.0 - survive;
    }
  }
  throw DataError("aggregate_score: unreachable strategy");
}

std::vector<Candidate> dedupe(const std::vector<Candidate>& candidates,
                              const AggregationStrategy& strategy) {
  // Per-span score vectors, in first-seen order within the (already
  // descending) input so each vector comes out sorted descending.
  std::map<Span, std::vector<double>> per_span;
  for (const auto& c : candidates) {
    per_span[c.span].push_back(c.score);
  }
  std::vector<Candidate> out;
  out.reserve(per_span.size());
  for (auto& [span, scores] : per_span) {
    std::sort(scores.begin(), scores.end(), std::greater<double>());
    out.push_back(Candidate{span, aggregate_score(scores, strategy), 0});
  }
  canonicalize_candidates(out, 0);
  return out;
}

}  // namespace nqens
