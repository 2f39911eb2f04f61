#pragma once

#include <string>
#include <vector>

#include "nqens/model.hpp"

namespace nqens {

enum class AggregationKind { kMax, kReciprocalRankSum, kExponentialSum, kNoisyOr };

struct AggregationStrategy {
  AggregationKind kind = AggregationKind::kMax;
  double beta = 0.5;  // ExponentialSum decay, in (0, 1)
};

// Accepts "max" | "rrs" | "expsum" | "noisyor".
AggregationStrategy parse_aggregation(const std::string& name, double beta = 0.5);
std::string aggregation_name(AggregationKind kind);

// Collapses a descending score vector P into one score:
//   Max:               max_i P_i
//   ReciprocalRankSum: sum_i P_i / i
//   ExponentialSum:    sum_i P_i * beta^(i-1)
//   NoisyOr:           1 - prod_i (1 - P_i), requires P_i in [0, 1]
// Indices are 1-based positions within P itself. P must be non-empty and
// sorted descending.
double aggregate_score(const std::vector<double>& scores_desc,
                       const AggregationStrategy& strategy);

// One candidate per distinct span; each span's score is aggregate_score over
// that span's occurrences (sorted descending). Output is re-sorted into
// canonical order with ranks reassigned.
std::vector<Candidate> dedupe(const std::vector<Candidate>& candidates,
                              const AggregationStrategy& strategy);

}  // namespace nqens
