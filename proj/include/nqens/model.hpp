#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nqens {

enum class AnswerType { kLong, kShort };

inline const char* answer_type_name(AnswerType t) {
  return t == AnswerType::kLong ? "long" : "short";
}

// Half-open token interval [start, end). (-1, -1) encodes the null answer
// (abstention), which still carries a score so it can flow through
// aggregation and thresholding like any other span.
struct Span {
  int start = -1;
  int end = -1;

  bool is_null() const { return start == -1 && end == -1; }
  int length() const { return is_null() ? 0 : end - start; }

  auto operator<=>(const Span&) const = default;
};

inline constexpr Span kNullSpan{-1, -1};

// Validating constructor: either the null span or 0 <= start < end.
Span make_span(int start, int end);

struct Candidate {
  Span span;
  double score = 0.0;
  int rank = 0;  // 1 = best within its source list

  bool operator==(const Candidate&) const = default;
};

// Canonical candidate order: score descending, ties by span ascending.
bool candidate_before(const Candidate& a, const Candidate& b);

// Sorts into canonical order, truncates to top_m (<= 0 means no limit) and
// reassigns ranks 1..n.
void canonicalize_candidates(std::vector<Candidate>& candidates, int top_m);

struct ExamplePredictions {
  std::string example_id;
  std::vector<Candidate> long_answers;
  std::vector<Candidate> short_answers;

  const std::vector<Candidate>& answers(AnswerType t) const {
    return t == AnswerType::kLong ? long_answers : short_answers;
  }
  std::vector<Candidate>& answers(AnswerType t) {
    return t == AnswerType::kLong ? long_answers : short_answers;
  }

  bool operator==(const ExamplePredictions&) const = default;
};

// One system's per-example top-m candidate lists.
struct ModelRun {
  std::string model_id;
  std::map<std::string, ExamplePredictions> predictions;

  bool operator==(const ModelRun&) const = default;
};

// One annotator's judgement for one example. No long answer implies no
// short answers.
struct GoldAnnotation {
  std::optional<Span> long_answer;
  std::vector<Span> short_answers;

  bool operator==(const GoldAnnotation&) const = default;
};

struct GoldSet {
  std::map<std::string, std::vector<GoldAnnotation>> annotations;
  int min_agreement = 2;

  // An example is answerable for a type iff at least min_agreement
  // annotators provided an answer of that type.
  bool answerable(const std::string& example_id, AnswerType type) const;

  bool operator==(const GoldSet&) const = default;
};

bool annotations_answerable(const std::vector<GoldAnnotation>& annotations,
                            int min_agreement, AnswerType type);

struct FinalPrediction {
  std::string example_id;
  Span long_answer;
  double long_score = 0.0;
  Span short_answer;
  double short_score = 0.0;

  bool operator==(const FinalPrediction&) const = default;
};

using PredictionMap = std::map<std::string, FinalPrediction>;

// True iff the prediction pairs a null long answer with a non-null short
// answer, which no valid pipeline output may do.
inline bool violates_null_join(const FinalPrediction& p) {
  return p.long_answer.is_null() && !p.short_answer.is_null();
}

}  // namespace nqens
