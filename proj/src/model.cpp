#include "nqens/model.hpp"

#include <algorithm>

#include "nqens/errors.hpp"

namespace nqens {

Span make_span(int start, int end) {
  if (start == -1 && end == -1) return kNullSpan;
  if (start < 0 || end < 0) {
    throw DataError("invalid span (" + std::to_string(start) + ", " +
                    std::to_string(end) + "): negative index other than the null span");
  }
  if (start >= end) {
    throw DataError("invalid span (" + std::to_string(start) + ", " +
                    std::to_string(end) + "): requires start < end");
  }
  return Span{start, end};
}

bool candidate_before(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.span < b.span;
}

void canonicalize_candidates(std::vector<Candidate>& candidates, int top_m) {
  std::stable_sort(candidates.begin(), candidates.end(), candidate_before);
  if (top_m > 0 && candidates.size() > static_cast<size_t>(top_m)) {
    candidates.resize(static_cast<size_t>(top_m));
  }
  for (size_t i = 0; i < candidates.size(); ++i) {
    candidates[i].rank = static_cast<int>(i) + 1;
  }
}

bool annotations_answerable(const std::vector<GoldAnnotation>& annotations,
                            int min_agreement, AnswerType type) {
  int count = 0;
  for (const auto& a : annotations) {
    if (type == AnswerType::kLong) {
      if (a.long_answer.has_value()) ++count;
    } else {
      if (!a.short_answers.empty()) ++count;
    }
  }
  return count >= min_agreement;
}

bool GoldSet::answerable(const std::string& example_id, AnswerType type) const {
  auto it = annotations.find(example_id);
  if (it == annotations.end()) return false;
  return annotations_answerable(it->second, min_agreement, type);
}

}  // namespace nqens
