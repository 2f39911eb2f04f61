#include "nqens/combine.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "nqens/errors.hpp"

namespace nqens {

ModelRun prepare_run(const ModelRun& run, const CombineSettings& settings,
                     const CalibratorSet& calibrators) {
  static const Calibrator identity{};
  const Calibrator* cal_long = &identity;
  const Calibrator* cal_short = &identity;
  if (settings.calibration == CalibrationKind::kLogistic) {
    if (!calibrators.has(run.model_id)) {
      throw DataError("no calibrator fitted for model '" + run.model_id + "'");
    }
    cal_long = &calibrators.get(run.model_id, AnswerType::kLong);
    cal_short = &calibrators.get(run.model_id, AnswerType::kShort);
  }

  ModelRun out;
  out.model_id = run.model_id;
  for (const auto& [id, ex] : run.predictions) {
    ExamplePredictions prepared;
    prepared.example_id = id;
    try {
      prepared.long_answers = dedupe(nqens::apply(*cal_long, ex.long_answers),
                                     settings.strategy);
      prepared.short_answers = dedupe(nqens::apply(*cal_short, ex.short_answers),
                                      settings.strategy);
    } catch (const DataError& e) {
      throw DataError("model '" + run.model_id + "', example '" + id +
                      "': " + e.what());
    }
    out.predictions.emplace(id, std::move(prepared));
  }
  return out;
}

namespace {

// Union-of-spans arithmetic mean with zero imputation for absent systems.
std::map<Span, double> mean_scores(
    const std::vector<const ExamplePredictions*>& per_system, AnswerType type,
    int k) {
  std::map<Span, double> sums;
  for (const auto* ex : per_system) {
    std::set<Span> seen;
    for (const auto& c : ex->answers(type)) {
      if (!seen.insert(c.span).second) {
        throw DataError("example '" + ex->example_id +
                        "': duplicate span within one system's " +
                        answer_type_name(type) +
                        " list; candidates must be deduplicated first");
      }
      sums[c.span] += c.score;
    }
  }
  for (auto& [span, sum] : sums) sum /= static_cast<double>(k);
  return sums;
}

// Argmax by score, ties to the smaller span (the map iterates spans
// ascending, so a strict comparison keeps the smaller one).
std::pair<Span, double> argmax(const std::map<Span, double>& scores) {
  Span best = kNullSpan;
  double best_score = 0.0;
  bool first = true;
  for (const auto& [span, score] : scores) {
    if (first || score > best_score) {
      best = span;
      best_score = score;
      first = false;
    }
  }
  if (first) return {kNullSpan, 0.0};
  return {best, best_score};
}

}  // namespace

FinalPrediction combine_example(
    const std::vector<const ExamplePredictions*>& per_system, int k,
    bool require_containment) {
  if (k <= 0) throw DataError("combine_example: k must be positive");
  if (per_system.size() != static_cast<size_t>(k)) {
    throw DataError("combine_example: expected " + std::to_string(k) +
                    " systems, got " + std::to_string(per_system.size()));
  }
  const std::string& id = per_system.front()->example_id;
  for (const auto* ex : per_system) {
    if (ex->example_id != id) {
      throw DataError("combine_example: mismatched example ids '" + id +
                      "' vs '" + ex->example_id + "'");
    }
  }

  auto long_scores = mean_scores(per_system, AnswerType::kLong, k);
  auto short_scores = mean_scores(per_system, AnswerType::kShort, k);

  FinalPrediction fp;
  fp.example_id = id;
  std::tie(fp.long_answer, fp.long_score) = argmax(long_scores);

  if (fp.long_answer.is_null()) {
    fp.short_answer = kNullSpan;
    auto it = short_scores.find(kNullSpan);
    fp.short_score = it != short_scores.end() ? it->second : 0.0;
    return fp;
  }

  if (require_containment) {
    std::map<Span, double> contained;
    for (const auto& [span, score] : short_scores) {
      if (span.is_null() || (span.start >= fp.long_answer.start &&
                             span.end <= fp.long_answer.end)) {
        contained.emplace(span, score);
      }
    }
    short_scores = std::move(contained);
  }
  std::tie(fp.short_answer, fp.short_score) = argmax(short_scores);
  return fp;
}

PredictionMap combine_prepared(const std::vector<const ModelRun*>& prepared,
                               bool require_containment) {
  if (prepared.empty()) throw DataError("combine: no member runs (k = 0)");

  // Canonical member order makes the result independent of how the caller
  // ordered the ensemble.
  std::vector<const ModelRun*> members = prepared;
  std::sort(members.begin(), members.end(),
            [](const ModelRun* a, const ModelRun* b) {
              return a->model_id < b->model_id;
            });
  for (size_t i = 0; i + 1 < members.size(); ++i) {
    if (members[i]->model_id == members[i + 1]->model_id) {
      throw DataError("combine: duplicate model_id '" + members[i]->model_id + "'");
    }
  }

  // Coverage must agree exactly across members.
  const auto& base = members.front()->predictions;
  for (size_t m = 1; m < members.size(); ++m) {
    const auto& other = members[m]->predictions;
    std::ostringstream missing;
    int n_missing = 0;
    for (const auto& [id, _] : base) {
      if (!other.count(id)) {
        if (n_missing++ < 8) missing << " " << id;
      }
    }
    for (const auto& [id, _] : other) {
      if (!base.count(id)) {
        if (n_missing++ < 8) missing << " " << id;
      }
    }
    if (n_missing > 0) {
      throw DataError("combine: model '" + members[m]->model_id + "' and '" +
                      members.front()->model_id + "' cover different examples (" +
                      std::to_string(n_missing) + " mismatched:" + missing.str() +
                      ")");
    }
  }

  const int k = static_cast<int>(members.size());
  PredictionMap out;
  for (const auto& [id, _] : base) {
    std::vector<const ExamplePredictions*> per_system;
    per_system.reserve(members.size());
    for (const auto* run : members) {
      per_system.push_back(&run->predictions.at(id));
    }
    out.emplace(id, combine_example(per_system, k, require_containment));
  }
  return out;
}

PredictionMap combine_runs(const std::vector<const ModelRun*>& runs,
                           const EnsembleSpec& spec,
                           const CalibratorSet& calibrators) {
  if (spec.members.empty()) throw UsageError("combine: empty member list");
  std::set<std::string> distinct(spec.members.begin(), spec.members.end());
  if (distinct.size() != spec.members.size()) {
    throw UsageError("combine: duplicate model_id in member list");
  }

  std::vector<ModelRun> prepared;
  prepared.reserve(spec.members.size());
  for (const auto& id : spec.members) {
    auto it = std::find_if(runs.begin(), runs.end(),
                           [&](const ModelRun* r) { return r->model_id == id; });
    if (it == runs.end()) {
      throw DataError("combine: member '" + id + "' not among loaded runs");
    }
    for (const auto& [eid, ex] : (*it)->predictions) {
      if (spec.top_m > 0 &&
          (ex.long_answers.size() > static_cast<size_t>(spec.top_m) ||
           ex.short_answers.size() > static_cast<size_t>(spec.top_m))) {
        throw DataError("combine: model '" + id + "', example '" + eid +
                        "' exceeds top_m = " + std::to_string(spec.top_m));
      }
    }
    prepared.push_back(prepare_run(**it, spec.settings, calibrators));
  }

  std::vector<const ModelRun*> ptrs;
  ptrs.reserve(prepared.size());
  for (const auto& r : prepared) ptrs.push_back(&r);
  return combine_prepared(ptrs, spec.settings.require_containment);
}

}  // namespace nqens
