#pragma once

#include <string>
#include <vector>

#include "nqens/aggregate.hpp"
#include "nqens/calibrate.hpp"
#include "nqens/model.hpp"

namespace nqens {

// Per-system preprocessing and cross-system combination settings, minus the
// member list (EnsembleSpec adds that).
struct CombineSettings {
  AggregationStrategy strategy;
  CalibrationKind calibration = CalibrationKind::kIdentity;
  // When set, a non-null predicted long answer restricts the short answer
  // to spans contained in it (or null).
  bool require_containment = false;
};

struct EnsembleSpec {
  std::vector<std::string> members;  // distinct model_ids, k >= 1
  CombineSettings settings;
  int top_m = 20;
};

// Calibrates (per answer type) and dedupes one system's candidate lists.
// The result is what that system contributes to any ensemble containing it.
ModelRun prepare_run(const ModelRun& run, const CombineSettings& settings,
                     const CalibratorSet& calibrators);

// Core combination for one example over k prepared (calibrated, deduped)
// systems: for each answer type the union of predicted spans is scored by
// the arithmetic mean over all k systems, with zero imputed for systems not
// predicting a span; the argmax span wins (ties to the smaller span). A null
// long argmax forces a null short answer carrying the combined null-short
// score (0 if no system scored the null short answer).
FinalPrediction combine_example(
    const std::vector<const ExamplePredictions*>& per_system, int k,
    bool require_containment = false);

// Whole-corpus combination over prepared runs (processed in model_id order,
// so member ordering never matters). All members must cover the same
// example_id set.
PredictionMap combine_prepared(const std::vector<const ModelRun*>& prepared,
                               bool require_containment = false);

// Calibrate + dedupe + combine in one step for the given members.
PredictionMap combine_runs(const std::vector<const ModelRun*>& runs,
                           const EnsembleSpec& spec,
                           const CalibratorSet& calibrators);

}  // namespace nqens
