#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nqens/model.hpp"

namespace nqens {

enum class CalibrationKind { kIdentity, kLogistic };

CalibrationKind parse_calibration(const std::string& name);
std::string calibration_name(CalibrationKind kind);

// Score normalizer applied per (model, answer type) before aggregation.
// Identity maps x -> x; Logistic maps x -> 1 / (1 + exp(-(weight*x + bias))).
struct Calibrator {
  CalibrationKind kind = CalibrationKind::kIdentity;
  double weight = 1.0;
  double bias = 0.0;
  double l2 = 0.0;
  bool converged = true;

  double operator()(double x) const;
};

inline std::vector<double> default_l2_grid() {
  return {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
}

// Single-feature L2-regularized logistic regression. The L2 strength is
// chosen from l2_grid by mean validation log-loss over stratified folds
// (ties to the smaller strength); the final weight/bias are refit on all
// data with damped Newton steps to gradient norm <= 1e-8 or 500 iterations.
// Non-convergence returns the best iterate with converged = false and a
// warning on stderr, as does a non-positive fitted weight.
Calibrator fit_logistic(const std::vector<double>& scores,
                        const std::vector<int>& labels,
                        const std::vector<double>& l2_grid = default_l2_grid(),
                        int folds = 5, std::uint64_t seed = 0);

struct TrainingPairs {
  std::vector<double> scores;
  std::vector<int> labels;
};

// One (top-1 score, correctness) pair per example in the run. Correctness
// follows the evaluator's rule: the example must be gold-answerable and the
// rank-1 span must exact-match an annotator.
TrainingPairs build_training_pairs(const ModelRun& run, const GoldSet& gold,
                                   AnswerType type);

// Maps scores elementwise, re-sorts into canonical order, reassigns ranks.
std::vector<Candidate> apply(const Calibrator& calibrator,
                             const std::vector<Candidate>& candidates);

struct ModelCalibrators {
  Calibrator long_answer;
  Calibrator short_answer;

  const Calibrator& get(AnswerType t) const {
    return t == AnswerType::kLong ? long_answer : short_answer;
  }
};

// Fitted calibrators per (model_id, answer_type); absent models fall back
// to identity.
struct CalibratorSet {
  std::map<std::string, ModelCalibrators> by_model;

  const Calibrator& get(const std::string& model_id, AnswerType t) const;
  bool has(const std::string& model_id) const {
    return by_model.count(model_id) > 0;
  }
};

// Fits a logistic calibrator per (model, answer type) from top-1 correctness
// on the given gold split.
CalibratorSet fit_calibrators(const std::vector<ModelRun>& runs,
                              const GoldSet& gold_train,
                              const std::vector<double>& l2_grid = default_l2_grid(),
                              int folds = 5, std::uint64_t seed = 0);

}  // namespace nqens
