#include "nqens/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <random>

#include "nqens/errors.hpp"
#include "nqens/evaluate.hpp"
#include "nqens/rng.hpp"

namespace nqens {

CalibrationKind parse_calibration(const std::string& name) {
  if (name == "identity") return CalibrationKind::kIdentity;
  if (name == "logistic") return CalibrationKind::kLogistic;
  throw UsageError("unknown calibration '" + name + "' (expected identity|logistic)");
}

std::string calibration_name(CalibrationKind kind) {
  return kind == CalibrationKind::kIdentity ? "identity" : "logistic";
}

double Calibrator::operator()(double x) const {
  if (kind == CalibrationKind::kIdentity) return x;
  return 1.0 / (1.0 + std::exp(-(weight * x + bias)));
}

namespace {

// log(1 + exp(z)) without overflow.
double log1p_exp(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

struct FitResult {
  double weight = 0.0;
  double bias = 0.0;
  bool converged = false;
};

// Summed log-loss plus (l2/2) * weight^2 — the scikit-learn convention
// (l2 = 1/C) — evaluated in per-example mean form for conditioning. The
// bias is unpenalized.
double objective(const std::vector<double>& s, const std::vector<int>& y,
                 const std::vector<size_t>& idx, double w, double b, double l2) {
  double loss = 0.0;
  for (size_t i : idx) {
    double z = w * s[i] + b;
    loss += log1p_exp(z) - (y[i] ? z : 0.0);
  }
  double n = static_cast<double>(idx.size());
  return (loss + 0.5 * l2 * w * w) / n;
}

// Damped Newton on the two-parameter problem.
FitResult newton_fit(const std::vector<double>& s, const std::vector<int>& y,
                     const std::vector<size_t>& idx, double l2,
                     int max_iters = 500, double tol = 1e-8) {
  double w = 0.0, b = 0.0;
  double n = static_cast<double>(idx.size());
  FitResult best{w, b, false};
  double cur = objective(s, y, idx, w, b, l2);

  for (int iter = 0; iter < max_iters; ++iter) {
    double gw = l2 * w / n, gb = 0.0;
    double hww = l2 / n, hwb = 0.0, hbb = 0.0;
    for (size_t i : idx) {
      double z = w * s[i] + b;
      double p = 1.0 / (1.0 + std::exp(-z));
      double e = (p - y[i]) / n;
      double q = std::max(p * (1.0 - p), 1e-12) / n;
      gw += e * s[i];
      gb += e;
      hww += q * s[i] * s[i];
      hwb += q * s[i];
      hbb += q;
    }
    double grad_norm = std::sqrt(gw * gw + gb * gb);
    if (grad_norm <= tol) {
      return FitResult{w, b, true};
    }
    double det = hww * hbb - hwb * hwb;
    double dw, db;
    if (std::abs(det) < 1e-300) {
      dw = gw;  // fall back to gradient descent
      db = gb;
    } else {
      dw = (hbb * gw - hwb * gb) / det;
      db = (hww * gb - hwb * gw) / det;
    }
    double step = 1.0;
    double nw = w - dw, nb = b - db;
    double next = objective(s, y, idx, nw, nb, l2);
    int halvings = 0;
    while (!(next < cur) && halvings < 60) {
      step *= 0.5;
      nw = w - step * dw;
      nb = b - step * db;
      next = objective(s, y, idx, nw, nb, l2);
      ++halvings;
    }
    if (!(next < cur)) break;  // no further progress possible
    w = nw;
    b = nb;
    cur = next;
  }
  best.weight = w;
  best.bias = b;
  best.converged = false;
  return best;
}

double validation_logloss(const std::vector<double>& s, const std::vector<int>& y,
                          const std::vector<size_t>& idx, double w, double b) {
  double loss = 0.0;
  for (size_t i : idx) {
    double z = w * s[i] + b;
    loss += log1p_exp(z) - (y[i] ? z : 0.0);
  }
  return loss / static_cast<double>(idx.size());
}

}  // namespace

Calibrator fit_logistic(const std::vector<double>& scores,
                        const std::vector<int>& labels,
                        const std::vector<double>& l2_grid, int folds,
                        std::uint64_t seed) {
  if (scores.size() != labels.size()) {
    throw DataError("fit_logistic: scores and labels differ in length");
  }
  if (folds < 2) throw UsageError("fit_logistic: folds must be >= 2");
  if (scores.size() < 2 * static_cast<size_t>(folds)) {
    throw DataError("fit_logistic: need at least 2*folds data points, got " +
                    std::to_string(scores.size()));
  }
  if (l2_grid.empty()) throw UsageError("fit_logistic: empty l2 grid");

  std::vector<size_t> pos, neg;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw DataError("fit_logistic: non-finite score at index " + std::to_string(i));
    }
    if (labels[i] != 0 && labels[i] != 1) {
      throw DataError("fit_logistic: labels must be 0 or 1");
    }
    (labels[i] ? pos : neg).push_back(i);
  }
  if (pos.empty() || neg.empty()) {
    throw DataError("fit_logistic: both classes must be present");
  }
  for (double l2 : l2_grid) {
    if (!(l2 > 0.0)) throw UsageError("fit_logistic: l2 strengths must be positive");
  }

  // Stratified folds: shuffle each class, deal round-robin.
  auto engine = make_engine(mix_seed(seed, 0x5f01d));
  std::shuffle(pos.begin(), pos.end(), engine);
  std::shuffle(neg.begin(), neg.end(), engine);
  std::vector<std::vector<size_t>> fold_of(folds);
  for (size_t i = 0; i < pos.size(); ++i) fold_of[i % folds].push_back(pos[i]);
  for (size_t i = 0; i < neg.size(); ++i) fold_of[i % folds].push_back(neg[i]);

  std::vector<double> grid = l2_grid;
  std::sort(grid.begin(), grid.end());

  double best_l2 = grid.front();
  double best_loss = std::numeric_limits<double>::infinity();
  for (double l2 : grid) {
    double mean_loss = 0.0;
    int used = 0;
    for (int f = 0; f < folds; ++f) {
      if (fold_of[f].empty()) continue;
      std::vector<size_t> train;
      for (int g = 0; g < folds; ++g) {
        if (g == f) continue;
        train.insert(train.end(), fold_of[g].begin(), fold_of[g].end());
      }
      FitResult r = newton_fit(scores, labels, train, l2);
      mean_loss += validation_logloss(scores, labels, fold_of[f], r.weight, r.bias);
      ++used;
    }
    mean_loss /= static_cast<double>(used);
    if (mean_loss < best_loss) {  // strict: ties keep the smaller l2
      best_loss = mean_loss;
      best_l2 = l2;
    }
  }

  std::vector<size_t> all(scores.size());
  std::iota(all.begin(), all.end(), 0);
  FitResult final = newton_fit(scores, labels, all, best_l2);
  if (!std::isfinite(final.weight) || !std::isfinite(final.bias)) {
    throw NumericError("fit_logistic: diverged to non-finite parameters");
  }
  if (!final.converged) {
    std::cerr << "warning: fit_logistic did not reach gradient tolerance; "
                 "returning best iterate\n";
  }
  if (final.weight <= 0.0) {
    std::cerr << "warning: fitted logistic weight " << final.weight
              << " is not positive; calibrated ranking may invert\n";
  }

  Calibrator c;
  c.kind = CalibrationKind::kLogistic;
  c.weight = final.weight;
  c.bias = final.bias;
  c.l2 = best_l2;
  c.converged = final.converged;
  return c;
}

TrainingPairs build_training_pairs(const ModelRun& run, const GoldSet& gold,
                                   AnswerType type) {
  TrainingPairs pairs;
  pairs.scores.reserve(run.predictions.size());
  pairs.labels.reserve(run.predictions.size());
  for (const auto& [id, ex] : run.predictions) {
    auto git = gold.annotations.find(id);
    if (git == gold.annotations.end()) {
      throw DataError("build_training_pairs: example '" + id + "' missing from gold");
    }
    const auto& list = ex.answers(type);
    if (list.empty()) {
      std::cerr << "warning: example '" << id << "' has no "
                << answer_type_name(type) << " candidates; skipped\n";
      continue;
    }
    bool answerable =
        annotations_answerable(git->second, gold.min_agreement, type);
    bool correct = answerable && is_correct(list.front().span, git->second, type);
    pairs.scores.push_back(list.front().score);
    pairs.labels.push_back(correct ? 1 : 0);
  }
  return pairs;
}

std::vector<Candidate> apply(const Calibrator& calibrator,
                             const std::vector<Candidate>& candidates) {
  std::vector<Candidate> out = candidates;
  for (auto& c : out) c.score = calibrator(c.score);
  canonicalize_candidates(out, 0);
  return out;
}

const Calibrator& CalibratorSet::get(const std::string& model_id,
                                     AnswerType t) const {
  static const Calibrator identity{};
  auto it = by_model.find(model_id);
  if (it == by_model.end()) return identity;
  return it->second.get(t);
}

CalibratorSet fit_calibrators(const std::vector<ModelRun>& runs,
                              const GoldSet& gold_train,
                              const std::vector<double>& l2_grid, int folds,
                              std::uint64_t seed) {
  CalibratorSet set;
  for (const auto& run : runs) {
    ModelCalibrators mc;
    for (AnswerType type : {AnswerType::kLong, AnswerType::kShort}) {
      // Only dev-train examples carry a label; fit on the intersection.
      ModelRun train_slice;
      train_slice.model_id = run.model_id;
      for (const auto& [id, ex] : run.predictions) {
        if (gold_train.annotations.count(id)) train_slice.predictions[id] = ex;
      }
      TrainingPairs pairs = build_training_pairs(train_slice, gold_train, type);
      Calibrator cal = fit_logistic(
          pairs.scores, pairs.labels, l2_grid, folds,
          mix_seed(seed, std::hash<std::string>{}(run.model_id),
                   static_cast<std::uint64_t>(type)));
      (type == AnswerType::kLong ? mc.long_answer : mc.short_answer) = cal;
    }
    set.by_model[run.model_id] = mc;
  }
  return set;
}

}  // namespace nqens
