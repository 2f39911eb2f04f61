#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "nqens/errors.hpp"
#include "nqens/evaluate.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace nqens;

namespace {

const double kNegInf = -std::numeric_limits<double>::infinity();

// Gold with `answerable` examples answered by all annotators at (10e, 10e+5)
// / (10e+1, 10e+2), the rest unanswered.
GoldSet simple_gold(int n, int answerable) {
  GoldSet gold;
  gold.min_agreement = 1;
  for (int e = 0; e < n; ++e) {
    GoldAnnotation ann;
    if (e < answerable) {
      ann.long_answer = Span{10 * e, 10 * e + 5};
      ann.short_answers.push_back(Span{10 * e + 1, 10 * e + 2});
    }
    gold.annotations.emplace("q" + std::to_string(e),
                             std::vector<GoldAnnotation>{ann});
  }
  return gold;
}

FinalPrediction pred(const std::string& id, Span long_span, double long_score,
                     Span short_span, double short_score) {
  FinalPrediction fp;
  fp.example_id = id;
  fp.long_answer = long_span;
  fp.long_score = long_score;
  fp.short_answer = short_span;
  fp.short_score = short_score;
  return fp;
}

}  // namespace

TEST_CASE("exact-match rules for long answers") {
  std::vector<GoldAnnotation> gold(1);
  gold[0].long_answer = Span{10, 20};
  CHECK(is_correct_long(Span{10, 20}, gold));
  CHECK_FALSE(is_correct_long(Span{10, 21}, gold));
  CHECK_FALSE(is_correct_long(kNullSpan, gold));  // null abstains, never correct

  std::vector<GoldAnnotation> empty(3);
  CHECK_FALSE(is_correct_long(Span{10, 20}, empty));
}

TEST_CASE("exact-match rules for short answers require a singleton set") {
  std::vector<GoldAnnotation> gold(1);
  gold[0].long_answer = Span{0, 30};
  gold[0].short_answers = {Span{5, 7}};
  CHECK(is_correct_short(Span{5, 7}, gold));
  CHECK_FALSE(is_correct_short(Span{5, 8}, gold));
  CHECK_FALSE(is_correct_short(kNullSpan, gold));

  gold[0].short_answers = {Span{5, 7}, Span{9, 11}};  // multi-span set
  CHECK_FALSE(is_correct_short(Span{5, 7}, gold));

  gold[0].short_answers.clear();
  CHECK_FALSE(is_correct_short(Span{5, 7}, gold));
}

// Four predictions (0.9 correct), (0.8 wrong), (0.7 correct), (0.6 wrong)
// over 3 answerable examples. Sweeping the observed scores:
//   t = -inf: P = 2/4, R = 2/3, F1 = 4/7
//   t = 0.6:  P = 2/3, R = 2/3, F1 = 2/3   <- optimum
//   t = 0.7:  P = 1/2, R = 1/3, F1 = 0.4
//   t = 0.8:  P = 1/1, R = 1/3, F1 = 0.5
//   t = 0.9:  no attempts, F1 = 0
// The dense-grid oracle confirms 2/3 at runtime below.
TEST_CASE("optimal threshold picks the best operating point") {
  GoldSet gold = simple_gold(4, 3);
  PredictionMap preds;
  preds.emplace("q0", pred("q0", Span{0, 5}, 0.9, Span{1, 2}, 0.9));      // correct
  preds.emplace("q1", pred("q1", Span{16, 19}, 0.8, Span{16, 17}, 0.8)); // wrong
  preds.emplace("q2", pred("q2", Span{20, 25}, 0.7, Span{21, 22}, 0.7)); // correct
  preds.emplace("q3", pred("q3", Span{36, 39}, 0.6, Span{36, 37}, 0.6)); // wrong

  EvalReport report = evaluate(preds, gold);
  CHECK(report.long_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(report.long_threshold == 0.6);
  CHECK(report.long_precision == doctest::Approx(2.0 / 3.0));
  CHECK(report.long_recall == doctest::Approx(2.0 / 3.0));
  CHECK(report.short_f1 == doctest::Approx(2.0 / 3.0));
  CHECK(report.n_examples == 4);

  EvalReport dense = oracle::evaluate_dense_grid(preds, gold);
  CHECK(report.long_f1 == dense.long_f1);
  CHECK(report.short_f1 == dense.short_f1);
}

TEST_CASE("all-correct predictions score F1 = 1 at threshold -inf") {
  GoldSet gold = simple_gold(5, 5);
  PredictionMap preds;
  for (int e = 0; e < 5; ++e) {
    std::string id = "q" + std::to_string(e);
    preds.emplace(id, pred(id, Span{10 * e, 10 * e + 5}, 0.1 * e,
                           Span{10 * e + 1, 10 * e + 2}, 0.1 * e));
  }
  EvalReport report = evaluate(preds, gold);
  CHECK(report.long_f1 == 1.0);
  CHECK(report.short_f1 == 1.0);
  CHECK(report.long_threshold == kNegInf);
}

TEST_CASE("all-null predictions score F1 = 0") {
  GoldSet gold = simple_gold(4, 4);
  PredictionMap preds;
  for (int e = 0; e < 4; ++e) {
    std::string id = "q" + std::to_string(e);
    preds.emplace(id, pred(id, kNullSpan, 0.9, kNullSpan, 0.9));
  }
  EvalReport report = evaluate(preds, gold);
  CHECK(report.long_f1 == 0.0);
  CHECK(report.short_f1 == 0.0);
}

TEST_CASE("empty gold set is an error; missing predictions are nulls") {
  CHECK_THROWS_AS(evaluate({}, GoldSet{}), DataError);

  GoldSet gold = simple_gold(3, 3);
  PredictionMap preds;
  preds.emplace("q0", pred("q0", Span{0, 5}, 0.9, Span{1, 2}, 0.9));
  EvalReport report = evaluate(preds, gold);  // q1, q2 missing -> null
  CHECK(report.n_examples == 3);
  CHECK(report.long_recall == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("score-set sweep equals the dense-grid oracle on random instances") {
  std::mt19937_64 rng(555);
  for (int trial = 0; trial < 40; ++trial) {
    auto inst = testutil::random_eval_instance(rng, 60);
    EvalReport fast = evaluate(inst.preds, inst.gold);
    EvalReport by_scores = oracle::evaluate_by_scores(inst.preds, inst.gold);
    EvalReport dense = oracle::evaluate_dense_grid(inst.preds, inst.gold, 4000);
    CHECK(fast.long_f1 == by_scores.long_f1);
    CHECK(fast.short_f1 == by_scores.short_f1);
    CHECK(fast.long_threshold == by_scores.long_threshold);
    CHECK(fast.short_threshold == by_scores.short_threshold);
    CHECK(fast.long_f1 == dense.long_f1);
    CHECK(fast.short_f1 == dense.short_f1);
  }
}

TEST_CASE("flipping a wrong attempt to correct never lowers optimal F1") {
  std::mt19937_64 rng(777);
  int flipped = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto inst = testutil::random_eval_instance(rng, 40);
    EvalReport before = evaluate(inst.preds, inst.gold);
    // find an attempted, answerable, incorrect long prediction
    for (auto& [id, fp] : inst.preds) {
      const auto& annotations = inst.gold.annotations.at(id);
      bool answerable = annotations_answerable(annotations, inst.gold.min_agreement,
                                               AnswerType::kLong);
      if (fp.long_answer.is_null() || !answerable ||
          is_correct_long(fp.long_answer, annotations)) {
        continue;
      }
      for (const auto& a : annotations) {
        if (a.long_answer) {
          fp.long_answer = *a.long_answer;
          ++flipped;
          break;
        }
      }
      break;
    }
    EvalReport after = evaluate(inst.preds, inst.gold);
    CHECK(after.long_f1 >= before.long_f1 - 1e-15);
  }
  CHECK(flipped > 10);  // the generator actually produced flippable cases
}

TEST_CASE("optimal threshold dominates any fixed threshold") {
  std::mt19937_64 rng(888);
  for (int trial = 0; trial < 30; ++trial) {
    auto inst = testutil::random_eval_instance(rng, 40);
    EvalReport best = evaluate(inst.preds, inst.gold);
    for (int probe = 0; probe < 20; ++probe) {
      double t = std::uniform_real_distribution<double>(-0.2, 1.2)(rng);
      long attempts = 0, correct = 0, answerable = 0;
      for (const auto& [id, annotations] : inst.gold.annotations) {
        bool ans = annotations_answerable(annotations, inst.gold.min_agreement,
                                          AnswerType::kShort);
        if (ans) ++answerable;
        auto it = inst.preds.find(id);
        if (it == inst.preds.end() || it->second.short_answer.is_null()) continue;
        if (it->second.short_score > t) {
          ++attempts;
          if (ans && is_correct_short(it->second.short_answer, annotations)) {
            ++correct;
          }
        }
      }
      double p = attempts ? double(correct) / attempts : 0.0;
      double r = answerable ? double(correct) / answerable : 0.0;
      double f1 = (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
      CHECK(best.short_f1 >= f1 - 1e-15);
    }
  }
}

TEST_CASE("optimal F1 is invariant under strictly increasing score transforms") {
  std::mt19937_64 rng(999);
  for (int trial = 0; trial < 30; ++trial) {
    auto inst = testutil::random_eval_instance(rng, 50);
    EvalReport base = evaluate(inst.preds, inst.gold);

    auto transformed = inst.preds;
    int which = trial % 3;
    for (auto& [id, fp] : transformed) {
      auto f = [&](double x) {
        switch (which) {
          case 0: return 3.0 * x + 1.5;
          case 1: return std::exp(x);
          default: return std::atan(x) * 2.0;
        }
      };
      fp.long_score = f(fp.long_score);
      fp.short_score = f(fp.short_score);
    }
    EvalReport mapped = evaluate(transformed, inst.gold);
    CHECK(mapped.long_f1 == doctest::Approx(base.long_f1).epsilon(1e-12));
    CHECK(mapped.short_f1 == doctest::Approx(base.short_f1).epsilon(1e-12));
  }
}
