#include <doctest.h>

#include <algorithm>
#include <random>

#include "nqens/errors.hpp"
#include "nqens/model.hpp"

using namespace nqens;

TEST_CASE("make_span validates its inputs") {
  CHECK(make_span(3, 7) == Span{3, 7});
  CHECK(make_span(-1, -1) == kNullSpan);
  CHECK(make_span(-1, -1).is_null());
  CHECK_FALSE(make_span(0, 1).is_null());
  CHECK(make_span(3, 7).length() == 4);

  CHECK_THROWS_AS(make_span(5, 5), DataError);   // empty span
  CHECK_THROWS_AS(make_span(7, 3), DataError);
  CHECK_THROWS_AS(make_span(-1, 5), DataError);  // mismatched null halves
  CHECK_THROWS_AS(make_span(5, -1), DataError);
  CHECK_THROWS_AS(make_span(-2, 4), DataError);
}

TEST_CASE("span ordering is a total order") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> d(0, 6);
  std::vector<Span> spans{kNullSpan};
  for (int i = 0; i < 200; ++i) {
    int s = d(rng);
    spans.push_back(Span{s, s + 1 + d(rng)});
  }
  for (const auto& a : spans) {
    for (const auto& b : spans) {
      // totality + antisymmetry
      CHECK(((a < b) + (b < a) + (a == b)) == 1);
      for (const auto& c : spans) {
        if (a < b && b < c) CHECK(a < c);
      }
    }
  }
  CHECK(kNullSpan < Span{0, 1});  // null sorts first
}

TEST_CASE("candidate canonicalization is deterministic and rank-stable") {
  std::mt19937_64 rng(7);
  std::vector<Candidate> base;
  for (int i = 0; i < 40; ++i) {
    int s = std::uniform_int_distribution<int>(0, 9)(rng);
    double score = std::uniform_int_distribution<int>(0, 4)(rng) / 4.0;  // force ties
    base.push_back(Candidate{Span{s, s + 2}, score, 0});
  }

  auto a = base;
  canonicalize_candidates(a, 0);
  for (int trial = 0; trial < 5; ++trial) {
    auto b = base;
    std::shuffle(b.begin(), b.end(), rng);
    canonicalize_candidates(b, 0);
    CHECK(a == b);
  }
  for (size_t i = 0; i + 1 < a.size(); ++i) {
    CHECK(a[i].rank == static_cast<int>(i) + 1);
    bool ordered = a[i].score > a[i + 1].score ||
                   (a[i].score == a[i + 1].score && a[i].span <= a[i + 1].span);
    CHECK(ordered);
  }

  auto truncated = base;
  canonicalize_candidates(truncated, 5);
  CHECK(truncated.size() == 5);
  CHECK(truncated.back().rank == 5);
}

TEST_CASE("gold answerability counts annotators against min_agreement") {
  GoldSet gold;
  gold.min_agreement = 2;
  std::vector<GoldAnnotation> annotations(5);
  annotations[0].long_answer = Span{4, 9};  // 1 of 5 marks a long answer
  gold.annotations["e"] = annotations;
  CHECK_FALSE(gold.answerable("e", AnswerType::kLong));
  CHECK_FALSE(gold.answerable("e", AnswerType::kShort));

  gold.annotations["e"][1].long_answer = Span{4, 9};
  CHECK(gold.answerable("e", AnswerType::kLong));

  gold.min_agreement = 1;
  CHECK(gold.answerable("e", AnswerType::kLong));
  CHECK_FALSE(gold.answerable("absent", AnswerType::kLong));
}

TEST_CASE("null-join violation detector") {
  FinalPrediction fp;
  fp.long_answer = kNullSpan;
  fp.short_answer = Span{3, 5};
  CHECK(violates_null_join(fp));
  fp.short_answer = kNullSpan;
  CHECK_FALSE(violates_null_join(fp));
  fp.long_answer = Span{0, 40};
  fp.short_answer = Span{3, 5};
  CHECK_FALSE(violates_null_join(fp));
}
