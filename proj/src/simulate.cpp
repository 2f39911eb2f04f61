#include "nqens/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "nqens/errors.hpp"
#include "nqens/ingest.hpp"
#include "nqens/rng.hpp"

namespace nqens {

namespace {

// Generation constants. Scores live on an unbounded logit-like scale so
// that noisy-or without logistic calibration is a genuine range error and
// logistic calibration has signal to recover.
constexpr double kTopSigma = 0.5;
constexpr double kMuCorrect = 2.2;       // answerable, gold ranked first
constexpr double kMuWrongTop = 1.0;      // answerable, distractor ranked first
constexpr double kMuNullTop = 1.6;       // unanswerable, model abstains
constexpr double kMuOverconfident = 1.2; // unanswerable, distractor ranked first
constexpr double kMuShortLeak = 0.8;     // unanswerable, short list led by distractor

constexpr double kAnnotatorMarkRate = 0.75;  // stochastic annotators, answerable
constexpr double kAnnotatorShortRate = 0.8;
constexpr double kNoiseMarkRate = 0.1;       // last annotator, unanswerable
constexpr double kGoldOnFailureRate = 0.5;
constexpr double kNullTopShortRate = 0.7;

int deterministic_annotators(int n_annotators) {
  return std::max(1, static_cast<int>(std::ceil(0.6 * n_annotators)));
}

void validate(const SimConfig& cfg) {
  if (cfg.n_examples < 1) throw UsageError("simulate: n_examples must be >= 1");
  if (cfg.n_models < 1) throw UsageError("simulate: n_models must be >= 1");
  if (cfg.n_annotators < 1) throw UsageError("simulate: n_annotators must be >= 1");
  if (cfg.top_m < 1) throw UsageError("simulate: top_m must be >= 1");
  if (cfg.skill.size() != static_cast<size_t>(cfg.n_models)) {
    throw UsageError("simulate: skill list must have one entry per model");
  }
  for (double s : cfg.skill) {
    if (!(s >= 0.0 && s <= 1.0)) throw UsageError("simulate: skill must be in [0, 1]");
  }
  for (double r : {cfg.answerable_rate, cfg.correlation, cfg.duplicate_rate}) {
    if (!(r >= 0.0 && r <= 1.0)) throw UsageError("simulate: rates must be in [0, 1]");
  }
}

std::string example_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "ex%06d", i);
  return buf;
}

std::string model_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "m%02d", i);
  return buf;
}

double uniform(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {  // inclusive
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double normal(std::mt19937_64& rng, double mu, double sigma) {
  return std::normal_distribution<double>(mu, sigma)(rng);
}

bool bernoulli(std::mt19937_64& rng, double p) { return uniform(rng) < p; }

// Everything the example itself determines: latent answerability, shared
// difficulty, gold spans, the candidate-span universes every model draws
// from, and the annotations.
struct ExampleWorld {
  std::string id;
  bool answerable = false;
  double difficulty = 0.0;  // shared success draw
  Span gold_long;
  Span gold_short;
  std::vector<Span> long_universe;
  std::vector<Span> short_universe;
  std::vector<GoldAnnotation> annotations;

  const std::vector<Span>& universe(AnswerType t) const {
    return t == AnswerType::kLong ? long_universe : short_universe;
  }
  Span gold(AnswerType t) const {
    return t == AnswerType::kLong ? gold_long : gold_short;
  }
};

std::vector<Span> make_universe(std::mt19937_64& rng, int doc_len, int count,
                                int min_len, int max_len, const Span& exclude) {
  std::set<Span> spans;
  while (static_cast<int>(spans.size()) < count) {
    int len = uniform_int(rng, min_len, max_len);
    int start = uniform_int(rng, 0, std::max(0, doc_len - len - 1));
    Span s{start, start + len};
    if (s == exclude) continue;
    spans.insert(s);
  }
  return std::vector<Span>(spans.begin(), spans.end());
}

ExampleWorld build_world(const SimConfig& cfg, int index) {
  auto rng = make_engine(mix_seed(cfg.seed, 0xEA11, static_cast<std::uint64_t>(index)));
  ExampleWorld world;
  world.id = example_name(index);
  world.answerable = bernoulli(rng, cfg.answerable_rate);
  world.difficulty = uniform(rng);

  int doc_len = uniform_int(rng, 300, 900);
  int long_len = uniform_int(rng, 30, 60);
  int long_start = uniform_int(rng, 0, doc_len - long_len - 1);
  world.gold_long = Span{long_start, long_start + long_len};
  int short_len = uniform_int(rng, 1, 3);
  int short_start =
      uniform_int(rng, long_start, long_start + long_len - short_len - 1);
  world.gold_short = Span{short_start, short_start + short_len};

  int universe_size = std::max(2 * cfg.top_m, 16);
  world.long_universe =
      make_universe(rng, doc_len, universe_size, 25, 70, world.gold_long);
  world.short_universe =
      make_universe(rng, doc_len, universe_size, 1, 5, world.gold_short);

  // Annotators: the first few are deterministic on answerable examples so
  // that latent answerability and gold answerability coincide exactly at
  // min_agreement = 2; at most one annotator ever marks an unanswerable
  // example, and only when it is not one of the deterministic ones.
  int n_det = deterministic_annotators(cfg.n_annotators);
  for (int a = 0; a < cfg.n_annotators; ++a) {
    GoldAnnotation ann;
    if (world.answerable) {
      bool marks = a < n_det || bernoulli(rng, kAnnotatorMarkRate);
      if (marks) {
        ann.long_answer = world.gold_long;
        if (a < n_det || bernoulli(rng, kAnnotatorShortRate)) {
          ann.short_answers.push_back(world.gold_short);
        }
      }
    } else if (a == cfg.n_annotators - 1 && a >= n_det &&
               bernoulli(rng, kNoiseMarkRate)) {
      ann.long_answer =
          world.long_universe[uniform_int(rng, 0, universe_size - 1)];
      if (bernoulli(rng, 0.15)) {
        ann.short_answers.push_back(
            world.short_universe[uniform_int(rng, 0, universe_size - 1)]);
      }
    }
    world.annotations.push_back(std::move(ann));
  }
  return world;
}

// Ordered span plan for one candidate list, rank 1 first, plus the mean of
// the top score. Scores are assigned afterwards as a strictly decreasing
// sequence so the planned order is exactly the ranked order.
struct ListPlan {
  std::vector<Span> order;
  double mu_top = 0.0;
};

std::vector<Span> sample_distractors(const std::vector<Span>& universe, int count,
                                     std::mt19937_64& rng) {
  std::vector<int> idx(universe.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<Span> out;
  out.reserve(count);
  for (int i = 0; i < count && i < static_cast<int>(idx.size()); ++i) {
    out.push_back(universe[idx[i]]);
  }
  return out;
}

void insert_at(std::vector<Span>& order, size_t pos, const Span& span) {
  pos = std::min(pos, order.size());
  order.insert(order.begin() + static_cast<long>(pos), span);
}

ListPlan plan_list(const ExampleWorld& world, AnswerType type, bool success,
                   int base_len, std::mt19937_64& rng) {
  ListPlan plan;
  auto distractors = sample_distractors(world.universe(type), base_len, rng);
  auto take = [&](int n) {
    std::vector<Span> head(distractors.begin(),
                           distractors.begin() + std::min<size_t>(n, distractors.size()));
    return head;
  };

  if (world.answerable) {
    if (success) {
      plan.mu_top = kMuCorrect;
      plan.order.push_back(world.gold(type));
      auto rest = take(base_len - 2);
      plan.order.insert(plan.order.end(), rest.begin(), rest.end());
      size_t null_pos = 1 + plan.order.size() * 2 / 3 +
                        uniform_int(rng, 0, 2);
      insert_at(plan.order, null_pos, kNullSpan);
    } else {
      plan.mu_top = kMuWrongTop;
      plan.order = take(base_len - 2);
      if (plan.order.empty()) plan.order = take(1);
      if (bernoulli(rng, kGoldOnFailureRate) && plan.order.size() >= 2) {
        size_t pos = static_cast<size_t>(
            uniform_int(rng, 1, static_cast<int>(std::min<size_t>(5, plan.order.size()))));
        insert_at(plan.order, pos, world.gold(type));
      }
      size_t null_pos = 1 + plan.order.size() * 2 / 3 + uniform_int(rng, 0, 2);
      insert_at(plan.order, null_pos, kNullSpan);
    }
  } else {
    if (success) {
      bool null_leads =
          type == AnswerType::kLong || bernoulli(rng, kNullTopShortRate);
      if (null_leads) {
        plan.mu_top = kMuNullTop;
        plan.order.push_back(kNullSpan);
        auto rest = take(base_len - 1);
        plan.order.insert(plan.order.end(), rest.begin(), rest.end());
      } else {
        // Short list led by a distractor while the long list abstains:
        // exercises the null-join rule downstream.
        plan.mu_top = kMuShortLeak;
        plan.order = take(base_len - 1);
        insert_at(plan.order, 1 + uniform_int(rng, 0, 2), kNullSpan);
      }
    } else {
      plan.mu_top = kMuOverconfident;
      plan.order = take(base_len - 1);
      size_t null_pos = plan.order.size() / 2 +
                        uniform_int(rng, 0, static_cast<int>(plan.order.size() / 2));
      insert_at(plan.order, std::max<size_t>(null_pos, 1), kNullSpan);
    }
  }
  return plan;
}

std::vector<Candidate> realize_list(const ListPlan& plan, double duplicate_rate,
                                    int top_m, std::mt19937_64& rng) {
  std::vector<Candidate> out;
  out.reserve(plan.order.size() * 2);
  double score = normal(rng, plan.mu_top, kTopSigma);
  for (const auto& span : plan.order) {
    out.push_back(Candidate{span, score, 0});
    score -= 0.08 + std::abs(normal(rng, 0.0, 0.3));
  }
  // Near-duplicate entries: the same span again at a strictly lower score,
  // as overlapping document strides would produce.
  size_t base = out.size();
  for (size_t i = 0; i < base; ++i) {
    if (bernoulli(rng, duplicate_rate)) {
      double drop = 0.1 + std::abs(normal(rng, 0.0, 0.25));
      out.push_back(Candidate{out[i].span, out[i].score - drop, 0});
    }
  }
  canonicalize_candidates(out, top_m);
  return out;
}

}  // namespace

SimOutput generate(const SimConfig& cfg) {
  validate(cfg);
  SimOutput out;
  out.gold.min_agreement = std::min(2, deterministic_annotators(cfg.n_annotators));
  out.runs.resize(cfg.n_models);
  for (int m = 0; m < cfg.n_models; ++m) {
    out.runs[m].model_id = model_name(m);
  }

  int base_len = std::clamp(
      static_cast<int>(std::llround(cfg.top_m * (1.0 - cfg.duplicate_rate))), 3,
      cfg.top_m);

  for (int e = 0; e < cfg.n_examples; ++e) {
    ExampleWorld world = build_world(cfg, e);
    out.gold.annotations.emplace(world.id, world.annotations);

    for (int m = 0; m < cfg.n_models; ++m) {
      auto rng = make_engine(mix_seed(cfg.seed, 0xA0de1 + static_cast<std::uint64_t>(m),
                                      static_cast<std::uint64_t>(e)));
      // Correlated success: with prob `correlation` the draw is the shared
      // per-example difficulty, otherwise the model's own.
      double v = bernoulli(rng, cfg.correlation) ? world.difficulty : uniform(rng);
      bool success = v >= 1.0 - cfg.skill[m];

      ExamplePredictions ep;
      ep.example_id = world.id;
      ListPlan long_plan = plan_list(world, AnswerType::kLong, success, base_len, rng);
      ep.long_answers = realize_list(long_plan, cfg.duplicate_rate, cfg.top_m, rng);
      ListPlan short_plan = plan_list(world, AnswerType::kShort, success, base_len, rng);
      ep.short_answers = realize_list(short_plan, cfg.duplicate_rate, cfg.top_m, rng);
      out.runs[m].predictions.emplace(world.id, std::move(ep));
    }
  }
  return out;
}

SimFiles write_sim_output(const SimOutput& out, const std::string& dir,
                          int gold_shards) {
  std::filesystem::create_directories(dir);
  SimFiles files;
  for (const auto& run : out.runs) {
    std::string path =
        (std::filesystem::path(dir) / (run.model_id + ".jsonl")).string();
    write_model_run(run, path);
    files.model_files.push_back(std::move(path));
  }
  files.gold_files = write_gold_sharded(out.gold, dir, "gold", gold_shards);
  return files;
}

}  // namespace nqens
