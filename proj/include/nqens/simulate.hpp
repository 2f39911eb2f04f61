#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nqens/model.hpp"

namespace nqens {

// Controls the synthetic gold + model-run generator. Models share a
// per-example difficulty latent: with probability `correlation` a model's
// success draw uses the shared difficulty instead of its own, so errors
// cluster on hard examples while each model's marginal rank-1 accuracy
// stays at skill[i].
struct SimConfig {
  int n_examples = 0;
  int n_models = 0;
  int n_annotators = 5;
  double answerable_rate = 0.65;
  std::vector<double> skill;  // one entry per model, each in [0, 1]
  double correlation = 0.0;
  int top_m = 20;
  double duplicate_rate = 0.0;
  std::uint64_t seed = 0;
};

struct SimOutput {
  GoldSet gold;
  std::vector<ModelRun> runs;
};

// Fully deterministic given cfg.seed; example and model substreams are
// seeded independently so output never depends on generation order.
SimOutput generate(const SimConfig& cfg);

struct SimFiles {
  std::vector<std::string> model_files;
  std::vector<std::string> gold_files;
};

// Writes the runs and the (optionally sharded) gold set under dir using the
// standard JSONL schemas. Model files are named <model_id>.jsonl.
SimFiles write_sim_output(const SimOutput& out, const std::string& dir,
                          int gold_shards = 1);

}  // namespace nqens
