#pragma once

#include <string>
#include <vector>

#include "nqens/model.hpp"

namespace nqens {

// Dev-train / dev-test partition as ordered file lists.
struct SplitSpec {
  std::vector<std::string> train_files;
  std::vector<std::string> test_files;
};

// Prediction JSONL, one object per line:
//   {"example_id": "<str>",
//    "long":  [{"start": int, "end": int, "score": float}, ...],
//    "short": [...same...]}
// Candidate lists are re-sorted by score on load, truncated to top_m and
// ranked 1..n; input ranks are never trusted.
ModelRun load_model_run(const std::string& path, const std::string& model_id,
                        int top_m = 20);

// Gold JSONL, one object per line:
//   {"example_id": "<str>",
//    "annotations": [{"long": {"start","end"} | null,
//                     "short_sets": [{"start","end"}, ...]}, ...]}
// Files are merged; an example_id appearing twice (within or across files)
// is an error.
GoldSet load_gold(const std::vector<std::string>& paths, int min_agreement = 2);

// First n_train files become the train set, the remainder the test set.
SplitSpec split_by_files(const std::vector<std::string>& gold_files, int n_train);

void write_model_run(const ModelRun& run, const std::string& path);
void write_gold(const GoldSet& gold, const std::string& path);

// Splits the gold set into `shards` contiguous (by example_id) JSONL files
// named <stem>_0.jsonl .. and returns their paths.
std::vector<std::string> write_gold_sharded(const GoldSet& gold,
                                            const std::string& dir,
                                            const std::string& stem, int shards);

// Final-prediction JSONL:
//   {"example_id", "long": {"start","end","score"}, "short": {...}}
PredictionMap load_predictions(const std::string& path);
void write_predictions(const PredictionMap& preds, std::ostream& out);
void write_predictions(const PredictionMap& preds, const std::string& path);

}  // namespace nqens
