#include "nqens/ingest.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "nqens/errors.hpp"

namespace nqens {

using nlohmann::json;

namespace {

[[noreturn]] void fail_at(const std::string& path, size_t line,
                          const std::string& what) {
  throw DataError(path + ":" + std::to_string(line) + ": " + what);
}

int read_index(const json& j, const char* key, const std::string& path,
               size_t line) {
  if (!j.contains(key) || !j[key].is_number_integer()) {
    fail_at(path, line, std::string("span field '") + key +
                            "' must be an integer");
  }
  return j[key].get<int>();
}

Span read_span(const json& j, const std::string& path, size_t line) {
  try {
    return make_span(read_index(j, "start", path, line),
                     read_index(j, "end", path, line));
  } catch (const DataError& e) {
    fail_at(path, line, e.what());
  }
}

std::vector<Candidate> read_candidates(const json& j, const char* key,
                                       const std::string& path, size_t line) {
  if (!j.contains(key) || !j[key].is_array()) {
    fail_at(path, line, std::string("missing candidate array '") + key + "'");
  }
  std::vector<Candidate> out;
  out.reserve(j[key].size());
  for (const auto& cj : j[key]) {
    if (!cj.is_object()) fail_at(path, line, "candidate must be an object");
    Candidate c;
    c.span = read_span(cj, path, line);
    if (!cj.contains("score") || !cj["score"].is_number()) {
      fail_at(path, line, "candidate 'score' must be a number");
    }
    c.score = cj["score"].get<double>();
    if (!std::isfinite(c.score)) {
      fail_at(path, line, "candidate score must be finite");
    }
    out.push_back(c);
  }
  return out;
}

std::string read_example_id(const json& j, const std::string& path, size_t line) {
  if (!j.contains("example_id") || !j["example_id"].is_string()) {
    fail_at(path, line, "'example_id' must be a string");
  }
  std::string id = j["example_id"].get<std::string>();
  if (id.empty()) fail_at(path, line, "'example_id' must be non-empty");
  return id;
}

json parse_line(const std::string& text, const std::string& path, size_t line) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail_at(path, line, std::string("malformed JSON: ") + e.what());
  }
}

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  return out;
}

json span_to_json(const Span& s) {
  return json{{"start", s.start}, {"end", s.end}};
}

}  // namespace

ModelRun load_model_run(const std::string& path, const std::string& model_id,
                        int top_m) {
  if (top_m <= 0) throw UsageError("load_model_run: top_m must be positive");
  auto in = open_for_read(path);
  ModelRun run;
  run.model_id = model_id;

  std::string text;
  size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    json j = parse_line(text, path, line);
    ExamplePredictions ex;
    ex.example_id = read_example_id(j, path, line);
    ex.long_answers = read_candidates(j, "long", path, line);
    ex.short_answers = read_candidates(j, "short", path, line);
    canonicalize_candidates(ex.long_answers, top_m);
    canonicalize_candidates(ex.short_answers, top_m);
    if (!run.predictions.emplace(ex.example_id, std::move(ex)).second) {
      fail_at(path, line, "duplicate example_id '" +
                              j["example_id"].get<std::string>() + "'");
    }
  }
  return run;
}

GoldSet load_gold(const std::vector<std::string>& paths, int min_agreement) {
  if (min_agreement < 1) throw UsageError("load_gold: min_agreement must be >= 1");
  GoldSet gold;
  gold.min_agreement = min_agreement;
  for (const auto& path : paths) {
    auto in = open_for_read(path);
    std::string text;
    size_t line = 0;
    while (std::getline(in, text)) {
      ++line;
      if (text.empty()) continue;
      json j = parse_line(text, path, line);
      std::string id = read_example_id(j, path, line);
      if (!j.contains("annotations") || !j["annotations"].is_array() ||
          j["annotations"].empty()) {
        fail_at(path, line, "'annotations' must be a non-empty array");
      }
      std::vector<GoldAnnotation> annotations;
      for (const auto& aj : j["annotations"]) {
        GoldAnnotation a;
        if (aj.contains("long") && !aj["long"].is_null()) {
          a.long_answer = read_span(aj["long"], path, line);
        }
        if (aj.contains("short_sets")) {
          if (!aj["short_sets"].is_array()) {
            fail_at(path, line, "'short_sets' must be an array");
          }
          for (const auto& sj : aj["short_sets"]) {
            a.short_answers.push_back(read_span(sj, path, line));
          }
        }
        if (!a.long_answer.has_value() && !a.short_answers.empty()) {
          fail_at(path, line,
                  "annotation has short answers without a long answer");
        }
        annotations.push_back(std::move(a));
      }
      if (!gold.annotations.emplace(id, std::move(annotations)).second) {
        fail_at(path, line, "duplicate example_id '" + id + "'");
      }
    }
  }
  return gold;
}

SplitSpec split_by_files(const std::vector<std::string>& gold_files, int n_train) {
  if (n_train < 1) throw UsageError("split: n_train must be >= 1");
  if (static_cast<size_t>(n_train) >= gold_files.size()) {
    throw UsageError("split: n_train = " + std::to_string(n_train) +
                     " leaves no test files (" +
                     std::to_string(gold_files.size()) + " files given)");
  }
  SplitSpec spec;
  spec.train_files.assign(gold_files.begin(), gold_files.begin() + n_train);
  spec.test_files.assign(gold_files.begin() + n_train, gold_files.end());
  return spec;
}

void write_model_run(const ModelRun& run, const std::string& path) {
  auto out = open_for_write(path);
  for (const auto& [id, ex] : run.predictions) {
    json j;
    j["example_id"] = id;
    for (const char* key : {"long", "short"}) {
      json arr = json::array();
      const auto& list =
          key[0] == 'l' ? ex.long_answers : ex.short_answers;
      for (const auto& c : list) {
        json cj = span_to_json(c.span);
        cj["score"] = c.score;
        arr.push_back(std::move(cj));
      }
      j[key] = std::move(arr);
    }
    out << j.dump() << "\n";
  }
}

namespace {

json gold_line(const std::string& id, const std::vector<GoldAnnotation>& annotations) {
  json j;
  j["example_id"] = id;
  json arr = json::array();
  for (const auto& a : annotations) {
    json aj;
    aj["long"] = a.long_answer.has_value() ? span_to_json(*a.long_answer)
                                           : json(nullptr);
    json sets = json::array();
    for (const auto& s : a.short_answers) sets.push_back(span_to_json(s));
    aj["short_sets"] = std::move(sets);
    arr.push_back(std::move(aj));
  }
  j["annotations"] = std::move(arr);
  return j;
}

}  // namespace

void write_gold(const GoldSet& gold, const std::string& path) {
  auto out = open_for_write(path);
  for (const auto& [id, annotations] : gold.annotations) {
    out << gold_line(id, annotations).dump() << "\n";
  }
}

std::vector<std::string> write_gold_sharded(const GoldSet& gold,
                                            const std::string& dir,
                                            const std::string& stem, int shards) {
  if (shards < 1) throw UsageError("write_gold_sharded: shards must be >= 1");
  std::filesystem::create_directories(dir);
  size_t n = gold.annotations.size();
  std::vector<std::string> paths;
  auto it = gold.annotations.begin();
  size_t remaining = n;
  for (int s = 0; s < shards; ++s) {
    size_t take = remaining / static_cast<size_t>(shards - s);
    std::string path =
        (std::filesystem::path(dir) / (stem + "_" + std::to_string(s) + ".jsonl"))
            .string();
    auto out = open_for_write(path);
    for (size_t i = 0; i < take; ++i, ++it) {
      out << gold_line(it->first, it->second).dump() << "\n";
    }
    remaining -= take;
    paths.push_back(std::move(path));
  }
  return paths;
}

PredictionMap load_predictions(const std::string& path) {
  auto in = open_for_read(path);
  PredictionMap preds;
  std::string text;
  size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    json j = parse_line(text, path, line);
    FinalPrediction fp;
    fp.example_id = read_example_id(j, path, line);
    for (const char* key : {"long", "short"}) {
      if (!j.contains(key) || !j[key].is_object()) {
        fail_at(path, line, std::string("missing prediction object '") + key + "'");
      }
      const json& pj = j[key];
      Span span = read_span(pj, path, line);
      if (!pj.contains("score") || !pj["score"].is_number()) {
        fail_at(path, line, "prediction 'score' must be a number");
      }
      double score = pj["score"].get<double>();
      if (key[0] == 'l') {
        fp.long_answer = span;
        fp.long_score = score;
      } else {
        fp.short_answer = span;
        fp.short_score = score;
      }
    }
    if (violates_null_join(fp)) {
      fail_at(path, line, "null long answer paired with non-null short answer");
    }
    if (!preds.emplace(fp.example_id, std::move(fp)).second) {
      fail_at(path, line, "duplicate example_id");
    }
  }
  return preds;
}

void write_predictions(const PredictionMap& preds, std::ostream& out) {
  for (const auto& [id, fp] : preds) {
    json j;
    j["example_id"] = id;
    json lj = span_to_json(fp.long_answer);
    lj["score"] = fp.long_score;
    json sj = span_to_json(fp.short_answer);
    sj["score"] = fp.short_score;
    j["long"] = std::move(lj);
    j["short"] = std::move(sj);
    out << j.dump() << "\n";
  }
}

void write_predictions(const PredictionMap& preds, const std::string& path) {
  auto out = open_for_write(path);
  write_predictions(preds, out);
}

}  // namespace nqens
