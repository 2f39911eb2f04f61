#include "nqens/serialize.hpp"

#include <cmath>

#include "nqens/errors.hpp"

namespace nqens {

using nlohmann::json;

namespace {

// Half-even (the default FE_TONEAREST mode of nearbyint) to 4 decimals.
json round4(double x) {
  if (!std::isfinite(x)) return json(nullptr);
  return std::nearbyint(x * 1e4) / 1e4;
}

}  // namespace

json eval_report_to_json(const EvalReport& r) {
  json j;
  j["long_f1"] = round4(r.long_f1);
  j["long_precision"] = round4(r.long_precision);
  j["long_recall"] = round4(r.long_recall);
  j["long_threshold"] = round4(r.long_threshold);
  j["short_f1"] = round4(r.short_f1);
  j["short_precision"] = round4(r.short_precision);
  j["short_recall"] = round4(r.short_recall);
  j["short_threshold"] = round4(r.short_threshold);
  j["n_examples"] = r.n_examples;
  return j;
}

json calibrator_to_json(const Calibrator& c) {
  return json{{"kind", calibration_name(c.kind)},
              {"weight", c.weight},
              {"bias", c.bias},
              {"l2", c.l2}};
}

Calibrator calibrator_from_json(const json& j) {
  Calibrator c;
  c.kind = parse_calibration(j.at("kind").get<std::string>());
  c.weight = j.at("weight").get<double>();
  c.bias = j.at("bias").get<double>();
  c.l2 = j.at("l2").get<double>();
  return c;
}

json calibrator_set_to_json(const CalibratorSet& set) {
  json j = json::object();
  for (const auto& [model_id, mc] : set.by_model) {
    j[model_id] = json{{"long", calibrator_to_json(mc.long_answer)},
                       {"short", calibrator_to_json(mc.short_answer)}};
  }
  return j;
}

CalibratorSet calibrator_set_from_json(const json& j) {
  if (!j.is_object()) throw DataError("calibrator file must hold a JSON object");
  CalibratorSet set;
  for (auto it = j.begin(); it != j.end(); ++it) {
    ModelCalibrators mc;
    mc.long_answer = calibrator_from_json(it.value().at("long"));
    mc.short_answer = calibrator_from_json(it.value().at("short"));
    set.by_model[it.key()] = mc;
  }
  return set;
}

json search_result_to_json(const SearchResult& result) {
  json j;
  j["short_members"] = result.short_members;
  j["long_members"] = result.long_members;
  j["train_report"] = eval_report_to_json(result.train_report);
  j["test_report"] = eval_report_to_json(result.test_report);
  j["objective_train_f1"] = round4(result.objective_train_f1);
  json trace = json::array();
  for (const auto& step : result.trace) {
    trace.push_back({{"added", step.added}, {"objective_f1", round4(step.objective_f1)}});
  }
  j["greedy_trace"] = std::move(trace);
  return j;
}

json split_spec_to_json(const SplitSpec& spec) {
  return json{{"train_files", spec.train_files}, {"test_files", spec.test_files}};
}

SplitSpec split_spec_from_json(const json& j) {
  SplitSpec spec;
  spec.train_files = j.at("train_files").get<std::vector<std::string>>();
  spec.test_files = j.at("test_files").get<std::vector<std::string>>();
  if (spec.train_files.empty() || spec.test_files.empty()) {
    throw DataError("split spec: train and test file lists must be non-empty");
  }
  return spec;
}

}  // namespace nqens
