#pragma once

#include <json.hpp>

#include "nqens/calibrate.hpp"
#include "nqens/evaluate.hpp"
#include "nqens/ingest.hpp"
#include "nqens/search.hpp"

namespace nqens {

// Report fields are rounded half-even to 4 decimals; a -inf threshold
// (answer everything) serializes as null.
nlohmann::json eval_report_to_json(const EvalReport& report);

nlohmann::json calibrator_to_json(const Calibrator& c);
Calibrator calibrator_from_json(const nlohmann::json& j);

nlohmann::json calibrator_set_to_json(const CalibratorSet& set);
CalibratorSet calibrator_set_from_json(const nlohmann::json& j);

nlohmann::json search_result_to_json(const SearchResult& result);

nlohmann::json split_spec_to_json(const SplitSpec& spec);
SplitSpec split_spec_from_json(const nlohmann::json& j);

}  // namespace nqens
