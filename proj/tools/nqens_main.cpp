// nqens: span-prediction ensembling pipeline over JSONL prediction/gold
// files. Subcommands: simulate, split, calibrate, combine, eval, search.
// Results go to stdout; diagnostics and the run manifest go to stderr.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "nqens/errors.hpp"
#include "nqens/ingest.hpp"
#include "nqens/manifest.hpp"
#include "nqens/search.hpp"
#include "nqens/serialize.hpp"
#include "nqens/simulate.hpp"

using nlohmann::json;
using namespace nqens;

namespace {

// JSON config file whose keys mirror the long flag names; values here act
// as defaults, so explicitly passed flags always win.
struct ConfigSource {
  json values = json::object();
  std::set<std::string> used;

  template <typename T>
  void get(const char* key, T& var) {
    used.insert(key);
    if (values.contains(key)) var = values[key].get<T>();
  }

  void warn_unused() const {
    for (auto it = values.begin(); it != values.end(); ++it) {
      if (!used.count(it.key())) {
        std::cerr << "warning: config key '" << it.key()
                  << "' does not match any flag of this command\n";
      }
    }
  }
};

ConfigSource load_config(int argc, char** argv) {
  ConfigSource cfg;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    std::string path;
    if (arg == "--config" && i + 1 < argc) {
      path = argv[i + 1];
    } else if (arg.rfind("--config=", 0) == 0) {
      path = arg.substr(9);
    } else {
      continue;
    }
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    try {
      cfg.values = json::parse(in);
    } catch (const json::parse_error& e) {
      throw UsageError("config file '" + path + "': " + e.what());
    }
    if (!cfg.values.is_object()) {
      throw UsageError("config file '" + path + "' must hold a JSON object");
    }
    break;
  }
  return cfg;
}

struct ManifestClock {
  RunManifest manifest;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::string out_path;

  void emit() {
    manifest.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::string text = manifest.to_json().dump();
    std::cerr << "manifest: " << text << "\n";
    if (!out_path.empty()) {
      std::ofstream out(out_path);
      if (!out) throw DataError("cannot write manifest to '" + out_path + "'");
      out << text << "\n";
    }
  }
};

std::string model_id_from_path(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

std::vector<ModelRun> load_runs(const std::vector<std::string>& paths, int top_m,
                                ManifestClock& mc) {
  std::vector<ModelRun> runs;
  std::set<std::string> ids;
  for (const auto& p : paths) {
    std::string id = model_id_from_path(p);
    if (!ids.insert(id).second) {
      throw UsageError("duplicate model id '" + id + "' among run files");
    }
    mc.manifest.add_input(p);
    runs.push_back(load_model_run(p, id, top_m));
  }
  return runs;
}

GoldSet load_gold_tracked(const std::vector<std::string>& paths, int min_agreement,
                          ManifestClock& mc) {
  for (const auto& p : paths) mc.manifest.add_input(p);
  return load_gold(paths, min_agreement);
}

void write_output(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump() << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw DataError("cannot open '" + out_path + "' for writing");
    out << j.dump() << "\n";
  }
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
  SimConfig cfg;
  std::vector<double> skill_flag;
  std::string out_dir;
  int gold_shards = 1;
};

int run_simulate(SimulateOpts& o, ManifestClock& mc) {
  if (o.skill_flag.empty()) o.skill_flag = {0.6};
  if (o.skill_flag.size() == 1) {
    o.cfg.skill.assign(static_cast<size_t>(o.cfg.n_models), o.skill_flag[0]);
  } else {
    o.cfg.skill = o.skill_flag;
  }

  mc.manifest.command = "simulate";
  mc.manifest.seed = o.cfg.seed;
  mc.manifest.config = {
      {"n-examples", o.cfg.n_examples},   {"n-models", o.cfg.n_models},
      {"n-annotators", o.cfg.n_annotators},
      {"answerable-rate", o.cfg.answerable_rate},
      {"skill", o.cfg.skill},             {"correlation", o.cfg.correlation},
      {"top-m", o.cfg.top_m},             {"duplicate-rate", o.cfg.duplicate_rate},
      {"seed", o.cfg.seed},               {"out-dir", o.out_dir},
      {"gold-shards", o.gold_shards}};

  SimOutput out = generate(o.cfg);
  SimFiles files = write_sim_output(out, o.out_dir, o.gold_shards);

  json j;
  j["model_files"] = files.model_files;
  j["gold_files"] = files.gold_files;
  j["n_examples"] = o.cfg.n_examples;
  std::cout << j.dump() << "\n";
  mc.emit();
  return 0;
}

// ------------------------------------------------------------------- split

struct SplitOpts {
  std::vector<std::string> files;
  int n_train = 3;
};

int run_split(SplitOpts& o, ManifestClock& mc) {
  mc.manifest.command = "split";
  mc.manifest.config = {{"files", o.files}, {"n-train", o.n_train}};
  SplitSpec spec = split_by_files(o.files, o.n_train);
  std::cout << split_spec_to_json(spec).dump() << "\n";
  mc.emit();
  return 0;
}

// --------------------------------------------------------------- calibrate

struct CalibrateOpts {
  std::vector<std::string> runs;
  std::vector<std::string> gold_train;
  int top_m = 20;
  int min_agreement = 2;
  std::vector<double> l2_grid = default_l2_grid();
  int folds = 5;
  std::uint64_t seed = 0;
};

int run_calibrate(CalibrateOpts& o, ManifestClock& mc) {
  mc.manifest.command = "calibrate";
  mc.manifest.seed = o.seed;
  mc.manifest.config = {{"runs", o.runs},       {"gold-train", o.gold_train},
                        {"top-m", o.top_m},     {"min-agreement", o.min_agreement},
                        {"l2-grid", o.l2_grid}, {"folds", o.folds},
                        {"seed", o.seed}};

  auto runs = load_runs(o.runs, o.top_m, mc);
  GoldSet gold = load_gold_tracked(o.gold_train, o.min_agreement, mc);
  CalibratorSet set = fit_calibrators(runs, gold, o.l2_grid, o.folds, o.seed);
  std::cout << calibrator_set_to_json(set).dump() << "\n";
  mc.emit();
  return 0;
}

// ----------------------------------------------------------------- combine

struct CombineOpts {
  std::vector<std::string> runs;
  std::string agg = "max";
  double beta = 0.5;
  std::string calibration = "identity";
  std::string calibrators_file;
  int top_m = 20;
  bool require_containment = false;
  std::string out;
};

CalibratorSet resolve_calibrators(CalibrationKind kind, const std::string& file,
                                  ManifestClock& mc) {
  CalibratorSet set;
  if (kind != CalibrationKind::kLogistic) return set;
  if (file.empty()) {
    throw UsageError("logistic calibration requires --calibrators (fit them "
                     "with the calibrate command)");
  }
  mc.manifest.add_input(file);
  std::ifstream in(file);
  if (!in) throw DataError("cannot open calibrators file '" + file + "'");
  try {
    return calibrator_set_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw DataError("calibrators file '" + file + "': " + e.what());
  }
}

int run_combine(CombineOpts& o, ManifestClock& mc) {
  mc.manifest.command = "combine";
  mc.manifest.config = {{"runs", o.runs},
                        {"agg", o.agg},
                        {"beta", o.beta},
                        {"calibration", o.calibration},
                        {"calibrators", o.calibrators_file},
                        {"top-m", o.top_m},
                        {"require-containment", o.require_containment},
                        {"out", o.out}};

  EnsembleSpec spec;
  spec.settings.strategy = parse_aggregation(o.agg, o.beta);
  spec.settings.calibration = parse_calibration(o.calibration);
  spec.settings.require_containment = o.require_containment;
  spec.top_m = o.top_m;

  CalibratorSet cals = resolve_calibrators(spec.settings.calibration,
                                           o.calibrators_file, mc);
  auto runs = load_runs(o.runs, o.top_m, mc);
  std::vector<const ModelRun*> ptrs;
  for (const auto& r : runs) {
    spec.members.push_back(r.model_id);
    ptrs.push_back(&r);
  }

  PredictionMap preds = combine_runs(ptrs, spec, cals);
  if (o.out.empty()) {
    write_predictions(preds, std::cout);
  } else {
    write_predictions(preds, o.out);
  }
  mc.emit();
  return 0;
}

// -------------------------------------------------------------------- eval

struct EvalOpts {
  std::string preds;
  std::vector<std::string> gold;
  int min_agreement = 2;
  std::string out;
};

int run_eval(EvalOpts& o, ManifestClock& mc) {
  mc.manifest.command = "eval";
  mc.manifest.config = {{"preds", o.preds},
                        {"gold", o.gold},
                        {"min-agreement", o.min_agreement},
                        {"out", o.out}};
  mc.manifest.add_input(o.preds);
  PredictionMap preds = load_predictions(o.preds);
  GoldSet gold = load_gold_tracked(o.gold, o.min_agreement, mc);
  EvalReport report = evaluate(preds, gold);
  write_output(eval_report_to_json(report), o.out);
  mc.emit();
  return 0;
}

// ------------------------------------------------------------------ search

struct SearchOpts {
  std::vector<std::string> pool;
  std::vector<std::string> gold_train;
  std::vector<std::string> gold_test;
  std::string split_file;
  std::string strategy = "greedy";
  std::string objective = "short";
  int k = 4;
  std::string agg = "max";
  double beta = 0.5;
  std::string calibration = "identity";
  std::string calibrators_file;
  int top_m = 20;
  int min_agreement = 2;
  bool exact_size = false;
  int pool_cap = 20;
  bool force = false;
  int threads = 0;
  std::uint64_t seed = 0;
  bool paper_final = false;
  bool require_containment = false;
  std::string out_preds;
};

CalibratorSet search_calibrators(const SearchOpts& o, CalibrationKind kind,
                                 const std::vector<ModelRun>& runs,
                                 const GoldSet& gold_train, ManifestClock& mc) {
  if (kind != CalibrationKind::kLogistic) return {};
  if (!o.calibrators_file.empty()) {
    return resolve_calibrators(kind, o.calibrators_file, mc);
  }
  return fit_calibrators(runs, gold_train, default_l2_grid(), 5, o.seed);
}

int run_search(SearchOpts& o, ManifestClock& mc) {
  mc.manifest.command = "search";
  mc.manifest.seed = o.seed;
  mc.manifest.config = {{"pool", o.pool},
                        {"gold-train", o.gold_train},
                        {"gold-test", o.gold_test},
                        {"split", o.split_file},
                        {"strategy", o.strategy},
                        {"objective", o.objective},
                        {"k", o.k},
                        {"agg", o.agg},
                        {"beta", o.beta},
                        {"calibration", o.calibration},
                        {"calibrators", o.calibrators_file},
                        {"top-m", o.top_m},
                        {"min-agreement", o.min_agreement},
                        {"exact-size", o.exact_size},
                        {"pool-cap", o.pool_cap},
                        {"force", o.force},
                        {"threads", o.threads},
                        {"seed", o.seed},
                        {"paper-final", o.paper_final},
                        {"require-containment", o.require_containment},
                        {"out-preds", o.out_preds}};

  if (!o.split_file.empty()) {
    mc.manifest.add_input(o.split_file);
    std::ifstream in(o.split_file);
    if (!in) throw DataError("cannot open split file '" + o.split_file + "'");
    SplitSpec spec = split_spec_from_json(json::parse(in));
    o.gold_train = spec.train_files;
    o.gold_test = spec.test_files;
  }
  if (o.gold_train.empty() || o.gold_test.empty()) {
    throw UsageError("search requires --gold-train and --gold-test (or --split)");
  }
  if (o.threads <= 0) {
    o.threads = static_cast<int>(std::thread::hardware_concurrency());
    if (o.threads <= 0) o.threads = 1;
  }

  auto runs = load_runs(o.pool, o.top_m, mc);
  GoldSet gold_train = load_gold_tracked(o.gold_train, o.min_agreement, mc);
  GoldSet gold_test = load_gold_tracked(o.gold_test, o.min_agreement, mc);

  SearchConfig cfg;
  cfg.k = o.k;
  cfg.objective = parse_objective(o.objective);
  cfg.exact_size = o.exact_size;
  cfg.pool_cap = o.pool_cap;
  cfg.force = o.force;

  auto make_evaluator = [&](const std::string& agg, CalibrationKind cal) {
    CombineSettings settings;
    settings.strategy = parse_aggregation(agg, o.beta);
    settings.calibration = cal;
    settings.require_containment = o.require_containment;
    CalibratorSet cals = search_calibrators(o, cal, runs, gold_train, mc);
    return EnsembleEvaluator(runs, settings, cals, gold_train, o.threads);
  };

  PredictionMap preds_out;
  json output;

  if (o.paper_final) {
    // Final-submission recipe: short answers from a greedy long-answer
    // search under max aggregation, long answers from a greedy long-answer
    // search under logistic-calibrated noisy-or.
    cfg.objective = Objective::kLong;
    auto eval_max = make_evaluator("max", CalibrationKind::kIdentity);
    SearchResult r_max = greedy_search(eval_max, cfg);
    evaluate_on_test(r_max, eval_max, gold_test);

    auto eval_nor = make_evaluator("noisyor", CalibrationKind::kLogistic);
    SearchResult r_nor = greedy_search(eval_nor, cfg);
    evaluate_on_test(r_nor, eval_nor, gold_test);

    auto short_idx = [&](EnsembleEvaluator& ev, const std::vector<std::string>& ids) {
      std::vector<int> idx;
      for (const auto& id : ids) {
        for (int i = 0; i < ev.pool_size(); ++i) {
          if (ev.pool_ids()[static_cast<size_t>(i)] == id) idx.push_back(i);
        }
      }
      return idx;
    };
    PredictionMap short_preds =
        eval_max.combine_subset(short_idx(eval_max, r_max.short_members));
    PredictionMap long_preds =
        eval_nor.combine_subset(short_idx(eval_nor, r_nor.long_members));
    preds_out = join_predictions(short_preds, long_preds);

    SearchResult final_result;
    final_result.short_members = r_max.short_members;
    final_result.long_members = r_nor.long_members;
    final_result.train_report = evaluate(preds_out, gold_train);
    final_result.test_report = evaluate(preds_out, gold_test);

    output["paper_final"] = true;
    output["max_search"] = search_result_to_json(r_max);
    output["noisyor_search"] = search_result_to_json(r_nor);
    output["final"] = search_result_to_json(final_result);
  } else {
    auto evaluator = make_evaluator(o.agg, parse_calibration(o.calibration));
    if (o.strategy == "seed") {
      SearchResult result = seed_ensemble(evaluator, o.k);
      evaluate_on_test(result, evaluator, gold_test);
      output = search_result_to_json(result);
      preds_out = evaluator.combine_subset(
          [&] {
            std::vector<int> idx(static_cast<size_t>(o.k));
            std::iota(idx.begin(), idx.end(), 0);
            return idx;
          }());
    } else if (o.strategy == "exhaustive") {
      auto [best_short, best_long] = exhaustive_search(evaluator, cfg);
      evaluate_on_test(best_short, evaluator, gold_test);
      evaluate_on_test(best_long, evaluator, gold_test);
      output["best_short"] = search_result_to_json(best_short);
      output["best_long"] = search_result_to_json(best_long);
      const SearchResult& chosen =
          cfg.objective == Objective::kShort ? best_short : best_long;
      std::vector<int> idx;
      for (const auto& id : chosen.short_members) {
        for (int i = 0; i < evaluator.pool_size(); ++i) {
          if (evaluator.pool_ids()[static_cast<size_t>(i)] == id) idx.push_back(i);
        }
      }
      preds_out = evaluator.combine_subset(idx);
    } else if (o.strategy == "greedy") {
      SearchResult result = greedy_search(evaluator, cfg);
      evaluate_on_test(result, evaluator, gold_test);
      output = search_result_to_json(result);
      auto idx_of = [&](const std::vector<std::string>& ids) {
        std::vector<int> idx;
        for (const auto& id : ids) {
          for (int i = 0; i < evaluator.pool_size(); ++i) {
            if (evaluator.pool_ids()[static_cast<size_t>(i)] == id) idx.push_back(i);
          }
        }
        return idx;
      };
      preds_out =
          join_predictions(evaluator.combine_subset(idx_of(result.short_members)),
                           evaluator.combine_subset(idx_of(result.long_members)));
    } else {
      throw UsageError("unknown strategy '" + o.strategy +
                       "' (expected seed|exhaustive|greedy)");
    }
  }

  if (!o.out_preds.empty()) write_predictions(preds_out, o.out_preds);
  std::cout << output.dump() << "\n";
  mc.emit();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::string config_path, manifest_path;
  ManifestClock mc;

  CLI::App app{"Span-prediction ensembling: calibration, aggregation, "
               "combination, search and optimal-threshold F1 evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  try {
    ConfigSource cfg = load_config(argc, argv);

    SimulateOpts sim;
    auto* c_sim = app.add_subcommand("simulate",
                                     "Generate synthetic gold and model-run files");
    cfg.get("n-examples", sim.cfg.n_examples);
    cfg.get("n-models", sim.cfg.n_models);
    cfg.get("n-annotators", sim.cfg.n_annotators);
    cfg.get("answerable-rate", sim.cfg.answerable_rate);
    cfg.get("skill", sim.skill_flag);
    cfg.get("correlation", sim.cfg.correlation);
    cfg.get("top-m", sim.cfg.top_m);
    cfg.get("duplicate-rate", sim.cfg.duplicate_rate);
    cfg.get("seed", sim.cfg.seed);
    cfg.get("out-dir", sim.out_dir);
    cfg.get("gold-shards", sim.gold_shards);
    c_sim->add_option("--n-examples", sim.cfg.n_examples)->capture_default_str();
    c_sim->add_option("--n-models", sim.cfg.n_models)->capture_default_str();
    c_sim->add_option("--n-annotators", sim.cfg.n_annotators)->capture_default_str();
    c_sim->add_option("--answerable-rate", sim.cfg.answerable_rate)->capture_default_str();
    c_sim->add_option("--skill", sim.skill_flag,
                      "Per-model skill (single value broadcasts)")->expected(-1);
    c_sim->add_option("--correlation", sim.cfg.correlation)->capture_default_str();
    c_sim->add_option("--top-m", sim.cfg.top_m)->capture_default_str();
    c_sim->add_option("--duplicate-rate", sim.cfg.duplicate_rate)->capture_default_str();
    c_sim->add_option("--seed", sim.cfg.seed)->capture_default_str();
    c_sim->add_option("--out-dir", sim.out_dir)->required(!cfg.values.contains("out-dir"));
    c_sim->add_option("--gold-shards", sim.gold_shards)->capture_default_str();

    SplitOpts spl;
    auto* c_split = app.add_subcommand("split", "Partition gold files into "
                                                "dev-train and dev-test");
    cfg.get("files", spl.files);
    cfg.get("n-train", spl.n_train);
    c_split->add_option("--files", spl.files)->expected(-1)
        ->required(!cfg.values.contains("files"));
    c_split->add_option("--n-train", spl.n_train)->capture_default_str();

    CalibrateOpts cal;
    auto* c_cal = app.add_subcommand("calibrate",
                                     "Fit per-model logistic score calibrators");
    cfg.get("runs", cal.runs);
    cfg.get("gold-train", cal.gold_train);
    cfg.get("top-m", cal.top_m);
    cfg.get("min-agreement", cal.min_agreement);
    cfg.get("l2-grid", cal.l2_grid);
    cfg.get("folds", cal.folds);
    cfg.get("seed", cal.seed);
    c_cal->add_option("--runs", cal.runs)->expected(-1)
        ->required(!cfg.values.contains("runs"));
    c_cal->add_option("--gold-train", cal.gold_train)->expected(-1)
        ->required(!cfg.values.contains("gold-train"));
    c_cal->add_option("--top-m", cal.top_m)->capture_default_str();
    c_cal->add_option("--min-agreement", cal.min_agreement)->capture_default_str();
    c_cal->add_option("--l2-grid", cal.l2_grid)->expected(-1);
    c_cal->add_option("--folds", cal.folds)->capture_default_str();
    c_cal->add_option("--seed", cal.seed)->capture_default_str();

    CombineOpts cmb;
    auto* c_cmb = app.add_subcommand("combine",
                                     "Fuse model runs into one prediction per example");
    cfg.get("runs", cmb.runs);
    cfg.get("agg", cmb.agg);
    cfg.get("beta", cmb.beta);
    cfg.get("calibration", cmb.calibration);
    cfg.get("calibrators", cmb.calibrators_file);
    cfg.get("top-m", cmb.top_m);
    cfg.get("require-containment", cmb.require_containment);
    cfg.get("out", cmb.out);
    c_cmb->add_option("--runs", cmb.runs)->expected(-1)
        ->required(!cfg.values.contains("runs"));
    c_cmb->add_option("--agg", cmb.agg, "max|rrs|expsum|noisyor")->capture_default_str();
    c_cmb->add_option("--beta", cmb.beta)->capture_default_str();
    c_cmb->add_option("--calibration", cmb.calibration, "identity|logistic")
        ->capture_default_str();
    c_cmb->add_option("--calibrators", cmb.calibrators_file,
                      "Calibrator JSON from the calibrate command");
    c_cmb->add_option("--top-m", cmb.top_m)->capture_default_str();
    c_cmb->add_flag("--require-containment", cmb.require_containment);
    c_cmb->add_option("--out", cmb.out, "Write predictions here instead of stdout");

    EvalOpts evl;
    auto* c_evl = app.add_subcommand("eval", "Optimal-threshold F1 of a "
                                             "prediction file against gold");
    cfg.get("preds", evl.preds);
    cfg.get("gold", evl.gold);
    cfg.get("min-agreement", evl.min_agreement);
    cfg.get("out", evl.out);
    c_evl->add_option("--preds", evl.preds)->required(!cfg.values.contains("preds"));
    c_evl->add_option("--gold", evl.gold)->expected(-1)
        ->required(!cfg.values.contains("gold"));
    c_evl->add_option("--min-agreement", evl.min_agreement)->capture_default_str();
    c_evl->add_option("--out", evl.out, "Write the report here instead of stdout");

    SearchOpts srch;
    auto* c_srch = app.add_subcommand("search", "Select an ensemble from a "
                                                "pool of model runs");
    cfg.get("pool", srch.pool);
    cfg.get("gold-train", srch.gold_train);
    cfg.get("gold-test", srch.gold_test);
    cfg.get("split", srch.split_file);
    cfg.get("strategy", srch.strategy);
    cfg.get("objective", srch.objective);
    cfg.get("k", srch.k);
    cfg.get("agg", srch.agg);
    cfg.get("beta", srch.beta);
    cfg.get("calibration", srch.calibration);
    cfg.get("calibrators", srch.calibrators_file);
    cfg.get("top-m", srch.top_m);
    cfg.get("min-agreement", srch.min_agreement);
    cfg.get("exact-size", srch.exact_size);
    cfg.get("pool-cap", srch.pool_cap);
    cfg.get("force", srch.force);
    cfg.get("threads", srch.threads);
    cfg.get("seed", srch.seed);
    cfg.get("paper-final", srch.paper_final);
    cfg.get("require-containment", srch.require_containment);
    cfg.get("out-preds", srch.out_preds);
    c_srch->add_option("--pool", srch.pool)->expected(-1)
        ->required(!cfg.values.contains("pool"));
    c_srch->add_option("--gold-train", srch.gold_train)->expected(-1);
    c_srch->add_option("--gold-test", srch.gold_test)->expected(-1);
    c_srch->add_option("--split", srch.split_file,
                       "Split-spec JSON produced by the split command");
    c_srch->add_option("--strategy", srch.strategy, "seed|exhaustive|greedy")
        ->capture_default_str();
    c_srch->add_option("--objective", srch.objective, "short|long")
        ->capture_default_str();
    c_srch->add_option("--k", srch.k)->capture_default_str();
    c_srch->add_option("--agg", srch.agg)->capture_default_str();
    c_srch->add_option("--beta", srch.beta)->capture_default_str();
    c_srch->add_option("--calibration", srch.calibration)->capture_default_str();
    c_srch->add_option("--calibrators", srch.calibrators_file);
    c_srch->add_option("--top-m", srch.top_m)->capture_default_str();
    c_srch->add_option("--min-agreement", srch.min_agreement)->capture_default_str();
    c_srch->add_flag("--exact-size", srch.exact_size,
                     "Exhaustive: subsets of size exactly k instead of 1..k");
    c_srch->add_option("--pool-cap", srch.pool_cap)->capture_default_str();
    c_srch->add_flag("--force", srch.force, "Override the exhaustive pool cap");
    c_srch->add_option("--threads", srch.threads,
                       "Parallel ensemble evaluations (0 = all processors)");
    c_srch->add_option("--seed", srch.seed)->capture_default_str();
    c_srch->add_flag("--paper-final", srch.paper_final,
                     "Greedy long search; short from max, long from "
                     "calibrated noisy-or");
    c_srch->add_flag("--require-containment", srch.require_containment);
    c_srch->add_option("--out-preds", srch.out_preds,
                       "Also write the selected ensemble's predictions");

    for (auto* sub : {c_sim, c_split, c_cal, c_cmb, c_evl, c_srch}) {
      sub->add_option("--config", config_path, "JSON config; flags win");
      sub->add_option("--manifest", manifest_path,
                      "Also write the run manifest to this file");
    }

    cfg.warn_unused();

    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      std::cerr << "usage error: " << e.what() << "\n";
      return 1;
    }

    mc.out_path = manifest_path;
    if (app.got_subcommand(c_sim)) return run_simulate(sim, mc);
    if (app.got_subcommand(c_split)) return run_split(spl, mc);
    if (app.got_subcommand(c_cal)) return run_calibrate(cal, mc);
    if (app.got_subcommand(c_cmb)) return run_combine(cmb, mc);
    if (app.got_subcommand(c_evl)) return run_eval(evl, mc);
    if (app.got_subcommand(c_srch)) return run_search(srch, mc);
    throw UsageError("no subcommand given");
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
