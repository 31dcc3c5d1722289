#include <CLI11.hpp>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>
#include <vector>

#include "magat/combat.hpp"
#include "magat/dataset.hpp"
#include "magat/error.hpp"
#include "magat/experiment.hpp"
#include "magat/fcn.hpp"
#include "magat/gat.hpp"
#include "magat/io.hpp"
#include "magat/rng.hpp"
#include "magat/synth.hpp"

namespace fs = std::filesystem;
using namespace magat;

namespace {

// Shared flags; unset optionals fall back to the config file's values.
struct CommonOpts {
  std::string config_path;
  std::string manifest;
  std::string out_dir = "runs";
  std::uint64_t seed = 0;
  int jobs = 0;
  int folds = 0;
  int k = 0;
  int smote_k = 0;
  double smote_multiplier = 0.0;
  bool no_smote = false;
  bool no_harmonize = false;
  std::string ensemble;

  bool seed_set = false, jobs_set = false, folds_set = false, k_set = false;
  bool smote_k_set = false, smote_mult_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "experiment config JSON");
  cmd->add_option("--manifest", o.manifest, "cohort manifest path");
  cmd->add_option("--out", o.out_dir, "output root (default: runs)");
  cmd->add_option("--seed", o.seed, "master seed")
      ->each([&o](const std::string&) { o.seed_set = true; });
  cmd->add_option("--jobs", o.jobs, "fold parallelism (0 = all cores)")
      ->each([&o](const std::string&) { o.jobs_set = true; });
  cmd->add_option("--folds", o.folds, "cross-validation fold count")
      ->each([&o](const std::string&) { o.folds_set = true; });
  cmd->add_option("--k", o.k, "KNN neighbor count for graph building")
      ->each([&o](const std::string&) { o.k_set = true; });
  cmd->add_option("--smote-k", o.smote_k, "SMOTE neighbor count")
      ->each([&o](const std::string&) { o.smote_k_set = true; });
  cmd->add_option("--smote-multiplier", o.smote_multiplier,
                  "SMOTE per-class size multiplier (2 = double)")
      ->each([&o](const std::string&) { o.smote_mult_set = true; });
  cmd->add_flag("--no-smote", o.no_smote, "disable SMOTE oversampling");
  cmd->add_flag("--no-harmonize", o.no_harmonize, "disable ComBat");
  cmd->add_option("--ensemble", o.ensemble,
                  "fusion method: vote, sum, wsum or all")
      ->check(CLI::IsMember({"vote", "sum", "wsum", "all"}));
}

ExperimentConfig resolve_config(const CommonOpts& o) {
  ExperimentConfig cfg;
  if (!o.config_path.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text_file(o.config_path));
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("config " + o.config_path + ": " + e.what());
    }
    cfg = experiment_config_from_json(j);
  }
  if (!o.manifest.empty()) cfg.manifest = o.manifest;
  if (o.seed_set) cfg.seed = o.seed;
  if (o.jobs_set) cfg.jobs = o.jobs;
  if (o.folds_set) cfg.fold_count = o.folds;
  if (o.k_set) cfg.knn_k = o.k;
  if (o.smote_k_set) cfg.smote_cfg.k_neighbors = o.smote_k;
  if (o.smote_mult_set) cfg.smote_cfg.multiplier = o.smote_multiplier;
  if (o.no_smote) cfg.smote = false;
  if (o.no_harmonize) cfg.harmonize = false;
  if (o.ensemble == "all")
    cfg.ensemble_methods = {"vote", "sum", "wsum"};
  else if (!o.ensemble.empty())
    cfg.ensemble_methods = {o.ensemble};
  return cfg;
}

fs::path make_run_dir(const ExperimentConfig& cfg, const std::string& out) {
  char name[64];
  std::snprintf(name, sizeof(name), "%s-seed%llu",
                experiment_config_hash(cfg).c_str(),
                static_cast<unsigned long long>(cfg.seed));
  fs::path dir = fs::path(out) / name;
  fs::create_directories(dir);
  write_text_file(dir / "resolved_config.json",
                  experiment_config_to_json(cfg).dump(2) + "\n");
  return dir;
}

Cohort load_cohort(const ExperimentConfig& cfg) {
  if (cfg.manifest.empty())
    throw DataError("no manifest given (use --manifest or the config file)");
  return load_manifest(cfg.manifest);
}

void parallel_folds(int fold_count, int jobs,
                    const std::function<void(int)>& fn) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min(jobs, fold_count));
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(fold_count);
  auto worker = [&]() {
    for (;;) {
      const int f = next.fetch_add(1);
      if (f >= fold_count) return;
      try {
        fn(f);
      } catch (...) {
        errors[f] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string fold_tag(int fold) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d", fold);
  return buf;
}

std::vector<int> atlas_indices(const Cohort& cohort,
                               const std::string& filter) {
  std::vector<int> out;
  for (std::size_t a = 0; a < cohort.atlases.size(); ++a)
    if (filter.empty() || cohort.atlases[a].name == filter)
      out.push_back(static_cast<int>(a));
  if (out.empty()) throw DataError("unknown atlas '" + filter + "'");
  return out;
}

int run_synth(const std::string& out, std::uint64_t seed, int subjects,
              int sites, int t, double signal, double site_shift) {
  SynthSpec spec;
  spec.seed = seed;
  spec.t = t;
  spec.signal_strength = signal;
  spec.site_shift = site_shift;
  if (sites < 1 || subjects < sites)
    throw DataError("synth: need >= 1 subject per site");
  spec.site_sizes.assign(sites, subjects / sites);
  for (int i = 0; i < subjects % sites; ++i) spec.site_sizes[i]++;
  generate_to_disk(spec, out);
  std::cout << "wrote " << spec.site_sizes.size() << "-site cohort ("
            << subjects << " subjects) to " << out << "\n";
  return 0;
}

int run_harmonize(const CommonOpts& opts, const std::string& atlas_filter) {
  ExperimentConfig cfg = resolve_config(opts);
  Cohort cohort = load_cohort(cfg);
  fs::path dir = make_run_dir(cfg, opts.out_dir);
  for (int a : atlas_indices(cohort, atlas_filter)) {
    const std::string& atlas = cohort.atlases[a].name;
    CombatModel model =
        fit_combat(cohort, atlas, cfg.harmonize_empirical_bayes);
    const fs::path out = dir / ("combat_" + atlas + ".json");
    write_text_file(out, combat_model_to_json(model).dump() + "\n");
    std::cout << "fitted ComBat (" << atlas << ", "
              << (cfg.harmonize_empirical_bayes ? "EB" : "non-EB") << ") -> "
              << out.string() << "\n";
  }
  return 0;
}

int run_graphs(const CommonOpts& opts, const std::string& atlas_filter,
               const std::vector<std::string>& subjects, bool dump) {
  ExperimentConfig cfg = resolve_config(opts);
  Cohort cohort = load_cohort(cfg);
  fs::path dir;
  if (dump) dir = make_run_dir(cfg, opts.out_dir);

  for (int a : atlas_indices(cohort, atlas_filter)) {
    const std::string& atlas = cohort.atlases[a].name;
    for (const auto& rec : cohort.subjects) {
      if (!subjects.empty() &&
          std::find(subjects.begin(), subjects.end(), rec.id) ==
              subjects.end())
        continue;
      FcnMatrix z = fisher_z(pearson_fcn(rec.series.at(atlas)), atlas);
      const int k =
          std::min(cfg.knn_k, static_cast<int>(z.values.rows()) - 1);
      FcnGraph g = knn_graph(z, k, cfg.knn_by_magnitude);
      long edges = 0;
      for (const auto& list : g.neighbor_lists)
        edges += static_cast<long>(list.size()) - 1;  // minus self-loop
      std::cout << rec.id << " " << atlas << ": " << g.node_count
                << " nodes, " << edges / 2 << " edges (k=" << k << ")\n";
      if (!dump) continue;

      nlohmann::json edge_list = nlohmann::json::array();
      for (int i = 0; i < g.node_count; ++i)
        for (int j : g.neighbor_lists[i])
          if (j > i) edge_list.push_back({i, j, g.adjacency(i, j)});
      nlohmann::json features = nlohmann::json::array();
      for (int i = 0; i < g.node_count; ++i) {
        const Eigen::VectorXd row = g.node_features.row(i);
        features.push_back(
            std::vector<double>(row.data(), row.data() + row.size()));
      }
      nlohmann::json jg = {{"id", rec.id},
                           {"atlas", atlas},
                           {"node_count", g.node_count},
                           {"k", k},
                           {"edges", edge_list},
                           {"node_features", features}};
      write_text_file(dir / ("graph_" + rec.id + "_" + atlas + ".json"),
                      jg.dump() + "\n");
    }
  }
  return 0;
}

int run_train(const CommonOpts& opts, const std::string& atlas_filter) {
  ExperimentConfig cfg = resolve_config(opts);
  Cohort cohort = load_cohort(cfg);
  SplitPlan plan = make_stratified_folds(cohort, cfg.fold_count, cfg.seed);
  fs::path dir = make_run_dir(cfg, opts.out_dir);
  fs::create_directories(dir / "checkpoints");
  if (cfg.harmonize) fs::create_directories(dir / "combat");
  const auto atlases = atlas_indices(cohort, atlas_filter);

  parallel_folds(cfg.fold_count, cfg.jobs, [&](int fold) {
    for (int a : atlases) {
      const std::string& atlas = cohort.atlases[a].name;
      FoldAtlasData data =
          prepare_fold_atlas(cohort, plan, fold, a, cfg, true);
      GatModel model = init_gat(cfg.gat, atlas, cohort.atlas_rois(atlas),
                                derive_seed(cfg.seed, 0x494e4954ULL, fold, a));
      TrainConfig tc = cfg.train;
      tc.seed = derive_seed(cfg.seed, 0x545241494eULL, fold, a);
      TrainResult tr = train_gat(model, data.train, data.validation, tc);

      nlohmann::json ckpt = {
          {"fold", fold},
          {"validation_accuracy", tr.best_validation_accuracy},
          {"epochs", tr.epochs_run},
          {"model", gat_checkpoint_to_json(model)}};
      write_text_file(
          dir / "checkpoints" / (atlas + "_fold" + fold_tag(fold) + ".json"),
          ckpt.dump() + "\n");
      if (data.combat_fitted) {
        write_text_file(
            dir / "combat" / (atlas + "_fold" + fold_tag(fold) + ".json"),
            combat_model_to_json(data.combat).dump() + "\n");
      }
    }
  });
  std::cout << "checkpoints written to " << (dir / "checkpoints").string()
            << "\n";
  return 0;
}

void write_reports(const fs::path& dir, const ExperimentResult& result) {
  for (const auto& fold : result.folds) {
    write_text_file(dir / ("fold_" + fold_tag(fold.fold) + ".json"),
                    fold_report_to_json(fold).dump(2) + "\n");
  }
  write_text_file(dir / "summary.json",
                  summary_to_json(result).dump(2) + "\n");
  const std::string table = summary_table(result);
  write_text_file(dir / "summary.txt", table);
  std::cout << table;
}

int run_ensemble(const CommonOpts& opts) {
  ExperimentConfig cfg = resolve_config(opts);
  Cohort cohort = load_cohort(cfg);
  SplitPlan plan = make_stratified_folds(cohort, cfg.fold_count, cfg.seed);
  fs::path dir = make_run_dir(cfg, opts.out_dir);
  if (!fs::exists(dir / "checkpoints"))
    throw DataError("no checkpoints under " + dir.string() +
                    " (run `train` with the same config and seed first)");

  ExperimentResult result;
  result.config = cfg;
  result.folds.resize(cfg.fold_count);

  parallel_folds(cfg.fold_count, cfg.jobs, [&](int fold) {
    std::vector<std::vector<MemberPrediction>> member_preds(
        cohort.atlases.size());
    std::vector<double> val_accs;
    std::vector<int> epochs;
    for (std::size_t a = 0; a < cohort.atlases.size(); ++a) {
      const std::string& atlas = cohort.atlases[a].name;
      const fs::path ckpt_path =
          dir / "checkpoints" / (atlas + "_fold" + fold_tag(fold) + ".json");
      if (!fs::exists(ckpt_path))
        throw DataError("missing checkpoint " + ckpt_path.string());
      nlohmann::json ckpt =
          nlohmann::json::parse(read_text_file(ckpt_path));
      GatModel model = gat_checkpoint_from_json(ckpt.at("model"));
      const double val_acc = ckpt.at("validation_accuracy").get<double>();
      val_accs.push_back(val_acc);
      epochs.push_back(ckpt.at("epochs").get<int>());

      FoldAtlasData data =
          prepare_fold_atlas(cohort, plan, fold, static_cast<int>(a), cfg,
                             false);
      for (const auto& g : data.test) {
        Prediction p = predict(model, g.graph);
        MemberPrediction mp;
        mp.atlas = atlas;
        mp.probabilities = p.probabilities;
        mp.label = p.label;
        mp.validation_accuracy = val_acc;
        member_preds[a].push_back(mp);
      }
    }
    result.folds[fold] =
        fuse_fold(cohort, fold, plan.folds[fold].test, member_preds, val_accs,
                  epochs, cfg.ensemble_methods);
  });

  write_reports(dir, result);
  return 0;
}

int run_evaluate(const CommonOpts& opts) {
  ExperimentConfig cfg = resolve_config(opts);
  Cohort cohort = load_cohort(cfg);
  SplitPlan plan = make_stratified_folds(cohort, cfg.fold_count, cfg.seed);
  fs::path dir = make_run_dir(cfg, opts.out_dir);
  ExperimentResult result = run_experiment(cohort, plan, cfg);
  write_reports(dir, result);
  return 0;
}

int run_report(const std::string& run_dir) {
  const fs::path dir(run_dir);
  if (!fs::exists(dir / "resolved_config.json"))
    throw DataError(run_dir + " is not a run directory");
  ExperimentResult result;
  result.config = experiment_config_from_json(
      nlohmann::json::parse(read_text_file(dir / "resolved_config.json")));

  std::vector<fs::path> fold_files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("fold_", 0) == 0 && entry.path().extension() == ".json")
      fold_files.push_back(entry.path());
  }
  if (fold_files.empty())
    throw DataError("no fold reports in " + run_dir +
                    " (run `evaluate` or `ensemble` first)");
  std::sort(fold_files.begin(), fold_files.end());
  for (const auto& path : fold_files) {
    result.folds.push_back(
        fold_report_from_json(nlohmann::json::parse(read_text_file(path))));
  }

  for (const auto& fold : result.folds) {
    write_text_file(
        dir / ("predictions_fold_" + fold_tag(fold.fold) + ".csv"),
        fold_predictions_csv(fold));
  }
  std::cout << summary_table(result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-atlas ensemble GAT pipeline"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic cohort");
  std::string synth_out;
  std::uint64_t synth_seed = 0;
  int synth_subjects = 320, synth_sites = 4, synth_t = 140;
  double synth_signal = 1.0, synth_shift = 2.0;
  synth->add_option("--out", synth_out, "cohort output directory")
      ->required();
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--subjects", synth_subjects, "total subject count");
  synth->add_option("--sites", synth_sites, "site count");
  synth->add_option("--t", synth_t, "time points per series");
  synth->add_option("--signal", synth_signal,
                    "planted class signal strength (0 = null cohort)");
  synth->add_option("--site-shift", synth_shift,
                    "additive per-site offset magnitude");

  // harmonize
  auto* harmonize =
      app.add_subcommand("harmonize", "fit ComBat site-effect models");
  CommonOpts harm_opts;
  std::string harm_atlas;
  add_common(harmonize, harm_opts);
  harmonize->add_option("--atlas", harm_atlas, "restrict to one atlas");

  // graphs
  auto* graphs = app.add_subcommand(
      "graphs", "build KNN graphs from raw series (debugging aid)");
  CommonOpts graph_opts;
  std::string graph_atlas;
  std::vector<std::string> graph_subjects;
  bool graph_dump = false;
  add_common(graphs, graph_opts);
  graphs->add_option("--atlas", graph_atlas, "restrict to one atlas");
  graphs->add_option("--subject", graph_subjects, "restrict to subject id(s)");
  graphs->add_flag("--dump", graph_dump, "write graph JSON files");

  // train
  auto* train =
      app.add_subcommand("train", "train per-fold atlas models to checkpoints");
  CommonOpts train_opts;
  std::string train_atlas;
  add_common(train, train_opts);
  train->add_option("--atlas", train_atlas, "restrict to one atlas");

  // ensemble
  auto* ensemble = app.add_subcommand(
      "ensemble", "fuse existing checkpoints on the test folds");
  CommonOpts ens_opts;
  add_common(ensemble, ens_opts);

  // evaluate
  auto* evaluate = app.add_subcommand(
      "evaluate", "run the full cross-validated pipeline");
  CommonOpts eval_opts;
  add_common(evaluate, eval_opts);

  // report
  auto* report = app.add_subcommand(
      "report", "re-print the summary and write per-subject CSVs");
  std::string report_dir;
  report->add_option("--run", report_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
    if (synth->parsed())
      return run_synth(synth_out, synth_seed, synth_subjects, synth_sites,
                       synth_t, synth_signal, synth_shift);
    if (harmonize->parsed()) return run_harmonize(harm_opts, harm_atlas);
    if (graphs->parsed())
      return run_graphs(graph_opts, graph_atlas, graph_subjects, graph_dump);
    if (train->parsed()) return run_train(train_opts, train_atlas);
    if (ensemble->parsed()) return run_ensemble(ens_opts);
    if (evaluate->parsed()) return run_evaluate(eval_opts);
    if (report->parsed()) return run_report(report_dir);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
