#include "magat/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <thread>

#include "magat/combat.hpp"
#include "magat/error.hpp"
#include "magat/fcn.hpp"
#include "magat/rng.hpp"

namespace magat {
namespace {

// Per-stage seed salts so every (fold, atlas, stage) draws independently.
constexpr std::uint64_t kSmoteTrainStream = 0x534d4f54'5452ULL;
constexpr std::uint64_t kSmoteValStream = 0x534d4f54'564cULL;
constexpr std::uint64_t kInitStream = 0x494e4954ULL;
constexpr std::uint64_t kTrainStream = 0x545241494eULL;

std::mutex log_mutex;

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.fold_count < 2) throw DataError("config: fold_count must be >= 2");
  if (cfg.knn_k < 1) throw DataError("config: graph k must be >= 1");
  if (cfg.smote_cfg.k_neighbors < 1)
    throw DataError("config: smote k_neighbors must be >= 1");
  if (cfg.smote_cfg.multiplier < 1.0)
    throw DataError("config: smote multiplier must be >= 1");
  if (cfg.ensemble_methods.empty())
    throw DataError("config: no ensemble methods selected");
  for (const auto& m : cfg.ensemble_methods) {
    if (m != "vote" && m != "sum" && m != "wsum")
      throw DataError("config: unknown ensemble method '" + m + "'");
  }
}

GraphSample build_graph(const Eigen::MatrixXd& series, const std::string& atlas,
                        Label label, const ExperimentConfig& cfg) {
  TimeSeries ts;
  ts.atlas = atlas;
  ts.values = series;
  FcnMatrix z = fisher_z(pearson_fcn(ts), atlas);
  GraphSample s;
  s.graph = knn_graph(z, std::min(cfg.knn_k, static_cast<int>(z.values.rows()) - 1),
                      cfg.knn_by_magnitude);
  s.label = label;
  return s;
}

ConfusionMatrix tally(const std::vector<Label>& truth,
                      const std::vector<Label>& predicted) {
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == Label::positive)
      (predicted[i] == Label::positive ? cm.tp : cm.fn)++;
    else
      (predicted[i] == Label::negative ? cm.tn : cm.fp)++;
  }
  return cm;
}

FoldReport run_fold(const Cohort& cohort, const SplitPlan& plan, int fold,
                    const ExperimentConfig& cfg) {
  // members[a][s] = atlas a's prediction for test subject s
  std::vector<std::vector<MemberPrediction>> member_preds(
      cohort.atlases.size());
  std::vector<double> val_accs;
  std::vector<int> epochs;

  for (std::size_t a = 0; a < cohort.atlases.size(); ++a) {
    const std::string& atlas = cohort.atlases[a].name;
    try {
      FoldAtlasData data = prepare_fold_atlas(cohort, plan, fold,
                                              static_cast<int>(a), cfg, true);

      GatModel model =
          init_gat(cfg.gat, atlas, cohort.atlas_rois(atlas),
                   derive_seed(cfg.seed, kInitStream, fold, a));
      TrainConfig tc = cfg.train;
      tc.seed = derive_seed(cfg.seed, kTrainStream, fold, a);
      TrainResult tr = train_gat(model, data.train, data.validation, tc);
      val_accs.push_back(tr.best_validation_accuracy);
      epochs.push_back(tr.epochs_run);
      {
        std::lock_guard<std::mutex> lock(log_mutex);
        std::fprintf(stderr, "[fold %d] %s: val_acc=%.4f (%d epochs)\n", fold,
                     atlas.c_str(), tr.best_validation_accuracy,
                     tr.epochs_run);
      }

      member_preds[a].reserve(data.test.size());
      for (const auto& g : data.test) {
        Prediction p = predict(model, g.graph);
        MemberPrediction mp;
        mp.atlas = atlas;
        mp.probabilities = p.probabilities;
        mp.label = p.label;
        mp.validation_accuracy = tr.best_validation_accuracy;
        member_preds[a].push_back(mp);
      }
    } catch (const NumericalError& e) {
      throw NumericalError("fold " + std::to_string(fold) + ", atlas " +
                           atlas + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("fold " + std::to_string(fold) + ", atlas " + atlas +
                      ": " + e.what());
    }
  }

  return fuse_fold(cohort, fold, plan.folds[fold].test, member_preds,
                   val_accs, epochs, cfg.ensemble_methods);
}

nlohmann::json metric_to_json(const MetricValue& v) {
  if (!v.defined) return {{"undefined", v.reason}};
  return v.percent;
}

nlohmann::json metrics_to_json(const Metrics& m) {
  return {{"accuracy", metric_to_json(m.accuracy)},
          {"sensitivity", metric_to_json(m.sensitivity)},
          {"specificity", metric_to_json(m.specificity)},
          {"precision", metric_to_json(m.precision)},
          {"f1", metric_to_json(m.f1)}};
}

nlohmann::json confusion_to_json(const ConfusionMatrix& cm) {
  return {{"tp", cm.tp}, {"fn", cm.fn}, {"tn", cm.tn}, {"fp", cm.fp}};
}

nlohmann::json method_result_to_json(const MethodResult& r) {
  return {{"confusion", confusion_to_json(r.confusion)},
          {"metrics", metrics_to_json(r.metrics)}};
}

const MetricValue& pick_metric(const Metrics& m, int which) {
  switch (which) {
    case 0: return m.accuracy;
    case 1: return m.sensitivity;
    case 2: return m.specificity;
    case 3: return m.precision;
    default: return m.f1;
  }
}

constexpr const char* kMetricNames[5] = {"accuracy", "sensitivity",
                                         "specificity", "precision", "f1"};

// mean +- sd of one metric across folds, skipping undefined folds.
nlohmann::json summarize_metric(const std::vector<const Metrics*>& folds,
                                int which) {
  std::vector<double> vals;
  for (const Metrics* m : folds) {
    const MetricValue& v = pick_metric(*m, which);
    if (v.defined) vals.push_back(v.percent);
  }
  if (vals.empty()) return {{"undefined", "no fold defines this metric"}};
  return {{"mean", series_mean(vals)},
          {"sd", series_sample_sd(vals)},
          {"folds_defined", vals.size()}};
}

nlohmann::json summarize_series(const std::vector<const Metrics*>& folds) {
  nlohmann::json out;
  for (int w = 0; w < 5; ++w) out[kMetricNames[w]] = summarize_metric(folds, w);
  return out;
}

}  // namespace

FoldAtlasData prepare_fold_atlas(const Cohort& cohort, const SplitPlan& plan,
                                 int fold, int atlas_index,
                                 const ExperimentConfig& cfg,
                                 bool include_train_val) {
  if (fold < 0 || fold >= static_cast<int>(plan.folds.size()))
    throw DataError("prepare_fold_atlas: fold out of range");
  const FoldSplit& split = plan.folds[fold];
  const std::string& atlas = cohort.atlases.at(atlas_index).name;

  FoldAtlasData data;
  if (cfg.harmonize) {
    std::vector<const SubjectRecord*> fit_set;
    if (cfg.harmonize_whole_cohort) {
      for (const auto& rec : cohort.subjects) fit_set.push_back(&rec);
    } else {
      for (const auto& id : split.train)
        fit_set.push_back(&cohort.subject_by_id(id));
    }
    data.combat = fit_combat(fit_set, atlas, cohort.atlas_rois(atlas),
                             cfg.harmonize_empirical_bayes);
    data.combat_fitted = true;
  }

  auto series_of = [&](const SubjectRecord& rec) -> Eigen::MatrixXd {
    if (cfg.harmonize) return apply_combat(data.combat, rec, atlas).values;
    return rec.series.at(atlas).values;
  };

  if (include_train_val) {
    auto collect = [&](const std::vector<std::string>& ids) {
      std::vector<Sample> out;
      out.reserve(ids.size());
      for (const auto& id : ids) {
        const SubjectRecord& rec = cohort.subject_by_id(id);
        out.push_back({rec.id, rec.label, series_of(rec), false});
      }
      return out;
    };
    std::vector<Sample> train_set = collect(split.train);
    std::vector<Sample> val_set = collect(split.validation);
    if (cfg.smote) {
      SmoteConfig sc = cfg.smote_cfg;
      sc.seed = derive_seed(cfg.seed, kSmoteTrainStream, fold, atlas_index);
      train_set = oversample_split(train_set, sc);
      sc.seed = derive_seed(cfg.seed, kSmoteValStream, fold, atlas_index);
      val_set = oversample_split(val_set, sc);
    }
    data.train.reserve(train_set.size());
    for (const auto& s : train_set)
      data.train.push_back(build_graph(s.series, atlas, s.label, cfg));
    std::vector<Sample>().swap(train_set);
    data.validation.reserve(val_set.size());
    for (const auto& s : val_set)
      data.validation.push_back(build_graph(s.series, atlas, s.label, cfg));
  }

  data.test.reserve(split.test.size());
  for (const auto& id : split.test) {
    const SubjectRecord& rec = cohort.subject_by_id(id);
    data.test.push_back(build_graph(series_of(rec), atlas, rec.label, cfg));
  }
  return data;
}

FoldReport fuse_fold(const Cohort& cohort, int fold,
                     const std::vector<std::string>& test_ids,
                     const std::vector<std::vector<MemberPrediction>>& member_preds,
                     const std::vector<double>& val_accs,
                     const std::vector<int>& epochs,
                     const std::vector<std::string>& methods) {
  if (member_preds.size() != cohort.atlases.size())
    throw DataError("fuse_fold: one prediction list per atlas expected");

  FoldReport report;
  report.fold = fold;
  for (std::size_t a = 0; a < cohort.atlases.size(); ++a) {
    report.member_validation_accuracy[cohort.atlases[a].name] = val_accs.at(a);
    report.member_epochs[cohort.atlases[a].name] = epochs.at(a);
  }

  std::vector<Label> truth;
  for (const auto& id : test_ids)
    truth.push_back(cohort.subject_by_id(id).label);

  std::map<std::string, std::vector<Label>> fused_labels;
  for (std::size_t s = 0; s < test_ids.size(); ++s) {
    SubjectOutcome outcome;
    outcome.id = test_ids[s];
    outcome.truth = truth[s];
    for (std::size_t a = 0; a < cohort.atlases.size(); ++a)
      outcome.members.push_back(member_preds.at(a).at(s));

    for (const auto& method : methods) {
      Label fused;
      if (method == "vote") {
        fused = majority_vote(outcome.members);
      } else if (method == "sum") {
        fused = sum_fusion(outcome.members);
      } else if (method == "wsum") {
        fused = weighted_sum(outcome.members, member_weights(val_accs));
      } else {
        throw DataError("fuse_fold: unknown ensemble method '" + method + "'");
      }
      outcome.fused[method] = fused;
      fused_labels[method].push_back(fused);
    }
    report.subjects.push_back(std::move(outcome));
  }

  for (std::size_t a = 0; a < cohort.atlases.size(); ++a) {
    std::vector<Label> predicted;
    for (const auto& mp : member_preds[a]) predicted.push_back(mp.label);
    MethodResult r;
    r.confusion = tally(truth, predicted);
    r.metrics = compute_metrics(r.confusion);
    report.members[cohort.atlases[a].name] = std::move(r);
  }
  for (const auto& [method, labels] : fused_labels) {
    MethodResult r;
    r.confusion = tally(truth, labels);
    r.metrics = compute_metrics(r.confusion);
    report.methods[method] = std::move(r);
  }
  return report;
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json merge_names = nlohmann::json::array();
  for (HeadMerge m : cfg.gat.resolved_merges())
    merge_names.push_back(m == HeadMerge::concat ? "concat" : "average");
  return {
      {"manifest", cfg.manifest},
      {"fold_count", cfg.fold_count},
      {"seed", cfg.seed},
      {"jobs", cfg.jobs},
      {"harmonize",
       {{"enabled", cfg.harmonize},
        {"empirical_bayes", cfg.harmonize_empirical_bayes},
        {"whole_cohort", cfg.harmonize_whole_cohort}}},
      {"smote",
       {{"enabled", cfg.smote},
        {"k_neighbors", cfg.smote_cfg.k_neighbors},
        {"multiplier", cfg.smote_cfg.multiplier}}},
      {"graph",
       {{"k", cfg.knn_k}, {"rank_by_magnitude", cfg.knn_by_magnitude}}},
      {"gat",
       {{"layer_count", cfg.gat.layer_count},
        {"hidden_units", cfg.gat.hidden_units},
        {"heads", cfg.gat.heads},
        {"leaky_slope", cfg.gat.leaky_slope},
        {"dropout", cfg.gat.dropout},
        {"head_merge", merge_names},
        {"edge_weighted_attention", cfg.gat.edge_weighted_attention}}},
      {"train",
       {{"batch_size", cfg.train.batch_size},
        {"learning_rate", cfg.train.learning_rate},
        {"weight_decay", cfg.train.weight_decay},
        {"max_epochs", cfg.train.max_epochs},
        {"patience", cfg.train.patience}}},
      {"ensemble", cfg.ensemble_methods}};
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.manifest = j.value("manifest", cfg.manifest);
  cfg.fold_count = j.value("fold_count", cfg.fold_count);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.jobs = j.value("jobs", cfg.jobs);
  if (j.contains("harmonize")) {
    const auto& h = j.at("harmonize");
    cfg.harmonize = h.value("enabled", cfg.harmonize);
    cfg.harmonize_empirical_bayes =
        h.value("empirical_bayes", cfg.harmonize_empirical_bayes);
    cfg.harmonize_whole_cohort =
        h.value("whole_cohort", cfg.harmonize_whole_cohort);
  }
  if (j.contains("smote")) {
    const auto& s = j.at("smote");
    cfg.smote = s.value("enabled", cfg.smote);
    cfg.smote_cfg.k_neighbors =
        s.value("k_neighbors", cfg.smote_cfg.k_neighbors);
    cfg.smote_cfg.multiplier = s.value("multiplier", cfg.smote_cfg.multiplier);
  }
  if (j.contains("graph")) {
    const auto& g = j.at("graph");
    cfg.knn_k = g.value("k", cfg.knn_k);
    cfg.knn_by_magnitude = g.value("rank_by_magnitude", cfg.knn_by_magnitude);
  }
  if (j.contains("gat")) {
    const auto& g = j.at("gat");
    cfg.gat.layer_count = g.value("layer_count", cfg.gat.layer_count);
    cfg.gat.hidden_units = g.value("hidden_units", cfg.gat.hidden_units);
    cfg.gat.heads = g.value("heads", cfg.gat.heads);
    cfg.gat.leaky_slope = g.value("leaky_slope", cfg.gat.leaky_slope);
    cfg.gat.dropout = g.value("dropout", cfg.gat.dropout);
    cfg.gat.edge_weighted_attention =
        g.value("edge_weighted_attention", cfg.gat.edge_weighted_attention);
    if (g.contains("head_merge")) {
      cfg.gat.head_merge.clear();
      for (const auto& name : g.at("head_merge")) {
        cfg.gat.head_merge.push_back(name.get<std::string>() == "average"
                                         ? HeadMerge::average
                                         : HeadMerge::concat);
      }
    }
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
    cfg.train.learning_rate =
        t.value("learning_rate", cfg.train.learning_rate);
    cfg.train.weight_decay = t.value("weight_decay", cfg.train.weight_decay);
    cfg.train.max_epochs = t.value("max_epochs", cfg.train.max_epochs);
    cfg.train.patience = t.value("patience", cfg.train.patience);
  }
  if (j.contains("ensemble"))
    cfg.ensemble_methods = j.at("ensemble").get<std::vector<std::string>>();
  return cfg;
}

std::string experiment_config_hash(const ExperimentConfig& cfg) {
  const std::string s = experiment_config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf, 8);  // 8 hex chars are plenty for run naming
}

ExperimentResult run_experiment(const Cohort& cohort, const SplitPlan& plan,
                                const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (cohort.atlases.empty()) throw DataError("run_experiment: no atlases");
  if (static_cast<int>(plan.folds.size()) != cfg.fold_count)
    throw DataError("run_experiment: plan/config fold count mismatch");

  ExperimentResult result;
  result.config = cfg;
  result.folds.resize(plan.folds.size());

  int jobs = cfg.jobs > 0
                 ? cfg.jobs
                 : static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min<int>(jobs, plan.folds.size()));

  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(plan.folds.size());
  auto worker = [&]() {
    for (;;) {
      const int fold = next.fetch_add(1);
      if (fold >= static_cast<int>(plan.folds.size())) return;
      try {
        result.folds[fold] = run_fold(cohort, plan, fold, cfg);
      } catch (...) {
        errors[fold] = std::current_exception();
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
  return result;
}

nlohmann::json fold_report_to_json(const FoldReport& report) {
  nlohmann::json members = nlohmann::json::object();
  for (const auto& [atlas, r] : report.members) {
    members[atlas] = method_result_to_json(r);
    members[atlas]["validation_accuracy"] =
        report.member_validation_accuracy.at(atlas);
    members[atlas]["epochs"] = report.member_epochs.at(atlas);
  }
  nlohmann::json methods = nlohmann::json::object();
  for (const auto& [method, r] : report.methods)
    methods[method] = method_result_to_json(r);

  nlohmann::json subjects = nlohmann::json::array();
  for (const auto& s : report.subjects) {
    nlohmann::json jm = nlohmann::json::object();
    for (const auto& mp : s.members) {
      jm[mp.atlas] = {
          {"probabilities", {mp.probabilities[0], mp.probabilities[1]}},
          {"label", label_to_string(mp.label)}};
    }
    nlohmann::json jf = nlohmann::json::object();
    for (const auto& [method, label] : s.fused)
      jf[method] = label_to_string(label);
    subjects.push_back({{"id", s.id},
                        {"truth", label_to_string(s.truth)},
                        {"members", jm},
                        {"fused", jf}});
  }

  return {{"fold", report.fold},
          {"members", members},
          {"methods", methods},
          {"subjects", subjects}};
}

FoldReport fold_report_from_json(const nlohmann::json& j) {
  FoldReport report;
  report.fold = j.at("fold").get<int>();

  auto parse_result = [](const nlohmann::json& jr) {
    MethodResult r;
    const auto& jc = jr.at("confusion");
    r.confusion.tp = jc.at("tp").get<long>();
    r.confusion.fn = jc.at("fn").get<long>();
    r.confusion.tn = jc.at("tn").get<long>();
    r.confusion.fp = jc.at("fp").get<long>();
    r.metrics = compute_metrics(r.confusion);
    return r;
  };

  for (const auto& [atlas, jr] : j.at("members").items()) {
    report.members[atlas] = parse_result(jr);
    report.member_validation_accuracy[atlas] =
        jr.at("validation_accuracy").get<double>();
    report.member_epochs[atlas] = jr.at("epochs").get<int>();
  }
  for (const auto& [method, jr] : j.at("methods").items())
    report.methods[method] = parse_result(jr);

  for (const auto& js : j.at("subjects")) {
    SubjectOutcome s;
    s.id = js.at("id").get<std::string>();
    s.truth = label_from_string(js.at("truth").get<std::string>());
    for (const auto& [atlas, jm] : js.at("members").items()) {
      MemberPrediction mp;
      mp.atlas = atlas;
      mp.probabilities = {jm.at("probabilities")[0].get<double>(),
                          jm.at("probabilities")[1].get<double>()};
      mp.label = label_from_string(jm.at("label").get<std::string>());
      mp.validation_accuracy = report.member_validation_accuracy.at(atlas);
      s.members.push_back(std::move(mp));
    }
    for (const auto& [method, label] : js.at("fused").items())
      s.fused[method] = label_from_string(label.get<std::string>());
    report.subjects.push_back(std::move(s));
  }
  return report;
}

nlohmann::json summary_to_json(const ExperimentResult& result) {
  nlohmann::json members = nlohmann::json::object();
  if (!result.folds.empty()) {
    for (const auto& [atlas, unused] : result.folds.front().members) {
      (void)unused;
      std::vector<const Metrics*> per_fold;
      std::vector<double> val_accs;
      for (const auto& fold : result.folds) {
        per_fold.push_back(&fold.members.at(atlas).metrics);
        val_accs.push_back(fold.member_validation_accuracy.at(atlas));
      }
      members[atlas] = summarize_series(per_fold);
      members[atlas]["validation_accuracy_mean"] = series_mean(val_accs);
    }
  }
  nlohmann::json methods = nlohmann::json::object();
  if (!result.folds.empty()) {
    for (const auto& [method, unused] : result.folds.front().methods) {
      (void)unused;
      std::vector<const Metrics*> per_fold;
      for (const auto& fold : result.folds)
        per_fold.push_back(&fold.methods.at(method).metrics);
      methods[method] = summarize_series(per_fold);
    }
  }
  return {{"fold_count", result.config.fold_count},
          {"seed", result.config.seed},
          {"config", experiment_config_to_json(result.config)},
          {"members", members},
          {"methods", methods}};
}

std::string summary_table(const ExperimentResult& result) {
  const nlohmann::json j = summary_to_json(result);
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-10s %-16s %-16s %-16s %-16s %-16s\n",
                "model", "accuracy", "sensitivity", "specificity", "precision",
                "f1");
  out += line;

  auto append_rows = [&](const nlohmann::json& block) {
    for (const auto& [name, metrics] : block.items()) {
      std::string row;
      char cell[64];
      std::snprintf(cell, sizeof(cell), "%-10s ", name.c_str());
      row += cell;
      for (const char* metric : kMetricNames) {
        const auto& m = metrics.at(metric);
        if (m.contains("undefined")) {
          std::snprintf(cell, sizeof(cell), "%-16s ", "undefined");
        } else {
          char val[32];
          std::snprintf(val, sizeof(val), "%.2f +- %.2f",
                        m.at("mean").get<double>(), m.at("sd").get<double>());
          std::snprintf(cell, sizeof(cell), "%-16s ", val);
        }
        row += cell;
      }
      while (!row.empty() && row.back() == ' ') row.pop_back();
      out += row + "\n";
    }
  };
  append_rows(j.at("members"));
  append_rows(j.at("methods"));
  return out;
}

std::string fold_predictions_csv(const FoldReport& report) {
  std::string out = "fold,id,truth";
  std::vector<std::string> atlas_order;
  if (!report.subjects.empty()) {
    for (const auto& mp : report.subjects.front().members)
      atlas_order.push_back(mp.atlas);
  }
  for (const auto& atlas : atlas_order)
    out += "," + atlas + "_p_mdd," + atlas + "_label";
  std::vector<std::string> method_order;
  if (!report.subjects.empty()) {
    for (const auto& [method, unused] : report.subjects.front().fused) {
      (void)unused;
      method_order.push_back(method);
    }
  }
  for (const auto& method : method_order) out += "," + method;
  out += "\n";

  char cell[64];
  for (const auto& s : report.subjects) {
    out += std::to_string(report.fold) + "," + s.id + "," +
           label_to_string(s.truth);
    for (const auto& mp : s.members) {
      std::snprintf(cell, sizeof(cell), ",%.17g,%s", mp.probabilities[1],
                    label_to_string(mp.label).c_str());
      out += cell;
    }
    for (const auto& method : method_order)
      out += "," + label_to_string(s.fused.at(method));
    out += "\n";
  }
  return out;
}

}  // namespace magat
