#pragma once

#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "magat/combat.hpp"
#include "magat/dataset.hpp"
#include "magat/ensemble.hpp"
#include "magat/gat.hpp"
#include "magat/metrics.hpp"
#include "magat/smote.hpp"

namespace magat {

struct ExperimentConfig {
  std::string manifest;  // cohort manifest path
  int fold_count = 10;
  std::uint64_t seed = 0;
  int jobs = 0;  // fold-level parallelism; 0 = hardware concurrency

  bool harmonize = true;
  bool harmonize_empirical_bayes = true;
  bool harmonize_whole_cohort = false;  // default: fit on train, apply to all

  bool smote = true;
  SmoteConfig smote_cfg;

  int knn_k = 10;
  bool knn_by_magnitude = true;

  GatConfig gat;
  TrainConfig train;

  std::vector<std::string> ensemble_methods{"vote", "sum", "wsum"};
};

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
// Short stable hash of the resolved config, used to name run directories.
std::string experiment_config_hash(const ExperimentConfig& cfg);

struct SubjectOutcome {
  std::string id;
  Label truth = Label::negative;
  std::vector<MemberPrediction> members;  // cohort atlas order
  std::map<std::string, Label> fused;     // ensemble method -> label
};

struct MethodResult {
  ConfusionMatrix confusion;
  Metrics metrics;
};

struct FoldReport {
  int fold = 0;
  std::map<std::string, double> member_validation_accuracy;  // atlas -> acc
  std::map<std::string, int> member_epochs;                  // atlas -> epochs run
  std::map<std::string, MethodResult> members;               // single-atlas results
  std::map<std::string, MethodResult> methods;               // fused results
  std::vector<SubjectOutcome> subjects;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<FoldReport> folds;
};

ExperimentResult run_experiment(const Cohort& cohort, const SplitPlan& plan,
                                const ExperimentConfig& cfg);

// One (fold, atlas) slice of the pipeline: ComBat fit/apply, optional SMOTE,
// graph building. include_train_val=false prepares test graphs only (for
// inference against previously trained models).
struct FoldAtlasData {
  bool combat_fitted = false;
  CombatModel combat;
  std::vector<GraphSample> train, validation, test;
};
FoldAtlasData prepare_fold_atlas(const Cohort& cohort, const SplitPlan& plan,
                                 int fold, int atlas_index,
                                 const ExperimentConfig& cfg,
                                 bool include_train_val);

// Fusion + bookkeeping for one fold given each member's test predictions
// (member_preds[a][s], cohort atlas order) and validation accuracies.
FoldReport fuse_fold(const Cohort& cohort, int fold,
                     const std::vector<std::string>& test_ids,
                     const std::vector<std::vector<MemberPrediction>>& member_preds,
                     const std::vector<double>& val_accs,
                     const std::vector<int>& epochs,
                     const std::vector<std::string>& methods);

nlohmann::json fold_report_to_json(const FoldReport& report);
FoldReport fold_report_from_json(const nlohmann::json& j);
// Machine-readable summary (mean +- sample sd per metric, per member and
// per ensemble method). Stable field order; byte-identical across runs
// with equal seeds.
nlohmann::json summary_to_json(const ExperimentResult& result);
// Aligned mean +- sd table, one row per model/method.
std::string summary_table(const ExperimentResult& result);
// Per-subject predictions of one fold as CSV.
std::string fold_predictions_csv(const FoldReport& report);

}  // namespace magat
