#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace magat {

// Binary class label. Positive = patient group ("MDD"), negative = control
// group ("HC"). Serialized as the strings, encoded internally as 1/0.
enum class Label : int { negative = 0, positive = 1 };

std::string label_to_string(Label l);
Label label_from_string(const std::string& s);

// One atlas-specific ROI time series: T time points by N ROIs.
struct TimeSeries {
  Eigen::MatrixXd values;  // T x N
  std::string atlas;
};

struct AtlasInfo {
  std::string name;
  int n_rois = 0;
};

struct SubjectRecord {
  std::string id;
  int site = 0;
  Label label = Label::negative;
  double age = 0.0;
  int sex = 0;  // binary covariate
  std::map<std::string, TimeSeries> series;  // atlas name -> series
};

// A cohort as loaded from one manifest. Every subject carries a series for
// every atlas in `atlases`, each with the shared time-point count `t`.
struct Cohort {
  int t = 0;
  std::vector<AtlasInfo> atlases;
  std::vector<SubjectRecord> subjects;

  const SubjectRecord& subject_by_id(const std::string& id) const;
  int atlas_rois(const std::string& atlas) const;
};

// Manifest schema:
//   { "t": int,
//     "atlases": [{"name": str, "n_rois": int}],
//     "subjects": [{"id": str, "site": int, "label": "MDD"|"HC",
//                   "age": float, "sex": 0|1,
//                   "series": {atlas: relative-path}}] }
// Series paths are resolved relative to the manifest's directory.
Cohort load_manifest(const std::filesystem::path& path);

struct FoldSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
};

struct SplitPlan {
  int fold_count = 0;
  std::uint64_t seed = 0;
  std::map<std::string, int> fold_assignments;  // subject id -> test fold
  std::vector<FoldSplit> folds;
};

// Stratified fold construction: each class is shuffled with the seeded
// generator and dealt round-robin into `fold_count` test sets, so per-fold
// class counts match cohort proportions within one subject. Within a fold
// the non-test pool is split 8:1 train:validation per class (validation
// count rounded to nearest), giving the ~80/10/10 layout.
SplitPlan make_stratified_folds(const Cohort& cohort, int fold_count,
                                std::uint64_t seed);

}  // namespace magat
