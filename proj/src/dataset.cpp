#include "magat/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "magat/error.hpp"
#include "magat/io.hpp"
#include "magat/rng.hpp"

namespace magat {

using nlohmann::json;

std::string label_to_string(Label l) {
  return l == Label::positive ? "MDD" : "HC";
}

Label label_from_string(const std::string& s) {
  if (s == "MDD") return Label::positive;
  if (s == "HC") return Label::negative;
  throw DataError("unknown label string: \"" + s + "\" (expected MDD or HC)");
}

const SubjectRecord& Cohort::subject_by_id(const std::string& id) const {
  for (const auto& s : subjects) {
    if (s.id == id) return s;
  }
  throw DataError("unknown subject id: " + id);
}

int Cohort::atlas_rois(const std::string& atlas) const {
  for (const auto& a : atlases) {
    if (a.name == atlas) return a.n_rois;
  }
  throw DataError("unknown atlas: " + atlas);
}

Cohort load_manifest(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw DataError("manifest parse error in " + path.string() + ": " +
                    e.what());
  }

  Cohort cohort;
  try {
    cohort.t = doc.at("t").get<int>();
    for (const auto& a : doc.at("atlases")) {
      cohort.atlases.push_back(
          {a.at("name").get<std::string>(), a.at("n_rois").get<int>()});
    }
  } catch (const json::exception& e) {
    throw DataError("manifest schema error in " + path.string() + ": " +
                    e.what());
  }
  if (cohort.t < 2) {
    throw DataError("manifest declares t < 2");
  }
  for (const auto& a : cohort.atlases) {
    if (a.n_rois < 2) {
      throw DataError("atlas " + a.name + " declares n_rois < 2");
    }
  }

  const auto base = path.parent_path();
  std::set<std::string> seen_ids;
  try {
    for (const auto& js : doc.at("subjects")) {
      SubjectRecord rec;
      rec.id = js.at("id").get<std::string>();
      rec.site = js.at("site").get<int>();
      rec.label = label_from_string(js.at("label").get<std::string>());
      rec.age = js.at("age").get<double>();
      rec.sex = js.at("sex").get<int>();
      if (!seen_ids.insert(rec.id).second) {
        throw DataError("duplicate subject id: " + rec.id);
      }
      const auto& series = js.at("series");
      for (const auto& a : cohort.atlases) {
        if (!series.contains(a.name)) {
          throw DataError("subject " + rec.id + " has no series for atlas " +
                          a.name);
        }
        const auto rel = series.at(a.name).get<std::string>();
        TimeSeries ts;
        ts.atlas = a.name;
        ts.values = read_matrix_csv(base / rel);
        if (ts.values.rows() != cohort.t || ts.values.cols() != a.n_rois) {
          throw DataError("shape mismatch for subject " + rec.id + " atlas " +
                          a.name + ": got " + std::to_string(ts.values.rows()) +
                          "x" + std::to_string(ts.values.cols()) +
                          ", manifest declares " + std::to_string(cohort.t) +
                          "x" + std::to_string(a.n_rois));
        }
        if (!ts.values.allFinite()) {
          throw DataError("non-finite values in series of subject " + rec.id +
                          " atlas " + a.name);
        }
        rec.series.emplace(a.name, std::move(ts));
      }
      cohort.subjects.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw DataError("manifest schema error in " + path.string() + ": " +
                    e.what());
  }
  return cohort;
}

namespace {

// Nearest-integer validation count for the non-test pool of one class.
int validation_count(int non_test) {
  return static_cast<int>(std::lround(non_test / 9.0));
}

}  // namespace

SplitPlan make_stratified_folds(const Cohort& cohort, int fold_count,
                                std::uint64_t seed) {
  if (fold_count < 2) {
    throw DataError("fold_count must be >= 2");
  }

  std::vector<std::string> by_class[2];
  for (const auto& s : cohort.subjects) {
    by_class[static_cast<int>(s.label)].push_back(s.id);
  }
  for (int c = 0; c < 2; ++c) {
    if (static_cast<int>(by_class[c].size()) < fold_count) {
      throw DataError("class " +
                      label_to_string(static_cast<Label>(c)) + " has " +
                      std::to_string(by_class[c].size()) +
                      " subjects, fewer than fold_count=" +
                      std::to_string(fold_count) + "; cannot stratify");
    }
  }

  SplitPlan plan;
  plan.fold_count = fold_count;
  plan.seed = seed;
  plan.folds.resize(static_cast<std::size_t>(fold_count));

  // Deal each class round-robin into test folds.
  std::vector<std::vector<std::string>> test_by_fold(
      static_cast<std::size_t>(fold_count));
  for (int c = 0; c < 2; ++c) {
    Rng rng(derive_seed(seed, 0x5354524154ULL, static_cast<std::uint64_t>(c)));
    auto ids = by_class[c];
    std::sort(ids.begin(), ids.end());  // order independent of manifest order
    deterministic_shuffle(ids, rng);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const int f = static_cast<int>(i % static_cast<std::size_t>(fold_count));
      test_by_fold[static_cast<std::size_t>(f)].push_back(ids[i]);
      plan.fold_assignments[ids[i]] = f;
    }
  }

  // Within each fold, split the non-test pool 8:1 train:validation per class.
  for (int f = 0; f < fold_count; ++f) {
    auto& fold = plan.folds[static_cast<std::size_t>(f)];
    fold.test = test_by_fold[static_cast<std::size_t>(f)];
    std::sort(fold.test.begin(), fold.test.end());
    for (int c = 0; c < 2; ++c) {
      std::vector<std::string> pool;
      for (const auto& id : by_class[c]) {
        if (plan.fold_assignments.at(id) != f) pool.push_back(id);
      }
      std::sort(pool.begin(), pool.end());
      Rng rng(derive_seed(seed, 0x56414cULL, static_cast<std::uint64_t>(c),
                          static_cast<std::uint64_t>(f)));
      deterministic_shuffle(pool, rng);
      const int n_val = validation_count(static_cast<int>(pool.size()));
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (static_cast<int>(i) < n_val) {
          fold.validation.push_back(pool[i]);
        } else {
          fold.train.push_back(pool[i]);
        }
      }
    }
    std::sort(fold.train.begin(), fold.train.end());
    std::sort(fold.validation.begin(), fold.validation.end());
  }
  return plan;
}

}  // namespace magat
