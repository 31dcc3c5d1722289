#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "magat/combat.hpp"
#include "magat/error.hpp"
#include "magat/rng.hpp"

using namespace magat;

namespace {

constexpr int kT = 4;
constexpr int kN = 8;  // 32 features per subject

struct SiteSpec {
  int site;
  int count;
  double shift = 0.0;   // additive site effect on every feature
  double scale = 1.0;   // multiplicative site effect on the noise
};

// Subjects whose features are age_slope(f) * age + site shift + scaled noise.
std::vector<SubjectRecord> make_subjects(const std::vector<SiteSpec>& sites,
                                         std::uint64_t seed,
                                         const Eigen::VectorXd& age_slope) {
  Rng rng(seed);
  std::vector<SubjectRecord> out;
  int idx = 0;
  for (const auto& spec : sites) {
    for (int i = 0; i < spec.count; ++i) {
      SubjectRecord r;
      r.id = "s" + std::to_string(idx++);
      r.site = spec.site;
      r.label = (i % 2 == 0) ? Label::positive : Label::negative;
      r.age = 20.0 + 40.0 * uniform_double(rng);
      r.sex = static_cast<int>(bounded_uint(rng, 2));
      Eigen::MatrixXd m(kT, kN);
      for (int f = 0; f < kT * kN; ++f) {
        m(f % kT, f / kT) = spec.shift + age_slope(f) * r.age +
                            spec.scale * gaussian(rng);
      }
      r.series["A"] = TimeSeries{m, "A"};
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<const SubjectRecord*> ptrs(const std::vector<SubjectRecord>& v) {
  std::vector<const SubjectRecord*> p;
  for (const auto& r : v) p.push_back(&r);
  return p;
}

// Per-site, per-feature mean of (optionally harmonized) data.
Eigen::MatrixXd site_feature_means(const std::vector<SubjectRecord>& subjects,
                                   const CombatModel* model) {
  std::map<int, std::pair<Eigen::VectorXd, int>> acc;
  for (const auto& r : subjects) {
    Eigen::MatrixXd vals =
        model ? apply_combat(*model, r, "A").values : r.series.at("A").values;
    Eigen::Map<Eigen::VectorXd> flat(vals.data(), vals.size());
    auto [it, fresh] =
        acc.try_emplace(r.site, Eigen::VectorXd::Zero(vals.size()), 0);
    it->second.first += flat;
    it->second.second++;
  }
  Eigen::MatrixXd means(acc.size(), kT * kN);
  int row = 0;
  for (auto& [site, sum_count] : acc)
    means.row(row++) = (sum_count.first / sum_count.second).transpose();
  return means;
}

}  // namespace

TEST_CASE("identical sites fit near-null site effects") {
  const Eigen::VectorXd no_age = Eigen::VectorXd::Zero(kT * kN);
  const auto subjects =
      make_subjects({{0, 200, 0.0, 1.0}, {1, 200, 0.0, 1.0}}, 31, no_age);
  for (bool eb : {false, true}) {
    const CombatModel model = fit_combat(ptrs(subjects), "A", kN, eb);
    CHECK(model.feature_count == kT * kN);
    // RMS over sites x features; per-feature estimates carry ~1/sqrt(200)
    // noise, so a max-norm bound would not be meaningful at this n
    const double denom = std::sqrt(static_cast<double>(model.gamma.size()));
    CHECK(model.gamma.norm() / denom < 0.1);
    CHECK((model.delta.array() - 1.0).matrix().norm() / denom < 0.1);
    CHECK(model.gamma.cwiseAbs().maxCoeff() < 0.3);
    CHECK((model.delta.array() - 1.0).abs().maxCoeff() < 0.3);
  }
}

TEST_CASE("constant shift between sites is removed") {
  // site 1 is an exact +5 copy of site 0, covariates repeated
  const Eigen::VectorXd no_age = Eigen::VectorXd::Zero(kT * kN);
  auto subjects = make_subjects({{0, 20, 0.0, 1.0}}, 7, no_age);
  const int n0 = static_cast<int>(subjects.size());
  for (int i = 0; i < n0; ++i) {
    SubjectRecord copy = subjects[i];
    copy.id += "_b";
    copy.site = 1;
    copy.series["A"].values.array() += 5.0;
    subjects.push_back(std::move(copy));
  }
  const CombatModel model = fit_combat(ptrs(subjects), "A", kN, false);
  const Eigen::MatrixXd means = site_feature_means(subjects, &model);
  REQUIRE(means.rows() == 2);
  CHECK((means.row(0) - means.row(1)).cwiseAbs().maxCoeff() < 1e-6);
  // before harmonization the gap is the planted 5.0
  const Eigen::MatrixXd raw = site_feature_means(subjects, nullptr);
  CHECK((raw.row(1) - raw.row(0)).minCoeff() == doctest::Approx(5.0));
}

TEST_CASE("single-site fit is the identity") {
  const Eigen::VectorXd no_age = Eigen::VectorXd::Zero(kT * kN);
  const auto subjects = make_subjects({{3, 50, 2.0, 1.3}}, 11, no_age);
  for (bool eb : {false, true}) {
    const CombatModel model = fit_combat(ptrs(subjects), "A", kN, eb);
    for (const auto& r : subjects) {
      const TimeSeries out = apply_combat(model, r, "A");
      CHECK((out.values - r.series.at("A").values).cwiseAbs().maxCoeff() <
            1e-9);
    }
  }
}

TEST_CASE("manual models apply as written") {
  const Eigen::VectorXd no_age = Eigen::VectorXd::Zero(kT * kN);
  const auto subjects = make_subjects({{0, 4}}, 5, no_age);

  CombatModel model;
  model.atlas = "A";
  model.feature_count = kT * kN;
  model.alpha = Eigen::VectorXd::Constant(kT * kN, 0.7);
  model.beta = Eigen::MatrixXd::Zero(kT * kN, 2);
  model.site_ids = {0, 1};
  model.gamma = Eigen::MatrixXd::Zero(2, kT * kN);
  model.delta = Eigen::MatrixXd::Ones(2, kT * kN);

  SUBCASE("identity effects leave data untouched") {
    const TimeSeries out = apply_combat(model, subjects[0], "A");
    CHECK((out.values - subjects[0].series.at("A").values)
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
  SUBCASE("pure additive effect subtracts the constant") {
    model.gamma.row(0).setConstant(2.5);
    const TimeSeries out = apply_combat(model, subjects[0], "A");
    CHECK((out.values.array() -
           (subjects[0].series.at("A").values.array() - 2.5))
              .abs()
              .maxCoeff() < 1e-12);
  }
  SUBCASE("unknown site is rejected") {
    SubjectRecord other = subjects[0];
    other.site = 99;
    CHECK_THROWS_AS(apply_combat(model, other, "A"), DataError);
  }
  SUBCASE("shape mismatch is rejected") {
    model.feature_count = kT * kN + 1;
    CHECK_THROWS_AS(apply_combat(model, subjects[0], "A"), DataError);
  }
  SUBCASE("shape never changes") {
    const TimeSeries out = apply_combat(model, subjects[0], "A");
    CHECK(out.values.rows() == kT);
    CHECK(out.values.cols() == kN);
  }
}

TEST_CASE("refitting on harmonized data finds nothing left") {
  const Eigen::VectorXd no_age = Eigen::VectorXd::Zero(kT * kN);
  auto subjects = make_subjects(
      {{0, 200, 0.0, 1.0}, {1, 200, 1.5, 1.6}, {2, 200, -0.8, 0.7}}, 13,
      no_age);
  const CombatModel model = fit_combat(ptrs(subjects), "A", kN, false);
  std::vector<SubjectRecord> harmonized = subjects;
  for (auto& r : harmonized) r.series["A"] = apply_combat(model, r, "A");

  const CombatModel refit = fit_combat(ptrs(harmonized), "A", kN, false);
  CHECK(refit.gamma.cwiseAbs().maxCoeff() < 0.05);
  CHECK((refit.delta.array() - 1.0).abs().maxCoeff() < 0.05);
}

TEST_CASE("planted age effect survives harmonization") {
  Rng rng(17);
  Eigen::VectorXd slope(kT * kN);
  for (int f = 0; f < kT * kN; ++f) slope(f) = 0.5 + 0.4 * uniform_double(rng);
  auto subjects = make_subjects(
      {{0, 200, 0.0, 0.3}, {1, 200, 2.0, 1.4}}, 23, slope);
  const CombatModel model = fit_combat(ptrs(subjects), "A", kN, false);

  // per-feature OLS slope of harmonized value on age
  const int n = static_cast<int>(subjects.size());
  Eigen::VectorXd ages(n);
  Eigen::MatrixXd feats(n, kT * kN);
  for (int i = 0; i < n; ++i) {
    ages(i) = subjects[i].age;
    Eigen::MatrixXd vals = apply_combat(model, subjects[i], "A").values;
    feats.row(i) = Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());
  }
  const Eigen::VectorXd age_c = ages.array() - ages.mean();
  for (int f = 0; f < kT * kN; ++f) {
    const Eigen::VectorXd col = feats.col(f).array() - feats.col(f).mean();
    const double b = age_c.dot(col) / age_c.squaredNorm();
    CHECK(std::abs(b - slope(f)) / slope(f) < 0.05);
  }
}

TEST_CASE("zero-variance features pass through unharmonized") {
  const Eigen::VectorXd no_age = Eigen::VectorXd::Zero(kT * kN);
  auto subjects = make_subjects({{0, 30, 0.0, 1.0}, {1, 30, 3.0, 1.0}}, 41,
                                no_age);
  for (auto& r : subjects) r.series["A"].values(0, 0) = -4.25;
  const CombatModel model = fit_combat(ptrs(subjects), "A", kN, true);
  // the dead feature is flattened column-major: entry (0,0) is feature 0
  CHECK(model.gamma.col(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(model.delta.col(0).minCoeff() == 1.0);
  CHECK(model.beta.row(0).cwiseAbs().maxCoeff() == 0.0);
  for (const auto& r : subjects)
    CHECK(apply_combat(model, r, "A").values(0, 0) == doctest::Approx(-4.25));
  // the live features still get their site shift removed
  std::vector<SubjectRecord> harmonized = subjects;
  for (auto& r : harmonized) r.series["A"] = apply_combat(model, r, "A");
  const Eigen::MatrixXd means = site_feature_means(harmonized, nullptr);
  CHECK((means.row(0).tail(kT * kN - 1) - means.row(1).tail(kT * kN - 1))
            .cwiseAbs()
            .maxCoeff() < 0.5);
}

TEST_CASE("sites need at least two subjects") {
  const Eigen::VectorXd no_age = Eigen::VectorXd::Zero(kT * kN);
  auto subjects = make_subjects({{0, 5}, {1, 1}}, 3, no_age);
  CHECK_THROWS_AS(fit_combat(ptrs(subjects), "A", kN, false), DataError);
}

TEST_CASE("combat model json round-trip") {
  const Eigen::VectorXd no_age = Eigen::VectorXd::Zero(kT * kN);
  const auto subjects =
      make_subjects({{2, 25, 0.4, 1.1}, {7, 25, -0.2, 0.9}}, 57, no_age);
  const CombatModel model = fit_combat(ptrs(subjects), "A", kN, true);

  const nlohmann::json j = combat_model_to_json(model);
  const CombatModel back = combat_model_from_json(
      nlohmann::json::parse(j.dump()));  // via text, as the CLI stores it
  CHECK(back.atlas == model.atlas);
  CHECK(back.feature_count == model.feature_count);
  CHECK(back.empirical_bayes == model.empirical_bayes);
  CHECK(back.site_ids == model.site_ids);
  CHECK((back.alpha - model.alpha).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.beta - model.beta).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.gamma - model.gamma).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.delta - model.delta).cwiseAbs().maxCoeff() == 0.0);

  nlohmann::json bad = j;
  bad["delta"][0][0] = 0.0;
  CHECK_THROWS_AS(combat_model_from_json(bad), DataError);
}

TEST_CASE("harmonization equalizes planted site effects") {
  const Eigen::VectorXd no_age = Eigen::VectorXd::Zero(kT * kN);
  auto subjects =
      make_subjects({{0, 200, 0.0, 1.0}, {1, 200, 2.0, 1.8}}, 67, no_age);
  for (bool eb : {false, true}) {
    const CombatModel model = fit_combat(ptrs(subjects), "A", kN, eb);
    std::vector<SubjectRecord> harmonized = subjects;
    for (auto& r : harmonized) r.series["A"] = apply_combat(model, r, "A");
    const Eigen::MatrixXd means = site_feature_means(harmonized, nullptr);
    CHECK((means.row(0) - means.row(1)).cwiseAbs().maxCoeff() < 0.25);
    // per-site variances come out close to each other as well
    Eigen::VectorXd var0 = Eigen::VectorXd::Zero(kT * kN);
    Eigen::VectorXd var1 = Eigen::VectorXd::Zero(kT * kN);
    for (const auto& r : harmonized) {
      Eigen::MatrixXd v = r.series.at("A").values;
      Eigen::Map<Eigen::VectorXd> flat(v.data(), v.size());
      Eigen::VectorXd dev =
          flat - means.row(r.site == 0 ? 0 : 1).transpose();
      (r.site == 0 ? var0 : var1) += dev.cwiseProduct(dev);
    }
    var0 /= 200.0;
    var1 /= 200.0;
    CHECK((var0.array() / var1.array() - 1.0).abs().maxCoeff() < 0.3);
  }
}
