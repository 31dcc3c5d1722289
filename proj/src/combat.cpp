#include "magat/combat.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>

#include "magat/error.hpp"

namespace magat {
namespace {

constexpr double kDeltaFloor = 1e-8;

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

std::vector<double> to_vec(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd from_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

nlohmann::json rows_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    out.push_back(to_vec(m.row(i).transpose()));
  return out;
}

Eigen::MatrixXd rows_from_json(const nlohmann::json& j) {
  Eigen::MatrixXd m(j.size(), j.empty() ? 0 : j[0].size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    m.row(i) = from_vec(j[i].get<std::vector<double>>()).transpose();
  return m;
}

// Inverse-gamma hyperparameters from the method of moments.
double aprior(double m, double s2) { return (2.0 * s2 + m * m) / s2; }
double bprior(double m, double s2) { return (m * s2 + m * m * m) / s2; }

}  // namespace

int CombatModel::site_row(int site) const {
  auto it = std::find(site_ids.begin(), site_ids.end(), site);
  return it == site_ids.end()
             ? -1
             : static_cast<int>(it - site_ids.begin());
}

CombatModel fit_combat(const std::vector<const SubjectRecord*>& subjects,
                       const std::string& atlas, int n_rois,
                       bool use_empirical_bayes) {
  const int s = static_cast<int>(subjects.size());
  if (s < 2) throw DataError("fit_combat: need at least 2 subjects");

  std::map<int, std::vector<int>> site_cols;  // site id -> subject columns
  for (int j = 0; j < s; ++j) site_cols[subjects[j]->site].push_back(j);
  for (const auto& [site, cols] : site_cols) {
    if (cols.size() < 2) {
      throw DataError("fit_combat: site " + std::to_string(site) +
                      " has fewer than 2 subjects");
    }
  }
  const int n_sites = static_cast<int>(site_cols.size());

  const int f = static_cast<int>(
      subjects.front()->series.at(atlas).values.size());
  (void)n_rois;
  Eigen::MatrixXd data(f, s);  // feature x subject
  for (int j = 0; j < s; ++j) {
    const Eigen::MatrixXd& ts = subjects[j]->series.at(atlas).values;
    if (static_cast<int>(ts.size()) != f) {
      throw DataError("fit_combat: subject " + subjects[j]->id +
                      " has mismatched series shape for atlas " + atlas);
    }
    data.col(j) = flatten(ts);
  }

  // Design: one site indicator per batch (they span the intercept), then
  // the biological covariates whose effect must survive harmonization.
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(s, n_sites + 2);
  std::vector<int> site_ids;
  {
    int row = 0;
    for (const auto& [site, cols] : site_cols) {
      site_ids.push_back(site);
      for (int j : cols) design(j, row) = 1.0;
      ++row;
    }
  }
  for (int j = 0; j < s; ++j) {
    design(j, n_sites) = subjects[j]->age;
    design(j, n_sites + 1) = static_cast<double>(subjects[j]->sex);
  }

  Eigen::MatrixXd b_hat =
      design.colPivHouseholderQr().solve(data.transpose());  // (sites+2) x f

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(f);
  {
    int row = 0;
    for (const auto& [site, cols] : site_cols) {
      alpha += (static_cast<double>(cols.size()) / s) *
               b_hat.row(row).transpose();
      ++row;
      (void)site;
    }
  }
  Eigen::MatrixXd beta = b_hat.bottomRows(2).transpose();  // f x 2

  // Sample (n-1) variance to match the per-site delta estimator below; the
  // pair must agree so a single-site fit gives delta == 1 exactly.
  Eigen::MatrixXd resid = data - (design * b_hat).transpose();
  Eigen::VectorXd var_pooled = resid.rowwise().squaredNorm() / (s - 1);

  // Zero-variance features pass through untouched. Constant columns leave
  // ~1e-16 OLS residue, so the check is relative to the data scale; features
  // the design explains exactly are equally unstandardizable and also skipped.
  Eigen::VectorXd data_mean = data.rowwise().mean();
  Eigen::VectorXd data_var =
      (data.colwise() - data_mean).rowwise().squaredNorm() / (s - 1);
  std::vector<int> dead;
  for (int i = 0; i < f; ++i) {
    const double scale2 = 1.0 + data_mean(i) * data_mean(i);
    if (data_var(i) <= 1e-12 * scale2 || var_pooled(i) <= 1e-12 * data_var(i))
      dead.push_back(i);
  }
  if (!dead.empty()) {
    std::cerr << "warning: atlas " << atlas << ": " << dead.size()
              << " zero-variance feature(s) left unharmonized (first index "
              << dead.front() << ")\n";
    for (int i : dead) var_pooled(i) = 1.0;  // placeholder scale
  }
  Eigen::VectorXd sd_pooled = var_pooled.cwiseSqrt();

  // stand_mean varies per subject through the covariates.
  Eigen::MatrixXd covars = design.rightCols(2);            // s x 2
  Eigen::MatrixXd stand_mean =
      alpha.replicate(1, s) + beta * covars.transpose();   // f x s
  Eigen::MatrixXd z =
      ((data - stand_mean).array().colwise() / sd_pooled.array()).matrix();

  Eigen::MatrixXd gamma_star(n_sites, f);
  Eigen::MatrixXd delta_star_sq(n_sites, f);
  {
    int row = 0;
    for (const auto& [site, cols] : site_cols) {
      (void)site;
      const int n = static_cast<int>(cols.size());
      Eigen::MatrixXd zs(f, n);
      for (int c = 0; c < n; ++c) zs.col(c) = z.col(cols[c]);

      Eigen::VectorXd g_hat = zs.rowwise().mean();
      Eigen::VectorXd d_hat =
          (zs.colwise() - g_hat).rowwise().squaredNorm() / (n - 1);

      Eigen::VectorXd g = g_hat;
      Eigen::VectorXd d = d_hat;
      if (use_empirical_bayes && f >= 2) {
        const double g_bar = g_hat.mean();
        const double t2 =
            (g_hat.array() - g_bar).square().sum() / (f - 1);
        const double d_mean = d_hat.mean();
        const double d_var =
            (d_hat.array() - d_mean).square().sum() / (f - 1);
        if (t2 > 0.0 && d_var > 0.0) {
          const double a = aprior(d_mean, d_var);
          const double b = bprior(d_mean, d_var);
          // Standard ComBat conditional-posterior iteration.
          for (int it = 0; it < 1000; ++it) {
            Eigen::VectorXd g_new = ((n * t2 * g_hat.array() + d.array() * g_bar) /
                                     (n * t2 + d.array()))
                                        .matrix();
            Eigen::VectorXd sum2 =
                (zs.colwise() - g_new).rowwise().squaredNorm();
            Eigen::VectorXd d_new =
                ((0.5 * sum2.array() + b) / (n / 2.0 + a - 1.0)).matrix();
            double change = std::max(
                ((g_new - g).cwiseAbs().array() /
                 g.cwiseAbs().array().max(1e-30)).maxCoeff(),
                ((d_new - d).cwiseAbs().array() /
                 d.cwiseAbs().array().max(1e-30)).maxCoeff());
            g = g_new;
            d = d_new;
            if (change < 1e-4) break;
          }
        }
      }
      gamma_star.row(row) = g.transpose();
      delta_star_sq.row(row) = d.transpose();
      ++row;
    }
  }

  CombatModel model;
  model.atlas = atlas;
  model.feature_count = f;
  model.empirical_bayes = use_empirical_bayes;
  model.alpha = alpha;
  model.beta = beta;
  model.site_ids = site_ids;
  model.gamma = (gamma_star.array().rowwise() *
                 sd_pooled.transpose().array())
                    .matrix();  // back to raw units
  model.delta = delta_star_sq.cwiseSqrt().cwiseMax(kDeltaFloor);
  for (int i : dead) {
    model.alpha(i) = data.row(i).mean();
    model.beta.row(i).setZero();
    model.gamma.col(i).setZero();
    model.delta.col(i).setOnes();
  }
  return model;
}

CombatModel fit_combat(const Cohort& cohort, const std::string& atlas,
                       bool use_empirical_bayes) {
  std::vector<const SubjectRecord*> subjects;
  subjects.reserve(cohort.subjects.size());
  for (const auto& rec : cohort.subjects) subjects.push_back(&rec);
  return fit_combat(subjects, atlas, cohort.atlas_rois(atlas),
                    use_empirical_bayes);
}

TimeSeries apply_combat(const CombatModel& model, const SubjectRecord& record,
                        const std::string& atlas) {
  const int row = model.site_row(record.site);
  if (row < 0) {
    throw DataError("apply_combat: site " + std::to_string(record.site) +
                    " was not seen when the model was fitted");
  }
  auto it = record.series.find(atlas);
  if (it == record.series.end()) {
    throw DataError("apply_combat: subject " + record.id +
                    " has no series for atlas " + atlas);
  }
  const Eigen::MatrixXd& ts = it->second.values;
  if (static_cast<int>(ts.size()) != model.feature_count) {
    throw DataError("apply_combat: series shape mismatch for subject " +
                    record.id + " (" + std::to_string(ts.size()) + " vs " +
                    std::to_string(model.feature_count) + " features)");
  }

  Eigen::VectorXd y = flatten(ts);
  Eigen::VectorXd fitted = model.alpha + model.beta.col(0) * record.age +
                           model.beta.col(1) * static_cast<double>(record.sex);
  Eigen::VectorXd adj =
      ((y - fitted - model.gamma.row(row).transpose()).array() /
           model.delta.row(row).transpose().array() +
       fitted.array())
          .matrix();

  TimeSeries out;
  out.atlas = atlas;
  out.values =
      Eigen::Map<const Eigen::MatrixXd>(adj.data(), ts.rows(), ts.cols());
  return out;
}

nlohmann::json combat_model_to_json(const CombatModel& model) {
  return {{"atlas", model.atlas},
          {"feature_count", model.feature_count},
          {"empirical_bayes", model.empirical_bayes},
          {"covariates", {"age", "sex"}},
          {"site_ids", model.site_ids},
          {"alpha", to_vec(model.alpha)},
          {"beta", rows_to_json(model.beta.transpose())},
          {"gamma", rows_to_json(model.gamma)},
          {"delta", rows_to_json(model.delta)}};
}

CombatModel combat_model_from_json(const nlohmann::json& j) {
  CombatModel model;
  model.atlas = j.at("atlas").get<std::string>();
  model.feature_count = j.at("feature_count").get<int>();
  model.empirical_bayes = j.at("empirical_bayes").get<bool>();
  model.site_ids = j.at("site_ids").get<std::vector<int>>();
  model.alpha = from_vec(j.at("alpha").get<std::vector<double>>());
  model.beta = rows_from_json(j.at("beta")).transpose();
  model.gamma = rows_from_json(j.at("gamma"));
  model.delta = rows_from_json(j.at("delta"));
  if (model.delta.size() > 0 && model.delta.minCoeff() <= 0.0)
    throw DataError("combat model: delta entries must be positive");
  return model;
}

}  // namespace magat
