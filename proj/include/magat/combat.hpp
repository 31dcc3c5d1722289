#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "magat/dataset.hpp"

namespace magat {

// Site-effect model: Y = alpha + X*beta + gamma_site + delta_site * eps.
// gamma is stored in raw feature units (already scaled by the pooled sd),
// delta is the unitless residual-sd ratio, so application is
//   (Y - alpha - X*beta - gamma_site) / delta_site + alpha + X*beta.
struct CombatModel {
  std::string atlas;
  int feature_count = 0;          // T * N, column-major flatten of the series
  bool empirical_bayes = true;
  Eigen::VectorXd alpha;          // per-feature pooled intercept
  Eigen::MatrixXd beta;           // feature_count x 2: age, sex coefficients
  Eigen::MatrixXd gamma;          // site x feature additive effects
  Eigen::MatrixXd delta;          // site x feature multiplicative effects, > 0
  std::vector<int> site_ids;      // row order of gamma/delta

  int site_row(int site) const;   // -1 when the site was not seen at fit time
};

// Fits on the given subjects (all of them in the cohort overload). Empirical
// Bayes shrinks per-site estimates toward cross-feature priors; the flag
// switches to plain per-site location/scale estimates.
CombatModel fit_combat(const std::vector<const SubjectRecord*>& subjects,
                       const std::string& atlas, int n_rois,
                       bool use_empirical_bayes = true);
CombatModel fit_combat(const Cohort& cohort, const std::string& atlas,
                       bool use_empirical_bayes = true);

TimeSeries apply_combat(const CombatModel& model, const SubjectRecord& record,
                        const std::string& atlas);

nlohmann::json combat_model_to_json(const CombatModel& model);
CombatModel combat_model_from_json(const nlohmann::json& j);

}  // namespace magat
