#include "magat/metrics.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "magat/error.hpp"

namespace magat {
namespace {

MetricValue ratio(long num, long den, const std::string& den_name) {
  MetricValue v;
  if (den == 0) {
    v.defined = false;
    v.reason = den_name + " is empty";
    return v;
  }
  v.percent = 100.0 * static_cast<double>(num) / static_cast<double>(den);
  return v;
}

}  // namespace

Metrics compute_metrics(const ConfusionMatrix& cm) {
  if (cm.tp < 0 || cm.fn < 0 || cm.tn < 0 || cm.fp < 0)
    throw DataError("compute_metrics: negative count");
  if (cm.total() == 0) throw DataError("compute_metrics: empty matrix");

  Metrics m;
  m.accuracy = ratio(cm.tp + cm.tn, cm.total(), "total");
  m.sensitivity = ratio(cm.tp, cm.tp + cm.fn, "tp+fn");
  m.specificity = ratio(cm.tn, cm.tn + cm.fp, "tn+fp");
  m.precision = ratio(cm.tp, cm.tp + cm.fp, "tp+fp");
  if (!m.sensitivity.defined || !m.precision.defined) {
    m.f1.defined = false;
    m.f1.reason = "sensitivity or precision undefined";
  } else if (m.sensitivity.percent + m.precision.percent == 0.0) {
    m.f1.defined = false;
    m.f1.reason = "sensitivity + precision is zero";
  } else {
    m.f1.percent = 2.0 * m.precision.percent * m.sensitivity.percent /
                   (m.precision.percent + m.sensitivity.percent);
  }
  return m;
}

double series_mean(const std::vector<double>& xs) {
  if (xs.empty()) throw DataError("series_mean: empty series");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double series_sample_sd(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = series_mean(xs);
  double s2 = 0.0;
  for (double x : xs) s2 += (x - m) * (x - m);
  return std::sqrt(s2 / static_cast<double>(xs.size() - 1));
}

TTestResult two_sample_ttest(const std::vector<double>& a,
                             const std::vector<double>& b, bool welch) {
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  if (a.size() < 2 || b.size() < 2)
    throw DataError("t-test: both series need at least 2 values");

  const double ma = series_mean(a), mb = series_mean(b);
  const double sda = series_sample_sd(a), sdb = series_sample_sd(b);
  const double va = sda * sda, vb = sdb * sdb;

  double se, df;
  if (welch) {
    se = std::sqrt(va / na + vb / nb);
    const double q = va / na + vb / nb;
    df = q * q /
         (va * va / (na * na * (na - 1.0)) + vb * vb / (nb * nb * (nb - 1.0)));
  } else {
    const double pooled =
        ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
    se = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
    df = na + nb - 2.0;
  }

  TTestResult r;
  if (se == 0.0) {
    if (ma == mb) {
      r.t = 0.0;
      r.p = 1.0;
      r.df = na + nb - 2.0;
      return r;
    }
    throw NumericalError("t-test: degenerate variance");
  }

  r.t = (ma - mb) / se;
  r.df = df;
  boost::math::students_t_distribution<double> dist(df);
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  r.significant = r.p < 0.05;
  return r;
}

}  // namespace magat
