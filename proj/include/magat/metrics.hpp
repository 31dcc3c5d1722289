#pragma once

#include <string>
#include <vector>

namespace magat {

struct ConfusionMatrix {
  long tp = 0, fn = 0, tn = 0, fp = 0;
  long total() const { return tp + fn + tn + fp; }
};

// One metric in percent; `defined` is false when the denominator vanishes
// (the reason then says which count was empty).
struct MetricValue {
  double percent = 0.0;
  bool defined = true;
  std::string reason;
};

struct Metrics {
  MetricValue accuracy, sensitivity, specificity, precision, f1;
};

Metrics compute_metrics(const ConfusionMatrix& cm);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
  bool significant = false;  // p < 0.05
};

// Two-sided independent two-sample t-test; Welch by default, pooled-variance
// Student's when welch = false.
TTestResult two_sample_ttest(const std::vector<double>& a,
                             const std::vector<double>& b, bool welch = true);

double series_mean(const std::vector<double>& xs);
double series_sample_sd(const std::vector<double>& xs);  // n-1 denominator

}  // namespace magat
