#include <doctest.h>

#include <cmath>
#include <vector>

#include "magat/error.hpp"
#include "magat/metrics.hpp"
#include "magat/rng.hpp"

using namespace magat;

TEST_CASE("published confusion matrix reproduces its metric row") {
  const Metrics m = compute_metrics({72, 9, 47, 29});
  CHECK(std::abs(m.accuracy.percent - 75.80) < 0.01);
  CHECK(std::abs(m.sensitivity.percent - 88.89) < 0.01);
  CHECK(std::abs(m.specificity.percent - 61.84) < 0.01);
  CHECK(std::abs(m.precision.percent - 71.29) < 0.01);
  CHECK(std::abs(m.f1.percent - 79.12) < 0.01);
  for (const MetricValue* v :
       {&m.accuracy, &m.sensitivity, &m.specificity, &m.precision, &m.f1})
    CHECK(v->defined);
}

TEST_CASE("symmetric and perfect matrices") {
  const Metrics even = compute_metrics({25, 25, 25, 25});
  CHECK(even.accuracy.percent == 50.0);
  CHECK(even.sensitivity.percent == 50.0);
  CHECK(even.specificity.percent == 50.0);
  CHECK(even.precision.percent == 50.0);
  CHECK(even.f1.percent == 50.0);

  const Metrics perfect = compute_metrics({40, 0, 30, 0});
  CHECK(perfect.accuracy.percent == 100.0);
  CHECK(perfect.sensitivity.percent == 100.0);
  CHECK(perfect.specificity.percent == 100.0);
  CHECK(perfect.precision.percent == 100.0);
  CHECK(perfect.f1.percent == 100.0);
}

TEST_CASE("zero denominators surface as undefined, not zero") {
  SUBCASE("no positive subjects") {
    const Metrics m = compute_metrics({0, 0, 5, 3});
    CHECK_FALSE(m.sensitivity.defined);
    CHECK(m.sensitivity.reason == "tp+fn is empty");
    CHECK(m.precision.defined);  // tp+fp = 3
    CHECK(m.precision.percent == 0.0);
    CHECK_FALSE(m.f1.defined);
    CHECK(m.accuracy.defined);
  }
  SUBCASE("no negative subjects") {
    const Metrics m = compute_metrics({5, 3, 0, 0});
    CHECK_FALSE(m.specificity.defined);
    CHECK(m.specificity.reason == "tn+fp is empty");
    CHECK(m.sensitivity.defined);
  }
  SUBCASE("nothing predicted positive") {
    const Metrics m = compute_metrics({0, 4, 6, 0});
    CHECK_FALSE(m.precision.defined);
    CHECK(m.precision.reason == "tp+fp is empty");
    CHECK_FALSE(m.f1.defined);
  }
  SUBCASE("sensitivity and precision both zero") {
    const Metrics m = compute_metrics({0, 4, 6, 2});
    CHECK(m.sensitivity.defined);
    CHECK(m.precision.defined);
    CHECK_FALSE(m.f1.defined);
    CHECK(m.f1.reason == "sensitivity + precision is zero");
  }
}

TEST_CASE("invalid matrices are rejected") {
  CHECK_THROWS_AS(compute_metrics({0, 0, 0, 0}), DataError);
  CHECK_THROWS_AS(compute_metrics({-1, 2, 3, 4}), DataError);
}

TEST_CASE("accuracy identity and f1 harmonic form on random matrices") {
  Rng rng(5);
  for (int round = 0; round < 300; ++round) {
    ConfusionMatrix cm;
    cm.tp = static_cast<long>(bounded_uint(rng, 50)) + 1;
    cm.fn = static_cast<long>(bounded_uint(rng, 50));
    cm.tn = static_cast<long>(bounded_uint(rng, 50)) + 1;
    cm.fp = static_cast<long>(bounded_uint(rng, 50));
    const Metrics m = compute_metrics(cm);
    const double p = static_cast<double>(cm.tp + cm.fn);
    const double n = static_cast<double>(cm.tn + cm.fp);
    CHECK(m.accuracy.percent ==
          doctest::Approx((m.sensitivity.percent * p +
                           m.specificity.percent * n) /
                          (p + n))
              .epsilon(1e-12));
    if (m.f1.defined) {
      const double direct =
          100.0 * 2.0 * cm.tp / static_cast<double>(2 * cm.tp + cm.fp + cm.fn);
      CHECK(m.f1.percent == doctest::Approx(direct).epsilon(1e-9));
    }
  }
}

TEST_CASE("welch t-test on the shifted ladder") {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const std::vector<double> b{3, 4, 5, 6, 7};
  const TTestResult r = two_sample_ttest(a, b);
  CHECK(r.t == -2.0);
  CHECK(r.df == 8.0);
  CHECK(std::abs(r.p - 0.08051623795726257) < 1e-12);
  CHECK_FALSE(r.significant);
}

TEST_CASE("welch and pooled variants against a reference oracle") {
  const std::vector<double> a{1.0, 2.0, 3.0, 4.0, 10.0};
  const std::vector<double> b{2.0, 2.1, 2.2, 2.3, 2.4};

  const TTestResult w = two_sample_ttest(a, b, true);
  CHECK(std::abs(w.t - 1.1372832424918142) < 1e-12);
  CHECK(std::abs(w.p - 0.31868913831272327) < 1e-10);
  CHECK(std::abs(w.df - 4.0159999360002558) < 1e-10);

  const TTestResult s = two_sample_ttest(a, b, false);
  CHECK(std::abs(s.t - 1.1372832424918142) < 1e-12);
  CHECK(std::abs(s.p - 0.28833405735250278) < 1e-10);
  CHECK(s.df == 8.0);
}

TEST_CASE("t-test degenerate and identical inputs") {
  const TTestResult flat = two_sample_ttest({2, 2, 2}, {2, 2, 2});
  CHECK(flat.t == 0.0);
  CHECK(flat.p == 1.0);
  CHECK_FALSE(flat.significant);

  const TTestResult same = two_sample_ttest({1, 2, 3}, {1, 2, 3});
  CHECK(same.t == 0.0);
  CHECK(same.p == 1.0);

  CHECK_THROWS_AS(two_sample_ttest({1, 1}, {2, 2}), NumericalError);
  CHECK_THROWS_AS(two_sample_ttest({1}, {2, 3}), DataError);
  CHECK_THROWS_AS(two_sample_ttest({}, {}), DataError);
}

TEST_CASE("t-test is antisymmetric in its arguments") {
  Rng rng(23);
  for (int round = 0; round < 50; ++round) {
    std::vector<double> a, b;
    for (int i = 0; i < 6; ++i) {
      a.push_back(gaussian(rng));
      b.push_back(gaussian(rng) + 0.5);
    }
    const TTestResult ab = two_sample_ttest(a, b);
    const TTestResult ba = two_sample_ttest(b, a);
    CHECK(ab.t == doctest::Approx(-ba.t).epsilon(1e-12));
    CHECK(std::abs(ab.p - ba.p) < 1e-12);
    CHECK(ab.df == doctest::Approx(ba.df).epsilon(1e-12));
  }
}

TEST_CASE("clearly separated series are flagged significant") {
  const TTestResult r = two_sample_ttest({1, 1.1, 0.9, 1.05, 0.95},
                                         {2, 2.1, 1.9, 2.05, 1.95});
  CHECK(r.significant);
  CHECK(r.p < 1e-6);
}

TEST_CASE("series helpers") {
  CHECK(series_mean({1, 2, 3, 4, 5}) == 3.0);
  CHECK(series_sample_sd({1, 2, 3, 4, 5}) ==
        doctest::Approx(std::sqrt(2.5)).epsilon(1e-15));
  CHECK(series_sample_sd({7.0}) == 0.0);
  CHECK_THROWS_AS(series_mean({}), DataError);
}
