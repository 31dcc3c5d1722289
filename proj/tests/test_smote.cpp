#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "magat/error.hpp"
#include "magat/rng.hpp"
#include "magat/smote.hpp"

using namespace magat;

namespace {

std::vector<Eigen::VectorXd> random_cloud(int n, int dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Eigen::VectorXd> out(n);
  for (auto& v : out) {
    v.resize(dim);
    for (int d = 0; d < dim; ++d) v(d) = gaussian(rng);
  }
  return out;
}

// Brute-force k nearest neighbors of samples[i], ties to the lower index.
std::vector<int> neighbor_oracle(const std::vector<Eigen::VectorXd>& samples,
                                 int i, int k) {
  std::vector<int> idx;
  for (int j = 0; j < static_cast<int>(samples.size()); ++j)
    if (j != i) idx.push_back(j);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double da = (samples[i] - samples[a]).norm();
    const double db = (samples[i] - samples[b]).norm();
    return da != db ? da < db : a < b;
  });
  idx.resize(k);
  return idx;
}

}  // namespace

TEST_CASE("interpolation endpoints and midpoint") {
  Eigen::VectorXd x0(2), x(2);
  x0 << 0, 0;
  x << 2, 2;
  CHECK(smote_interpolate(x0, x, 0.5).isApprox(Eigen::Vector2d(1, 1)));
  CHECK(smote_interpolate(x0, x, 0.0) == x0);
  CHECK(smote_interpolate(x0, x, 1.0) == x);
}

TEST_CASE("synthetic points satisfy the segment identity") {
  const auto samples = random_cloud(500, 50, 12);
  SmoteConfig cfg;
  cfg.k_neighbors = 3;
  cfg.multiplier = 2.0;
  cfg.seed = 9;
  const auto points = smote_class(samples, cfg);
  REQUIRE(points.size() == 500);
  for (const auto& p : points) {
    REQUIRE(p.source >= 0);
    REQUIRE(p.neighbor >= 0);
    REQUIRE(p.source != p.neighbor);
    const Eigen::VectorXd& x0 = samples[p.source];
    const Eigen::VectorXd& x = samples[p.neighbor];
    // on the segment: distances to the endpoints sum to the segment length
    const double lhs = (p.values - x0).norm() + (p.values - x).norm();
    CHECK(std::abs(lhs - (x - x0).norm()) < 1e-9);
    // the partner really is one of the source's k nearest neighbors
    const auto nn = neighbor_oracle(samples, p.source, cfg.k_neighbors);
    CHECK(std::find(nn.begin(), nn.end(), p.neighbor) != nn.end());
    CHECK(p.gap >= 0.0);
    CHECK(p.gap < 1.0);
  }
}

TEST_CASE("doubling yields one child per source") {
  const auto samples = random_cloud(40, 6, 5);
  SmoteConfig cfg;
  cfg.seed = 17;
  const auto points = smote_class(samples, cfg);
  REQUIRE(points.size() == 40);
  std::vector<int> children(40, 0);
  for (const auto& p : points) children[p.source]++;
  for (int c : children) CHECK(c == 1);
}

TEST_CASE("synthetic count is the ceiling rule") {
  const auto samples = random_cloud(10, 4, 2);
  SmoteConfig cfg;
  SUBCASE("doubling a large class: 1251 -> 2502") {
    const auto big = random_cloud(1251, 3, 1);
    CHECK(smote_class(big, cfg).size() == 1251);  // 1251 + 1251 = 2502
  }
  SUBCASE("fractional multipliers round up") {
    cfg.multiplier = 1.25;
    CHECK(smote_class(samples, cfg).size() == 3);  // ceil(0.25 * 10)
    cfg.multiplier = 3.0;
    CHECK(smote_class(samples, cfg).size() == 20);
    cfg.multiplier = 1.0;
    CHECK(smote_class(samples, cfg).empty());
  }
}

TEST_CASE("smote rejects bad input") {
  SmoteConfig cfg;  // k = 3
  CHECK_THROWS_AS(smote_class(random_cloud(3, 4, 1), cfg), DataError);
  auto ragged = random_cloud(8, 4, 1);
  ragged[5].resize(5);
  CHECK_THROWS_AS(smote_class(ragged, cfg), DataError);
  cfg.k_neighbors = 0;
  CHECK_THROWS_AS(smote_class(random_cloud(8, 4, 1), cfg), DataError);
  cfg.k_neighbors = 3;
  cfg.multiplier = 0.5;
  CHECK_THROWS_AS(smote_class(random_cloud(8, 4, 1), cfg), DataError);
}

TEST_CASE("same seed reproduces the synthetic set; seeds differ") {
  const auto samples = random_cloud(30, 8, 3);
  SmoteConfig cfg;
  cfg.seed = 77;
  const auto a = smote_class(samples, cfg);
  const auto b = smote_class(samples, cfg);
  REQUIRE(a.size() == b.size());
  bool equal = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    equal &= a[i].source == b[i].source && a[i].neighbor == b[i].neighbor &&
             a[i].gap == b[i].gap && a[i].values == b[i].values;
  }
  CHECK(equal);
  cfg.seed = 78;
  const auto c = smote_class(samples, cfg);
  bool same_order = true;
  for (std::size_t i = 0; i < a.size(); ++i)
    same_order &= a[i].source == c[i].source && a[i].gap == c[i].gap;
  CHECK_FALSE(same_order);
}

namespace {

std::vector<Sample> make_split(int n_pos, int n_neg, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Sample> out;
  for (int i = 0; i < n_pos + n_neg; ++i) {
    Sample s;
    s.id = "s" + std::to_string(i);
    s.label = i < n_pos ? Label::positive : Label::negative;
    s.series.resize(5, 7);
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 7; ++c) s.series(r, c) = gaussian(rng);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST_CASE("oversample_split doubles each class and appends") {
  const auto split = make_split(80, 75, 21);  // the 155-subject layout
  SmoteConfig cfg;
  cfg.seed = 4;
  const auto aug = oversample_split(split, cfg);
  REQUIRE(aug.size() == 310);

  int pos = 0, neg = 0, syn_pos = 0, syn_neg = 0;
  for (const auto& s : aug) {
    if (s.label == Label::positive) {
      pos++;
      syn_pos += s.synthetic;
    } else {
      neg++;
      syn_neg += s.synthetic;
    }
  }
  CHECK(pos == 160);
  CHECK(neg == 150);
  CHECK(syn_pos == 80);
  CHECK(syn_neg == 75);

  // input order preserved, real samples bitwise untouched
  for (std::size_t i = 0; i < split.size(); ++i) {
    CHECK(aug[i].id == split[i].id);
    CHECK_FALSE(aug[i].synthetic);
    CHECK(aug[i].series == split[i].series);
  }
  for (std::size_t i = split.size(); i < aug.size(); ++i) {
    CHECK(aug[i].synthetic);
    CHECK(aug[i].series.rows() == 5);
    CHECK(aug[i].series.cols() == 7);
  }
}

TEST_CASE("oversample_split needs both classes") {
  const auto split = make_split(10, 0, 2);
  SmoteConfig cfg;
  CHECK_THROWS_AS(oversample_split(split, cfg), DataError);
}

TEST_CASE("oversample_split is deterministic per seed") {
  const auto split = make_split(12, 9, 8);
  SmoteConfig cfg;
  cfg.k_neighbors = 2;
  cfg.seed = 101;
  const auto a = oversample_split(split, cfg);
  const auto b = oversample_split(split, cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].series == b[i].series);
  }
}
