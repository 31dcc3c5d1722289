#include "magat/smote.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "magat/error.hpp"
#include "magat/rng.hpp"

namespace magat {

std::vector<SyntheticPoint> smote_class(
    const std::vector<Eigen::VectorXd>& samples, const SmoteConfig& cfg) {
  const int n = static_cast<int>(samples.size());
  if (cfg.k_neighbors < 1) throw DataError("smote: k_neighbors must be >= 1");
  if (cfg.multiplier < 1.0) throw DataError("smote: multiplier must be >= 1");
  if (n <= cfg.k_neighbors) {
    throw DataError("smote: need more than " +
                    std::to_string(cfg.k_neighbors) + " samples, got " +
                    std::to_string(n));
  }
  const auto dim = samples.front().size();
  for (const auto& s : samples) {
    if (s.size() != dim) throw DataError("smote: dimension mismatch");
  }

  // Brute-force k nearest neighbors per sample, ties to the lower index.
  std::vector<std::vector<int>> knn(n);
  std::vector<std::pair<double, int>> dist;
  for (int i = 0; i < n; ++i) {
    dist.clear();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      dist.emplace_back((samples[i] - samples[j]).norm(), j);
    }
    std::sort(dist.begin(), dist.end());
    knn[i].reserve(cfg.k_neighbors);
    for (int m = 0; m < cfg.k_neighbors; ++m) knn[i].push_back(dist[m].second);
  }

  const int count = static_cast<int>(std::ceil((cfg.multiplier - 1.0) * n));
  Rng rng(cfg.seed);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  deterministic_shuffle(order, rng);

  std::vector<SyntheticPoint> out;
  out.reserve(count);
  for (int m = 0; m < count; ++m) {
    SyntheticPoint p;
    p.source = order[m % n];
    p.neighbor = knn[p.source][bounded_uint(rng, cfg.k_neighbors)];
    p.gap = uniform_double(rng);
    p.values = smote_interpolate(samples[p.source], samples[p.neighbor], p.gap);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Sample> oversample_split(const std::vector<Sample>& split,
                                     const SmoteConfig& cfg) {
  std::vector<Sample> out = split;
  for (Label label : {Label::negative, Label::positive}) {
    std::vector<const Sample*> members;
    for (const auto& s : split)
      if (s.label == label) members.push_back(&s);
    if (members.empty()) {
      throw DataError("smote: class " + label_to_string(label) +
                      " is absent from the split");
    }

    const auto rows = members.front()->series.rows();
    const auto cols = members.front()->series.cols();
    std::vector<Eigen::VectorXd> flat;
    flat.reserve(members.size());
    for (const Sample* s : members) {
      flat.push_back(Eigen::Map<const Eigen::VectorXd>(s->series.data(),
                                                       s->series.size()));
    }

    SmoteConfig class_cfg = cfg;
    class_cfg.seed =
        derive_seed(cfg.seed, 0x534d4f5445ULL, static_cast<int>(label));
    auto points = smote_class(flat, class_cfg);

    for (std::size_t i = 0; i < points.size(); ++i) {
      Sample s;
      s.id = "syn-" + label_to_string(label) + "-" + std::to_string(i);
      s.label = label;
      s.synthetic = true;
      s.series = Eigen::Map<const Eigen::MatrixXd>(points[i].values.data(),
                                                   rows, cols);
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace magat
