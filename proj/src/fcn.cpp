#include "magat/fcn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "magat/error.hpp"

namespace magat {

Eigen::MatrixXd pearson_fcn(const TimeSeries& series) {
  const Eigen::MatrixXd& y = series.values;  // T x N
  const auto t = y.rows();
  const auto n = y.cols();
  if (t < 2) {
    throw DataError("pearson_fcn: need at least 2 time points, got " +
                    std::to_string(t));
  }

  Eigen::MatrixXd centered = y.rowwise() - y.colwise().mean();
  Eigen::VectorXd norms = centered.colwise().norm();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (norms(i) == 0.0) {
      std::string name = series.atlas.empty() ? "ROI" : series.atlas + " ROI";
      throw DataError("pearson_fcn: zero-variance " + name + " at index " +
                      std::to_string(i));
    }
  }

  Eigen::MatrixXd r = centered.transpose() * centered;
  r.array() /= (norms * norms.transpose()).array();
  // Rounding can push |r| a hair past 1; clamp so downstream clipping logic
  // only ever has to deal with the mathematical range.
  r = r.cwiseMax(-1.0).cwiseMin(1.0);
  r.diagonal().setOnes();
  return r;
}

FcnMatrix fisher_z(const Eigen::MatrixXd& pearson, const std::string& atlas) {
  constexpr double eps = 1e-7;
  FcnMatrix out;
  out.atlas = atlas;
  out.values = pearson.unaryExpr([](double r) {
    return std::atanh(std::clamp(r, -1.0 + eps, 1.0 - eps));
  });
  out.values.diagonal().setZero();
  return out;
}

FcnGraph knn_graph(const FcnMatrix& fcn, int k, bool rank_by_magnitude) {
  const Eigen::MatrixXd& z = fcn.values;
  const int n = static_cast<int>(z.rows());
  if (k < 1 || k > n - 1) {
    throw DataError("knn_graph: k must be in [1, " + std::to_string(n - 1) +
                    "], got " + std::to_string(k));
  }

  FcnGraph g;
  g.node_count = n;
  g.node_features = z;
  g.adjacency = Eigen::MatrixXd::Zero(n, n);

  // Each node picks its k strongest off-diagonal entries; the edge set is
  // the union over both directions.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> edge(n, n);
  edge.setConstant(false);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), 0);
    auto score = [&](int j) {
      return rank_by_magnitude ? std::abs(z(i, j)) : z(i, j);
    };
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      double sa = score(a), sb = score(b);
      if (sa != sb) return sa > sb;
      return a < b;  // tie: lower index first
    });
    int picked = 0;
    for (int j : order) {
      if (j == i) continue;
      edge(i, j) = edge(j, i) = true;
      g.adjacency(i, j) = z(i, j);
      g.adjacency(j, i) = z(i, j);
      if (++picked == k) break;
    }
  }

  double max_abs = g.adjacency.cwiseAbs().maxCoeff();
  if (max_abs > 0.0) g.adjacency /= max_abs;
  g.adjacency.diagonal().setOnes();

  g.neighbor_lists.assign(n, {});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || edge(i, j)) g.neighbor_lists[i].push_back(j);
    }
  }
  return g;
}

}  // namespace magat
