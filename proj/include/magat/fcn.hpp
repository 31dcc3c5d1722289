#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "magat/dataset.hpp"

namespace magat {

// Functional connectivity matrix after Fisher z-transform. Symmetric,
// finite, diagonal fixed to 0 (the self-correlation is dropped from node
// features and replaced by an explicit self-loop in the graph).
struct FcnMatrix {
  Eigen::MatrixXd values;  // N x N
  std::string atlas;
};

// Weighted undirected KNN graph over ROIs.
struct FcnGraph {
  int node_count = 0;
  Eigen::MatrixXd node_features;  // N x N, row i = node i's connectivity profile
  Eigen::MatrixXd adjacency;      // N x N symmetric; self-loops on the diagonal
  std::vector<std::vector<int>> neighbor_lists;  // sorted, self included
};

// Pairwise Pearson correlation of ROI columns: symmetric, unit diagonal,
// entries in [-1, 1]. Throws DataError naming the first zero-variance ROI.
Eigen::MatrixXd pearson_fcn(const TimeSeries& series);

// Elementwise atanh with inputs clipped to +-(1 - 1e-7); diagonal set to 0.
FcnMatrix fisher_z(const Eigen::MatrixXd& pearson,
                   const std::string& atlas = {});

// Connects each node to its k strongest neighbors (by |z|, or by signed z
// when rank_by_magnitude is false), symmetrizes the edge set by union, and
// adds self-loops. Edge weights are the z values rescaled by the largest
// selected |z| so the whole adjacency lies in [-1, 1]; self-loops get
// weight 1. Ties in the ranking go to the lower node index.
FcnGraph knn_graph(const FcnMatrix& fcn, int k,
                   bool rank_by_magnitude = true);

}  // namespace magat
