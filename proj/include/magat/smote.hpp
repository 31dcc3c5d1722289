#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "magat/dataset.hpp"

namespace magat {

struct SmoteConfig {
  int k_neighbors = 3;
  double multiplier = 2.0;  // 2.0 doubles the split
  std::uint64_t seed = 0;
};

// Synthetic point plus the endpoint metadata needed to audit the segment
// identity.
struct SyntheticPoint {
  Eigen::VectorXd values;
  int source = -1;    // index of X0 in the input list
  int neighbor = -1;  // index of X in the input list
  double gap = 0.0;
};

inline Eigen::VectorXd smote_interpolate(const Eigen::VectorXd& x0,
                                         const Eigen::VectorXd& x,
                                         double gap) {
  return x0 + (x - x0) * gap;
}

// Generates ceil((multiplier-1)*n) points for one class. Sources are cycled
// in seeded-shuffled order so doubling gives every real sample exactly one
// child; the partner is drawn uniformly from the source's k nearest
// neighbors (Euclidean, ties to the lower index).
std::vector<SyntheticPoint> smote_class(
    const std::vector<Eigen::VectorXd>& samples, const SmoteConfig& cfg);

// One element of a train/validation split, before or after augmentation.
struct Sample {
  std::string id;
  Label label = Label::negative;
  Eigen::MatrixXd series;  // T x N
  bool synthetic = false;
};

// Doubles (per cfg.multiplier) each class independently, interpolating in
// flattened T*N space and reshaping back. Input order is preserved;
// synthetic samples are appended with synthetic=true.
std::vector<Sample> oversample_split(const std::vector<Sample>& split,
                                     const SmoteConfig& cfg);

}  // namespace magat
