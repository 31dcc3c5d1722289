#pragma once

#include <array>
#include <string>
#include <vector>

#include "magat/dataset.hpp"

namespace magat {

struct MemberPrediction {
  std::string atlas;
  std::array<double, 2> probabilities{0.0, 0.0};  // index = class
  Label label = Label::negative;                  // argmax of probabilities
  double validation_accuracy = 0.0;               // Acc_j, basis for weights
};

// Modal label; a tied vote goes to the member with the highest validation
// accuracy (earlier member wins an exact accuracy tie).
Label majority_vote(const std::vector<MemberPrediction>& members);

// w_j = Acc_j / sum(Acc); requires strictly positive accuracies.
std::vector<double> member_weights(const std::vector<double>& accuracies);

// argmax_i sum_j w_j * p_ij; an exact tie falls back to the negative class
// and logs a warning.
Label weighted_sum(const std::vector<MemberPrediction>& members,
                   const std::vector<double>& weights);

// weighted_sum with uniform weights.
Label sum_fusion(const std::vector<MemberPrediction>& members);

}  // namespace magat
