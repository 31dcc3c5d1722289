#include "magat/ensemble.hpp"

#include <iostream>

#include "magat/error.hpp"

namespace magat {

Label majority_vote(const std::vector<MemberPrediction>& members) {
  if (members.empty()) throw DataError("majority_vote: no members");
  int votes[2] = {0, 0};
  for (const auto& m : members) ++votes[static_cast<int>(m.label)];
  if (votes[0] != votes[1])
    return votes[1] > votes[0] ? Label::positive : Label::negative;
  // Tie: defer to the most accurate member, earliest on an exact tie.
  const MemberPrediction* pick = &members.front();
  for (const auto& m : members)
    if (m.validation_accuracy > pick->validation_accuracy) pick = &m;
  return pick->label;
}

std::vector<double> member_weights(const std::vector<double>& accuracies) {
  if (accuracies.empty()) throw DataError("member_weights: no accuracies");
  double total = 0.0;
  for (double a : accuracies) {
    if (a <= 0.0)
      throw DataError("member_weights: accuracies must be positive");
    total += a;
  }
  std::vector<double> w;
  w.reserve(accuracies.size());
  for (double a : accuracies) w.push_back(a / total);
  return w;
}

Label weighted_sum(const std::vector<MemberPrediction>& members,
                   const std::vector<double>& weights) {
  if (members.empty()) throw DataError("weighted_sum: no members");
  if (members.size() != weights.size())
    throw DataError("weighted_sum: member/weight count mismatch");
  double sums[2] = {0.0, 0.0};
  for (std::size_t j = 0; j < members.size(); ++j) {
    sums[0] += weights[j] * members[j].probabilities[0];
    sums[1] += weights[j] * members[j].probabilities[1];
  }
  if (sums[0] == sums[1]) {
    std::cerr << "warning: weighted_sum: exact probability tie, falling back "
                 "to the negative class\n";
    return Label::negative;
  }
  return sums[1] > sums[0] ? Label::positive : Label::negative;
}

Label sum_fusion(const std::vector<MemberPrediction>& members) {
  if (members.empty()) throw DataError("sum_fusion: no members");
  return weighted_sum(
      members,
      std::vector<double>(members.size(), 1.0 / members.size()));
}

}  // namespace magat
