#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "magat/rng.hpp"

namespace magat::ad {

class Tape;

// Handle into a tape; cheap to copy, invalid once the tape dies.
class Tensor {
 public:
  Tensor() = default;
  bool valid() const { return tape_ != nullptr; }
  const Eigen::MatrixXd& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }

 private:
  friend class Tape;
  Tensor(Tape* tape, int idx) : tape_(tape), idx_(idx) {}
  Tape* tape_ = nullptr;
  int idx_ = -1;
};

// Records one forward pass over dense matrices and replays it in reverse.
// Creation order is the topological order, so backward() is a single
// right-to-left sweep touching each node at most once. A tape is good for
// exactly one backward; build a fresh one per step.
class Tape {
 public:
  Tensor leaf(Eigen::MatrixXd value, bool requires_grad = false);

  Tensor add(Tensor a, Tensor b);
  Tensor sub(Tensor a, Tensor b);
  Tensor matmul(Tensor a, Tensor b);
  Tensor scalar_mul(Tensor a, double s);
  Tensor cwise_mul(Tensor a, Tensor b);
  Tensor leaky_relu(Tensor a, double slope);
  Tensor exp(Tensor a);
  Tensor log(Tensor a);
  Tensor concat_cols(const std::vector<Tensor>& xs);
  Tensor mean_rows(Tensor a);  // 1 x cols
  Tensor sum(Tensor a);        // 1 x 1
  Tensor slice_rows(Tensor a, int start, int count);
  // col: n x 1, row: m x 1 -> n x m matrix of pairwise sums f_i + g_j.
  Tensor outer_add(Tensor col, Tensor row);
  // Row-wise softmax over entries where mask != 0; masked entries are 0 in
  // the output and receive no gradient. Every row needs >= 1 active entry.
  Tensor masked_softmax(Tensor scores, const Eigen::MatrixXd& mask);
  Tensor softmax_rows(Tensor a);
  // Inverted dropout: kept entries scaled by 1/(1-rate). rate 0 = identity.
  Tensor dropout(Tensor a, double rate, Rng& rng);
  // Mean over rows of -sum_c onehot * log(max(p, 1e-12)); returns 1 x 1.
  Tensor cross_entropy(Tensor probs, const Eigen::MatrixXd& onehot);

  // Seeds d(loss)/d(loss) = 1 and sweeps the tape once. loss must be 1x1;
  // a second call on the same tape throws.
  void backward(Tensor loss);

  const Eigen::MatrixXd& value(Tensor t) const;
  // Gradient accumulated on t, zeros if backward never reached it.
  Eigen::MatrixXd grad(Tensor t) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;  // allocated on first accumulation
    bool requires_grad = false;
    std::function<void(Tape&, const Eigen::MatrixXd&)> backward;
  };

  Tensor push(Eigen::MatrixXd value, bool requires_grad,
              std::function<void(Tape&, const Eigen::MatrixXd&)> fn);
  void accumulate(int idx, const Eigen::MatrixXd& g);
  bool wants_grad(Tensor t) const;
  const Eigen::MatrixXd& val(int idx) const { return nodes_[idx].value; }

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

}  // namespace magat::ad
