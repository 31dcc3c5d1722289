#include "magat/ad.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace magat::ad {
namespace {

constexpr double kLogFloor = 1e-12;

void check_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                      const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::logic_error(std::string(op) + ": shape mismatch (" +
                           std::to_string(a.rows()) + "x" +
                           std::to_string(a.cols()) + " vs " +
                           std::to_string(b.rows()) + "x" +
                           std::to_string(b.cols()) + ")");
  }
}

}  // namespace

const Eigen::MatrixXd& Tensor::value() const { return tape_->value(*this); }

const Eigen::MatrixXd& Tape::value(Tensor t) const {
  return nodes_.at(t.idx_).value;
}

Eigen::MatrixXd Tape::grad(Tensor t) const {
  const Node& n = nodes_.at(t.idx_);
  if (n.grad.size() == 0)
    return Eigen::MatrixXd::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

bool Tape::wants_grad(Tensor t) const {
  return nodes_.at(t.idx_).requires_grad;
}

Tensor Tape::push(Eigen::MatrixXd value, bool requires_grad,
                  std::function<void(Tape&, const Eigen::MatrixXd&)> fn) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Tensor(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::accumulate(int idx, const Eigen::MatrixXd& g) {
  Node& n = nodes_[idx];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0)
    n.grad = g;
  else
    n.grad += g;
}

Tensor Tape::leaf(Eigen::MatrixXd value, bool requires_grad) {
  return push(std::move(value), requires_grad, nullptr);
}

Tensor Tape::add(Tensor a, Tensor b) {
  check_same_shape(value(a), value(b), "add");
  int ia = a.idx_, ib = b.idx_;
  return push(value(a) + value(b), wants_grad(a) || wants_grad(b),
              [ia, ib](Tape& t, const Eigen::MatrixXd& g) {
                t.accumulate(ia, g);
                t.accumulate(ib, g);
              });
}

Tensor Tape::sub(Tensor a, Tensor b) {
  check_same_shape(value(a), value(b), "sub");
  int ia = a.idx_, ib = b.idx_;
  return push(value(a) - value(b), wants_grad(a) || wants_grad(b),
              [ia, ib](Tape& t, const Eigen::MatrixXd& g) {
                t.accumulate(ia, g);
                t.accumulate(ib, -g);
              });
}

Tensor Tape::matmul(Tensor a, Tensor b) {
  if (value(a).cols() != value(b).rows())
    throw std::logic_error("matmul: inner dimensions differ");
  int ia = a.idx_, ib = b.idx_;
  return push(value(a) * value(b), wants_grad(a) || wants_grad(b),
              [ia, ib](Tape& t, const Eigen::MatrixXd& g) {
                t.accumulate(ia, g * t.val(ib).transpose());
                t.accumulate(ib, t.val(ia).transpose() * g);
              });
}

Tensor Tape::scalar_mul(Tensor a, double s) {
  int ia = a.idx_;
  return push(value(a) * s, wants_grad(a),
              [ia, s](Tape& t, const Eigen::MatrixXd& g) {
                t.accumulate(ia, g * s);
              });
}

Tensor Tape::cwise_mul(Tensor a, Tensor b) {
  check_same_shape(value(a), value(b), "cwise_mul");
  int ia = a.idx_, ib = b.idx_;
  return push(value(a).cwiseProduct(value(b)),
              wants_grad(a) || wants_grad(b),
              [ia, ib](Tape& t, const Eigen::MatrixXd& g) {
                t.accumulate(ia, g.cwiseProduct(t.val(ib)));
                t.accumulate(ib, g.cwiseProduct(t.val(ia)));
              });
}

Tensor Tape::leaky_relu(Tensor a, double slope) {
  int ia = a.idx_;
  Eigen::MatrixXd v = value(a).unaryExpr(
      [slope](double x) { return x >= 0.0 ? x : slope * x; });
  return push(std::move(v), wants_grad(a),
              [ia, slope](Tape& t, const Eigen::MatrixXd& g) {
                // derivative at exactly 0 uses the positive side
                Eigen::MatrixXd d = t.val(ia).unaryExpr(
                    [slope](double x) { return x >= 0.0 ? 1.0 : slope; });
                t.accumulate(ia, g.cwiseProduct(d));
              });
}

Tensor Tape::exp(Tensor a) {
  int ia = a.idx_;
  Eigen::MatrixXd v = value(a).array().exp().matrix();
  Tensor out = push(std::move(v), wants_grad(a), nullptr);
  int io = out.idx_;
  nodes_[io].backward = [ia, io](Tape& t, const Eigen::MatrixXd& g) {
    t.accumulate(ia, g.cwiseProduct(t.val(io)));
  };
  return out;
}

Tensor Tape::log(Tensor a) {
  int ia = a.idx_;
  Eigen::MatrixXd v = value(a).unaryExpr(
      [](double x) { return std::log(std::max(x, kLogFloor)); });
  return push(std::move(v), wants_grad(a),
              [ia](Tape& t, const Eigen::MatrixXd& g) {
                Eigen::MatrixXd d = t.val(ia).unaryExpr([](double x) {
                  return x > kLogFloor ? 1.0 / x : 0.0;
                });
                t.accumulate(ia, g.cwiseProduct(d));
              });
}

Tensor Tape::concat_cols(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw std::logic_error("concat_cols: no inputs");
  Eigen::Index rows = value(xs[0]).rows(), cols = 0;
  bool rg = false;
  std::vector<int> idx;
  std::vector<Eigen::Index> widths;
  for (Tensor x : xs) {
    if (value(x).rows() != rows)
      throw std::logic_error("concat_cols: row counts differ");
    cols += value(x).cols();
    widths.push_back(value(x).cols());
    idx.push_back(x.idx_);
    rg = rg || wants_grad(x);
  }
  Eigen::MatrixXd v(rows, cols);
  Eigen::Index at = 0;
  for (Tensor x : xs) {
    v.middleCols(at, value(x).cols()) = value(x);
    at += value(x).cols();
  }
  return push(std::move(v), rg,
              [idx, widths](Tape& t, const Eigen::MatrixXd& g) {
                Eigen::Index at = 0;
                for (std::size_t i = 0; i < idx.size(); ++i) {
                  t.accumulate(idx[i], g.middleCols(at, widths[i]));
                  at += widths[i];
                }
              });
}

Tensor Tape::mean_rows(Tensor a) {
  int ia = a.idx_;
  const Eigen::Index n = value(a).rows();
  Eigen::MatrixXd v = value(a).colwise().mean();
  return push(std::move(v), wants_grad(a),
              [ia, n](Tape& t, const Eigen::MatrixXd& g) {
                t.accumulate(ia, (g / static_cast<double>(n)).replicate(n, 1));
              });
}

Tensor Tape::sum(Tensor a) {
  int ia = a.idx_;
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = value(a).sum();
  return push(std::move(v), wants_grad(a),
              [ia](Tape& t, const Eigen::MatrixXd& g) {
                t.accumulate(ia, Eigen::MatrixXd::Constant(
                                     t.val(ia).rows(), t.val(ia).cols(),
                                     g(0, 0)));
              });
}

Tensor Tape::slice_rows(Tensor a, int start, int count) {
  if (start < 0 || count < 1 || start + count > value(a).rows())
    throw std::logic_error("slice_rows: range out of bounds");
  int ia = a.idx_;
  return push(value(a).middleRows(start, count), wants_grad(a),
              [ia, start, count](Tape& t, const Eigen::MatrixXd& g) {
                Eigen::MatrixXd d = Eigen::MatrixXd::Zero(
                    t.val(ia).rows(), t.val(ia).cols());
                d.middleRows(start, count) = g;
                t.accumulate(ia, d);
              });
}

Tensor Tape::outer_add(Tensor col, Tensor row) {
  if (value(col).cols() != 1 || value(row).cols() != 1)
    throw std::logic_error("outer_add: inputs must be column vectors");
  int ic = col.idx_, ir = row.idx_;
  const Eigen::Index n = value(col).rows(), m = value(row).rows();
  Eigen::MatrixXd v = value(col).replicate(1, m) +
                      value(row).transpose().replicate(n, 1);
  return push(std::move(v), wants_grad(col) || wants_grad(row),
              [ic, ir](Tape& t, const Eigen::MatrixXd& g) {
                t.accumulate(ic, g.rowwise().sum());
                t.accumulate(ir, g.colwise().sum().transpose());
              });
}

Tensor Tape::masked_softmax(Tensor scores, const Eigen::MatrixXd& mask) {
  check_same_shape(value(scores), mask, "masked_softmax");
  int is = scores.idx_;
  const Eigen::MatrixXd& s = value(scores);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < s.cols(); ++j)
      if (mask(i, j) != 0.0) mx = std::max(mx, s(i, j));
    if (!std::isfinite(mx))
      throw std::logic_error("masked_softmax: row " + std::to_string(i) +
                             " has no active entries");
    double z = 0.0;
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      if (mask(i, j) == 0.0) continue;
      p(i, j) = std::exp(s(i, j) - mx);
      z += p(i, j);
    }
    p.row(i) /= z;
  }
  Tensor out = push(std::move(p), wants_grad(scores), nullptr);
  int io = out.idx_;
  nodes_[io].backward = [is, io](Tape& t, const Eigen::MatrixXd& g) {
    const Eigen::MatrixXd& p = t.val(io);
    Eigen::VectorXd dot = (g.cwiseProduct(p)).rowwise().sum();
    Eigen::MatrixXd d = p.cwiseProduct(g.colwise() - dot);
    t.accumulate(is, d);
  };
  return out;
}

Tensor Tape::softmax_rows(Tensor a) {
  return masked_softmax(
      a, Eigen::MatrixXd::Ones(value(a).rows(), value(a).cols()));
}

Tensor Tape::dropout(Tensor a, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0)
    throw std::logic_error("dropout: rate must be in [0, 1)");
  int ia = a.idx_;
  if (rate == 0.0) {
    return push(value(a), wants_grad(a),
                [ia](Tape& t, const Eigen::MatrixXd& g) {
                  t.accumulate(ia, g);
                });
  }
  const double scale = 1.0 / (1.0 - rate);
  Eigen::MatrixXd mask(value(a).rows(), value(a).cols());
  for (Eigen::Index j = 0; j < mask.cols(); ++j)
    for (Eigen::Index i = 0; i < mask.rows(); ++i)
      mask(i, j) = uniform_double(rng) >= rate ? scale : 0.0;
  return push(value(a).cwiseProduct(mask), wants_grad(a),
              [ia, mask](Tape& t, const Eigen::MatrixXd& g) {
                t.accumulate(ia, g.cwiseProduct(mask));
              });
}

Tensor Tape::cross_entropy(Tensor probs, const Eigen::MatrixXd& onehot) {
  check_same_shape(value(probs), onehot, "cross_entropy");
  int ip = probs.idx_;
  const Eigen::MatrixXd& p = value(probs);
  const double r = static_cast<double>(p.rows());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j)
      if (onehot(i, j) != 0.0)
        loss -= onehot(i, j) * std::log(std::max(p(i, j), kLogFloor));
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = loss / r;
  return push(std::move(v), wants_grad(probs),
              [ip, onehot, r](Tape& t, const Eigen::MatrixXd& g) {
                const Eigen::MatrixXd& p = t.val(ip);
                Eigen::MatrixXd d =
                    Eigen::MatrixXd::Zero(p.rows(), p.cols());
                for (Eigen::Index i = 0; i < p.rows(); ++i)
                  for (Eigen::Index j = 0; j < p.cols(); ++j)
                    if (onehot(i, j) != 0.0 && p(i, j) > kLogFloor)
                      d(i, j) = -onehot(i, j) / p(i, j);
                t.accumulate(ip, (g(0, 0) / r) * d);
              });
}

void Tape::backward(Tensor loss) {
  if (consumed_) throw std::logic_error("backward: tape already consumed");
  if (value(loss).size() != 1)
    throw std::logic_error("backward: loss must be a 1x1 tensor");
  consumed_ = true;
  accumulate(loss.idx_, Eigen::MatrixXd::Ones(1, 1));
  for (int i = loss.idx_; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.grad.size() == 0 || !n.backward) continue;
    n.backward(*this, n.grad);
  }
}

}  // namespace magat::ad
