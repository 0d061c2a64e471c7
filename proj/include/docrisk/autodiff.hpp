#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace docrisk::ad {

// Reverse-mode automatic differentiation on a Wengert list of Eigen matrices.
// Operands are always created before their results, so the backward pass is a
// single reverse sweep over the tape. A tape built with gradients disabled
// records values only; beam search runs in that mode.

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

class Tape;

class Var {
 public:
  Var() = default;
  Var(Tape* tape, int index) : tape_(tape), index_(index) {}

  const Mat& value() const;
  const Mat& grad() const;

  double scalar() const { return value()(0, 0); }
  Tape* tape() const { return tape_; }
  int index() const { return index_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  int index_ = -1;
};

class Tape {
 public:
  // The closure receives the index of its own node so it can read the
  // incoming gradient and add into its operands' gradients.
  using Backprop = std::function<void(Tape&, int)>;

  explicit Tape(bool record_gradients = true) : record_(record_gradients) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Mat value);

  // Seed d(root)/d(root) = 1 and sweep the list in reverse. root must be 1x1.
  void backward(const Var& root);

  void clear();
  std::size_t size() const { return values_.size(); }
  bool recording() const { return record_; }

  Var push(Mat value, Backprop backprop);
  const Mat& value_of(int index) const { return values_[index]; }
  Mat& grad_of(int index);  // lazily sized to the value's shape, zeroed

 private:
  bool record_;
  std::vector<Mat> values_;
  std::vector<Mat> grads_;
  std::vector<Backprop> backprops_;
};

// Elementwise and structural ops. All results live on the operands' tape.
Var add(Var a, Var b);
inline Var operator+(Var a, Var b) { return add(a, b); }
Var scale(Var a, double factor);
Var matmul(Var a, Var b);
Var matmul_tn(Var a, Var b);  // a^T * b
Var tanh(Var a);
Var concat_rows(Var a, Var b);
Var concat_cols(const std::vector<Var>& cols);
Var row_of(Var matrix, int row);  // row as a column vector; embedding lookup
Var col_of(Var matrix, int col);
Var pick(Var v, int index);       // 1x1 element of a column vector
Var stack(const std::vector<Var>& scalars);  // n x 1 from 1x1 vars
Var sum(const std::vector<Var>& scalars);    // 1x1
Var log_softmax(Var v);  // column vector, max-subtraction stabilized
Var softmax(Var v);

// Expected reward under the softmax of `scores`: E = sum_i r_i p_i with
// p = softmax(scores). The backward pass uses the pairwise form
// ds_i += g * p_i * sum_j p_j (r_i - r_j), which is identically zero when all
// rewards are equal. `probs_out`, when given, receives p.
Var expected_reward(Var scores, const Vec& rewards, Vec* probs_out = nullptr);

}  // namespace docrisk::ad
