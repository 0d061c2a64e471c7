#include "docrisk/autodiff.hpp"

#include <cassert>
#include <cmath>

namespace docrisk::ad {

const Mat& Var::value() const { return tape_->value_of(index_); }
const Mat& Var::grad() const { return const_cast<Tape*>(tape_)->grad_of(index_); }

Var Tape::leaf(Mat value) { return push(std::move(value), {}); }

Var Tape::push(Mat value, Backprop backprop) {
  values_.push_back(std::move(value));
  if (record_) {
    grads_.emplace_back();
    backprops_.push_back(std::move(backprop));
  }
  return Var(this, static_cast<int>(values_.size()) - 1);
}

Mat& Tape::grad_of(int index) {
  Mat& g = grads_[index];
  if (g.size() == 0) g = Mat::Zero(values_[index].rows(), values_[index].cols());
  return g;
}

void Tape::backward(const Var& root) {
  assert(record_);
  assert(root.value().rows() == 1 && root.value().cols() == 1);
  grad_of(root.index())(0, 0) = 1.0;
  for (int i = root.index(); i >= 0; --i) {
    if (!backprops_[i]) continue;
    if (grads_[i].size() == 0) continue;  // node off every path to the root
    backprops_[i](*this, i);
  }
}

void Tape::clear() {
  values_.clear();
  grads_.clear();
  backprops_.clear();
}

namespace {

Tape::Backprop none() { return {}; }

}  // namespace

Var add(Var a, Var b) {
  Tape* t = a.tape();
  Mat out = a.value() + b.value();
  if (!t->recording()) return t->push(std::move(out), none());
  const int ia = a.index(), ib = b.index();
  return t->push(std::move(out), [ia, ib](Tape& tape, int self) {
    const Mat& g = tape.grad_of(self);
    tape.grad_of(ia) += g;
    tape.grad_of(ib) += g;
  });
}

Var scale(Var a, double factor) {
  Tape* t = a.tape();
  Mat out = a.value() * factor;
  if (!t->recording()) return t->push(std::move(out), none());
  const int ia = a.index();
  return t->push(std::move(out), [ia, factor](Tape& tape, int self) {
    tape.grad_of(ia) += factor * tape.grad_of(self);
  });
}

Var matmul(Var a, Var b) {
  Tape* t = a.tape();
  Mat out = a.value() * b.value();
  if (!t->recording()) return t->push(std::move(out), none());
  const int ia = a.index(), ib = b.index();
  return t->push(std::move(out), [ia, ib](Tape& tape, int self) {
    const Mat& g = tape.grad_of(self);
    tape.grad_of(ia) += g * tape.value_of(ib).transpose();
    tape.grad_of(ib) += tape.value_of(ia).transpose() * g;
  });
}

Var matmul_tn(Var a, Var b) {
  Tape* t = a.tape();
  Mat out = a.value().transpose() * b.value();
  if (!t->recording()) return t->push(std::move(out), none());
  const int ia = a.index(), ib = b.index();
  return t->push(std::move(out), [ia, ib](Tape& tape, int self) {
    const Mat& g = tape.grad_of(self);
    tape.grad_of(ia) += tape.value_of(ib) * g.transpose();
    tape.grad_of(ib) += tape.value_of(ia) * g;
  });
}

Var tanh(Var a) {
  Tape* t = a.tape();
  Mat out = a.value().array().tanh();
  if (!t->recording()) return t->push(std::move(out), none());
  const int ia = a.index();
  return t->push(std::move(out), [ia](Tape& tape, int self) {
    const Mat& y = tape.value_of(self);
    tape.grad_of(ia).array() +=
        tape.grad_of(self).array() * (1.0 - y.array().square());
  });
}

Var concat_rows(Var a, Var b) {
  Tape* t = a.tape();
  const auto ra = a.value().rows(), rb = b.value().rows();
  Mat out(ra + rb, 1);
  out.topRows(ra) = a.value();
  out.bottomRows(rb) = b.value();
  if (!t->recording()) return t->push(std::move(out), none());
  const int ia = a.index(), ib = b.index();
  return t->push(std::move(out), [ia, ib, ra, rb](Tape& tape, int self) {
    const Mat& g = tape.grad_of(self);
    tape.grad_of(ia) += g.topRows(ra);
    tape.grad_of(ib) += g.bottomRows(rb);
  });
}

Var concat_cols(const std::vector<Var>& cols) {
  assert(!cols.empty());
  Tape* t = cols.front().tape();
  Mat out(cols.front().value().rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(c) = cols[c].value();
  if (!t->recording()) return t->push(std::move(out), none());
  std::vector<int> indices;
  indices.reserve(cols.size());
  for (const auto& v : cols) indices.push_back(v.index());
  return t->push(std::move(out), [indices](Tape& tape, int self) {
    const Mat& g = tape.grad_of(self);
    for (std::size_t c = 0; c < indices.size(); ++c)
      tape.grad_of(indices[c]) += g.col(c);
  });
}

Var row_of(Var matrix, int row) {
  Tape* t = matrix.tape();
  Mat out = matrix.value().row(row).transpose();
  if (!t->recording()) return t->push(std::move(out), none());
  const int im = matrix.index();
  return t->push(std::move(out), [im, row](Tape& tape, int self) {
    tape.grad_of(im).row(row) += tape.grad_of(self).transpose();
  });
}

Var col_of(Var matrix, int col) {
  Tape* t = matrix.tape();
  Mat out = matrix.value().col(col);
  if (!t->recording()) return t->push(std::move(out), none());
  const int im = matrix.index();
  return t->push(std::move(out), [im, col](Tape& tape, int self) {
    tape.grad_of(im).col(col) += tape.grad_of(self);
  });
}

Var pick(Var v, int index) {
  Tape* t = v.tape();
  Mat out(1, 1);
  out(0, 0) = v.value()(index, 0);
  if (!t->recording()) return t->push(std::move(out), none());
  const int iv = v.index();
  return t->push(std::move(out), [iv, index](Tape& tape, int self) {
    tape.grad_of(iv)(index, 0) += tape.grad_of(self)(0, 0);
  });
}

Var stack(const std::vector<Var>& scalars) {
  assert(!scalars.empty());
  Tape* t = scalars.front().tape();
  Mat out(static_cast<Eigen::Index>(scalars.size()), 1);
  for (std::size_t i = 0; i < scalars.size(); ++i) out(i, 0) = scalars[i].scalar();
  if (!t->recording()) return t->push(std::move(out), none());
  std::vector<int> indices;
  indices.reserve(scalars.size());
  for (const auto& v : scalars) indices.push_back(v.index());
  return t->push(std::move(out), [indices](Tape& tape, int self) {
    const Mat& g = tape.grad_of(self);
    for (std::size_t i = 0; i < indices.size(); ++i)
      tape.grad_of(indices[i])(0, 0) += g(i, 0);
  });
}

Var sum(const std::vector<Var>& scalars) {
  assert(!scalars.empty());
  Tape* t = scalars.front().tape();
  double total = 0.0;
  for (const auto& v : scalars) total += v.scalar();
  Mat out(1, 1);
  out(0, 0) = total;
  if (!t->recording()) return t->push(std::move(out), none());
  std::vector<int> indices;
  indices.reserve(scalars.size());
  for (const auto& v : scalars) indices.push_back(v.index());
  return t->push(std::move(out), [indices](Tape& tape, int self) {
    const double g = tape.grad_of(self)(0, 0);
    for (int idx : indices) tape.grad_of(idx)(0, 0) += g;
  });
}

Var log_softmax(Var v) {
  Tape* t = v.tape();
  const Mat& x = v.value();
  const double mx = x.maxCoeff();
  const double lse = mx + std::log((x.array() - mx).exp().sum());
  Mat out = x.array() - lse;
  if (!t->recording()) return t->push(std::move(out), none());
  const int iv = v.index();
  return t->push(std::move(out), [iv](Tape& tape, int self) {
    const Mat& y = tape.value_of(self);  // log p
    const Mat& g = tape.grad_of(self);
    const double gsum = g.sum();
    tape.grad_of(iv).array() += g.array() - y.array().exp() * gsum;
  });
}

Var softmax(Var v) {
  Tape* t = v.tape();
  const Mat& x = v.value();
  const double mx = x.maxCoeff();
  Mat e = (x.array() - mx).exp();
  Mat out = e / e.sum();
  if (!t->recording()) return t->push(std::move(out), none());
  const int iv = v.index();
  return t->push(std::move(out), [iv](Tape& tape, int self) {
    const Mat& p = tape.value_of(self);
    const Mat& g = tape.grad_of(self);
    const double dot = (g.array() * p.array()).sum();
    tape.grad_of(iv).array() += p.array() * (g.array() - dot);
  });
}

Var expected_reward(Var scores, const Vec& rewards, Vec* probs_out) {
  Tape* t = scores.tape();
  const Mat& s = scores.value();
  assert(s.cols() == 1 && s.rows() == rewards.size());
  const double mx = s.maxCoeff();
  Vec e = (s.array() - mx).exp();
  Vec p = e / e.sum();
  if (probs_out) *probs_out = p;
  Mat out(1, 1);
  out(0, 0) = rewards.dot(p);
  if (!t->recording()) return t->push(std::move(out), none());
  const int is = scores.index();
  const Vec r = rewards;
  return t->push(std::move(out), [is, r, p](Tape& tape, int self) {
    const double g = tape.grad_of(self)(0, 0);
    Mat& ds = tape.grad_of(is);
    const auto n = p.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) acc += p(j) * (r(i) - r(j));
      ds(i, 0) += g * p(i) * acc;
    }
  });
}

}  // namespace docrisk::ad
