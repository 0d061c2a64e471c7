#include "docrisk/autodiff.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace docrisk::ad;

namespace {

// Central-difference check of d(root)/d(leaf) for one leaf entry.
double fd_entry(const std::function<Var(Tape&, const std::vector<Mat>&)>& build,
                std::vector<Mat> leaves, std::size_t leaf, Eigen::Index r, Eigen::Index c,
                double eps = 1e-6) {
  leaves[leaf](r, c) += eps;
  Tape up_tape;
  const double up = build(up_tape, leaves).scalar();
  leaves[leaf](r, c) -= 2 * eps;
  Tape down_tape;
  const double down = build(down_tape, leaves).scalar();
  return (up - down) / (2 * eps);
}

void check_grads(const std::function<Var(Tape&, const std::vector<Mat>&)>& build,
                 const std::vector<Mat>& leaves, double tol = 1e-6) {
  Tape tape;
  std::vector<Var> vars;
  // The build callback re-registers leaves itself; replicate that here so the
  // gradient of leaf i is reachable.
  Var root = build(tape, leaves);
  tape.backward(root);
  // Leaves occupy the first indices in registration order.
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    Var leaf_var(&tape, static_cast<int>(i));
    const Mat& g = leaf_var.grad();
    for (Eigen::Index r = 0; r < leaves[i].rows(); ++r) {
      for (Eigen::Index c = 0; c < leaves[i].cols(); ++c) {
        const double analytic = g.size() == 0 ? 0.0 : g(r, c);
        const double numeric = fd_entry(build, leaves, i, r, c);
        CHECK(analytic == doctest::Approx(numeric).epsilon(tol).scale(1.0));
      }
    }
  }
}

std::vector<Mat> random_mats(const std::vector<std::pair<int, int>>& shapes, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Mat> out;
  for (auto [r, c] : shapes) {
    Mat m(r, c);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = dist(rng);
    out.push_back(m);
  }
  return out;
}

}  // namespace

TEST_CASE("add, scale and matmul forward values") {
  Tape tape;
  Var a = tape.leaf((Mat(2, 2) << 1, 2, 3, 4).finished());
  Var b = tape.leaf(Mat::Identity(2, 2));
  CHECK((a + b).value()(1, 1) == 5.0);
  CHECK(scale(a, 2.0).value()(0, 1) == 4.0);
  CHECK(matmul(a, b).value() == a.value());
  CHECK(matmul_tn(a, b).value() == a.value().transpose());
}

TEST_CASE("backward through a matmul chain matches finite differences") {
  auto build = [](Tape& tape, const std::vector<Mat>& leaves) {
    Var w = tape.leaf(leaves[0]);
    Var x = tape.leaf(leaves[1]);
    Var b = tape.leaf(leaves[2]);
    Var h = tanh(matmul(w, x) + b);
    return pick(log_softmax(h), 1);
  };
  check_grads(build, random_mats({{3, 3}, {3, 1}, {3, 1}}, 11));
}

TEST_CASE("backward through attention-shaped graph matches finite differences") {
  auto build = [](Tape& tape, const std::vector<Mat>& leaves) {
    Var enc = tape.leaf(leaves[0]);    // H x n
    Var state = tape.leaf(leaves[1]);  // H x 1
    Var w = tape.leaf(leaves[2]);      // 2 x 2H
    Var att = softmax(matmul_tn(enc, state));
    Var ctx = matmul(enc, att);
    Var combined = tanh(matmul(w, concat_rows(state, ctx)));
    return pick(log_softmax(combined), 0);
  };
  check_grads(build, random_mats({{3, 4}, {3, 1}, {2, 6}}, 12));
}

TEST_CASE("row_of, col_of, stack and sum propagate gradients") {
  auto build = [](Tape& tape, const std::vector<Mat>& leaves) {
    Var table = tape.leaf(leaves[0]);  // 4 x 2
    Var r1 = row_of(table, 1);
    Var r3 = row_of(table, 3);
    Var m = concat_cols({r1, r3});
    Var c = col_of(m, 0);
    std::vector<Var> scalars{pick(c, 0), pick(r3, 1), pick(tanh(r1), 0)};
    Var stacked = stack(scalars);
    return docrisk::ad::sum({pick(log_softmax(stacked), 2), pick(stacked, 0)});
  };
  check_grads(build, random_mats({{4, 2}}, 13));
}

TEST_CASE("log_softmax is stable for large logits and sums to one") {
  Tape tape;
  Var v = tape.leaf((Mat(3, 1) << 1000.0, 999.0, -1000.0).finished());
  Mat lp = log_softmax(v).value();
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) sum += std::exp(lp(i, 0));
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::isfinite(lp(2, 0)));
}

TEST_CASE("expected_reward forward value and probabilities") {
  Tape tape;
  Var scores = tape.leaf((Mat(2, 1) << -1.0, -2.0).finished());
  Vec rewards(2);
  rewards << 1.0, 0.0;
  Vec probs;
  Var e = expected_reward(scores, rewards, &probs);
  CHECK(probs(0) == doctest::Approx(0.7310585786300049).epsilon(1e-12));
  CHECK(probs(1) == doctest::Approx(0.2689414213699951).epsilon(1e-12));
  CHECK(e.scalar() == doctest::Approx(0.7310585786300049).epsilon(1e-12));
}

TEST_CASE("expected_reward gradient matches finite differences") {
  Vec rewards(3);
  rewards << 0.3, -0.2, 0.9;
  auto build = [&rewards](Tape& tape, const std::vector<Mat>& leaves) {
    Var scores = tape.leaf(leaves[0]);
    return expected_reward(scores, rewards);
  };
  check_grads(build, random_mats({{3, 1}}, 14));
}

TEST_CASE("expected_reward gradient is exactly zero for equal rewards") {
  Tape tape;
  Var scores = tape.leaf((Mat(3, 1) << 0.3, -1.7, 0.2).finished());
  Vec rewards(3);
  rewards << 0.5, 0.5, 0.5;
  Var e = expected_reward(scores, rewards);
  tape.backward(e);
  const Mat& g = scores.grad();
  for (int i = 0; i < 3; ++i) CHECK(g(i, 0) == 0.0);
}

TEST_CASE("non-recording tapes skip gradient storage") {
  Tape tape(false);
  Var a = tape.leaf(Mat::Ones(2, 2));
  Var b = tanh(matmul(a, a));
  CHECK(b.value()(0, 0) == doctest::Approx(std::tanh(2.0)));
  CHECK_FALSE(tape.recording());
}
