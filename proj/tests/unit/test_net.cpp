#include <doctest.h>

#include <sstream>

#include "generators.hpp"
#include "rpl/common/error.hpp"
#include "rpl/net/mlp.hpp"

using namespace rpl;
using net::Mat;
using net::Mlp;
using net::Vec;

namespace {

Mlp random_net(std::vector<int> sizes, std::uint64_t seed) {
  Mlp m(std::move(sizes));
  net::init_he_uniform(m, seed);
  // Non-zero biases so the bias gradients are exercised.
  Rng r(seed + 1);
  for (int l = 0; l < m.num_layers(); ++l)
    for (Eigen::Index i = 0; i < m.bias(l).size(); ++i) m.bias(l)(i) = r.uniform(-0.1, 0.1);
  return m;
}

// Loss = sum_j w_j . f(x_j); returned gradient by central differences.
double weighted_output(const Mlp& m, const Mat& x, const Mat& w) { return (m.forward_batch(x).array() * w.array()).sum(); }

}  // namespace

TEST_CASE("forward_batch agrees with per-sample forward") {
  Rng r(1);
  Mlp m = random_net({5, 8, 8, 3}, 3);
  const Mat x = testgen::mat(r, 5, 7);
  const Mat y = m.forward_batch(x);
  for (int j = 0; j < 7; ++j) CHECK((y.col(j) - m.forward(x.col(j))).norm() < 1e-12);
}

TEST_CASE("backward matches central finite differences") {
  Rng r(2);
  for (int trial = 0; trial < 10; ++trial) {
    Mlp m = random_net({4, 6, 5, 2}, 10 + trial);
    const Mat x = testgen::mat(r, 4, 3);
    const Mat w = testgen::mat(r, 2, 3);
    const net::GradientTape tape = net::backward(m, net::forward_trace(m, x), w, true);
    const double h = 1e-6;
    for (int l = 0; l < m.num_layers(); ++l) {
      for (Eigen::Index i = 0; i < m.weight(l).size(); ++i) {
        Mlp p = m, q = m;
        p.weight(l).data()[i] += h;
        q.weight(l).data()[i] -= h;
        const double fd = (weighted_output(p, x, w) - weighted_output(q, x, w)) / (2 * h);
        CHECK(std::abs(fd - tape.weights[l].data()[i]) < 1e-6);
      }
      for (Eigen::Index i = 0; i < m.bias(l).size(); ++i) {
        Mlp p = m, q = m;
        p.bias(l)(i) += h;
        q.bias(l)(i) -= h;
        const double fd = (weighted_output(p, x, w) - weighted_output(q, x, w)) / (2 * h);
        CHECK(std::abs(fd - tape.biases[l](i)) < 1e-6);
      }
    }
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      Mat xp = x, xq = x;
      xp.data()[i] += h;
      xq.data()[i] -= h;
      const double fd = (weighted_output(m, xp, w) - weighted_output(m, xq, w)) / (2 * h);
      CHECK(std::abs(fd - tape.input.data()[i]) < 1e-6);
    }
  }
}

TEST_CASE("residual init outputs exact zeros everywhere") {
  Rng r(3);
  Mlp m = Mlp::with_hidden(6, 4, {16, 16});
  net::init_residual(m, 5);
  for (int i = 0; i < 100; ++i) {
    const Vec y = m.forward(testgen::vec(r, 6, -100, 100));
    for (Eigen::Index k = 0; k < y.size(); ++k) {
      CHECK(y(k) == 0.0);
      CHECK(!std::signbit(y(k)));
    }
  }
}

TEST_CASE("he init is seeded and bounded") {
  Mlp a = Mlp::with_hidden(10, 2, {32}), b = a, c = a;
  net::init_he_uniform(a, 1);
  net::init_he_uniform(b, 1);
  net::init_he_uniform(c, 2);
  CHECK(a == b);
  CHECK(!(a == c));
  CHECK(a.fingerprint() == b.fingerprint());
  CHECK(a.fingerprint() != c.fingerprint());
  CHECK(a.weight(0).cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 10.0));
}

TEST_CASE("adam step follows the bias-corrected update") {
  Mlp m({1, 1});
  m.weight(0)(0, 0) = 0.5;
  m.bias(0)(0) = 0.0;
  net::AdamState st(m, 0.1);
  net::GradientTape g(m);
  g.weights[0](0, 0) = 2.0;
  g.biases[0](0) = -3.0;
  net::adam_step(m, st, g);
  // First step: m_hat = g, v_hat = g^2, so the step is lr * sign(g) (up to eps).
  CHECK(m.weight(0)(0, 0) == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(m.bias(0)(0) == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(st.step_count == 1u);
}

TEST_CASE("adam refuses non-finite gradients without modifying the net") {
  Mlp m = random_net({2, 3, 1}, 4);
  const Mlp before = m;
  net::AdamState st(m);
  net::GradientTape g(m);
  g.weights[1](0, 0) = std::nan("");
  CHECK_THROWS_AS(net::adam_step(m, st, g), NumericError);
  CHECK(m == before);
}

TEST_CASE("polyak update interpolates") {
  Mlp online = random_net({3, 4, 2}, 5), target = random_net({3, 4, 2}, 6);
  const Mlp t0 = target;
  net::polyak_update(target, online, 0.95);
  for (int l = 0; l < online.num_layers(); ++l)
    CHECK((target.weight(l) - (0.95 * t0.weight(l) + 0.05 * online.weight(l))).norm() < 1e-14);
  Mlp same = t0;
  net::polyak_update(same, online, 0.0);
  CHECK(same == online);
}

TEST_CASE("checkpoint round trip is bit exact") {
  Mlp m = random_net({7, 9, 3}, 8);
  std::stringstream ss;
  net::save(m, ss);
  CHECK(ss.str().rfind("RPLNET v1 7,9,3", 0) == 0);
  const Mlp back = net::load(ss);
  CHECK(back == m);
  CHECK(back.fingerprint() == m.fingerprint());
}

TEST_CASE("corrupt checkpoints are rejected") {
  std::stringstream bad("RPLNET v2 1,1\n0\n0\n");
  CHECK_THROWS(net::load(bad));
  std::stringstream truncated("RPLNET v1 2,1\n0.5\n");
  CHECK_THROWS(net::load(truncated));
}

TEST_CASE("gradient tape accumulates") {
  Mlp m = random_net({2, 3, 1}, 9);
  Rng r(1);
  const Mat x = testgen::mat(r, 2, 4), w = testgen::mat(r, 1, 4);
  net::GradientTape a = net::backward(m, net::forward_trace(m, x), w);
  net::GradientTape twice = a;
  twice += a;
  a *= 2.0;
  for (int l = 0; l < m.num_layers(); ++l) CHECK((twice.weights[l] - a.weights[l]).norm() < 1e-14);
  CHECK(a.matches(m));
}
