#include "doctest.h"

#include <cmath>

#include "crec/core/kernels.hpp"
#include "crec/core/nn.hpp"
#include "crec/core/rng.hpp"
#include "test_util.hpp"

using namespace crec;

namespace {

std::vector<double> randv(int n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1, 1);
  return v;
}

}  // namespace

TEST_CASE("tensor shape checks") {
  Tensor t({2, 3});
  CHECK(t.rows() == 2);
  CHECK(t.v.size() == 6);
  CHECK_THROWS_AS(require_shape(t, {3, 2}, "probe"), DimensionError);
  CHECK_NOTHROW(require_shape(t, {2, 3}, "probe"));
}

TEST_CASE("gemm serial and parallel agree on random shapes") {
  Rng rng(1);
  for (int trial = 0; trial < 8; ++trial) {
    const int m = 1 + rng.uniform_int(40), n = 1 + rng.uniform_int(40),
              k = 1 + rng.uniform_int(40);
    const bool ta = rng.uniform() < 0.5, tb = rng.uniform() < 0.5;
    const auto A = randv(m * k, rng), B = randv(k * n, rng);
    std::vector<double> Cs(m * n, 0.5), Cp(m * n, 0.5);
    const bool acc = rng.uniform() < 0.5;
    kern::serial::gemm(ta, tb, m, n, k, A.data(), B.data(), Cs.data(), acc);
    kern::par::gemm(ta, tb, m, n, k, A.data(), B.data(), Cp.data(), acc);
    for (size_t i = 0; i < Cs.size(); ++i) CHECK(Cs[i] == doctest::Approx(Cp[i]).epsilon(1e-12));
  }
}

TEST_CASE("gemm matches a naive triple loop") {
  Rng rng(2);
  const int m = 7, n = 5, k = 9;
  const auto A = randv(m * k, rng), B = randv(k * n, rng);
  std::vector<double> C(m * n);
  kern::gemm(false, false, m, n, k, A.data(), B.data(), C.data());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0;
      for (int p = 0; p < k; ++p) s += A[i * k + p] * B[p * n + j];
      CHECK(C[i * n + j] == doctest::Approx(s).epsilon(1e-12));
    }
}

TEST_CASE("im2col/col2im serial and parallel agree") {
  Rng rng(3);
  const int c = 4, h = 17, w = 13, kh = 3, kw = 3, stride = 2, pad = 1;
  const int oh = kern::conv_out_dim(h, kh, stride, pad), ow = kern::conv_out_dim(w, kw, stride, pad);
  const auto in = randv(c * h * w, rng);
  std::vector<double> cs(c * kh * kw * oh * ow), cp(cs.size());
  kern::serial::im2col(in.data(), c, h, w, kh, kw, stride, pad, cs.data());
  kern::par::im2col(in.data(), c, h, w, kh, kw, stride, pad, cp.data());
  CHECK(cs == cp);

  std::vector<double> gs(c * h * w, 0.0), gp(c * h * w, 0.0);
  kern::serial::col2im(cs.data(), c, h, w, kh, kw, stride, pad, gs.data());
  kern::par::col2im(cs.data(), c, h, w, kh, kw, stride, pad, gp.data());
  for (size_t i = 0; i < gs.size(); ++i) CHECK(gs[i] == doctest::Approx(gp[i]).epsilon(1e-12));
}

TEST_CASE("nn_distances serial and parallel agree and match brute force") {
  Rng rng(4);
  const int n = 123, m = 77;
  const auto p = randv(n * 3, rng), q = randv(m * 3, rng);
  std::vector<double> ds(n), dp(n);
  kern::serial::nn_distances(p.data(), n, q.data(), m, ds.data());
  kern::par::nn_distances(p.data(), n, q.data(), m, dp.data());
  for (int i = 0; i < n; ++i) {
    CHECK(ds[i] == doctest::Approx(dp[i]).epsilon(1e-12));
    double best = 1e300;
    for (int j = 0; j < m; ++j) {
      const double dx = p[3 * i] - q[3 * j], dy = p[3 * i + 1] - q[3 * j + 1],
                   dz = p[3 * i + 2] - q[3 * j + 2];
      best = std::min(best, std::sqrt(dx * dx + dy * dy + dz * dz));
    }
    CHECK(ds[i] == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("autodiff primitive gradients match finite differences") {
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor x({4, 3});
    for (double& v : x.v) v = rng.uniform(-1, 1);
    Tensor w({3, 2});
    for (double& v : w.v) v = rng.uniform(-1, 1);
    const double err = testutil::fd_check_input(x, [&](const ad::Var& xv) {
      const ad::Var y = ad::matmul(ad::sigmoid(xv), ad::constant(w));
      return ad::mean(ad::mul(y, y));
    });
    CHECK(err < 1e-4);
  }
}

TEST_CASE("autodiff softmax and layer norm gradients") {
  Rng rng(6);
  Tensor x({3, 5});
  for (double& v : x.v) v = rng.uniform(-1, 1);
  Tensor g = Tensor::full({5}, 1.3), b = Tensor::full({5}, -0.2);
  const double err = testutil::fd_check_input(x, [&](const ad::Var& xv) {
    const ad::Var s = ad::softmax_rows(xv);
    const ad::Var n = ad::layer_norm_rows(s, ad::constant(g), ad::constant(b));
    return ad::sum(ad::mul(n, n));
  });
  CHECK(err < 1e-4);
}

TEST_CASE("gather_rows treats index -1 as a zero row, with zero gradient") {
  Tensor x({2, 3}, {1, 2, 3, 4, 5, 6});
  ad::Var leaf = ad::input(x);
  const ad::Var y = ad::gather_rows(leaf, {1, -1, 0});
  CHECK(y->val.at(1, 0) == 0.0);
  CHECK(y->val.at(1, 2) == 0.0);
  CHECK(y->val.at(0, 1) == 5.0);
  ad::backward(ad::sum(y));
  CHECK(leaf->grad.at(0, 0) == 1.0);
  CHECK(leaf->grad.at(1, 0) == 1.0);
}

TEST_CASE("adam step decreases a quadratic") {
  nn::ParamStore ps;
  const int id = ps.add("w", Tensor({2}, {3.0, -2.0}));
  double prev = 1e300;
  for (int it = 0; it < 200; ++it) {
    ps.zero_grad();
    const ad::Var w = ps.use(id);
    const ad::Var loss = ad::sum(ad::mul(w, w));
    ad::backward(loss);
    if (it % 50 == 0) {
      CHECK(loss->val.at(0) < prev + 1e-12);
      prev = loss->val.at(0);
    }
    ps.adam_step(0.05);
  }
  CHECK(std::fabs(ps.value(id).at(0)) < 1.0);
}
