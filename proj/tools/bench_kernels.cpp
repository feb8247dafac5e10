// Times the serial reference kernels against the OpenMP ones on typical shapes.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#include "crec/core/kernels.hpp"
#include "crec/core/rng.hpp"

using namespace crec;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

std::vector<double> randu(int n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1, 1);
  return v;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
  return d;
}

}  // namespace

int main() {
  Rng rng(42);
  std::printf("%-28s %10s %10s %8s %12s\n", "kernel", "serial ms", "omp ms", "speedup", "max|diff|");

  {
    const int m = 512, n = 512, k = 512;
    const auto A = randu(m * k, rng), B = randu(k * n, rng);
    std::vector<double> Cs(m * n), Cp(m * n);
    const double ts =
        time_ms([&] { kern::serial::gemm(false, false, m, n, k, A.data(), B.data(), Cs.data(), false); }, 3);
    const double tp =
        time_ms([&] { kern::par::gemm(false, false, m, n, k, A.data(), B.data(), Cp.data(), false); }, 3);
    std::printf("%-28s %10.2f %10.2f %8.2fx %12.3e\n", "gemm 512x512x512", ts, tp, ts / tp,
                max_abs_diff(Cs, Cp));
  }
  {
    const int c = 16, h = 112, w = 112, kh = 3, kw = 3, stride = 2, pad = 1;
    const int oh = kern::conv_out_dim(h, kh, stride, pad), ow = kern::conv_out_dim(w, kw, stride, pad);
    const auto in = randu(c * h * w, rng);
    std::vector<double> cs(c * kh * kw * oh * ow), cp(cs.size());
    const double ts =
        time_ms([&] { kern::serial::im2col(in.data(), c, h, w, kh, kw, stride, pad, cs.data()); }, 10);
    const double tp =
        time_ms([&] { kern::par::im2col(in.data(), c, h, w, kh, kw, stride, pad, cp.data()); }, 10);
    std::printf("%-28s %10.2f %10.2f %8.2fx %12.3e\n", "im2col 16x112x112 k3s2", ts, tp, ts / tp,
                max_abs_diff(cs, cp));

    std::vector<double> gs(c * h * w), gp(c * h * w);
    const double ts2 =
        time_ms([&] { kern::serial::col2im(cs.data(), c, h, w, kh, kw, stride, pad, gs.data()); }, 10);
    const double tp2 =
        time_ms([&] { kern::par::col2im(cs.data(), c, h, w, kh, kw, stride, pad, gp.data()); }, 10);
    std::printf("%-28s %10.2f %10.2f %8.2fx %12.3e\n", "col2im 16x112x112 k3s2", ts2, tp2,
                ts2 / tp2, max_abs_diff(gs, gp));
  }
  {
    const int n = 10000, m = 10000;
    const auto p = randu(n * 3, rng), q = randu(m * 3, rng);
    std::vector<double> ds(n), dp(n);
    const double ts = time_ms([&] { kern::serial::nn_distances(p.data(), n, q.data(), m, ds.data()); }, 2);
    const double tp = time_ms([&] { kern::par::nn_distances(p.data(), n, q.data(), m, dp.data()); }, 2);
    std::printf("%-28s %10.2f %10.2f %8.2fx %12.3e\n", "nn_distances 10k x 10k", ts, tp, ts / tp,
                max_abs_diff(ds, dp));
  }
  return 0;
}
