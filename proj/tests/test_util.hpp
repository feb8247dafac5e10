#pragma once

#include <cmath>
#include <functional>

#include "crec/core/nn.hpp"

namespace crec::testutil {

// Central finite-difference check of ParamStore gradients against a scalar
// loss closure. Probes up to n_probes entries per parameter tensor (those with
// non-negligible analytic gradient) and returns the worst relative error,
// measured as |g_an - g_fd| / max(|g_fd|, floor).
inline double fd_check_params(nn::ParamStore& ps, const std::function<ad::Var()>& loss_fn,
                              int n_probes_per_tensor = 3, double eps = 1e-6,
                              double floor = 1e-3) {
  ps.zero_grad();
  ad::backward(loss_fn());
  std::vector<Tensor> grads;
  for (int id = 0; id < ps.count(); ++id) grads.push_back(ps.grad(id));

  double worst = 0;
  for (int id = 0; id < ps.count(); ++id) {
    int probed = 0;
    const int n = static_cast<int>(ps.value(id).v.size());
    const int stride = std::max(1, n / std::max(1, n_probes_per_tensor));
    for (int i = 0; i < n && probed < n_probes_per_tensor; i += stride) {
      if (std::fabs(grads[id].v[i]) < 1e-8) continue;
      double& w = ps.value(id).v[i];
      const double w0 = w;
      auto eval = [&](double h) {
        w = w0 + h;
        const double l = loss_fn()->val.at(0);
        w = w0;
        return l;
      };
      const double fp = eval(eps), fm = eval(-eps);
      const double g_fd = (fp - fm) / (2 * eps);
      // one-sided slopes disagreeing flags a kink (relu/abs) under the probe;
      // no finite-difference estimate is trustworthy there, so skip the entry
      const double g_right = (eval(9 * eps) - fp) / (8 * eps);
      const double g_left = (fm - eval(-9 * eps)) / (8 * eps);
      const double denom =
          std::max({std::fabs(g_fd), std::fabs(g_left), std::fabs(g_right), 1e-8});
      if (std::fabs(g_right - g_left) / denom > 0.005) continue;
      // at a kink sitting exactly on the probe point a correct subgradient
      // matches one of the one-sided slopes, not their average
      double rel = 1e300;
      for (double g : {g_fd, g_left, g_right})
        rel = std::min(rel, std::fabs(grads[id].v[i] - g) / std::max(std::fabs(g), floor));
      worst = std::max(worst, rel);
      ++probed;
    }
  }
  ps.zero_grad();
  return worst;
}

// Same check for gradients w.r.t. an input tensor (leaf created inside the
// closure from `x`).
inline double fd_check_input(Tensor& x, const std::function<ad::Var(const ad::Var&)>& loss_of_x,
                             int n_probes = 6, double eps = 1e-6, double floor = 1e-3) {
  ad::Var leaf = ad::input(x);
  ad::backward(loss_of_x(leaf));
  const Tensor grad = leaf->grad;

  double worst = 0;
  const int n = static_cast<int>(x.v.size());
  const int stride = std::max(1, n / std::max(1, n_probes));
  int probed = 0;
  for (int i = 0; i < n && probed < n_probes; i += stride) {
    if (std::fabs(grad.v[i]) < 1e-8) continue;
    const double w0 = x.v[i];
    auto eval = [&](double h) {
      x.v[i] = w0 + h;
      const double l = loss_of_x(ad::input(x))->val.at(0);
      x.v[i] = w0;
      return l;
    };
    const double fp = eval(eps), fm = eval(-eps);
    const double g_fd = (fp - fm) / (2 * eps);
    const double g_right = (eval(9 * eps) - fp) / (8 * eps);
    const double g_left = (fm - eval(-9 * eps)) / (8 * eps);
    const double denom =
        std::max({std::fabs(g_fd), std::fabs(g_left), std::fabs(g_right), 1e-8});
    if (std::fabs(g_right - g_left) / denom > 0.005) continue;
    double rel = 1e300;
    for (double g : {g_fd, g_left, g_right})
      rel = std::min(rel, std::fabs(grad.v[i] - g) / std::max(std::fabs(g), floor));
    worst = std::max(worst, rel);
    ++probed;
  }
  return worst;
}

}  // namespace crec::testutil
