#include "crec/core/nn.hpp"

#include <cmath>

namespace crec::nn {

int ParamStore::add(std::string name, Tensor init) {
  names_.push_back(std::move(name));
  grads_.emplace_back(init.shape);
  adam_m_.emplace_back(init.shape);
  adam_v_.emplace_back(init.shape);
  values_.push_back(std::move(init));
  return static_cast<int>(values_.size()) - 1;
}

int ParamStore::add_linear_weight(std::string name, int in, int out, Rng& rng) {
  Tensor w({in, out});
  const double s = 1.0 / std::sqrt(static_cast<double>(in));
  for (auto& x : w.v) x = rng.uniform(-s, s);
  return add(std::move(name), std::move(w));
}

int ParamStore::add_zeros(std::string name, std::vector<int> shape) {
  return add(std::move(name), Tensor(std::move(shape)));
}

int ParamStore::add_ones(std::string name, std::vector<int> shape) {
  return add(std::move(name), Tensor::full(std::move(shape), 1.0));
}

ad::Var ParamStore::use(int id) {
  auto n = std::make_shared<ad::Node>();
  n->val = values_[id];
  n->needs_grad = true;
  Tensor* sink = &grads_[id];
  n->back = [sink](ad::Node& nd) {
    for (std::int64_t i = 0; i < nd.grad.size(); ++i) sink->v[i] += nd.grad.v[i];
  };
  return n;
}

void ParamStore::zero_grad() {
  for (auto& g : grads_)
    for (auto& x : g.v) x = 0.0;
}

void ParamStore::adam_step(double lr, double beta1, double beta2, double eps) {
  ++adam_t_;
  const double c1 = 1.0 - std::pow(beta1, adam_t_);
  const double c2 = 1.0 - std::pow(beta2, adam_t_);
  for (size_t p = 0; p < values_.size(); ++p) {
    auto& v = values_[p].v;
    auto& g = grads_[p].v;
    auto& m = adam_m_[p].v;
    auto& s = adam_v_[p].v;
    for (size_t i = 0; i < v.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      s[i] = beta2 * s[i] + (1.0 - beta2) * g[i] * g[i];
      v[i] -= lr * (m[i] / c1) / (std::sqrt(s[i] / c2) + eps);
    }
  }
}

void ParamStore::sgd_step(double lr) {
  for (size_t p = 0; p < values_.size(); ++p)
    for (size_t i = 0; i < values_[p].v.size(); ++i) values_[p].v[i] -= lr * grads_[p].v[i];
}

std::int64_t ParamStore::total_size() const {
  std::int64_t n = 0;
  for (const auto& t : values_) n += t.size();
  return n;
}

bool ParamStore::all_finite() const {
  for (const auto& t : values_)
    for (double x : t.v)
      if (!std::isfinite(x)) return false;
  return true;
}

Linear::Linear(ParamStore& ps, const std::string& name, int in_dim, int out_dim, Rng& rng)
    : in(in_dim), out(out_dim) {
  w = ps.add_linear_weight(name + ".w", in_dim, out_dim, rng);
  b = ps.add_zeros(name + ".b", {out_dim});
}

ad::Var Linear::operator()(ParamStore& ps, const ad::Var& x) const {
  return ad::add_rowvec(ad::matmul(x, ps.use(w)), ps.use(b));
}

Norm::Norm(ParamStore& ps, const std::string& name, int dim) {
  g = ps.add_ones(name + ".g", {dim});
  b = ps.add_zeros(name + ".b", {dim});
}

ad::Var Norm::operator()(ParamStore& ps, const ad::Var& x) const {
  return ad::layer_norm_rows(x, ps.use(g), ps.use(b));
}

Conv2dLayer::Conv2dLayer(ParamStore& ps, const std::string& name, int in_c, int out_c, int kernel,
                         int stride_, int pad_, Rng& rng)
    : in_ch(in_c), out_ch(out_c), k(kernel), stride(stride_), pad(pad_) {
  Tensor weight({out_c, in_c * kernel * kernel});
  const double s = 1.0 / std::sqrt(static_cast<double>(in_c * kernel * kernel));
  for (auto& x : weight.v) x = rng.uniform(-s, s);
  w = ps.add(name + ".w", std::move(weight));
  b = ps.add_zeros(name + ".b", {out_c});
}

ad::Var Conv2dLayer::operator()(ParamStore& ps, const ad::Var& x) const {
  return ad::conv2d(x, ps.use(w), ps.use(b), k, k, stride, pad);
}

}  // namespace crec::nn
