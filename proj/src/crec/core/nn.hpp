#pragma once

#include <string>
#include <vector>

#include "crec/core/autodiff.hpp"
#include "crec/core/rng.hpp"
#include "crec/core/tensor.hpp"

namespace crec::nn {

// Named parameter tensors plus Adam state. Models hold integer handles into
// the store; forward passes lift them into autodiff leaves with use().
class ParamStore {
 public:
  int add(std::string name, Tensor init);
  int add_linear_weight(std::string name, int in, int out, Rng& rng);  // [in,out], fan-in scaled
  int add_zeros(std::string name, std::vector<int> shape);
  int add_ones(std::string name, std::vector<int> shape);

  ad::Var use(int id);  // leaf whose backward accumulates into grads_[id]

  Tensor& value(int id) { return values_[id]; }
  const Tensor& value(int id) const { return values_[id]; }
  Tensor& grad(int id) { return grads_[id]; }
  const std::string& name(int id) const { return names_[id]; }
  int count() const { return static_cast<int>(values_.size()); }

  void zero_grad();
  void adam_step(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void sgd_step(double lr);
  int adam_t() const { return adam_t_; }

  std::int64_t total_size() const;
  bool all_finite() const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_, grads_, adam_m_, adam_v_;
  int adam_t_ = 0;
};

// id pair for an affine layer y = x W + b, W:[in,out]
struct Linear {
  int w = -1, b = -1;
  int in = 0, out = 0;
  Linear() = default;
  Linear(ParamStore& ps, const std::string& name, int in_dim, int out_dim, Rng& rng);
  ad::Var operator()(ParamStore& ps, const ad::Var& x) const;  // x:[n,in] -> [n,out]
};

// layer-norm gain/bias pair
struct Norm {
  int g = -1, b = -1;
  Norm() = default;
  Norm(ParamStore& ps, const std::string& name, int dim);
  ad::Var operator()(ParamStore& ps, const ad::Var& x) const;
};

struct Conv2dLayer {
  int w = -1, b = -1;
  int in_ch = 0, out_ch = 0, k = 0, stride = 1, pad = 0;
  Conv2dLayer() = default;
  Conv2dLayer(ParamStore& ps, const std::string& name, int in_c, int out_c, int kernel, int stride,
              int pad, Rng& rng);
  ad::Var operator()(ParamStore& ps, const ad::Var& x) const;
};

}  // namespace crec::nn
