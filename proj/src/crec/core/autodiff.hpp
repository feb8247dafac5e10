#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "crec/core/tensor.hpp"

// Reverse-mode autodiff on fp64 tensors. A forward pass builds a small DAG of
// shared_ptr nodes; backward() runs the tape in reverse topological order.
// All training and every finite-difference gradient check go through this.

namespace crec::ad {

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
  Tensor val;
  Tensor grad;  // allocated on demand during backward
  bool needs_grad = false;
  std::vector<Var> parents;
  std::function<void(Node&)> back;  // distributes this->grad into parents (or a param store)

  Tensor& ensure_grad() {
    if (grad.shape != val.shape) grad = Tensor(val.shape);
    return grad;
  }
};

// Leaf without gradient.
Var constant(Tensor t);
// Leaf that keeps its gradient in node->grad (inputs probed by finite differences).
Var input(Tensor t);
// Generic op constructor for custom kernels.
Var make(Tensor val, std::vector<Var> parents, std::function<void(Node&)> back);

// Seeds root (must be a single scalar) with 1 and propagates.
void backward(const Var& root);

// ---- elementwise / shape ----
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);          // hadamard
Var scale(const Var& a, double c);
Var add_rowvec(const Var& a, const Var& bias);  // a:[n,d] + bias:[d]
Var sigmoid(const Var& a);
Var relu(const Var& a);
Var log_(const Var& a);
Var abs_(const Var& a);
Var clamp(const Var& a, double lo, double hi);  // zero gradient outside [lo,hi]
Var reshape(const Var& a, std::vector<int> shape);
Var transpose(const Var& a);  // 2-d
Var concat_cols(const std::vector<Var>& xs);
Var concat_rows(const std::vector<Var>& xs);
Var slice_cols(const Var& a, int c0, int c1);
Var gather_rows(const Var& a, std::vector<int> rows);  // row index -1 yields a zero row

// ---- linear algebra ----
Var matmul(const Var& a, const Var& b);
Var softmax_rows(const Var& a);
Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias, double eps = 1e-6);

// ---- reductions ----
Var sum(const Var& a);   // scalar
Var mean(const Var& a);  // scalar

// ---- conv ----
// x:{C,H,W}, w:[OC, C*kh*kw], b:[OC] -> {OC,OH,OW}
Var conv2d(const Var& x, const Var& w, const Var& b, int kh, int kw, int stride, int pad);
Var global_avg_pool(const Var& x);  // {C,H,W} -> [C]

}  // namespace crec::ad
