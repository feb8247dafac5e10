#include "crec/core/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "crec/core/kernels.hpp"

namespace crec::ad {

Var constant(Tensor t) {
  auto n = std::make_shared<Node>();
  n->val = std::move(t);
  return n;
}

Var input(Tensor t) {
  auto n = std::make_shared<Node>();
  n->val = std::move(t);
  n->needs_grad = true;
  return n;
}

Var make(Tensor val, std::vector<Var> parents, std::function<void(Node&)> back) {
  auto n = std::make_shared<Node>();
  n->val = std::move(val);
  n->parents = std::move(parents);
  for (const auto& p : n->parents)
    if (p->needs_grad) n->needs_grad = true;
  if (n->needs_grad) n->back = std::move(back);
  return n;
}

void backward(const Var& root) {
  if (root->val.size() != 1) throw std::invalid_argument("backward: root must be scalar");
  // iterative post-order DFS
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, size_t>> stack{{root.get(), 0}};
  if (root->needs_grad) seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node* p = node->parents[idx++].get();
      if (p->needs_grad && !seen.count(p)) {
        seen.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root->ensure_grad().v[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->back) {
      for (auto& p : n->parents)
        if (p->needs_grad) p->ensure_grad();
      n->back(*n);
    }
  }
}

static void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (!a->val.same_shape(b->val))
    throw DimensionError(std::string(op) + ": shape mismatch " + a->val.shape_str() + " vs " +
                         b->val.shape_str());
}

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  Tensor out = a->val;
  for (std::int64_t i = 0; i < out.size(); ++i) out.v[i] += b->val.v[i];
  return make(std::move(out), {a, b}, [](Node& n) {
    for (int s = 0; s < 2; ++s) {
      auto& p = n.parents[s];
      if (!p->needs_grad) continue;
      for (std::int64_t i = 0; i < n.grad.size(); ++i) p->grad.v[i] += n.grad.v[i];
    }
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  Tensor out = a->val;
  for (std::int64_t i = 0; i < out.size(); ++i) out.v[i] -= b->val.v[i];
  return make(std::move(out), {a, b}, [](Node& n) {
    if (n.parents[0]->needs_grad)
      for (std::int64_t i = 0; i < n.grad.size(); ++i) n.parents[0]->grad.v[i] += n.grad.v[i];
    if (n.parents[1]->needs_grad)
      for (std::int64_t i = 0; i < n.grad.size(); ++i) n.parents[1]->grad.v[i] -= n.grad.v[i];
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a, b, "mul");
  Tensor out = a->val;
  for (std::int64_t i = 0; i < out.size(); ++i) out.v[i] *= b->val.v[i];
  return make(std::move(out), {a, b}, [](Node& n) {
    const auto& av = n.parents[0]->val.v;
    const auto& bv = n.parents[1]->val.v;
    if (n.parents[0]->needs_grad)
      for (std::int64_t i = 0; i < n.grad.size(); ++i) n.parents[0]->grad.v[i] += n.grad.v[i] * bv[i];
    if (n.parents[1]->needs_grad)
      for (std::int64_t i = 0; i < n.grad.size(); ++i) n.parents[1]->grad.v[i] += n.grad.v[i] * av[i];
  });
}

Var scale(const Var& a, double c) {
  Tensor out = a->val;
  for (auto& x : out.v) x *= c;
  return make(std::move(out), {a}, [c](Node& n) {
    for (std::int64_t i = 0; i < n.grad.size(); ++i) n.parents[0]->grad.v[i] += c * n.grad.v[i];
  });
}

Var add_rowvec(const Var& a, const Var& bias) {
  if (a->val.rank() != 2 || bias->val.size() != a->val.cols())
    throw DimensionError("add_rowvec: incompatible shapes");
  Tensor out = a->val;
  const int n = out.rows(), d = out.cols();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) out.at(i, j) += bias->val.at(j);
  return make(std::move(out), {a, bias}, [n, d](Node& nd) {
    if (nd.parents[0]->needs_grad)
      for (std::int64_t i = 0; i < nd.grad.size(); ++i) nd.parents[0]->grad.v[i] += nd.grad.v[i];
    if (nd.parents[1]->needs_grad)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) nd.parents[1]->grad.v[j] += nd.grad.at(i, j);
  });
}

Var sigmoid(const Var& a) {
  Tensor out = a->val;
  for (auto& x : out.v) x = 1.0 / (1.0 + std::exp(-x));
  auto cached = std::make_shared<Tensor>(out);
  return make(std::move(out), {a}, [cached](Node& n) {
    for (std::int64_t i = 0; i < n.grad.size(); ++i) {
      const double y = cached->v[i];
      n.parents[0]->grad.v[i] += n.grad.v[i] * y * (1.0 - y);
    }
  });
}

Var relu(const Var& a) {
  Tensor out = a->val;
  for (auto& x : out.v) x = std::max(0.0, x);
  return make(std::move(out), {a}, [](Node& n) {
    for (std::int64_t i = 0; i < n.grad.size(); ++i)
      if (n.parents[0]->val.v[i] > 0.0) n.parents[0]->grad.v[i] += n.grad.v[i];
  });
}

Var log_(const Var& a) {
  Tensor out = a->val;
  for (auto& x : out.v) x = std::log(x);
  return make(std::move(out), {a}, [](Node& n) {
    for (std::int64_t i = 0; i < n.grad.size(); ++i)
      n.parents[0]->grad.v[i] += n.grad.v[i] / n.parents[0]->val.v[i];
  });
}

Var abs_(const Var& a) {
  Tensor out = a->val;
  for (auto& x : out.v) x = std::fabs(x);
  return make(std::move(out), {a}, [](Node& n) {
    for (std::int64_t i = 0; i < n.grad.size(); ++i) {
      const double x = n.parents[0]->val.v[i];
      n.parents[0]->grad.v[i] += n.grad.v[i] * (x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0));
    }
  });
}

Var clamp(const Var& a, double lo, double hi) {
  Tensor out = a->val;
  for (auto& x : out.v) x = std::min(hi, std::max(lo, x));
  return make(std::move(out), {a}, [lo, hi](Node& n) {
    for (std::int64_t i = 0; i < n.grad.size(); ++i) {
      const double x = n.parents[0]->val.v[i];
      if (x > lo && x < hi) n.parents[0]->grad.v[i] += n.grad.v[i];
    }
  });
}

Var reshape(const Var& a, std::vector<int> shape) {
  if (Tensor::count(shape) != a->val.size()) throw DimensionError("reshape: element count mismatch");
  Tensor out(std::move(shape), a->val.v);
  return make(std::move(out), {a}, [](Node& n) {
    for (std::int64_t i = 0; i < n.grad.size(); ++i) n.parents[0]->grad.v[i] += n.grad.v[i];
  });
}

Var transpose(const Var& a) {
  if (a->val.rank() != 2) throw DimensionError("transpose: rank-2 only");
  const int r = a->val.rows(), c = a->val.cols();
  Tensor out({c, r});
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out.at(j, i) = a->val.at(i, j);
  return make(std::move(out), {a}, [r, c](Node& n) {
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) n.parents[0]->grad.at(i, j) += n.grad.at(j, i);
  });
}

Var concat_cols(const std::vector<Var>& xs) {
  if (xs.empty()) throw DimensionError("concat_cols: empty");
  const int n = xs[0]->val.rows();
  int d = 0;
  for (const auto& x : xs) {
    if (x->val.rank() != 2 || x->val.rows() != n) throw DimensionError("concat_cols: row mismatch");
    d += x->val.cols();
  }
  Tensor out({n, d});
  int off = 0;
  for (const auto& x : xs) {
    const int c = x->val.cols();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < c; ++j) out.at(i, off + j) = x->val.at(i, j);
    off += c;
  }
  return make(std::move(out), xs, [n](Node& nd) {
    int off = 0;
    for (auto& p : nd.parents) {
      const int c = p->val.cols();
      if (p->needs_grad)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < c; ++j) p->grad.at(i, j) += nd.grad.at(i, off + j);
      off += c;
    }
  });
}

Var concat_rows(const std::vector<Var>& xs) {
  if (xs.empty()) throw DimensionError("concat_rows: empty");
  const int d = xs[0]->val.rank() == 2 ? xs[0]->val.cols() : static_cast<int>(xs[0]->val.size());
  int n = 0;
  for (const auto& x : xs) n += x->val.rank() == 2 ? x->val.rows() : 1;
  Tensor out({n, d});
  std::int64_t off = 0;
  for (const auto& x : xs) {
    std::copy(x->val.v.begin(), x->val.v.end(), out.v.begin() + off);
    off += x->val.size();
  }
  return make(std::move(out), xs, [](Node& nd) {
    std::int64_t off = 0;
    for (auto& p : nd.parents) {
      if (p->needs_grad)
        for (std::int64_t i = 0; i < p->val.size(); ++i) p->grad.v[i] += nd.grad.v[off + i];
      off += p->val.size();
    }
  });
}

Var slice_cols(const Var& a, int c0, int c1) {
  if (a->val.rank() != 2 || c0 < 0 || c1 > a->val.cols() || c0 >= c1)
    throw DimensionError("slice_cols: bad range");
  const int n = a->val.rows(), w = c1 - c0;
  Tensor out({n, w});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < w; ++j) out.at(i, j) = a->val.at(i, c0 + j);
  return make(std::move(out), {a}, [n, w, c0](Node& nd) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < w; ++j) nd.parents[0]->grad.at(i, c0 + j) += nd.grad.at(i, j);
  });
}

Var gather_rows(const Var& a, std::vector<int> rows) {
  if (a->val.rank() != 2) throw DimensionError("gather_rows: rank-2 only");
  const int d = a->val.cols();
  Tensor out({static_cast<int>(rows.size()), d});
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0) continue;  // zero row
    for (int j = 0; j < d; ++j) out.at(static_cast<int>(i), j) = a->val.at(rows[i], j);
  }
  return make(std::move(out), {a}, [rows = std::move(rows), d](Node& nd) {
    for (size_t i = 0; i < rows.size(); ++i) {
      if (rows[i] < 0) continue;
      for (int j = 0; j < d; ++j)
        nd.parents[0]->grad.at(rows[i], j) += nd.grad.at(static_cast<int>(i), j);
    }
  });
}

Var matmul(const Var& a, const Var& b) {
  if (a->val.rank() != 2 || b->val.rank() != 2 || a->val.cols() != b->val.rows())
    throw DimensionError("matmul: incompatible " + a->val.shape_str() + " x " + b->val.shape_str());
  const int m = a->val.rows(), k = a->val.cols(), n = b->val.cols();
  Tensor out({m, n});
  kern::gemm(false, false, m, n, k, a->val.v.data(), b->val.v.data(), out.v.data());
  return make(std::move(out), {a, b}, [m, k, n](Node& nd) {
    if (nd.parents[0]->needs_grad)
      kern::gemm(false, true, m, k, n, nd.grad.v.data(), nd.parents[1]->val.v.data(),
                 nd.parents[0]->grad.v.data(), true);
    if (nd.parents[1]->needs_grad)
      kern::gemm(true, false, k, n, m, nd.parents[0]->val.v.data(), nd.grad.v.data(),
                 nd.parents[1]->grad.v.data(), true);
  });
}

Var softmax_rows(const Var& a) {
  if (a->val.rank() != 2) throw DimensionError("softmax_rows: rank-2 only");
  const int n = a->val.rows(), d = a->val.cols();
  Tensor out = a->val;
  for (int i = 0; i < n; ++i) {
    double mx = -INFINITY;
    for (int j = 0; j < d; ++j) mx = std::max(mx, out.at(i, j));
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += (out.at(i, j) = std::exp(out.at(i, j) - mx));
    for (int j = 0; j < d; ++j) out.at(i, j) /= s;
  }
  auto y = std::make_shared<Tensor>(out);
  return make(std::move(out), {a}, [y, n, d](Node& nd) {
    for (int i = 0; i < n; ++i) {
      double dot = 0.0;
      for (int j = 0; j < d; ++j) dot += nd.grad.at(i, j) * y->at(i, j);
      for (int j = 0; j < d; ++j)
        nd.parents[0]->grad.at(i, j) += y->at(i, j) * (nd.grad.at(i, j) - dot);
    }
  });
}

Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias, double eps) {
  if (x->val.rank() != 2) throw DimensionError("layer_norm_rows: rank-2 only");
  const int n = x->val.rows(), d = x->val.cols();
  if (gain->val.size() != d || bias->val.size() != d)
    throw DimensionError("layer_norm_rows: gain/bias size");
  Tensor out({n, d});
  auto xhat = std::make_shared<Tensor>(Tensor({n, d}));
  auto inv_std = std::make_shared<Tensor>(Tensor({n}));
  for (int i = 0; i < n; ++i) {
    double mu = 0.0;
    for (int j = 0; j < d; ++j) mu += x->val.at(i, j);
    mu /= d;
    double var = 0.0;
    for (int j = 0; j < d; ++j) {
      const double c = x->val.at(i, j) - mu;
      var += c * c;
    }
    var /= d;
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std->at(i) = is;
    for (int j = 0; j < d; ++j) {
      xhat->at(i, j) = (x->val.at(i, j) - mu) * is;
      out.at(i, j) = xhat->at(i, j) * gain->val.at(j) + bias->val.at(j);
    }
  }
  return make(std::move(out), {x, gain, bias}, [xhat, inv_std, n, d](Node& nd) {
    auto& px = nd.parents[0];
    auto& pg = nd.parents[1];
    auto& pb = nd.parents[2];
    for (int i = 0; i < n; ++i) {
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (int j = 0; j < d; ++j) {
        const double dy = nd.grad.at(i, j) * pg->val.at(j);
        sum_dy += dy;
        sum_dy_xhat += dy * xhat->at(i, j);
      }
      if (px->needs_grad)
        for (int j = 0; j < d; ++j) {
          const double dy = nd.grad.at(i, j) * pg->val.at(j);
          px->grad.at(i, j) +=
              inv_std->at(i) * (dy - sum_dy / d - xhat->at(i, j) * sum_dy_xhat / d);
        }
      if (pg->needs_grad)
        for (int j = 0; j < d; ++j) pg->grad.v[j] += nd.grad.at(i, j) * xhat->at(i, j);
      if (pb->needs_grad)
        for (int j = 0; j < d; ++j) pb->grad.v[j] += nd.grad.at(i, j);
    }
  });
}

Var sum(const Var& a) {
  double s = 0.0;
  for (double x : a->val.v) s += x;
  return make(Tensor::scalar(s), {a}, [](Node& n) {
    const double g = n.grad.v[0];
    for (auto& x : n.parents[0]->grad.v) x += g;
  });
}

Var mean(const Var& a) {
  const double inv = 1.0 / static_cast<double>(a->val.size());
  double s = 0.0;
  for (double x : a->val.v) s += x;
  return make(Tensor::scalar(s * inv), {a}, [inv](Node& n) {
    const double g = n.grad.v[0] * inv;
    for (auto& x : n.parents[0]->grad.v) x += g;
  });
}

Var conv2d(const Var& x, const Var& w, const Var& b, int kh, int kw, int stride, int pad) {
  if (x->val.rank() != 3) throw DimensionError("conv2d: input must be {C,H,W}");
  const int c = x->val.shape[0], h = x->val.shape[1], ww = x->val.shape[2];
  const int oc = w->val.rows();
  if (w->val.cols() != c * kh * kw) throw DimensionError("conv2d: weight shape mismatch");
  if (b->val.size() != oc) throw DimensionError("conv2d: bias size mismatch");
  const int oh = kern::conv_out_dim(h, kh, stride, pad);
  const int ow = kern::conv_out_dim(ww, kw, stride, pad);
  auto cols = std::make_shared<Tensor>(Tensor({c * kh * kw, oh * ow}));
  kern::im2col(x->val.v.data(), c, h, ww, kh, kw, stride, pad, cols->v.data());
  Tensor out({oc, oh, ow});
  kern::gemm(false, false, oc, oh * ow, c * kh * kw, w->val.v.data(), cols->v.data(),
             out.v.data());
  for (int o = 0; o < oc; ++o)
    for (int i = 0; i < oh * ow; ++i) out.v[static_cast<std::int64_t>(o) * oh * ow + i] +=
        b->val.at(o);
  return make(std::move(out), {x, w, b},
              [cols, c, h, ww, kh, kw, stride, pad, oc, oh, ow](Node& nd) {
                auto& px = nd.parents[0];
                auto& pw = nd.parents[1];
                auto& pb = nd.parents[2];
                const double* dout = nd.grad.v.data();
                if (pw->needs_grad)
                  kern::gemm(false, true, oc, c * kh * kw, oh * ow, dout, cols->v.data(),
                             pw->grad.v.data(), true);
                if (pb->needs_grad)
                  for (int o = 0; o < oc; ++o)
                    for (int i = 0; i < oh * ow; ++i)
                      pb->grad.v[o] += dout[static_cast<std::int64_t>(o) * oh * ow + i];
                if (px->needs_grad) {
                  Tensor dcols({c * kh * kw, oh * ow});
                  kern::gemm(true, false, c * kh * kw, oh * ow, oc, pw->val.v.data(), dout,
                             dcols.v.data());
                  kern::col2im(dcols.v.data(), c, h, ww, kh, kw, stride, pad, px->grad.v.data());
                }
              });
}

Var global_avg_pool(const Var& x) {
  if (x->val.rank() != 3) throw DimensionError("global_avg_pool: input must be {C,H,W}");
  const int c = x->val.shape[0];
  const std::int64_t hw = static_cast<std::int64_t>(x->val.shape[1]) * x->val.shape[2];
  Tensor out({c});
  for (int ch = 0; ch < c; ++ch) {
    double s = 0.0;
    for (std::int64_t i = 0; i < hw; ++i) s += x->val.v[ch * hw + i];
    out.at(ch) = s / static_cast<double>(hw);
  }
  return make(std::move(out), {x}, [c, hw](Node& nd) {
    for (int ch = 0; ch < c; ++ch) {
      const double g = nd.grad.v[ch] / static_cast<double>(hw);
      for (std::int64_t i = 0; i < hw; ++i) nd.parents[0]->grad.v[ch * hw + i] += g;
    }
  });
}

}  // namespace crec::ad
