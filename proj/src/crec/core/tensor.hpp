#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace crec {

// Dense row-major tensor of doubles. Rank 1..4 is all this project needs.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)), v(count(shape), 0.0) {}
  Tensor(std::vector<int> s, std::vector<double> data) : shape(std::move(s)), v(std::move(data)) {
    if (static_cast<std::int64_t>(v.size()) != count(shape))
      throw std::invalid_argument("Tensor: data size does not match shape");
  }

  static std::int64_t count(const std::vector<int>& s) {
    std::int64_t n = 1;
    for (int d : s) {
      if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
      n *= d;
    }
    return n;
  }

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
  static Tensor full(std::vector<int> s, double x) {
    Tensor t(std::move(s));
    for (auto& e : t.v) e = x;
    return t;
  }
  static Tensor scalar(double x) { return Tensor({1}, {x}); }

  std::int64_t size() const { return static_cast<std::int64_t>(v.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  int rows() const { return shape.at(0); }
  int cols() const { return shape.at(1); }

  double& at(int i) { return v[i]; }
  double at(int i) const { return v[i]; }
  double& at(int i, int j) { return v[static_cast<std::int64_t>(i) * shape[1] + j]; }
  double at(int i, int j) const { return v[static_cast<std::int64_t>(i) * shape[1] + j]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
    return s + "]";
  }
};

// Thrown when an operation receives inputs of incompatible shape.
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require_shape(const Tensor& t, const std::vector<int>& s, const char* what) {
  if (t.shape != s) {
    Tensor probe(s);
    throw DimensionError(std::string(what) + ": expected shape " + probe.shape_str() + ", got " +
                         t.shape_str());
  }
}

}  // namespace crec
