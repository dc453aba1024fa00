// Dense row-major tensor of doubles. The whole pipeline is 64-bit: sizes are
// desk-scale and the finite-difference gradient checks need the precision.
#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "egoact/common.hpp"

namespace egoact {

struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;
  bool requires_grad = false;

  Tensor() = default;
  Tensor(std::vector<int> s, std::vector<double> d, bool rg = false)
      : shape(std::move(s)), data(std::move(d)), requires_grad(rg) {
    require(static_cast<std::int64_t>(data.size()) == numel_of(shape),
            "Tensor: data length must equal product of shape dims");
  }

  static std::int64_t numel_of(const std::vector<int>& s) {
    std::int64_t n = 1;
    for (int d : s) {
      require(d >= 0, "Tensor: negative dimension");
      n *= d;
    }
    return n;
  }

  static Tensor zeros(std::vector<int> s) {
    std::int64_t n = numel_of(s);
    return Tensor(std::move(s), std::vector<double>(static_cast<size_t>(n), 0.0));
  }

  static Tensor full(std::vector<int> s, double v) {
    std::int64_t n = numel_of(s);
    return Tensor(std::move(s), std::vector<double>(static_cast<size_t>(n), v));
  }

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
  int ndim() const { return static_cast<int>(shape.size()); }

  // 2D helpers; most of the model runs on [rows, cols] matrices
  int rows() const { return shape.empty() ? 1 : shape[0]; }
  int cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols() + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols() + c]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline std::string shape_str(const std::vector<int>& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

}  // namespace egoact
