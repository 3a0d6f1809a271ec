#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "sslp/core/check.hpp"

namespace sslp {

// Dense row-major float tensor. Shapes are small (at most 4-d here), so a
// plain vector<int> shape plus flat storage is all the machinery needed.
struct Tensor {
  std::vector<int> shape;
  std::vector<float> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    v.assign(static_cast<std::size_t>(numel_of(shape)), 0.0f);
  }

  static std::int64_t numel_of(const std::vector<int>& s) {
    std::int64_t n = 1;
    for (int d : s) n *= d;
    return n;
  }

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }

  std::int64_t numel() const { return static_cast<std::int64_t>(v.size()); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
  int ndim() const { return static_cast<int>(shape.size()); }

  float* data() { return v.data(); }
  const float* data() const { return v.data(); }

  void zero() { std::fill(v.begin(), v.end(), 0.0f); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

}  // namespace sslp
