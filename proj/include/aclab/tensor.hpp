#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace aclab {

// Dense row-major f64 tensor. Rank 0 (empty shape) is a scalar with one
// element. Every documented operation keeps values finite; NaN/Inf is an
// error state and the validation helpers below are the choke points where
// external data enters the system.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<int> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<std::int64_t>(data.size()) != numel_of(shape))
      throw std::invalid_argument("Tensor: data length " + std::to_string(data.size()) +
                                  " does not match shape product " + std::to_string(numel_of(shape)));
  }

  static std::int64_t numel_of(const std::vector<int>& s) {
    std::int64_t n = 1;
    for (int d : s) {
      if (d <= 0) throw std::invalid_argument("Tensor: non-positive dimension " + std::to_string(d));
      n *= d;
    }
    return n;
  }

  static Tensor zeros(std::vector<int> s) {
    auto n = numel_of(s);
    return Tensor(std::move(s), std::vector<double>(static_cast<std::size_t>(n), 0.0));
  }

  static Tensor full(std::vector<int> s, double v) {
    auto n = numel_of(s);
    return Tensor(std::move(s), std::vector<double>(static_cast<std::size_t>(n), v));
  }

  static Tensor scalar(double v) { return Tensor({}, {v}); }

  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
  bool is_scalar() const { return shape.empty(); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  // [C,H,W] accessors for the image-shaped tensors the models move around.
  int dim(std::size_t i) const { return shape.at(i); }
  double& at3(int c, int y, int x) {
    return data[static_cast<std::size_t>((c * shape[1] + y) * shape[2] + x)];
  }
  double at3(int c, int y, int x) const {
    return data[static_cast<std::size_t>((c * shape[1] + y) * shape[2] + x)];
  }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline void require_finite(const Tensor& t, const std::string& what) {
  for (std::size_t i = 0; i < t.data.size(); ++i)
    if (!std::isfinite(t.data[i]))
      throw std::runtime_error(what + ": non-finite value at flat index " + std::to_string(i));
}

inline std::string shape_str(const std::vector<int>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

}  // namespace aclab
