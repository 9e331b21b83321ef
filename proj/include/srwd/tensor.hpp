#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "srwd/error.hpp"

namespace srwd {

/// Declared value interval of an image. Metadata only: operations do not
/// enforce it except clamp_project.
struct ValueRange {
  double lo = 0.0;
  double hi = 1.0;
  bool operator==(const ValueRange&) const = default;
};

/// Planar C x H x W tensor of doubles, row-major within each channel.
class ImageTensor {
 public:
  ImageTensor() = default;
  ImageTensor(std::size_t channels, std::size_t height, std::size_t width, double fill = 0.0)
      : c_(channels), h_(height), w_(width), data_(channels * height * width, fill) {}
  ImageTensor(std::size_t channels, std::size_t height, std::size_t width,
              std::vector<double> data)
      : c_(channels), h_(height), w_(width), data_(std::move(data)) {
    require(data_.size() == c_ * h_ * w_, ErrorCode::BadShape,
            "tensor data length does not match C*H*W");
  }

  std::size_t channels() const { return c_; }
  std::size_t height() const { return h_; }
  std::size_t width() const { return w_; }
  std::size_t plane_size() const { return h_ * w_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * h_ + y) * w_ + x];
  }
  double operator()(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * h_ + y) * w_ + x];
  }

  std::span<double> plane(std::size_t c) { return {data_.data() + c * h_ * w_, h_ * w_}; }
  std::span<const double> plane(std::size_t c) const {
    return {data_.data() + c * h_ * w_, h_ * w_};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  ValueRange range() const { return range_; }
  void set_range(ValueRange r) { range_ = r; }

  bool same_shape(const ImageTensor& o) const {
    return c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  ImageTensor& operator+=(const ImageTensor& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  ImageTensor& operator-=(const ImageTensor& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  ImageTensor& operator*=(double a) {
    for (double& v : data_) v *= a;
    return *this;
  }

  /// this += a * o
  void axpy(double a, const ImageTensor& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * o.data_[i];
  }

  friend ImageTensor operator+(ImageTensor a, const ImageTensor& b) { return a += b; }
  friend ImageTensor operator-(ImageTensor a, const ImageTensor& b) { return a -= b; }
  friend ImageTensor operator*(double s, ImageTensor a) { return a *= s; }

  bool operator==(const ImageTensor& o) const {
    return same_shape(o) && data_ == o.data_;
  }

 private:
  void check_same(const ImageTensor& o) const {
    require(same_shape(o), ErrorCode::ShapeMismatch, "tensor shapes differ");
  }

  std::size_t c_ = 0, h_ = 0, w_ = 0;
  std::vector<double> data_;
  ValueRange range_{};
};

inline double dot(const ImageTensor& a, const ImageTensor& b) {
  require(a.same_shape(b), ErrorCode::ShapeMismatch, "dot: tensor shapes differ");
  return std::inner_product(a.data().begin(), a.data().end(), b.data().begin(), 0.0);
}

inline double squared_norm(const ImageTensor& a) { return dot(a, a); }

/// Square, odd-sided 2D kernel. Used both for blur kernels and for
/// regularization filters; blur kernels additionally satisfy is_normalized().
class Kernel {
 public:
  Kernel() : side_(1), taps_{1.0} {}
  Kernel(std::size_t side, std::vector<double> taps) : side_(side), taps_(std::move(taps)) {
    require(side_ % 2 == 1, ErrorCode::BadSide, "kernel side must be odd");
    require(taps_.size() == side_ * side_, ErrorCode::BadShape, "kernel taps != side^2");
    require(std::all_of(taps_.begin(), taps_.end(), [](double v) { return std::isfinite(v); }),
            ErrorCode::BadShape, "kernel taps must be finite");
  }

  static Kernel delta(std::size_t side = 1) {
    std::vector<double> t(side * side, 0.0);
    t[(side / 2) * side + side / 2] = 1.0;
    return Kernel(side, std::move(t));
  }
  static Kernel box(std::size_t side) {
    return Kernel(side, std::vector<double>(side * side, 1.0 / double(side * side)));
  }

  std::size_t side() const { return side_; }
  std::size_t radius() const { return side_ / 2; }
  double operator()(std::size_t y, std::size_t x) const { return taps_[y * side_ + x]; }
  double& operator()(std::size_t y, std::size_t x) { return taps_[y * side_ + x]; }
  std::vector<double>& taps() { return taps_; }
  const std::vector<double>& taps() const { return taps_; }

  double sum() const { return std::accumulate(taps_.begin(), taps_.end(), 0.0); }

  bool is_normalized(double tol = 1e-12) const {
    return std::abs(sum() - 1.0) <= tol &&
           std::all_of(taps_.begin(), taps_.end(), [](double v) { return v >= 0.0; });
  }

  bool operator==(const Kernel&) const = default;

 private:
  std::size_t side_;
  std::vector<double> taps_;
};

/// Blur kernels share the Kernel representation; generators guarantee
/// nonnegativity and unit sum.
using BlurKernel = Kernel;

/// d filters of identical odd side n.
struct FilterBank {
  std::size_t side = 0;
  std::vector<Kernel> filters;

  std::size_t count() const { return filters.size(); }
};

}  // namespace srwd
