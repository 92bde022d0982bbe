#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "shapedtw/errors.hpp"

namespace shapedtw {

/// The common well-log null value.
inline constexpr double kDefaultNullValue = -999.25;

/// Uniformly sampled 1D sequence registered in depth (ft).
template <typename Scalar>
class BasicSignal {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BasicSignal() = default;

  explicit BasicSignal(Vector values, Scalar depth_start = Scalar(0),
                       Scalar sample_interval = Scalar(1))
      : values_(std::move(values)),
        depth_start_(depth_start),
        sample_interval_(sample_interval) {
    if (!(sample_interval_ > Scalar(0)) || !std::isfinite(sample_interval_))
      throw DataError("sample_interval must be positive");
    if (!std::isfinite(depth_start_))
      throw DataError("depth_start must be finite");
    if (!values_.allFinite()) throw DataError("non-finite sample");
  }

  const Vector& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  bool empty() const { return values_.size() == 0; }
  Scalar operator[](Eigen::Index i) const { return values_[i]; }

  Scalar depth_start() const { return depth_start_; }
  Scalar sample_interval() const { return sample_interval_; }
  Scalar depth_at(Eigen::Index i) const {
    return depth_start_ + Scalar(i) * sample_interval_;
  }

  /// Contiguous slice [start, start + length), registered at its own depth.
  BasicSignal segment(Eigen::Index start, Eigen::Index length) const {
    if (start < 0 || length < 0 || start + length > size())
      throw DataError("segment out of range");
    return BasicSignal(values_.segment(start, length), depth_at(start),
                       sample_interval_);
  }

 private:
  Vector values_;
  Scalar depth_start_ = Scalar(0);
  Scalar sample_interval_ = Scalar(1);
};

/// Borehole image: rows are depth samples, columns are azimuthal sensors.
template <typename Scalar>
class BasicBoreholeImage {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  BasicBoreholeImage() = default;

  explicit BasicBoreholeImage(Matrix pixels, Scalar depth_start = Scalar(0),
                              Scalar sample_interval = Scalar(1))
      : pixels_(std::move(pixels)),
        depth_start_(depth_start),
        sample_interval_(sample_interval) {
    if (!(sample_interval_ > Scalar(0)) || !std::isfinite(sample_interval_))
      throw DataError("sample_interval must be positive");
    if (!std::isfinite(depth_start_))
      throw DataError("depth_start must be finite");
    if (!pixels_.allFinite()) throw DataError("non-finite pixel");
  }

  const Matrix& pixels() const { return pixels_; }
  Eigen::Index depth_count() const { return pixels_.rows(); }
  Eigen::Index azimuth_count() const { return pixels_.cols(); }
  bool empty() const { return pixels_.size() == 0; }

  Scalar depth_start() const { return depth_start_; }
  Scalar sample_interval() const { return sample_interval_; }
  Scalar depth_at(Eigen::Index i) const {
    return depth_start_ + Scalar(i) * sample_interval_;
  }

 private:
  Matrix pixels_;
  Scalar depth_start_ = Scalar(0);
  Scalar sample_interval_ = Scalar(1);
};

using Signal = BasicSignal<double>;
using BoreholeImage = BasicBoreholeImage<double>;

/// Collapses the azimuthal axis: each depth sample becomes its row mean.
template <typename Scalar>
BasicSignal<Scalar> reduce_image(const BasicBoreholeImage<Scalar>& image) {
  if (image.empty()) throw DataError("empty image");
  return BasicSignal<Scalar>(image.pixels().rowwise().mean(),
                             image.depth_start(), image.sample_interval());
}

/// Replaces null pixels (the sentinel, or any non-finite value) by the mean
/// of the finite pixels in the same row. Returns the index of the first row
/// with no finite pixel, or -1 when every row was repaired.
template <typename Derived>
Eigen::Index repair_null_pixels(Eigen::MatrixBase<Derived>& pixels,
                                typename Derived::Scalar null_value) {
  using Scalar = typename Derived::Scalar;
  auto is_null = [null_value](Scalar v) {
    return !std::isfinite(v) || v == null_value;
  };
  for (Eigen::Index r = 0; r < pixels.rows(); ++r) {
    Scalar sum(0);
    Eigen::Index finite = 0;
    for (Eigen::Index c = 0; c < pixels.cols(); ++c) {
      if (!is_null(pixels(r, c))) {
        sum += pixels(r, c);
        ++finite;
      }
    }
    if (finite == 0) return r;
    if (finite == pixels.cols()) continue;
    const Scalar mean = sum / Scalar(finite);
    for (Eigen::Index c = 0; c < pixels.cols(); ++c)
      if (is_null(pixels(r, c))) pixels(r, c) = mean;
  }
  return -1;
}

}  // namespace shapedtw
