#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "shapedtw/signal.hpp"

namespace shapedtw {

/// Known displacement of the target relative to the reference, one value per
/// reference sample: reference sample i appears at target index i + shift[i].
/// Positive shifts place the target deeper.
class GroundTruthWarp {
 public:
  GroundTruthWarp() = default;
  explicit GroundTruthWarp(Eigen::VectorXd shift_samples);

  const Eigen::VectorXd& shift_samples() const { return shift_samples_; }
  Eigen::Index size() const { return shift_samples_.size(); }

 private:
  Eigen::VectorXd shift_samples_;
};

/// Parametric warp used to build synthetic pairs.
struct WarpSpec {
  enum class Kind { Constant, LinearRamp, PiecewiseLinear };

  Kind kind = Kind::Constant;
  double constant = 0.0;
  double ramp_start = 0.0;
  double ramp_end = 0.0;
  /// (fraction of the interval in [0, 1], shift in samples), ascending.
  std::vector<std::pair<double, double>> knots;

  static WarpSpec constant_shift(double samples);
  static WarpSpec linear_ramp(double start, double end);
  static WarpSpec piecewise(std::vector<std::pair<double, double>> knots);

  /// Parses "constant:5", "ramp:0:8" or "piecewise:0=0,0.5=6,1=0".
  static WarpSpec parse(std::string_view text);

  /// Shift per reference sample for an interval of `length` samples.
  Eigen::VectorXd shifts(Eigen::Index length) const;
};

enum class Texture { SinusoidMix, StepTrain, FractureSinusoid };

Texture parse_texture(std::string_view text);

struct SyntheticPair {
  Signal reference;
  Signal target;
  GroundTruthWarp truth;
};

struct SyntheticImagePair {
  BoreholeImage reference;
  BoreholeImage target;
  GroundTruthWarp truth;
};

/// Reference and warped target drawn from one longer base series. The target
/// is resampled from the base by linear interpolation and receives Gaussian
/// noise of standard deviation `noise_sigma`. Deterministic in `seed`.
SyntheticPair generate_synthetic_pair(Eigen::Index length, Texture texture,
                                      const WarpSpec& warp, double noise_sigma,
                                      std::uint64_t seed,
                                      double sample_interval = 0.1);

/// Banded image with sinusoidal dip traces; the target is the reference
/// warped along depth. All columns share the warp.
SyntheticImagePair generate_synthetic_image_pair(
    Eigen::Index n_depth, Eigen::Index n_azimuth, const WarpSpec& warp,
    int dip_events, std::uint64_t seed, double noise_sigma = 0.0,
    double sample_interval = 0.1);

}  // namespace shapedtw
