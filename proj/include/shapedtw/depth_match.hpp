#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shapedtw/descriptors.hpp"
#include "shapedtw/errors.hpp"
#include "shapedtw/signal.hpp"
#include "shapedtw/warp.hpp"

namespace shapedtw {

struct MatchConfig {
  double window_ft = 20.0;
  double margin_frac = 0.1;
  DescriptorConfig descriptor = DescriptorConfig::hog1d_plus_raw();
  /// Unset means the inverse of the reference image's sample interval.
  std::optional<double> samples_per_ft;
  std::optional<double> band_halfwidth;

  double resolved_samples_per_ft(double sample_interval) const {
    return samples_per_ft.value_or(1.0 / sample_interval);
  }

  Eigen::Index window_samples(double samples_per_ft_value) const {
    return Eigen::Index(std::llround(window_ft * samples_per_ft_value));
  }

  Eigen::Index margin_samples(Eigen::Index window_length) const {
    return Eigen::Index(std::llround(margin_frac * double(window_length)));
  }

  void validate() const {
    if (!(window_ft >= 10.0 && window_ft <= 30.0))
      throw DataError("window_ft must lie in [10, 30]");
    if (!(margin_frac >= 0.0 && margin_frac <= 0.5))
      throw DataError("margin_frac must lie in [0, 0.5]");
    if (samples_per_ft) {
      if (!(*samples_per_ft > 0.0) || !std::isfinite(*samples_per_ft))
        throw DataError("samples_per_ft must be positive");
      if (window_samples(*samples_per_ft) < 8)
        throw DataError("window must span at least 8 samples");
    }
    if (band_halfwidth && !(*band_halfwidth >= 0.0))
      throw DataError("band half-width must be >= 0");
    descriptor.validate();
  }
};

/// Inclusive index range.
struct WindowSpan {
  Eigen::Index start = 0;
  Eigen::Index end = 0;
  Eigen::Index length() const { return end - start + 1; }
  friend bool operator==(const WindowSpan&, const WindowSpan&) = default;
};

/// Disjoint consecutive windows of `window_length` samples. A trailing
/// remainder shorter than half a window joins the last window.
inline std::vector<WindowSpan> partition_windows(Eigen::Index m,
                                                 Eigen::Index window_length) {
  if (m < 1) throw DataError("cannot partition an empty interval");
  if (window_length < 1) throw DataError("window length must be positive");
  std::vector<WindowSpan> spans;
  Eigen::Index start = 0;
  while (m - start >= window_length) {
    spans.push_back({start, start + window_length - 1});
    start += window_length;
  }
  const Eigen::Index remainder = m - start;
  if (remainder > 0) {
    if (!spans.empty() && 2 * remainder < window_length)
      spans.back().end = m - 1;
    else
      spans.push_back({start, m - 1});
  }
  return spans;
}

inline std::vector<WindowSpan> partition_windows(Eigen::Index m,
                                                 const MatchConfig& cfg) {
  if (!cfg.samples_per_ft) throw DataError("samples_per_ft is required");
  return partition_windows(m, cfg.window_samples(*cfg.samples_per_ft));
}

/// Target search range for a reference window: the window's span placed at
/// `anchor` and widened by `margin` on both sides, clamped to the signal.
inline WindowSpan target_window(WindowSpan ref, Eigen::Index anchor,
                                Eigen::Index margin, Eigen::Index target_length) {
  const Eigen::Index lo = std::max<Eigen::Index>(anchor - margin, 0);
  const Eigen::Index hi =
      std::min<Eigen::Index>(anchor + ref.length() - 1 + margin, target_length - 1);
  if (lo > hi) throw DataError("target exhausted");
  return {lo, hi};
}

/// ShapeDTW of one reference window against its target search range.
/// Features are rows of the full-signal feature matrices. The returned path
/// is in global coordinates of both signals, closed on the reference span.
/// With zero margin both boundaries are closed.
template <typename Scalar>
AlignmentResult<Scalar> match_window(const FeatureMatrix<Scalar>& ref_features,
                                     WindowSpan ref,
                                     const FeatureMatrix<Scalar>& target_features,
                                     Eigen::Index anchor, Eigen::Index margin,
                                     std::optional<double> band_halfwidth = std::nullopt) {
  if (ref.start < 0 || ref.end >= ref_features.size() || ref.start > ref.end)
    throw DataError("reference window out of range");
  const WindowSpan tgt = target_window(ref, anchor, margin, target_features.size());
  const auto d = shape_distance_matrix(ref_features.slice(ref.start, ref.length()),
                                       target_features.slice(tgt.start, tgt.length()));
  AlignmentOptions options;
  if (band_halfwidth) options.band = Band{*band_halfwidth, double(anchor - tgt.start), 1.0};
  const bool closed = margin == 0 && tgt.length() == ref.length();
  auto local = closed ? align(d, options) : open_end_dtw(d, options);

  std::vector<PathStep> global;
  global.reserve(local.path.size());
  for (const auto& s : local.path.steps())
    global.push_back({s.i + ref.start, s.j + tgt.start});
  local.path = WarpPath(std::move(global), ref_features.size(), target_features.size(),
                        false, false);
  if (local.path.front().i != ref.start || local.path.back().i != ref.end)
    throw InvariantError("window path does not span its reference window");
  return local;
}

/// Single-window form: `ref_seg` is the whole reference window and
/// `target_anchor` the target index expected to match its first sample.
/// Reference indices in the result are local to `ref_seg`.
template <typename Scalar>
AlignmentResult<Scalar> match_window(const BasicSignal<Scalar>& ref_seg,
                                     const BasicSignal<Scalar>& target,
                                     Eigen::Index target_anchor,
                                     const MatchConfig& cfg) {
  cfg.validate();
  if (ref_seg.empty()) throw DataError("empty reference window");
  if (target.empty()) throw DataError("target exhausted");
  const WindowSpan ref{0, ref_seg.size() - 1};
  return match_window(feature_matrix(ref_seg, cfg.descriptor), ref,
                      feature_matrix(target, cfg.descriptor), target_anchor,
                      cfg.margin_samples(ref.length()), cfg.band_halfwidth);
}

/// Path over the full reference interval: every reference index appears,
/// in order, with legal steps throughout.
class CompositePath {
 public:
  CompositePath() = default;
  CompositePath(std::vector<PathStep> steps, Eigen::Index ref_length,
                Eigen::Index target_length)
      : path_(std::move(steps), ref_length, target_length, false, false) {
    if (path_.front().i != 0 || path_.back().i != ref_length - 1)
      throw InvariantError("composite path does not cover every reference index");
  }

  const WarpPath& path() const { return path_; }
  const std::vector<PathStep>& steps() const { return path_.steps(); }
  std::size_t size() const { return path_.size(); }
  Eigen::Index ref_length() const { return path_.rows(); }
  Eigen::Index target_length() const { return path_.cols(); }

  static CompositePath identity(Eigen::Index length) {
    std::vector<PathStep> steps;
    for (Eigen::Index i = 0; i < length; ++i) steps.push_back({i, i});
    return CompositePath(std::move(steps), length, length);
  }

 private:
  WarpPath path_;
};

/// Concatenates per-window paths (reference order). A window that starts
/// behind the running target maximum has its leading target indices clamped
/// up to it; a window that starts ahead has the skipped target indices
/// attached to the previous window's last reference sample. Joins that move
/// by more than `warn_threshold` samples are reported in `warnings`.
template <typename Scalar>
CompositePath stitch(const std::vector<AlignmentResult<Scalar>>& windows,
                     Eigen::Index ref_length, Eigen::Index target_length,
                     Eigen::Index warn_threshold = 0,
                     std::vector<std::string>* warnings = nullptr) {
  if (windows.empty()) throw DataError("nothing to stitch");
  std::vector<PathStep> steps;
  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back(msg);
  };
  for (const auto& w : windows) {
    const auto& ws = w.path.steps();
    if (steps.empty()) {
      steps = ws;
      continue;
    }
    const PathStep last = steps.back();
    if (ws.front().i != last.i + 1)
      throw InvariantError("windows are not contiguous in reference order");
    const Eigen::Index jump = ws.front().j - last.j;
    if (jump > 1) {
      for (Eigen::Index j = last.j + 1; j < ws.front().j; ++j) steps.push_back({last.i, j});
      if (jump - 1 > warn_threshold)
        warn("target jumps " + std::to_string(jump - 1) + " samples at reference index " +
             std::to_string(ws.front().i));
    } else if (jump < 0 && -jump > warn_threshold) {
      warn("target steps back " + std::to_string(-jump) + " samples at reference index " +
           std::to_string(ws.front().i));
    }
    const Eigen::Index running_max = steps.back().j;
    for (auto s : ws) {
      s.j = std::max(s.j, running_max);
      if (!(s == steps.back())) steps.push_back(s);
    }
  }
  return CompositePath(std::move(steps), ref_length, target_length);
}

template <typename Scalar>
struct DepthShiftCurve {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector depths;
  Vector shift_samples;
  Vector shift_ft;
};

/// Per reference sample: mean matched target index minus the reference
/// index. `target_offset` is the reference-minus-target start depth in
/// samples, removed so the shift measures depth displacement.
template <typename Scalar>
DepthShiftCurve<Scalar> shift_curve(const CompositePath& path,
                                    const BasicSignal<Scalar>& ref,
                                    Scalar target_offset = Scalar(0)) {
  const Eigen::Index m = ref.size();
  if (path.ref_length() != m) throw DataError("path does not match reference length");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sum = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(m);
  Eigen::VectorXi count = Eigen::VectorXi::Zero(m);
  for (const auto& s : path.steps()) {
    sum[s.i] += Scalar(s.j);
    ++count[s.i];
  }
  DepthShiftCurve<Scalar> curve;
  curve.depths.resize(m);
  curve.shift_samples.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    curve.depths[i] = ref.depth_at(i);
    curve.shift_samples[i] = sum[i] / Scalar(count[i]) - Scalar(i) - target_offset;
  }
  curve.shift_ft = curve.shift_samples * ref.sample_interval();
  return curve;
}

/// Target image resampled onto the reference grid: row i is the mean of the
/// target rows matched to reference sample i.
template <typename Scalar>
BasicBoreholeImage<Scalar> apply_warp(const BasicBoreholeImage<Scalar>& target_image,
                                      const CompositePath& path,
                                      const BasicSignal<Scalar>& ref) {
  if (path.ref_length() != ref.size())
    throw DataError("path does not match reference length");
  if (path.target_length() != target_image.depth_count())
    throw DataError("path does not match target image");
  using Matrix = typename BasicBoreholeImage<Scalar>::Matrix;
  Matrix out = Matrix::Zero(ref.size(), target_image.azimuth_count());
  Eigen::VectorXi count = Eigen::VectorXi::Zero(ref.size());
  for (const auto& s : path.steps()) {
    out.row(s.i) += target_image.pixels().row(s.j);
    ++count[s.i];
  }
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    if (count[i] > 1) out.row(i) /= Scalar(count[i]);
  return BasicBoreholeImage<Scalar>(std::move(out), ref.depth_start(), ref.sample_interval());
}

template <typename Scalar>
struct DepthMatchResult {
  BasicBoreholeImage<Scalar> aligned;
  DepthShiftCurve<Scalar> curve;
  CompositePath path;
  BasicSignal<Scalar> reduced_ref;
  BasicSignal<Scalar> reduced_target;
  std::vector<WindowSpan> windows;
  std::vector<std::string> warnings;
};

/// Aligns the target pad image onto the reference pad's depth grid.
///
/// Both images are reduced to row means. Reference windows are matched in
/// order; each window searches the target around the sample after the
/// previous window's last match (the first window around its own span,
/// shifted by the difference in start depths). Window paths are stitched,
/// turned into a shift curve, and used to resample every target column.
template <typename Scalar>
DepthMatchResult<Scalar> match_depth(const BasicBoreholeImage<Scalar>& ref_image,
                                     const BasicBoreholeImage<Scalar>& target_image,
                                     const MatchConfig& cfg) {
  cfg.validate();
  if (ref_image.empty() || target_image.empty()) throw DataError("empty image");
  const Scalar dt = ref_image.sample_interval();
  if (std::abs(target_image.sample_interval() - dt) > Scalar(1e-9) * dt)
    throw DataError("sample interval mismatch between images");
  const Scalar ref_end = ref_image.depth_at(ref_image.depth_count() - 1);
  const Scalar target_end = target_image.depth_at(target_image.depth_count() - 1);
  if (ref_end < target_image.depth_start() || target_end < ref_image.depth_start())
    throw DataError("disjoint intervals");

  DepthMatchResult<Scalar> result;
  result.reduced_ref = reduce_image(ref_image);
  result.reduced_target = reduce_image(target_image);
  const Scalar offset = (ref_image.depth_start() - target_image.depth_start()) / dt;

  const double spf = cfg.resolved_samples_per_ft(double(dt));
  const Eigen::Index window_length = cfg.window_samples(spf);
  if (window_length < 8) throw DataError("window must span at least 8 samples");
  result.windows = partition_windows(result.reduced_ref.size(), window_length);

  const auto ref_features = feature_matrix(result.reduced_ref, cfg.descriptor);
  const auto target_features = feature_matrix(result.reduced_target, cfg.descriptor);

  std::vector<AlignmentResult<Scalar>> matched;
  Eigen::Index anchor = Eigen::Index(std::llround(double(offset)));
  const Eigen::Index margin = cfg.margin_samples(window_length);
  for (const auto& w : result.windows) {
    if (!matched.empty()) anchor = matched.back().path.back().j + 1;
    anchor = std::clamp<Eigen::Index>(anchor, 0, target_features.size() - 1);
    matched.push_back(match_window(ref_features, w, target_features, anchor,
                                   cfg.margin_samples(w.length()), cfg.band_halfwidth));
  }
  result.path = stitch(matched, result.reduced_ref.size(), result.reduced_target.size(),
                       margin, &result.warnings);
  result.curve = shift_curve(result.path, result.reduced_ref, offset);
  result.aligned = apply_warp(target_image, result.path, result.reduced_ref);
  return result;
}

}  // namespace shapedtw
