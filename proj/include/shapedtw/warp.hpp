#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "shapedtw/descriptors.hpp"
#include "shapedtw/errors.hpp"
#include "shapedtw/signal.hpp"

namespace shapedtw {

enum class CostKind { Pointwise, Shape, Accumulated };

template <typename Scalar>
struct CostMatrix {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Matrix entries;
  CostKind kind = CostKind::Pointwise;

  Eigen::Index rows() const { return entries.rows(); }
  Eigen::Index cols() const { return entries.cols(); }
  Scalar operator()(Eigen::Index i, Eigen::Index j) const { return entries(i, j); }
};

/// Sakoe-Chiba style band: cell (i, j) is admissible when
/// |j - (offset + slope * i)| <= halfwidth.
struct Band {
  double halfwidth = 0.0;
  double offset = 0.0;
  double slope = 1.0;

  /// Band around the straight line joining (0, 0) and (rows-1, cols-1).
  static Band diagonal(double halfwidth, Eigen::Index rows, Eigen::Index cols) {
    const double slope = rows > 1 ? double(cols - 1) / double(rows - 1) : 0.0;
    return {halfwidth, 0.0, slope};
  }

  bool contains(Eigen::Index i, Eigen::Index j) const {
    return std::abs(double(j) - (offset + slope * double(i))) <= halfwidth;
  }
};

struct PathStep {
  Eigen::Index i = 0;  // reference index
  Eigen::Index j = 0;  // target index
  friend bool operator==(const PathStep&, const PathStep&) = default;
};

/// Monotone alignment path. Every construction is validated: steps are
/// (+1,0), (0,+1) or (+1,+1), indices lie inside [0,rows) x [0,cols), and
/// closed ends touch the matrix corners.
class WarpPath {
 public:
  WarpPath() = default;
  WarpPath(std::vector<PathStep> steps, Eigen::Index rows, Eigen::Index cols,
           bool closed_start, bool closed_end)
      : steps_(std::move(steps)),
        rows_(rows),
        cols_(cols),
        closed_start_(closed_start),
        closed_end_(closed_end) {
    if (auto problem = check()) throw InvariantError("invalid warp path: " + *problem);
  }

  const std::vector<PathStep>& steps() const { return steps_; }
  std::size_t size() const { return steps_.size(); }
  const PathStep& front() const { return steps_.front(); }
  const PathStep& back() const { return steps_.back(); }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  bool closed_start() const { return closed_start_; }
  bool closed_end() const { return closed_end_; }

 private:
  std::optional<std::string> check() const {
    if (steps_.empty()) return "empty";
    for (std::size_t k = 0; k < steps_.size(); ++k) {
      const auto& s = steps_[k];
      if (s.i < 0 || s.i >= rows_ || s.j < 0 || s.j >= cols_)
        return "index out of bounds at step " + std::to_string(k);
      if (k == 0) continue;
      const auto di = s.i - steps_[k - 1].i;
      const auto dj = s.j - steps_[k - 1].j;
      const bool ok = (di == 1 && dj == 0) || (di == 0 && dj == 1) ||
                      (di == 1 && dj == 1);
      if (!ok) return "illegal step at " + std::to_string(k);
    }
    if (closed_start_ && !(steps_.front() == PathStep{0, 0}))
      return "closed start does not begin at (0,0)";
    if (closed_end_ && !(steps_.back() == PathStep{rows_ - 1, cols_ - 1}))
      return "closed end does not finish at (m-1,n-1)";
    return std::nullopt;
  }

  std::vector<PathStep> steps_;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  bool closed_start_ = true;
  bool closed_end_ = true;
};

template <typename Scalar>
struct AlignmentResult {
  Scalar distance = Scalar(0);
  WarpPath path;
  std::optional<CostMatrix<Scalar>> accumulated;
};

struct AlignmentOptions {
  std::optional<Band> band;
  bool keep_accumulated = false;
};

template <typename Scalar>
CostMatrix<Scalar> pointwise_distance_matrix(const BasicSignal<Scalar>& x,
                                             const BasicSignal<Scalar>& y) {
  if (x.empty() || y.empty()) throw DataError("empty signal");
  CostMatrix<Scalar> d;
  d.kind = CostKind::Pointwise;
  d.entries = (x.values().replicate(1, y.size()).rowwise() -
               y.values().transpose())
                  .cwiseAbs();
  return d;
}

/// Euclidean distances between every row of fx and every row of fy.
template <typename Scalar>
CostMatrix<Scalar> shape_distance_matrix(const FeatureMatrix<Scalar>& fx,
                                         const FeatureMatrix<Scalar>& fy) {
  if (fx.feature_dim() != fy.feature_dim())
    throw DataError("feature dimension mismatch");
  if (fx.size() == 0 || fy.size() == 0) throw DataError("empty feature matrix");
  CostMatrix<Scalar> d;
  d.kind = CostKind::Shape;
  d.entries.resize(fx.size(), fy.size());
  for (Eigen::Index i = 0; i < fx.size(); ++i)
    for (Eigen::Index j = 0; j < fy.size(); ++j)
      d.entries(i, j) = (fx.rows().row(i) - fy.rows().row(j)).norm();
  return d;
}

/// Accumulated cost C(i,j) = D(i,j) + min(C(i-1,j), C(i,j-1), C(i-1,j-1)).
/// With `open_start` every cell of the first row starts a path afresh.
/// Cells outside `band` are +inf.
template <typename Scalar>
CostMatrix<Scalar> accumulate(const CostMatrix<Scalar>& d,
                              const std::optional<Band>& band = std::nullopt,
                              bool open_start = false) {
  if (d.kind == CostKind::Accumulated)
    throw DataError("accumulate expects a distance matrix");
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  const Eigen::Index m = d.rows(), n = d.cols();
  CostMatrix<Scalar> c;
  c.kind = CostKind::Accumulated;
  c.entries.resize(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (band && !band->contains(i, j)) {
        c.entries(i, j) = inf;
        continue;
      }
      Scalar best;
      if (i == 0)
        best = (j == 0 || open_start) ? Scalar(0) : c.entries(0, j - 1);
      else if (j == 0)
        best = c.entries(i - 1, 0);
      else
        best = std::min({c.entries(i - 1, j), c.entries(i, j - 1),
                         c.entries(i - 1, j - 1)});
      c.entries(i, j) = d.entries(i, j) + best;
    }
  }
  return c;
}

namespace detail {

// Walks back from (i, j). Ties prefer the diagonal, then (i-1, j), then
// (i, j-1). An open start stops on the first row.
template <typename Scalar>
std::vector<PathStep> trace(const CostMatrix<Scalar>& c, Eigen::Index i,
                            Eigen::Index j, bool open_start) {
  std::vector<PathStep> steps{{i, j}};
  while (i > 0 || (j > 0 && !open_start)) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const Scalar diag = c.entries(i - 1, j - 1);
      const Scalar up = c.entries(i - 1, j);
      const Scalar left = c.entries(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    steps.push_back({i, j});
  }
  std::reverse(steps.begin(), steps.end());
  return steps;
}

template <typename Scalar>
void require_admissible(Scalar total) {
  if (!std::isfinite(total)) throw DataError("no admissible path within band");
}

}  // namespace detail

/// Optimal closed path from (m-1, n-1) back to (0, 0).
template <typename Scalar>
WarpPath traceback(const CostMatrix<Scalar>& c) {
  if (c.kind != CostKind::Accumulated)
    throw DataError("traceback expects an accumulated cost matrix");
  const Eigen::Index m = c.rows(), n = c.cols();
  return WarpPath(detail::trace(c, m - 1, n - 1, false), m, n, true, true);
}

/// Sum of distance-matrix entries along a path.
template <typename Scalar>
Scalar path_cost(const CostMatrix<Scalar>& d, const WarpPath& path) {
  Scalar total(0);
  for (const auto& s : path.steps()) total += d.entries(s.i, s.j);
  return total;
}

/// Closed-boundary DTW over a precomputed distance matrix.
template <typename Scalar>
AlignmentResult<Scalar> align(const CostMatrix<Scalar>& d,
                              const AlignmentOptions& options = {}) {
  auto c = accumulate(d, options.band);
  const Scalar total = c.entries(d.rows() - 1, d.cols() - 1);
  detail::require_admissible(total);
  AlignmentResult<Scalar> result{total, traceback(c), std::nullopt};
  if (options.keep_accumulated) result.accumulated = std::move(c);
  return result;
}

/// Classic DTW on point values. A band, when given, is a half-width in
/// samples around the straight diagonal.
template <typename Scalar>
AlignmentResult<Scalar> dtw(const BasicSignal<Scalar>& x,
                            const BasicSignal<Scalar>& y,
                            std::optional<double> band_halfwidth = std::nullopt,
                            bool keep_accumulated = false) {
  AlignmentOptions options;
  if (band_halfwidth) options.band = Band::diagonal(*band_halfwidth, x.size(), y.size());
  options.keep_accumulated = keep_accumulated;
  return align(pointwise_distance_matrix(x, y), options);
}

/// DTW on the distances between local shape descriptors.
template <typename Scalar>
AlignmentResult<Scalar> shape_dtw(const BasicSignal<Scalar>& x,
                                  const BasicSignal<Scalar>& y,
                                  const DescriptorConfig& cfg,
                                  std::optional<double> band_halfwidth = std::nullopt,
                                  bool keep_accumulated = false) {
  if (x.empty() || y.empty()) throw DataError("empty signal");
  AlignmentOptions options;
  if (band_halfwidth) options.band = Band::diagonal(*band_halfwidth, x.size(), y.size());
  options.keep_accumulated = keep_accumulated;
  return align(shape_distance_matrix(feature_matrix(x, cfg), feature_matrix(y, cfg)),
               options);
}

/// DTW closed on the reference (row) axis and free at both ends of the
/// target (column) axis. The end column is the smallest argmin of the last
/// accumulated row.
template <typename Scalar>
AlignmentResult<Scalar> open_end_dtw(const CostMatrix<Scalar>& d,
                                     const AlignmentOptions& options = {}) {
  auto c = accumulate(d, options.band, true);
  const Eigen::Index m = d.rows(), n = d.cols();
  Eigen::Index end = 0;
  for (Eigen::Index j = 1; j < n; ++j)
    if (c.entries(m - 1, j) < c.entries(m - 1, end)) end = j;
  const Scalar total = c.entries(m - 1, end);
  detail::require_admissible(total);
  WarpPath path(detail::trace(c, m - 1, end, true), m, n, false, false);
  if (path.front().i != 0) throw InvariantError("open-end path misses row 0");
  AlignmentResult<Scalar> result{total, std::move(path), std::nullopt};
  if (options.keep_accumulated) result.accumulated = std::move(c);
  return result;
}

template <typename Scalar>
AlignmentResult<Scalar> open_end_dtw(const BasicSignal<Scalar>& x,
                                     const BasicSignal<Scalar>& y,
                                     const CostMatrix<Scalar>& d,
                                     const AlignmentOptions& options = {}) {
  if (d.rows() != x.size() || d.cols() != y.size())
    throw DataError("distance matrix does not match signal lengths");
  return open_end_dtw(d, options);
}

/// Longest run of consecutive path steps sharing one reference index or one
/// target index (the widest one-to-many or many-to-one match).
inline std::size_t max_run_length(const WarpPath& path) {
  std::size_t best = path.size() ? 1 : 0, run_i = 1, run_j = 1;
  const auto& s = path.steps();
  for (std::size_t k = 1; k < s.size(); ++k) {
    run_i = s[k].i == s[k - 1].i ? run_i + 1 : 1;
    run_j = s[k].j == s[k - 1].j ? run_j + 1 : 1;
    best = std::max({best, run_i, run_j});
  }
  return best;
}

}  // namespace shapedtw
