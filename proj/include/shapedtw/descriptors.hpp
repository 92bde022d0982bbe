#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shapedtw/errors.hpp"
#include "shapedtw/signal.hpp"

namespace shapedtw {

enum class DescriptorKind { Raw, Gradient, Hog1d, Compound };

struct CompoundMember;

/// Shape descriptor selection and parameters. Compound descriptors hold a
/// flat list of weighted members; members may not be compound themselves.
struct DescriptorConfig {
  DescriptorKind kind = DescriptorKind::Raw;
  /// Subsequence radius; unset means 2 * cell_size.
  std::optional<int> radius;
  int cell_size = 60;
  int num_bins = 10;
  int block_size = 2;
  /// Multiplies gradients before the angle map, to adapt to amplitude units.
  double gradient_scale = 1.0;
  std::vector<CompoundMember> members;

  static DescriptorConfig raw(std::optional<int> radius = std::nullopt);
  static DescriptorConfig gradient(std::optional<int> radius = std::nullopt);
  static DescriptorConfig hog1d(int cell_size = 60, int num_bins = 10,
                                int block_size = 2,
                                std::optional<int> radius = std::nullopt);
  static DescriptorConfig compound(std::vector<CompoundMember> members,
                                   std::optional<int> radius = std::nullopt);
  /// HOG-1D(60, 10, 2) combined with the raw subsequence, equal weights.
  static DescriptorConfig hog1d_plus_raw();

  int effective_radius() const;
  void validate() const;
};

struct CompoundMember {
  DescriptorConfig config;
  double weight = 1.0;
};

inline DescriptorConfig DescriptorConfig::raw(std::optional<int> radius) {
  DescriptorConfig c;
  c.kind = DescriptorKind::Raw;
  c.radius = radius;
  return c;
}

inline DescriptorConfig DescriptorConfig::gradient(std::optional<int> radius) {
  DescriptorConfig c;
  c.kind = DescriptorKind::Gradient;
  c.radius = radius;
  return c;
}

inline DescriptorConfig DescriptorConfig::hog1d(int cell_size, int num_bins,
                                                int block_size,
                                                std::optional<int> radius) {
  DescriptorConfig c;
  c.kind = DescriptorKind::Hog1d;
  c.cell_size = cell_size;
  c.num_bins = num_bins;
  c.block_size = block_size;
  c.radius = radius;
  return c;
}

inline DescriptorConfig DescriptorConfig::compound(
    std::vector<CompoundMember> members, std::optional<int> radius) {
  DescriptorConfig c;
  c.kind = DescriptorKind::Compound;
  c.members = std::move(members);
  c.radius = radius;
  return c;
}

inline DescriptorConfig DescriptorConfig::hog1d_plus_raw() {
  return compound({{hog1d(60, 10, 2), 1.0}, {raw(), 1.0}});
}

inline int DescriptorConfig::effective_radius() const {
  if (radius) return *radius;
  if (kind != DescriptorKind::Compound) return 2 * cell_size;
  // The widest HOG-1D member sets the default context.
  int cell = 0;
  for (const auto& m : members)
    if (m.config.kind == DescriptorKind::Hog1d) cell = std::max(cell, m.config.cell_size);
  return 2 * (cell > 0 ? cell : cell_size);
}

inline void DescriptorConfig::validate() const {
  if (radius && *radius < 0) throw DataError("radius must be >= 0");
  if (cell_size < 2) throw DataError("cell_size must be >= 2");
  if (num_bins < 2) throw DataError("num_bins must be >= 2");
  if (block_size < 1) throw DataError("block_size must be >= 1");
  if (!(gradient_scale > 0.0) || !std::isfinite(gradient_scale))
    throw DataError("gradient_scale must be positive");
  if (kind == DescriptorKind::Compound) {
    if (members.empty()) throw DataError("degenerate compound");
    bool any_positive = false;
    for (const auto& m : members) {
      if (m.config.kind == DescriptorKind::Compound)
        throw DataError("compound members may not be compound");
      if (!(m.weight >= 0.0) || !std::isfinite(m.weight))
        throw DataError("compound weights must be finite and >= 0");
      any_positive = any_positive || m.weight > 0.0;
      m.config.validate();
    }
    if (!any_positive) throw DataError("degenerate compound");
  } else if (kind == DescriptorKind::Gradient && 2 * effective_radius() + 1 < 3) {
    throw DataError("subsequence too short for gradients");
  }
}

/// Window of 2r+1 samples centred on one sample of a signal.
template <typename Scalar>
struct Subsequence {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;
  Eigen::Index center_index = 0;
  int radius = 0;

  Eigen::Index size() const { return values.size(); }
};

/// Subsequence around sample i; positions past either end replicate the
/// first or last sample.
template <typename Derived>
Subsequence<typename Derived::Scalar> extract_subsequence(
    const Eigen::MatrixBase<Derived>& values, Eigen::Index i, int radius) {
  const Eigen::Index n = values.size();
  if (i < 0 || i >= n) throw DataError("index out of range");
  if (radius < 0) throw DataError("radius must be >= 0");
  Subsequence<typename Derived::Scalar> sub;
  sub.center_index = i;
  sub.radius = radius;
  sub.values.resize(2 * Eigen::Index(radius) + 1);
  for (Eigen::Index k = -radius; k <= radius; ++k)
    sub.values[k + radius] = values[std::clamp<Eigen::Index>(i + k, 0, n - 1)];
  return sub;
}

template <typename Scalar>
Subsequence<Scalar> extract_subsequence(const BasicSignal<Scalar>& signal,
                                        Eigen::Index i, int radius) {
  return extract_subsequence(signal.values(), i, radius);
}

namespace detail {

// Central differences with the subsequence ends replicated.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> central_gradient(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v) {
  const Eigen::Index n = v.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> g(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Scalar next = v[std::min(k + 1, n - 1)];
    const Scalar prev = v[std::max<Eigen::Index>(k - 1, 0)];
    g[k] = (next - prev) / Scalar(2);
  }
  return g;
}

}  // namespace detail

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> raw_descriptor(
    const Subsequence<Scalar>& sub) {
  return sub.values;
}

/// First-order central differences followed by second-order differences.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> gradient_descriptor(
    const Subsequence<Scalar>& sub) {
  const Eigen::Index n = sub.size();
  if (n < 3) throw DataError("subsequence too short for gradients");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(2 * n);
  out.head(n) = detail::central_gradient(sub.values);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Scalar next = sub.values[std::min(k + 1, n - 1)];
    const Scalar prev = sub.values[std::max<Eigen::Index>(k - 1, 0)];
    out[n + k] = next - Scalar(2) * sub.values[k] + prev;
  }
  return out;
}

/// Number of HOG-1D cells for a subsequence of `length` samples.
inline Eigen::Index hog1d_cell_count(Eigen::Index length, int cell_size) {
  return std::max<Eigen::Index>(length / cell_size, 1);
}

inline Eigen::Index hog1d_block_count(Eigen::Index cells, int block_size) {
  return std::max<Eigen::Index>(cells - block_size + 1, 1);
}

inline Eigen::Index hog1d_feature_dim(Eigen::Index length, int cell_size,
                                      int num_bins, int block_size) {
  const Eigen::Index cells = hog1d_cell_count(length, cell_size);
  return hog1d_block_count(cells, block_size) *
         std::min<Eigen::Index>(block_size, cells) * num_bins;
}

/// One-dimensional histogram of oriented gradients.
///
/// Each sample votes sqrt(1 + (s*g)^2) into the orientation bin of
/// atan(s*g), where g is the central difference and s the gradient scale.
/// Bins split [-pi/2, pi/2) into equal half-open intervals. Cells are
/// contiguous runs of cell_size samples from the subsequence start, the
/// remainder joining the last cell. Blocks of block_size consecutive cells
/// slide with stride 1 and are each scaled to unit L2 norm.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> hog1d_descriptor(
    const Subsequence<Scalar>& sub, const DescriptorConfig& cfg) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index length = sub.size();
  const Eigen::Index cells = hog1d_cell_count(length, cfg.cell_size);
  const Eigen::Index bins = cfg.num_bins;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar scale = Scalar(cfg.gradient_scale);

  const Vector gradient = detail::central_gradient(sub.values);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> histograms =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(bins, cells);
  for (Eigen::Index k = 0; k < length; ++k) {
    const Scalar sg = scale * gradient[k];
    const Scalar theta = std::atan(sg);
    const Scalar magnitude = std::sqrt(Scalar(1) + sg * sg);
    // theta / pi is exactly 0 for a flat gradient, which lands on bin bins/2.
    auto bin = Eigen::Index(std::floor((theta / pi + Scalar(0.5)) * Scalar(bins)));
    bin = std::clamp<Eigen::Index>(bin, 0, bins - 1);
    const Eigen::Index cell = std::min<Eigen::Index>(k / cfg.cell_size, cells - 1);
    histograms(bin, cell) += magnitude;
  }

  const Eigen::Index cells_per_block = std::min<Eigen::Index>(cfg.block_size, cells);
  const Eigen::Index blocks = hog1d_block_count(cells, cfg.block_size);
  const Eigen::Index block_dim = cells_per_block * bins;
  Vector out(blocks * block_dim);
  for (Eigen::Index b = 0; b < blocks; ++b) {
    auto block = out.segment(b * block_dim, block_dim);
    for (Eigen::Index c = 0; c < cells_per_block; ++c)
      block.segment(c * bins, bins) = histograms.col(b + c);
    block /= block.norm() + Scalar(1e-12);
  }
  return out;
}

/// Per-coordinate centring and scaling fitted over one signal's rows.
template <typename Scalar>
struct ZNormalization {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mean;
  /// Standard deviation, or 1 where it falls below 1e-12.
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> scale;

  template <typename Derived>
  static ZNormalization fit(const Eigen::MatrixBase<Derived>& rows) {
    ZNormalization z;
    const Scalar count = Scalar(rows.rows());
    z.mean = rows.colwise().mean().transpose();
    z.scale.resize(rows.cols());
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      const Scalar var =
          (rows.col(c).array() - z.mean[c]).square().sum() / count;
      const Scalar sd = std::sqrt(var);
      z.scale[c] = sd < Scalar(1e-12) ? Scalar(1) : sd;
    }
    return z;
  }

  template <typename Derived>
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> apply(
      const Eigen::MatrixBase<Derived>& v) const {
    return ((v.array() - mean.array()) / scale.array()).matrix();
  }
};

/// Descriptor of a single subsequence for a non-compound kind.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> describe(const Subsequence<Scalar>& sub,
                                                  const DescriptorConfig& cfg) {
  switch (cfg.kind) {
    case DescriptorKind::Raw:
      return raw_descriptor(sub);
    case DescriptorKind::Gradient:
      return gradient_descriptor(sub);
    case DescriptorKind::Hog1d:
      return hog1d_descriptor(sub, cfg);
    case DescriptorKind::Compound:
      break;
  }
  throw DataError("compound descriptors need per-member normalization");
}

/// Weighted concatenation of z-normalized member descriptors. `norms` holds
/// one fitted normalization per member, in declared order.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> compound_descriptor(
    const Subsequence<Scalar>& sub, const DescriptorConfig& cfg,
    std::span<const ZNormalization<Scalar>> norms) {
  cfg.validate();
  if (cfg.kind != DescriptorKind::Compound)
    throw DataError("compound_descriptor needs a compound config");
  if (norms.size() != cfg.members.size())
    throw DataError("one normalization per compound member required");
  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> parts;
  Eigen::Index dim = 0;
  for (std::size_t k = 0; k < cfg.members.size(); ++k) {
    parts.push_back(Scalar(cfg.members[k].weight) *
                    norms[k].apply(describe(sub, cfg.members[k].config)));
    dim += parts.back().size();
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(dim);
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    out.segment(offset, p.size()) = p;
    offset += p.size();
  }
  return out;
}

/// One descriptor row per signal sample.
template <typename Scalar>
class FeatureMatrix {
 public:
  using Rows = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  FeatureMatrix() = default;
  explicit FeatureMatrix(Rows rows) : rows_(std::move(rows)) {}

  const Rows& rows() const { return rows_; }
  Eigen::Index size() const { return rows_.rows(); }
  Eigen::Index feature_dim() const { return rows_.cols(); }

  /// Rows [start, start + count) as a new matrix.
  FeatureMatrix slice(Eigen::Index start, Eigen::Index count) const {
    if (start < 0 || count < 0 || start + count > size())
      throw DataError("feature slice out of range");
    return FeatureMatrix(rows_.middleRows(start, count));
  }

 private:
  Rows rows_;
};

namespace detail {

template <typename Scalar>
typename FeatureMatrix<Scalar>::Rows describe_all(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& values, int radius,
    const DescriptorConfig& cfg) {
  typename FeatureMatrix<Scalar>::Rows rows;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const auto row = describe(extract_subsequence(values, i, radius), cfg);
    if (i == 0) rows.resize(values.size(), row.size());
    rows.row(i) = row.transpose();
  }
  return rows;
}

}  // namespace detail

/// Feature matrix of a signal. Compound members are each z-normalized with
/// statistics taken over all rows of that member's matrix for this signal.
template <typename Scalar>
FeatureMatrix<Scalar> feature_matrix(const BasicSignal<Scalar>& signal,
                                     const DescriptorConfig& cfg) {
  cfg.validate();
  if (signal.empty()) throw DataError("empty signal");
  const int radius = cfg.effective_radius();
  if (cfg.kind != DescriptorKind::Compound)
    return FeatureMatrix<Scalar>(detail::describe_all(signal.values(), radius, cfg));

  std::vector<typename FeatureMatrix<Scalar>::Rows> blocks;
  Eigen::Index dim = 0;
  for (const auto& member : cfg.members) {
    auto rows = detail::describe_all(signal.values(), radius, member.config);
    const auto z = ZNormalization<Scalar>::fit(rows);
    for (Eigen::Index i = 0; i < rows.rows(); ++i)
      rows.row(i) = Scalar(member.weight) * z.apply(rows.row(i).transpose()).transpose();
    dim += rows.cols();
    blocks.push_back(std::move(rows));
  }
  typename FeatureMatrix<Scalar>::Rows out(signal.size(), dim);
  Eigen::Index offset = 0;
  for (const auto& b : blocks) {
    out.middleCols(offset, b.cols()) = b;
    offset += b.cols();
  }
  return FeatureMatrix<Scalar>(std::move(out));
}

}  // namespace shapedtw
