#include "shapedtw/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "shapedtw/errors.hpp"

namespace shapedtw {

namespace {

constexpr Eigen::Index kBaseMargin = 8;

double parse_number(std::string_view text, std::string_view context) {
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
    throw DataError("bad number '" + s + "' in warp spec '" +
                    std::string(context) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const auto next = text.find(sep, pos);
    parts.push_back(text.substr(pos, next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return parts;
}

// Continuous position u in reference coordinates with u + shift(u) = j,
// the shift extended as a constant beyond the interval ends.
double invert_warp(const Eigen::VectorXd& shift, double j) {
  const Eigen::Index n = shift.size();
  const double first = 0.0 + shift[0];
  const double last = double(n - 1) + shift[n - 1];
  if (j <= first) return j - shift[0];
  if (j >= last) return j - shift[n - 1];
  Eigen::Index lo = 0, hi = n - 1;  // mapped(lo) <= j < mapped(hi)
  while (hi - lo > 1) {
    const Eigen::Index mid = (lo + hi) / 2;
    if (double(mid) + shift[mid] <= j)
      lo = mid;
    else
      hi = mid;
  }
  const double a = double(lo) + shift[lo];
  const double b = double(hi) + shift[hi];
  if (b == a) return double(lo);
  return double(lo) + (j - a) / (b - a);
}

// Rows of `base` sampled at fractional row positions by linear interpolation.
Eigen::MatrixXd sample_rows(const Eigen::MatrixXd& base,
                            const Eigen::VectorXd& positions) {
  Eigen::MatrixXd out(positions.size(), base.cols());
  for (Eigen::Index r = 0; r < positions.size(); ++r) {
    const double p = positions[r];
    if (p < 0.0 || p > double(base.rows() - 1))
      throw DataError("warp out of range");
    const auto lo = std::min<Eigen::Index>(Eigen::Index(std::floor(p)),
                                           base.rows() - 1);
    const double t = p - double(lo);
    if (t == 0.0)
      out.row(r) = base.row(lo);
    else
      out.row(r) = (1.0 - t) * base.row(lo) + t * base.row(lo + 1);
  }
  return out;
}

struct WarpLayout {
  Eigen::VectorXd shift;
  Eigen::Index pad = 0;
  Eigen::VectorXd target_positions;  // base-row positions of target samples
};

WarpLayout layout_warp(const WarpSpec& warp, Eigen::Index length) {
  WarpLayout layout;
  layout.shift = warp.shifts(length);
  const double max_shift = layout.shift.cwiseAbs().maxCoeff();
  if (max_shift > double(length - 1)) throw DataError("warp out of range");
  layout.pad = Eigen::Index(std::ceil(max_shift)) + kBaseMargin;
  layout.target_positions.resize(length);
  for (Eigen::Index j = 0; j < length; ++j)
    layout.target_positions[j] =
        double(layout.pad) + invert_warp(layout.shift, double(j));
  return layout;
}

Eigen::VectorXd texture_series(Texture texture, Eigen::Index n,
                               std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);

  auto add_sinusoids = [&](int count, double min_period, double max_period,
                           double min_amp, double max_amp) {
    for (int k = 0; k < count; ++k) {
      const double period = uniform(min_period, max_period);
      const double amp = uniform(min_amp, max_amp);
      const double phase = uniform(0.0, two_pi);
      for (Eigen::Index i = 0; i < n; ++i)
        v[i] += amp * std::sin(two_pi * double(i) / period + phase);
    }
  };

  switch (texture) {
    case Texture::SinusoidMix:
      add_sinusoids(4, 12.0, 80.0, 0.5, 1.5);
      break;
    case Texture::StepTrain: {
      double level = uniform(-2.0, 2.0);
      Eigen::Index i = 0;
      while (i < n) {
        const auto run = Eigen::Index(uniform(8.0, 40.0));
        for (Eigen::Index k = 0; k < run && i < n; ++k, ++i) v[i] = level;
        double next = level;
        while (std::abs(next - level) < 0.5) next = uniform(-2.0, 2.0);
        level = next;
      }
      break;
    }
    case Texture::FractureSinusoid: {
      add_sinusoids(2, 40.0, 120.0, 0.2, 0.4);
      double pos = uniform(0.0, 30.0);
      while (pos < double(n)) {
        const double amp = (unit(rng) < 0.5 ? -1.0 : 1.0) * uniform(1.0, 2.0);
        const double width = uniform(1.5, 3.0);
        for (Eigen::Index i = 0; i < n; ++i) {
          const double d = (double(i) - pos) / width;
          v[i] += amp * std::exp(-0.5 * d * d);
        }
        pos += uniform(15.0, 50.0);
      }
      break;
    }
  }
  return v;
}

}  // namespace

GroundTruthWarp::GroundTruthWarp(Eigen::VectorXd shift_samples)
    : shift_samples_(std::move(shift_samples)) {
  if (!shift_samples_.allFinite()) throw DataError("non-finite warp");
  for (Eigen::Index i = 1; i < shift_samples_.size(); ++i) {
    if (double(i) + shift_samples_[i] < double(i - 1) + shift_samples_[i - 1])
      throw DataError("non-monotone warp");
  }
}

WarpSpec WarpSpec::constant_shift(double samples) {
  WarpSpec w;
  w.kind = Kind::Constant;
  w.constant = samples;
  return w;
}

WarpSpec WarpSpec::linear_ramp(double start, double end) {
  WarpSpec w;
  w.kind = Kind::LinearRamp;
  w.ramp_start = start;
  w.ramp_end = end;
  return w;
}

WarpSpec WarpSpec::piecewise(std::vector<std::pair<double, double>> knots) {
  if (knots.empty()) throw DataError("piecewise warp needs at least one knot");
  for (std::size_t k = 0; k < knots.size(); ++k) {
    if (knots[k].first < 0.0 || knots[k].first > 1.0)
      throw DataError("piecewise knot position outside [0, 1]");
    if (k > 0 && knots[k].first <= knots[k - 1].first)
      throw DataError("piecewise knots must be strictly ascending");
  }
  WarpSpec w;
  w.kind = Kind::PiecewiseLinear;
  w.knots = std::move(knots);
  return w;
}

WarpSpec WarpSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  const auto kind = text.substr(0, colon);
  const auto rest =
      colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (kind == "constant") {
    return constant_shift(parse_number(rest, text));
  }
  if (kind == "ramp") {
    const auto parts = split(rest, ':');
    if (parts.size() != 2) throw DataError("ramp warp expects ramp:<start>:<end>");
    return linear_ramp(parse_number(parts[0], text), parse_number(parts[1], text));
  }
  if (kind == "piecewise") {
    std::vector<std::pair<double, double>> knots;
    for (const auto part : split(rest, ',')) {
      const auto eq = part.find('=');
      if (eq == std::string_view::npos)
        throw DataError("piecewise knot expects <fraction>=<shift>");
      knots.emplace_back(parse_number(part.substr(0, eq), text),
                         parse_number(part.substr(eq + 1), text));
    }
    return piecewise(std::move(knots));
  }
  throw DataError("unknown warp kind '" + std::string(kind) + "'");
}

Eigen::VectorXd WarpSpec::shifts(Eigen::Index length) const {
  Eigen::VectorXd s(length);
  const double span = length > 1 ? double(length - 1) : 1.0;
  for (Eigen::Index i = 0; i < length; ++i) {
    const double f = double(i) / span;
    switch (kind) {
      case Kind::Constant:
        s[i] = constant;
        break;
      case Kind::LinearRamp:
        s[i] = ramp_start + (ramp_end - ramp_start) * f;
        break;
      case Kind::PiecewiseLinear: {
        if (f <= knots.front().first) {
          s[i] = knots.front().second;
        } else if (f >= knots.back().first) {
          s[i] = knots.back().second;
        } else {
          std::size_t k = 1;
          while (knots[k].first < f) ++k;
          const auto [f0, s0] = knots[k - 1];
          const auto [f1, s1] = knots[k];
          s[i] = s0 + (s1 - s0) * (f - f0) / (f1 - f0);
        }
        break;
      }
    }
  }
  return s;
}

Texture parse_texture(std::string_view text) {
  if (text == "sinusoid-mix") return Texture::SinusoidMix;
  if (text == "step-train") return Texture::StepTrain;
  if (text == "fracture-sinusoid") return Texture::FractureSinusoid;
  throw DataError("unknown texture '" + std::string(text) + "'");
}

SyntheticPair generate_synthetic_pair(Eigen::Index length, Texture texture,
                                      const WarpSpec& warp, double noise_sigma,
                                      std::uint64_t seed,
                                      double sample_interval) {
  if (length < 16) throw DataError("synthetic length must be at least 16");
  if (!(noise_sigma >= 0.0)) throw DataError("noise_sigma must be >= 0");

  const WarpLayout layout = layout_warp(warp, length);
  GroundTruthWarp truth(layout.shift);

  std::mt19937_64 rng(seed);
  const Eigen::Index base_length = length + 2 * layout.pad;
  const Eigen::MatrixXd base = texture_series(texture, base_length, rng);

  Eigen::VectorXd reference = base.col(0).segment(layout.pad, length);
  Eigen::VectorXd target = sample_rows(base, layout.target_positions).col(0);
  if (noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (Eigen::Index j = 0; j < length; ++j) target[j] += noise(rng);
  }
  return {Signal(std::move(reference), 0.0, sample_interval),
          Signal(std::move(target), 0.0, sample_interval), std::move(truth)};
}

SyntheticImagePair generate_synthetic_image_pair(
    Eigen::Index n_depth, Eigen::Index n_azimuth, const WarpSpec& warp,
    int dip_events, std::uint64_t seed, double noise_sigma,
    double sample_interval) {
  if (n_depth < 32) throw DataError("synthetic image needs n_depth >= 32");
  if (n_azimuth < 4) throw DataError("synthetic image needs n_azimuth >= 4");
  if (dip_events < 0) throw DataError("dip_events must be >= 0");
  if (!(noise_sigma >= 0.0)) throw DataError("noise_sigma must be >= 0");

  const WarpLayout layout = layout_warp(warp, n_depth);
  GroundTruthWarp truth(layout.shift);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  const Eigen::Index base_rows = n_depth + 2 * layout.pad;

  // Layered background: beds of constant value with a gentle sinusoidal drift.
  Eigen::VectorXd bands = texture_series(Texture::StepTrain, base_rows, rng);
  bands += 0.3 * texture_series(Texture::SinusoidMix, base_rows, rng);
  Eigen::MatrixXd base = bands.replicate(1, n_azimuth);

  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (int k = 0; k < dip_events; ++k) {
    const double center = uniform(0.0, double(base_rows));
    const double amplitude = uniform(3.0, 15.0);
    const double phase = uniform(0.0, two_pi);
    const double contrast = (unit(rng) < 0.5 ? -1.0 : 1.0) * uniform(1.5, 3.0);
    const double width = uniform(1.0, 2.5);
    for (Eigen::Index a = 0; a < n_azimuth; ++a) {
      const double trace =
          center + amplitude * std::sin(two_pi * double(a) / double(n_azimuth) + phase);
      for (Eigen::Index r = 0; r < base_rows; ++r) {
        const double d = (double(r) - trace) / width;
        base(r, a) += contrast * std::exp(-0.5 * d * d);
      }
    }
  }

  Eigen::MatrixXd reference = base.middleRows(layout.pad, n_depth);
  Eigen::MatrixXd target = sample_rows(base, layout.target_positions);
  if (noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (Eigen::Index a = 0; a < n_azimuth; ++a)
      for (Eigen::Index r = 0; r < n_depth; ++r) target(r, a) += noise(rng);
  }
  return {BoreholeImage(std::move(reference), 0.0, sample_interval),
          BoreholeImage(std::move(target), 0.0, sample_interval),
          std::move(truth)};
}

}  // namespace shapedtw
