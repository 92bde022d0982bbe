// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "shapedtw/depth_match.hpp"
#include "shapedtw/io.hpp"
#include "shapedtw/synthetic.hpp"
#include "temp_dir.hpp"

using namespace shapedtw;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

Signal random_signal(std::mt19937_64& rng, Eigen::Index n, int lo, int hi) {
  std::uniform_int_distribution<int> u(lo, hi);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = double(u(rng));
  return Signal(v);
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

// Cell size scaled to 10 samples/ft data; radius is 2 x cell.
DescriptorConfig scaled_hog_raw() {
  return DescriptorConfig::compound(
      {{DescriptorConfig::hog1d(20, 10, 2), 1.0}, {DescriptorConfig::raw(), 1.0}});
}

MatchConfig config_with(DescriptorConfig d) {
  MatchConfig cfg;
  cfg.samples_per_ft = 10.0;
  cfg.descriptor = std::move(d);
  return cfg;
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> len(2, 8);
  int mismatches = 0;
  for (int k = 0; k < 200; ++k) {
    const auto x = random_signal(rng, len(rng), 0, 4);
    const auto y = random_signal(rng, len(rng), 0, 4);
    const auto d = pointwise_distance_matrix(x, y);
    if (dtw(x, y).distance != oracle::brute_force_dtw(d.entries)) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + "/200 mismatches"};
}

Outcome degeneracy() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> len(1, 64);
  int mismatches = 0;
  for (int k = 0; k < 50; ++k) {
    const auto x = random_signal(rng, len(rng), -20, 20);
    const auto y = random_signal(rng, len(rng), -20, 20);
    const auto plain = dtw(x, y);
    const auto shaped = shape_dtw(x, y, DescriptorConfig::raw(0));
    if (plain.distance != shaped.distance || plain.path.steps() != shaped.path.steps())
      ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + "/50 mismatches"};
}

Outcome spot_check() {
  const Signal x(Eigen::Vector3d(0, 1, 0));
  Eigen::VectorXd yv(5);
  yv << 0, 0, 1, 1, 0;
  const Signal y(yv);
  const auto d = pointwise_distance_matrix(x, y);
  const auto c = accumulate(d);
  const auto path = traceback(c);
  const double corner = c(2, 4);
  const double cost = path_cost(d, path);
  const double brute = oracle::brute_force_dtw(d.entries);
  return {corner == 0.0 && cost == 0.0 && brute == 0.0,
          fmt("C(m,n)=%g path cost=%g", corner, cost)};
}

Outcome hog_structure() {
  Outcome o;
  const auto cfg = DescriptorConfig::hog1d(60, 10, 2);
  const Eigen::Index dim = hog1d_feature_dim(241, 60, 10, 2);
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> grid(-8192, 8192), offset(-1000, 1000);
  double worst_norm = 0.0;
  int variant = 0;
  for (int k = 0; k < 20; ++k) {
    Subsequence<double> sub;
    sub.values.resize(241);
    // Samples on a 1/1024 grid keep offset sums exact.
    for (auto& v : sub.values) v = double(grid(rng)) / 1024.0;
    const auto h = hog1d_descriptor(sub, cfg);
    if (h.size() != dim) o.pass = false;
    for (Eigen::Index b = 0; b < h.size() / 20; ++b)
      worst_norm = std::max(worst_norm, std::abs(h.segment(b * 20, 20).norm() - 1.0));
    auto shifted = sub;
    shifted.values.array() += double(offset(rng));
    if (hog1d_descriptor(shifted, cfg) != h) ++variant;
  }
  o.pass = o.pass && dim == 60 && worst_norm <= 1e-9 && variant == 0;
  o.detail = "dim " + std::to_string(dim) + fmt(", worst |norm-1| %.2e", worst_norm) +
             ", offset-variant " + std::to_string(variant) + "/20";
  return o;
}

Outcome constant_shift() {
  const auto warp = WarpSpec::constant_shift(5);
  const auto clean = generate_synthetic_image_pair(600, 16, warp, 12, 5);
  const double sigma = 0.05 * oracle::population_std(reduce_image(clean.reference).values());
  const auto p = generate_synthetic_image_pair(600, 16, warp, 12, 5, sigma);
  const auto r = match_depth(p.reference, p.target, config_with(DescriptorConfig::hog1d_plus_raw()));
  const double med = oracle::median(r.curve.shift_samples);
  const double mae = oracle::interior_mae(r.curve.shift_samples, p.truth.shift_samples());
  return {std::abs(med - 5.0) <= 1.0 && mae <= 1.5, fmt("median %.3g, interior MAE %.3g", med, mae)};
}

Outcome local_scaling() {
  const auto warp = WarpSpec::parse("piecewise:0=0,0.25=15,0.5=0,0.75=-15,1=0");
  const auto p = generate_synthetic_image_pair(600, 16, warp, 12, 6, 0.02);
  const auto cfg = config_with(scaled_hog_raw());
  const double margin = double(cfg.margin_samples(cfg.window_samples(10.0)));
  const double max_shift = p.truth.shift_samples().cwiseAbs().maxCoeff();
  const auto r = match_depth(p.reference, p.target, cfg);
  const double mae = oracle::interior_mae(r.curve.shift_samples, p.truth.shift_samples());
  return {max_shift <= margin && mae <= 2.0,
          fmt("interior MAE %.3g (max |shift| %g)", mae, max_shift)};
}

Outcome overfitting_contrast() {
  const auto p = generate_synthetic_pair(300, Texture::StepTrain, WarpSpec::linear_ramp(0, 8),
                                         0.2, 1);
  const auto plain = max_run_length(dtw(p.reference, p.target).path);
  const auto shaped =
      max_run_length(shape_dtw(p.reference, p.target, DescriptorConfig::hog1d_plus_raw()).path);

  // Informational: how often the contrast holds across seeds.
  int held = 0;
  for (int seed = 0; seed < 30; ++seed) {
    const auto q = generate_synthetic_pair(300, Texture::StepTrain, WarpSpec::linear_ramp(0, 8),
                                           0.2, std::uint64_t(seed));
    held += max_run_length(shape_dtw(q.reference, q.target, DescriptorConfig::hog1d_plus_raw())
                               .path) < max_run_length(dtw(q.reference, q.target).path);
  }
  return {shaped < plain, "run length shapedtw " + std::to_string(shaped) + " vs dtw " +
                              std::to_string(plain) + "; holds for " + std::to_string(held) +
                              "/30 seeds"};
}

Outcome descriptor_ranking() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> knot(-15.0, 15.0);
  const auto hog_cfg = config_with(scaled_hog_raw());
  // Same subsequence length as the compound above.
  const auto grad_cfg = config_with(DescriptorConfig::gradient(40));
  double hog_sum = 0.0, grad_sum = 0.0;
  for (int k = 0; k < 20; ++k) {
    std::vector<std::pair<double, double>> knots{{0.0, 0.0}};
    for (double f : {0.25, 0.5, 0.75}) knots.push_back({f, std::clamp(knot(rng), -15.0, 15.0)});
    knots.push_back({1.0, 0.0});
    const auto p = generate_synthetic_image_pair(600, 16, WarpSpec::piecewise(knots), 12,
                                                 std::uint64_t(100 + k), 0.02);
    const auto& truth = p.truth.shift_samples();
    hog_sum += oracle::interior_mae(match_depth(p.reference, p.target, hog_cfg).curve.shift_samples, truth);
    grad_sum += oracle::interior_mae(match_depth(p.reference, p.target, grad_cfg).curve.shift_samples, truth);
  }
  const double hog = hog_sum / 20.0, grad = grad_sum / 20.0;
  return {hog <= grad, fmt("mean MAE hog1d+raw %.3g vs gradient %.3g", hog, grad)};
}

Outcome invariant_suite() {
  Outcome o;
  int failures = 0;
  std::mt19937_64 rng(9);
  // WarpPath validates on construction, so any invalid path throws here.
  try {
    std::uniform_int_distribution<int> len(1, 40);
    for (int k = 0; k < 100; ++k) {
      const auto x = random_signal(rng, len(rng), -5, 5);
      const auto y = random_signal(rng, len(rng), -5, 5);
      (void)dtw(x, y);
      (void)shape_dtw(x, y, DescriptorConfig::hog1d(3, 4, 2));
      (void)open_end_dtw(pointwise_distance_matrix(x, y));
    }
    const std::vector<WarpSpec> warps{WarpSpec::constant_shift(0), WarpSpec::constant_shift(-7),
                                      WarpSpec::linear_ramp(-6, 9),
                                      WarpSpec::parse("piecewise:0=0,0.4=12,1=-4")};
    int seed = 0;
    for (const auto& warp : warps) {
      const auto p = generate_synthetic_image_pair(450, 8, warp, 8, std::uint64_t(seed++), 0.03);
      const auto cfg = config_with(scaled_hog_raw());
      const auto a = match_depth(p.reference, p.target, cfg);
      const auto b = match_depth(p.reference, p.target, cfg);
      std::vector<bool> covered(450, false);
      for (const auto& s : a.path.steps()) covered[std::size_t(s.i)] = true;
      if (std::find(covered.begin(), covered.end(), false) != covered.end()) ++failures;
      if (a.path.steps() != b.path.steps() || a.aligned.pixels() != b.aligned.pixels() ||
          a.curve.shift_samples != b.curve.shift_samples)
        ++failures;

      const auto same = match_depth(p.reference, p.reference, cfg);
      if (!(same.curve.shift_samples.array() == 0.0).all()) ++failures;
      if (same.aligned.pixels() != p.reference.pixels()) ++failures;
    }
  } catch (const InvariantError& e) {
    ++failures;
    o.detail = std::string("invariant violated: ") + e.what() + "; ";
  }
  o.pass = failures == 0;
  o.detail += std::to_string(failures) + " failures";
  return o;
}

Outcome io_round_trip() {
  test::TempDir dir("acceptance-io");
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-1e4, 1e4);
  int bad = 0;
  for (int k = 0; k < 10; ++k) {
    Eigen::MatrixXd px(50 + 7 * k, 4 + k);
    for (auto i = 0; i < px.size(); ++i) px(i) = u(rng);
    const auto path = dir.path() / ("image" + std::to_string(k) + ".csv");
    write_image(path, BoreholeImage(px, 2000.0 + k, 0.1));
    const auto back = read_image(path).pixels();
    if (back.rows() != px.rows() || back.cols() != px.cols()) {
      ++bad;
      continue;
    }
    // Nine significant digits: relative error within half a unit in the ninth.
    for (auto i = 0; i < px.size(); ++i)
      if (std::abs(back(i) - px(i)) > 5e-9 * std::abs(px(i))) ++bad;
  }

  const auto p = generate_synthetic_image_pair(300, 8, WarpSpec::constant_shift(4), 6, 11);
  const auto r = match_depth(p.reference, p.target, config_with(scaled_hog_raw()));
  const auto files = write_outputs(r, p.reference, p.target, dir.path() / "run");
  int csvs = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir.path() / "run")) {
    if (entry.path().extension() != ".csv") continue;
    (void)read_image_file(entry.path());
    ++csvs;
  }
  return {bad == 0 && csvs == 5,
          std::to_string(bad) + " value mismatches; " + std::to_string(csvs) + " CSVs re-ingested"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 oracle equivalence", oracle_equivalence},
      {"2 raw r=0 degeneracy", degeneracy},
      {"3 accumulated cost spot check", spot_check},
      {"4 HOG-1D structure", hog_structure},
      {"5 constant-shift recovery", constant_shift},
      {"6 local-scaling recovery", local_scaling},
      {"7 overfitting contrast", overfitting_contrast},
      {"8 descriptor ranking", descriptor_ranking},
      {"9 path invariants and determinism", invariant_suite},
      {"10 IO round-trip", io_round_trip},
  };
  const std::vector<double> limits{10.0, 0, 0, 0, 60.0, 0, 0, 0, 0, 0};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limits[k] > 0.0 && seconds >= limits[k]) {
      o.pass = false;
      o.detail += fmt("; exceeded %g s limit", limits[k]);
    }
    std::printf("%s %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", criteria[k].first.c_str(),
                o.detail.c_str(), seconds);
    failed += !o.pass;
  }
  std::fflush(stdout);
  return failed ? 1 : 0;
}
