#include "cli.hpp"

#include <filesystem>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "shapedtw/depth_match.hpp"
#include "shapedtw/io.hpp"
#include "shapedtw/synthetic.hpp"
#include "shapedtw/warp.hpp"

namespace shapedtw::cli {

namespace {

namespace fs = std::filesystem;

// Descriptor flags shared by match, dtw and features; unset flags leave the
// config (file or defaults) untouched.
struct DescriptorFlags {
  std::optional<std::string> descriptor;
  std::optional<int> radius;
  std::optional<int> cell_size;
  std::optional<int> num_bins;
  std::optional<int> block_size;
  std::optional<double> gradient_scale;

  void add_to(CLI::App& app, bool with_name = true) {
    if (with_name)
      app.add_option("--descriptor", descriptor, "hog1d+raw | hog1d | raw | grad")
          ->check(CLI::IsMember({"hog1d+raw", "hog1d", "raw", "grad"}));
    app.add_option("--radius", radius, "subsequence radius (default 2 x cell size)");
    app.add_option("--cell-size", cell_size, "HOG-1D samples per cell (default 60)");
    app.add_option("--num-bins", num_bins, "HOG-1D orientation bins (default 10)");
    app.add_option("--block-size", block_size, "HOG-1D cells per block (default 2)");
    app.add_option("--gradient-scale", gradient_scale, "HOG-1D gradient scale (default 1)");
  }

  void apply(RunConfig& cfg) const {
    if (descriptor) cfg.descriptor = *descriptor;
    if (radius) cfg.radius = *radius;
    if (cell_size) cfg.cell_size = *cell_size;
    if (num_bins) cfg.num_bins = *num_bins;
    if (block_size) cfg.block_size = *block_size;
    if (gradient_scale) cfg.gradient_scale = *gradient_scale;
  }
};

struct MatchFlags {
  std::string ref, target, out;
  std::optional<std::string> config;
  std::optional<double> window_ft, margin_frac, samples_per_ft, band;
  DescriptorFlags descriptor;
};

struct DtwFlags {
  std::string x, y, out = "warp_path.csv";
  std::optional<std::string> shape;
  std::optional<double> band;
  DescriptorFlags descriptor;
};

struct SynthFlags {
  std::string kind = "signal", warp = "constant:0", texture = "sinusoid-mix", out;
  long length = 600;
  long azimuth = 16;
  int dips = 12;
  double noise = 0.0;
  double sample_interval = 0.1;
  std::uint64_t seed = 0;
};

struct FeatureFlags {
  std::string input, out;
  DescriptorFlags descriptor;
};

int run_match(const MatchFlags& f, std::ostream& out, std::ostream& err) {
  RunConfig cfg = f.config ? RunConfig::load(*f.config) : RunConfig{};
  f.descriptor.apply(cfg);
  if (f.window_ft) cfg.window_ft = *f.window_ft;
  if (f.margin_frac) cfg.margin_frac = *f.margin_frac;
  if (f.samples_per_ft) cfg.samples_per_ft = *f.samples_per_ft;
  if (f.band) cfg.band = *f.band;
  const MatchConfig match = cfg.match_config();

  const BoreholeImage reference = read_image(f.ref);
  const BoreholeImage target = read_image(f.target);
  const auto result = match_depth(reference, target, match);
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  const auto files = write_outputs(result, reference, target, f.out);

  const auto& shift = result.curve.shift_samples;
  out << "windows " << result.windows.size() << '\n'
      << "path_length " << result.path.size() << '\n'
      << "shift_samples min " << format_number(shift.minCoeff()) << " max "
      << format_number(shift.maxCoeff()) << " mean " << format_number(shift.mean()) << '\n'
      << "wrote " << files.aligned_image.parent_path().string() << '\n';
  return kSuccess;
}

int run_dtw(const DtwFlags& f, std::ostream& out) {
  const Signal x = read_signal(f.x);
  const Signal y = read_signal(f.y);
  AlignmentResult<double> result;
  if (f.shape) {
    RunConfig cfg;
    f.descriptor.apply(cfg);
    cfg.descriptor = *f.shape;
    result = shape_dtw(x, y, cfg.descriptor_config(), f.band);
  } else {
    result = dtw(x, y, f.band);
  }
  write_path(f.out, result.path.steps(), x.depth_start(), x.sample_interval());
  out << "distance " << format_number(result.distance) << '\n'
      << "path_length " << result.path.size() << '\n'
      << "max_run_length " << max_run_length(result.path) << '\n';
  return kSuccess;
}

int run_synth(const SynthFlags& f, std::ostream& out) {
  const WarpSpec warp = WarpSpec::parse(f.warp);
  const fs::path dir(f.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());

  GroundTruthWarp truth;
  double depth_start = 0.0, interval = f.sample_interval;
  if (f.kind == "signal") {
    const auto pair =
        generate_synthetic_pair(f.length, parse_texture(f.texture), warp, f.noise, f.seed,
                                f.sample_interval);
    write_signal(dir / "reference.csv", pair.reference, "reference");
    write_signal(dir / "target.csv", pair.target, "target");
    truth = pair.truth;
    depth_start = pair.reference.depth_start();
  } else {
    const auto pair = generate_synthetic_image_pair(f.length, f.azimuth, warp, f.dips, f.seed,
                                                    f.noise, f.sample_interval);
    write_image(dir / "reference.csv", pair.reference);
    write_image(dir / "target.csv", pair.target);
    truth = pair.truth;
    depth_start = pair.reference.depth_start();
  }
  ImageFileHeader header;
  header.depth_start = depth_start;
  header.sample_interval = interval;
  header.columns = {"shift_samples"};
  write_table(dir / "truth.csv", header, truth.shift_samples());
  out << "wrote " << dir.string() << '\n';
  return kSuccess;
}

int run_features(const FeatureFlags& f, std::ostream& out) {
  const BoreholeImage input = read_image(f.input);
  const Signal signal = reduce_image(input);
  RunConfig cfg;
  f.descriptor.apply(cfg);
  const auto features = feature_matrix(signal, cfg.descriptor_config());

  ImageFileHeader header;
  header.depth_start = signal.depth_start();
  header.sample_interval = signal.sample_interval();
  header.extra["descriptor"] = cfg.descriptor;
  header.extra["feature_dim"] = std::to_string(features.feature_dim());
  write_table(f.out, header, features.rows());
  out << "rows " << features.size() << " feature_dim " << features.feature_dim() << '\n';
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Depth matching of dual-pad borehole images with shape-descriptor DTW",
               "shapedtw"};
  app.require_subcommand(1);

  MatchFlags match;
  auto* match_cmd = app.add_subcommand("match", "align a target pad image onto a reference");
  match_cmd->add_option("--ref", match.ref, "reference (upper pad) image CSV")->required();
  match_cmd->add_option("--target", match.target, "target (lower pad) image CSV")->required();
  match_cmd->add_option("--out", match.out, "output directory")->required();
  match_cmd->add_option("--config", match.config, "key=value run configuration file");
  match_cmd->add_option("--window-ft", match.window_ft, "window length in ft (default 20)");
  match_cmd->add_option("--margin-frac", match.margin_frac, "target margin per window (default 0.1)");
  match_cmd->add_option("--samples-per-ft", match.samples_per_ft,
                        "sampling density (default: from the image header)");
  match_cmd->add_option("--band", match.band, "band half-width in samples");
  match.descriptor.add_to(*match_cmd);

  DtwFlags dtw_flags;
  auto* dtw_cmd = app.add_subcommand("dtw", "align two 1D signals");
  dtw_cmd->add_option("--x", dtw_flags.x, "first signal CSV")->required();
  dtw_cmd->add_option("--y", dtw_flags.y, "second signal CSV")->required();
  dtw_cmd->add_option("--out", dtw_flags.out, "warp path CSV (default warp_path.csv)");
  dtw_cmd->add_option("--shape", dtw_flags.shape, "use ShapeDTW with this descriptor")
      ->check(CLI::IsMember({"hog1d+raw", "hog1d", "raw", "grad"}));
  dtw_cmd->add_option("--band", dtw_flags.band, "band half-width in samples");
  dtw_flags.descriptor.add_to(*dtw_cmd, false);

  SynthFlags synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic pair with ground truth");
  synth_cmd->add_option("--kind", synth.kind, "image | signal")
      ->check(CLI::IsMember({"image", "signal"}));
  synth_cmd->add_option("--length", synth.length, "samples (depth rows)")->required();
  synth_cmd->add_option("--warp", synth.warp,
                        "constant:K | ramp:A:B | piecewise:F=S,F=S,...");
  synth_cmd->add_option("--noise", synth.noise, "target noise standard deviation");
  synth_cmd->add_option("--seed", synth.seed, "random seed");
  synth_cmd->add_option("--out", synth.out, "output directory")->required();
  synth_cmd->add_option("--texture", synth.texture,
                        "signal texture: sinusoid-mix | step-train | fracture-sinusoid");
  synth_cmd->add_option("--azimuth", synth.azimuth, "image columns (default 16)");
  synth_cmd->add_option("--dips", synth.dips, "dip events in the image (default 12)");
  synth_cmd->add_option("--sample-interval", synth.sample_interval, "ft per sample (default 0.1)");

  FeatureFlags features;
  auto* features_cmd = app.add_subcommand("features", "dump the feature matrix of a signal");
  features_cmd->add_option("--input", features.input, "signal or image CSV")->required();
  features_cmd->add_option("--out", features.out, "feature matrix CSV")->required();
  features.descriptor.add_to(*features_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  try {
    if (match_cmd->parsed()) return run_match(match, out, err);
    if (dtw_cmd->parsed()) return run_dtw(dtw_flags, out);
    if (synth_cmd->parsed()) return run_synth(synth, out);
    if (features_cmd->parsed()) return run_features(features, out);
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kUsageError;
}

}  // namespace shapedtw::cli
