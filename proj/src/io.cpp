#include "shapedtw/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "shapedtw/errors.hpp"

namespace shapedtw {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(s);
  while (std::getline(in, field, sep)) out.push_back(trim(field));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::optional<double> to_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& msg) {
  throw DataError(source + ":" + std::to_string(line) + ": " + msg);
}

std::ofstream open_for_write(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

ImageFile parse_image(std::istream& in, const std::string& source) {
  ImageFile file;
  std::optional<double> depth_start, sample_interval;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> row_lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      const std::string body = trim(text.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(body.substr(0, eq));
      const std::string value = trim(body.substr(eq + 1));
      if (key == "depth_start" || key == "sample_interval" || key == "null_value") {
        const auto v = to_double(value);
        if (!v || !std::isfinite(*v)) fail(source, line_no, "bad value for " + key);
        if (key == "depth_start") depth_start = *v;
        else if (key == "sample_interval") sample_interval = *v;
        else file.header.null_value = *v;
      } else if (key == "columns") {
        file.header.columns = split(value, ',');
      } else {
        file.header.extra[key] = value;
      }
      continue;
    }
    std::vector<double> row;
    for (const auto& field : split(text, ',')) {
      const auto v = to_double(field);
      if (!v) fail(source, line_no, "non-numeric field '" + field + "'");
      row.push_back(*v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      fail(source, line_no,
           "ragged row: " + std::to_string(row.size()) + " fields, expected " +
               std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
    row_lines.push_back(line_no);
  }
  if (!depth_start) throw DataError(source + ": missing header key depth_start");
  if (!sample_interval) throw DataError(source + ": missing header key sample_interval");
  if (!(*sample_interval > 0.0)) throw DataError(source + ": sample_interval must be positive");
  if (rows.empty()) throw DataError(source + ": empty image");

  Eigen::MatrixXd pixels(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) pixels(r, c) = rows[r][c];
  const Eigen::Index bad = repair_null_pixels(pixels, file.header.null_value);
  if (bad >= 0) fail(source, row_lines[bad], "row has no valid samples");

  file.header.depth_start = *depth_start;
  file.header.sample_interval = *sample_interval;
  file.image = BoreholeImage(std::move(pixels), *depth_start, *sample_interval);
  return file;
}

ImageFile read_image_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_image(in, path.string());
}

BoreholeImage read_image(const std::filesystem::path& path) {
  return read_image_file(path).image;
}

Signal read_signal(const std::filesystem::path& path) {
  const auto file = read_image_file(path);
  if (file.image.azimuth_count() != 1)
    throw DataError(path.string() + ": signal files have exactly one column");
  return Signal(file.image.pixels().col(0), file.image.depth_start(),
                file.image.sample_interval());
}

void write_table(const std::filesystem::path& path, const ImageFileHeader& header,
                 const Eigen::MatrixXd& values) {
  auto out = open_for_write(path);
  out << "# depth_start=" << format_number(header.depth_start) << '\n'
      << "# sample_interval=" << format_number(header.sample_interval) << '\n';
  if (header.null_value != kDefaultNullValue)
    out << "# null_value=" << format_number(header.null_value) << '\n';
  if (!header.columns.empty()) {
    out << "# columns=";
    for (std::size_t c = 0; c < header.columns.size(); ++c)
      out << (c ? "," : "") << header.columns[c];
    out << '\n';
  }
  for (const auto& [key, value] : header.extra) out << "# " << key << '=' << value << '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c)
      out << (c ? "," : "") << format_number(values(r, c));
    out << '\n';
  }
  finish(out, path);
}

void write_image(const std::filesystem::path& path, const BoreholeImage& image) {
  ImageFileHeader header;
  header.depth_start = image.depth_start();
  header.sample_interval = image.sample_interval();
  write_table(path, header, image.pixels());
}

void write_signal(const std::filesystem::path& path, const Signal& signal,
                  const std::string& column) {
  ImageFileHeader header;
  header.depth_start = signal.depth_start();
  header.sample_interval = signal.sample_interval();
  header.columns = {column};
  write_table(path, header, signal.values());
}

void write_path(const std::filesystem::path& path, const std::vector<PathStep>& steps,
                double depth_start, double sample_interval) {
  ImageFileHeader header;
  header.depth_start = depth_start;
  header.sample_interval = sample_interval;
  header.columns = {"i", "j"};
  Eigen::MatrixXd values(steps.size(), 2);
  for (std::size_t k = 0; k < steps.size(); ++k) {
    values(k, 0) = double(steps[k].i);
    values(k, 1) = double(steps[k].j);
  }
  write_table(path, header, values);
}

void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& pixels) {
  auto out = open_for_write(path, true);
  out << "P5\n" << pixels.cols() << ' ' << pixels.rows() << "\n255\n";
  const double lo = pixels.size() ? pixels.minCoeff() : 0.0;
  const double hi = pixels.size() ? pixels.maxCoeff() : 0.0;
  const double range = hi - lo;
  for (Eigen::Index r = 0; r < pixels.rows(); ++r) {
    for (Eigen::Index c = 0; c < pixels.cols(); ++c) {
      const double t = range > 0.0 ? (pixels(r, c) - lo) / range : 0.0;
      out.put(char(static_cast<unsigned char>(std::lround(255.0 * t))));
    }
  }
  finish(out, path);
}

OutputFiles write_outputs(const DepthMatchResult<double>& result,
                          const BoreholeImage& reference, const BoreholeImage& target,
                          const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create " + out_dir.string() + ": " + ec.message());

  OutputFiles files{out_dir / "aligned_image.csv", out_dir / "shift_curve.csv",
                    out_dir / "warp_path.csv",     out_dir / "reduced_ref.csv",
                    out_dir / "reduced_target.csv", out_dir / "reference.pgm",
                    out_dir / "target.pgm",        out_dir / "aligned.pgm"};

  write_image(files.aligned_image, result.aligned);

  ImageFileHeader curve_header;
  curve_header.depth_start = result.reduced_ref.depth_start();
  curve_header.sample_interval = result.reduced_ref.sample_interval();
  curve_header.columns = {"depth", "shift_samples", "shift_ft"};
  Eigen::MatrixXd curve(result.curve.depths.size(), 3);
  curve << result.curve.depths, result.curve.shift_samples, result.curve.shift_ft;
  write_table(files.shift_curve, curve_header, curve);

  write_path(files.warp_path, result.path.steps(), result.reduced_ref.depth_start(),
             result.reduced_ref.sample_interval());
  write_signal(files.reduced_ref, result.reduced_ref, "reference");
  write_signal(files.reduced_target, result.reduced_target, "target");
  write_pgm(files.reference_pgm, reference.pixels());
  write_pgm(files.target_pgm, target.pixels());
  write_pgm(files.aligned_pgm, result.aligned.pixels());
  return files;
}

DescriptorConfig make_descriptor(const std::string& name, std::optional<int> radius,
                                 int cell_size, int num_bins, int block_size,
                                 double gradient_scale) {
  DescriptorConfig cfg;
  if (name == "hog1d+raw") {
    auto hog = DescriptorConfig::hog1d(cell_size, num_bins, block_size);
    hog.gradient_scale = gradient_scale;
    cfg = DescriptorConfig::compound({{hog, 1.0}, {DescriptorConfig::raw(), 1.0}}, radius);
  } else if (name == "hog1d") {
    cfg = DescriptorConfig::hog1d(cell_size, num_bins, block_size, radius);
    cfg.gradient_scale = gradient_scale;
  } else if (name == "raw") {
    cfg = DescriptorConfig::raw(radius);
    cfg.cell_size = cell_size;
  } else if (name == "grad") {
    cfg = DescriptorConfig::gradient(radius);
    cfg.cell_size = cell_size;
  } else {
    throw DataError("unknown descriptor '" + name + "' (expected hog1d+raw, hog1d, raw, grad)");
  }
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse(in, path.string());
}

RunConfig RunConfig::parse(std::istream& in, const std::string& source) {
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) fail(source, line_no, "expected key=value");
    try {
      cfg.set(trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
    } catch (const DataError& e) {
      fail(source, line_no, e.what());
    }
  }
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto number = [&]() {
    const auto v = to_double(value);
    if (!v || !std::isfinite(*v)) throw DataError("bad value for " + key + ": '" + value + "'");
    return *v;
  };
  auto integer = [&]() {
    const double v = number();
    if (v != std::floor(v)) throw DataError(key + " must be an integer");
    return int(v);
  };
  if (key == "window_ft") window_ft = number();
  else if (key == "margin_frac") margin_frac = number();
  else if (key == "descriptor") descriptor = value;
  else if (key == "radius") radius = integer();
  else if (key == "cell_size") cell_size = integer();
  else if (key == "num_bins") num_bins = integer();
  else if (key == "block_size") block_size = integer();
  else if (key == "gradient_scale") gradient_scale = number();
  else if (key == "samples_per_ft") samples_per_ft = number();
  else if (key == "band") band = number();
  else throw DataError("unknown config key '" + key + "'");
}

DescriptorConfig RunConfig::descriptor_config() const {
  return make_descriptor(descriptor, radius, cell_size, num_bins, block_size, gradient_scale);
}

MatchConfig RunConfig::match_config() const {
  MatchConfig cfg;
  cfg.window_ft = window_ft;
  cfg.margin_frac = margin_frac;
  cfg.descriptor = descriptor_config();
  cfg.samples_per_ft = samples_per_ft;
  cfg.band_halfwidth = band;
  cfg.validate();
  return cfg;
}

}  // namespace shapedtw
