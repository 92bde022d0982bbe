#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shapedtw/depth_match.hpp"
#include "shapedtw/signal.hpp"

namespace shapedtw {

/// Comment-line header of the CSV image format:
///
///   # depth_start=1000.0
///   # sample_interval=0.1
///   # null_value=-999.25      (optional)
///   # columns=a,b,c           (optional)
///   1.0,2.0,3.0
///
/// Other `key=value` comment lines are kept in `extra`.
struct ImageFileHeader {
  double depth_start = 0.0;
  double sample_interval = 1.0;
  double null_value = kDefaultNullValue;
  std::vector<std::string> columns;
  std::map<std::string, std::string> extra;
};

struct ImageFile {
  ImageFileHeader header;
  BoreholeImage image;
};

/// Parses the CSV image format; null pixels are repaired with their row
/// mean. Errors name `source` and the offending line.
ImageFile parse_image(std::istream& in, const std::string& source);

ImageFile read_image_file(const std::filesystem::path& path);
BoreholeImage read_image(const std::filesystem::path& path);
/// Single-column image file.
Signal read_signal(const std::filesystem::path& path);

/// Writes values with 9 significant digits.
void write_table(const std::filesystem::path& path, const ImageFileHeader& header,
                 const Eigen::MatrixXd& values);
void write_image(const std::filesystem::path& path, const BoreholeImage& image);
void write_signal(const std::filesystem::path& path, const Signal& signal,
                  const std::string& column = "value");
void write_path(const std::filesystem::path& path, const std::vector<PathStep>& steps,
                double depth_start = 0.0, double sample_interval = 1.0);

/// 8-bit binary PGM, min-max scaled; width is the column count.
void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& pixels);

/// Files written for one depth-matching run.
struct OutputFiles {
  std::filesystem::path aligned_image;
  std::filesystem::path shift_curve;
  std::filesystem::path warp_path;
  std::filesystem::path reduced_ref;
  std::filesystem::path reduced_target;
  std::filesystem::path reference_pgm;
  std::filesystem::path target_pgm;
  std::filesystem::path aligned_pgm;
};

OutputFiles write_outputs(const DepthMatchResult<double>& result,
                          const BoreholeImage& reference, const BoreholeImage& target,
                          const std::filesystem::path& out_dir);

/// Matching and descriptor parameters as `key=value` lines. Unknown keys are
/// rejected.
struct RunConfig {
  double window_ft = 20.0;
  double margin_frac = 0.1;
  std::string descriptor = "hog1d+raw";
  std::optional<int> radius;
  int cell_size = 60;
  int num_bins = 10;
  int block_size = 2;
  double gradient_scale = 1.0;
  std::optional<double> samples_per_ft;
  std::optional<double> band;

  static RunConfig load(const std::filesystem::path& path);
  static RunConfig parse(std::istream& in, const std::string& source);
  void set(const std::string& key, const std::string& value);

  DescriptorConfig descriptor_config() const;
  MatchConfig match_config() const;
};

/// hog1d+raw | hog1d | raw | grad
DescriptorConfig make_descriptor(const std::string& name, std::optional<int> radius,
                                 int cell_size, int num_bins, int block_size,
                                 double gradient_scale = 1.0);

std::string format_number(double v);

}  // namespace shapedtw
