#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "shapedtw/io.hpp"
#include "shapedtw/synthetic.hpp"
#include "temp_dir.hpp"

using namespace shapedtw;

namespace {

ImageFile parse(const std::string& text) {
  std::istringstream in(text);
  return parse_image(in, "mem.csv");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

std::size_t count_data_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line))
    if (!line.empty() && line.front() != '#') ++n;
  return n;
}

}  // namespace

TEST_CASE("image header and rows") {
  const auto f = parse(
      "# depth_start=1000.5\n"
      "# sample_interval=0.1\n"
      "# columns=a,b,c\n"
      "# tool=fmi\n"
      "\n"
      "1,2,3\n"
      " 4 , 5 ,6 \n");
  CHECK(f.header.depth_start == 1000.5);
  CHECK(f.header.sample_interval == 0.1);
  CHECK(f.header.columns == std::vector<std::string>{"a", "b", "c"});
  CHECK(f.header.extra.at("tool") == "fmi");
  CHECK(f.image.depth_count() == 2);
  CHECK(f.image.azimuth_count() == 3);
  CHECK(f.image.pixels()(1, 1) == 5.0);
  CHECK(f.image.depth_at(1) == doctest::Approx(1000.6));
}

TEST_CASE("null pixels are repaired on read") {
  const auto f = parse(
      "# depth_start=0\n# sample_interval=1\n# null_value=-1\n"
      "2,-1,4\n"
      "1,nan,1\n");
  CHECK(f.image.pixels()(0, 1) == 3.0);
  CHECK(f.image.pixels()(1, 1) == 1.0);

  const auto sentinel = parse("# depth_start=0\n# sample_interval=1\n6,-999.25\n");
  CHECK(sentinel.image.pixels()(0, 1) == 6.0);
}

TEST_CASE("malformed files name the source and line") {
  const std::string head = "# depth_start=0\n# sample_interval=1\n";
  CHECK(error_of(head + "1,2\n3\n").rfind("mem.csv:4: ragged row", 0) == 0);
  CHECK(error_of(head + "1,x\n").rfind("mem.csv:3: non-numeric field", 0) == 0);
  CHECK(error_of(head + "1,2\n-999.25,-999.25\n") == "mem.csv:4: row has no valid samples");
  CHECK(error_of("# sample_interval=1\n1\n").find("depth_start") != std::string::npos);
  CHECK(error_of("# depth_start=0\n1\n").find("sample_interval") != std::string::npos);
  CHECK(error_of(head).find("empty image") != std::string::npos);
  CHECK(error_of("# depth_start=0\n# sample_interval=0\n1\n").find("positive") !=
        std::string::npos);
  CHECK_THROWS_AS(read_image("/nonexistent/file.csv"), DataError);
}

TEST_CASE("images round-trip through files at nine significant digits") {
  test::TempDir dir("io-roundtrip");
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int k = 0; k < 10; ++k) {
    Eigen::MatrixXd px(20 + k, 1 + k % 6);
    for (Eigen::Index i = 0; i < px.size(); ++i) px(i) = u(rng);
    const BoreholeImage image(px, 1234.5 + k, 0.1);
    const auto path = dir.path() / ("img" + std::to_string(k) + ".csv");
    write_image(path, image);
    const auto back = read_image(path);
    REQUIRE(back.pixels().rows() == px.rows());
    REQUIRE(back.pixels().cols() == px.cols());
    CHECK(back.depth_start() == 1234.5 + k);
    CHECK(back.sample_interval() == 0.1);
    for (Eigen::Index i = 0; i < px.size(); ++i)
      CHECK(std::abs(back.pixels()(i) - px(i)) <= 1e-8 * std::abs(px(i)));
  }
}

TEST_CASE("signals round-trip and require a single column") {
  test::TempDir dir("io-signal");
  const Signal s(Eigen::Vector3d(1.5, -2.0, 3.25), 10.0, 0.5);
  write_signal(dir.path() / "s.csv", s);
  const auto back = read_signal(dir.path() / "s.csv");
  CHECK(back.values() == s.values());
  CHECK(back.depth_start() == 10.0);
  write_image(dir.path() / "two.csv", BoreholeImage(Eigen::MatrixXd::Ones(3, 2)));
  CHECK_THROWS_AS(read_signal(dir.path() / "two.csv"), DataError);
}

TEST_CASE("every emitted output re-ingests") {
  test::TempDir dir("io-outputs");
  const auto p = generate_synthetic_image_pair(200, 8, WarpSpec::constant_shift(3), 6, 2);
  MatchConfig cfg;
  cfg.samples_per_ft = 10.0;
  cfg.window_ft = 10.0;
  cfg.descriptor = DescriptorConfig::compound(
      {{DescriptorConfig::hog1d(20, 10, 2), 1.0}, {DescriptorConfig::raw(), 1.0}});
  const auto result = match_depth(p.reference, p.target, cfg);
  const auto files = write_outputs(result, p.reference, p.target, dir.path());

  const auto aligned = read_image(files.aligned_image);
  CHECK(aligned.depth_count() == 200);
  CHECK(aligned.azimuth_count() == 8);

  const auto curve = read_image_file(files.shift_curve);
  CHECK(curve.header.columns == std::vector<std::string>{"depth", "shift_samples", "shift_ft"});
  CHECK(curve.image.depth_count() == 200);

  const auto path = read_image_file(files.warp_path);
  CHECK(path.header.columns == std::vector<std::string>{"i", "j"});
  CHECK(std::size_t(path.image.depth_count()) == result.path.size());
  CHECK(count_data_rows(files.warp_path) == result.path.size());

  CHECK(read_signal(files.reduced_ref).size() == 200);
  CHECK(read_signal(files.reduced_target).size() == 200);

  for (const auto& pgm : {files.reference_pgm, files.target_pgm, files.aligned_pgm}) {
    std::ifstream in(pgm, std::ios::binary);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    in.get();
    CHECK(magic == "P5");
    CHECK(w == 8);
    CHECK(h == 200);
    CHECK(maxval == 255);
    const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(body.size() == 8u * 200u);
  }
}

TEST_CASE("run configuration") {
  std::istringstream good(
      "# comment\n"
      "window_ft = 15\n"
      "margin_frac=0.2\n"
      "descriptor=hog1d\n"
      "cell_size=20\n"
      "samples_per_ft=10\n");
  const auto cfg = RunConfig::parse(good, "run.cfg");
  const auto mc = cfg.match_config();
  CHECK(mc.window_ft == 15.0);
  CHECK(mc.margin_frac == 0.2);
  CHECK(mc.descriptor.kind == DescriptorKind::Hog1d);
  CHECK(mc.descriptor.cell_size == 20);
  CHECK(*mc.samples_per_ft == 10.0);

  std::istringstream unknown("window_ft=15\nwidow=3\n");
  CHECK_THROWS_WITH_AS(RunConfig::parse(unknown, "run.cfg"),
                       "run.cfg:2: unknown config key 'widow'", DataError);
  std::istringstream bad("cell_size=2.5\n");
  CHECK_THROWS_AS(RunConfig::parse(bad, "run.cfg"), DataError);
  CHECK_THROWS_AS(make_descriptor("sift", std::nullopt, 60, 10, 2), DataError);
}

TEST_CASE("format_number keeps nine significant digits") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.333333333");
  CHECK(format_number(-1234567891.0) == "-1.23456789e+09");
}
