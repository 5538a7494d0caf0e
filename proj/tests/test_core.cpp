#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"

#include "diverlink/core.hpp"
#include "diverlink/errors.hpp"
#include "diverlink/image_io.hpp"
#include "oracles.hpp"

using namespace diverlink;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const char* name) {
  const fs::path p = fs::temp_directory_path() / ("diverlink_test_" + std::string(name));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("grid geometry on the default 320x240 frame") {
  const GridConfig g(320, 240);
  CHECK(g.cols() == 10);
  CHECK(g.rows() == 8);
  CHECK(g.count() == 80);
  CHECK(g.window_rect(0) == Rect{0, 0, 30, 30});
  CHECK(g.window_rect(11) == Rect{30, 30, 30, 30});
  CHECK(g.window_center(79).x == doctest::Approx(285.0));
  CHECK(g.window_center(79).y == doctest::Approx(225.0));
  // Right margin (300..319) maps to the last column.
  CHECK(g.window_at(310.0, 5.0) == 9);
  CHECK(g.window_at(-4.0, 500.0) == 70);
  CHECK(g.grid_distance(0, 11) == 1);
  CHECK(g.grid_distance(0, 79) == 9);
  CHECK_THROWS_AS((void)g.window_rect(80), ArgumentError);
  CHECK_THROWS_AS((void)g.window_rect(-1), ArgumentError);
  CHECK_THROWS_AS(GridConfig(20, 20, 30, 30), ConfigError);
  CHECK_THROWS_AS(GridConfig(320, 240, 0, 30), ConfigError);
}

TEST_CASE("gaussian kernel is normalized with radius ceil(3 sigma)") {
  for (double s : {0.5, 1.0, 1.7, 2.0}) {
    const auto k = gaussian_kernel(s);
    CHECK(k.size() == static_cast<std::size_t>(2 * std::ceil(3 * s) + 1));
    double sum = 0.0;
    for (double v : k) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(k.front() == doctest::Approx(k.back()));
  }
  CHECK(gaussian_kernel(0.0) == std::vector<double>{1.0});
}

TEST_CASE("separable blur equals brute-force 2-D Gaussian convolution") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  for (auto [w, h, s] : {std::tuple{17, 11, 1.0}, {9, 23, 1.5}, {5, 5, 2.0}, {40, 3, 0.7}}) {
    std::vector<double> img(static_cast<std::size_t>(w) * h);
    for (auto& v : img) v = u(rng);
    const auto fast = gaussian_blur(img, w, h, s);
    const auto slow = oracle::blur2d(img, w, h, s);
    for (std::size_t i = 0; i < img.size(); ++i) CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-10));
  }
}

TEST_CASE("blur preserves a constant image and the mean is a window mean") {
  Frame f = Frame::gray(60, 60, 77);
  for (double v : blurred_plane(f, 1.0)) CHECK(v == doctest::Approx(77.0));
  const GridConfig g(60, 60);
  CHECK(window_intensity(f, g, 3) == doctest::Approx(77.0));

  std::mt19937_64 rng(3);
  for (auto& p : f.pixels) p = static_cast<std::uint8_t>(rng() % 256);
  const auto plane = blurred_plane(f, 1.0);
  const auto all = window_intensities(f, g, 1.0);
  REQUIRE(all.size() == 4);
  for (int i = 0; i < 4; ++i) {
    const Rect r = g.window_rect(i);
    double sum = 0.0;
    for (int y = r.y; y < r.y + r.h; ++y)
      for (int x = r.x; x < r.x + r.w; ++x) sum += plane[static_cast<std::size_t>(y) * 60 + x];
    CHECK(all[i] == doctest::Approx(sum / 900.0).epsilon(1e-12));
    CHECK(window_intensity(f, g, i) == doctest::Approx(all[i]).epsilon(1e-12));
  }
}

TEST_CASE("window intensity rejects RGB and mismatched frames") {
  const GridConfig g(60, 60);
  CHECK_THROWS_AS((void)window_intensity(Frame::rgb(60, 60), g, 0), FrameFormatError);
  CHECK_THROWS_AS((void)window_intensities(Frame::gray(90, 60), g), ArgumentError);
}

TEST_CASE("luminance uses rounded Rec.601 weights") {
  Frame f = Frame::rgb(3, 1);
  f.at(0, 0, 0) = 255;                      // red
  f.at(1, 0, 1) = 255;                      // green
  f.at(2, 0, 0) = f.at(2, 0, 1) = f.at(2, 0, 2) = 200;  // gray
  const Frame y = luminance(f);
  CHECK(y.channels == 1);
  CHECK(y.at(0, 0) == 76);   // 76.245
  CHECK(y.at(1, 0) == 150);  // 149.685
  CHECK(y.at(2, 0) == 200);
  const Frame g = Frame::gray(2, 2, 9);
  CHECK(luminance(g).pixels == g.pixels);
}

TEST_CASE("frame validation") {
  Frame f = Frame::gray(4, 4);
  CHECK_NOTHROW(f.validate());
  f.pixels.pop_back();
  CHECK_THROWS_AS(f.validate(), ArgumentError);
  CHECK_THROWS_AS(Frame::gray(0, 3), ArgumentError);
}

TEST_CASE("config validation names the broken parameter") {
  MdpmConfig c;
  CHECK_NOTHROW(c.validate(80));
  CHECK(c.effective_stride() == 15);
  auto bad = [](auto mutate) {
    MdpmConfig m;
    mutate(m);
    return m;
  };
  CHECK_THROWS_AS(bad([](MdpmConfig& m) { m.slide = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](MdpmConfig& m) { m.pool = 81; }).validate(80), ConfigError);
  CHECK_THROWS_AS(bad([](MdpmConfig& m) { m.epsilon = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](MdpmConfig& m) { m.range = {200, 100}; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](MdpmConfig& m) { m.stride = 16; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](MdpmConfig& m) { m.band = {2.8, 3.2}; }).validate(), ConfigError);
  CHECK_THROWS_WITH_AS(bad([](MdpmConfig& m) { m.epsilon = 0.7; }).validate(), doctest::Contains("epsilon"), ConfigError);
}

TEST_CASE("bounding box clamping") {
  const BoundingBox b{5.0, 5.0, 20.0, 10.0, 1.0};
  const BoundingBox c = b.clamped(100, 100);
  CHECK(c.w == doctest::Approx(15.0));
  CHECK(c.cx == doctest::Approx(7.5));
  CHECK(c.h == doctest::Approx(10.0));
}

TEST_CASE("PNM round trip for gray and RGB frames") {
  const fs::path dir = scratch_dir("pnm");
  Frame g = Frame::gray(7, 5);
  Frame c = Frame::rgb(4, 3);
  for (std::size_t i = 0; i < g.pixels.size(); ++i) g.pixels[i] = static_cast<std::uint8_t>(i * 7);
  for (std::size_t i = 0; i < c.pixels.size(); ++i) c.pixels[i] = static_cast<std::uint8_t>(255 - i);
  write_pnm(g, dir / "g.pgm");
  write_pnm(c, dir / "c.ppm");
  CHECK(read_pnm(dir / "g.pgm").pixels == g.pixels);
  const Frame rc = read_pnm(dir / "c.ppm");
  CHECK(rc.channels == 3);
  CHECK(rc.pixels == c.pixels);

  std::ofstream(dir / "comment.pgm", std::ios::binary) << "P5\n# made by hand\n2 1\n255\n" << '\x05' << '\x06';
  const Frame cm = read_pnm(dir / "comment.pgm");
  CHECK(cm.width == 2);
  CHECK(cm.pixels == std::vector<std::uint8_t>{5, 6});
}

TEST_CASE("corrupt or missing frame files raise IoError naming the file") {
  const fs::path dir = scratch_dir("corrupt");
  std::ofstream(dir / "bad.pgm", std::ios::binary) << "P5\n4 4\n255\n" << "xy";
  CHECK_THROWS_WITH_AS(read_pnm(dir / "bad.pgm"), doctest::Contains("bad.pgm"), IoError);
  std::ofstream(dir / "text.pgm") << "P2\n1 1\n255\n0\n";
  CHECK_THROWS_AS(read_pnm(dir / "text.pgm"), IoError);
  CHECK_THROWS_WITH_AS(read_pnm(dir / "absent.pgm"), doctest::Contains("absent.pgm"), IoError);
}

TEST_CASE("sequence directory with manifest") {
  const fs::path dir = scratch_dir("seq");
  FrameSequence frames;
  for (int i = 0; i < 3; ++i) frames.push_back(Frame::gray(6, 4, static_cast<std::uint8_t>(10 * i)));
  save_sequence(dir, frames, 10.0);
  CHECK(fs::exists(dir / "frame_000002.pgm"));
  const auto m = read_manifest(dir);
  CHECK(m.frame_count == 3);
  CHECK(m.width == 6);
  CHECK(m.channels == 1);
  const auto back = load_sequence(dir);
  REQUIRE(back.size() == 3);
  CHECK(back[2].index == 2);
  CHECK(back[2].timestamp_s == doctest::Approx(0.2));
  CHECK(back[1].pixels == frames[1].pixels);
  CHECK(frame_filename(12, 3) == fs::path("frame_000012.ppm"));
  fs::remove(dir / "frame_000001.pgm");
  CHECK_THROWS_WITH_AS(load_sequence(dir), doctest::Contains("frame_000001.pgm"), IoError);
  CHECK_THROWS_AS(read_manifest(dir / "nowhere"), IoError);
}
