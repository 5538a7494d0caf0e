#pragma once

// Shared domain types: frames, the window grid, tracker configuration and
// the Gaussian-filtered window intensity every other module consumes.

#include <cstdint>
#include <span>
#include <vector>

namespace diverlink {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Raster image, 1 (gray) or 3 (RGB, interleaved) channels, row-major.
struct Frame {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;
  std::int64_t index = 0;
  double timestamp_s = 0.0;

  static Frame gray(int width, int height, std::uint8_t fill = 0);
  static Frame rgb(int width, int height, std::uint8_t r = 0, std::uint8_t g = 0, std::uint8_t b = 0);

  [[nodiscard]] bool is_gray() const noexcept { return channels == 1; }
  [[nodiscard]] std::size_t offset(int x, int y, int c = 0) const noexcept {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  [[nodiscard]] std::uint8_t at(int x, int y, int c = 0) const { return pixels[offset(x, y, c)]; }
  std::uint8_t& at(int x, int y, int c = 0) { return pixels[offset(x, y, c)]; }

  /// Throws ArgumentError when the pixel buffer does not match the header.
  void validate() const;
};

using FrameSequence = std::vector<Frame>;

struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Uniform grid of non-overlapping windows. Right/bottom margins that do not
/// fit a whole window are excluded. Windows are numbered row-major.
class GridConfig {
 public:
  GridConfig(int frame_w, int frame_h, int window_w = 30, int window_h = 30);

  [[nodiscard]] int frame_width() const noexcept { return frame_w_; }
  [[nodiscard]] int frame_height() const noexcept { return frame_h_; }
  [[nodiscard]] int window_width() const noexcept { return window_w_; }
  [[nodiscard]] int window_height() const noexcept { return window_h_; }
  [[nodiscard]] int cols() const noexcept { return cols_; }
  [[nodiscard]] int rows() const noexcept { return rows_; }
  [[nodiscard]] int count() const noexcept { return cols_ * rows_; }

  [[nodiscard]] Rect window_rect(int i) const;
  [[nodiscard]] Point2 window_center(int i) const;
  /// Window containing pixel position (x, y); positions in the excluded
  /// margins or outside the frame map to the nearest window.
  [[nodiscard]] int window_at(double x, double y) const;
  /// Chebyshev distance in grid cells.
  [[nodiscard]] int grid_distance(int a, int b) const;

 private:
  int frame_w_;
  int frame_h_;
  int window_w_;
  int window_h_;
  int cols_;
  int rows_;
};

struct IntensityRange {
  double lo = 180.0;
  double hi = 255.0;
  [[nodiscard]] bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

struct FrequencyBand {
  double low = 1.0;
  double high = 2.0;
};

/// MDPM tracker parameters. Defaults: T=15, 30x30 windows, delta=75,
/// epsilon=0.1, 10 fps.
struct MdpmConfig {
  int slide = 15;          // T
  int pool = 5;            // p
  double delta = 75.0;     // amplitude threshold
  double epsilon = 0.1;    // evidence miss probability
  IntensityRange range{};  // R
  double fps = 10.0;
  FrequencyBand band{};
  int stride = 0;  // frames between cycles; 0 means "same as slide"
  int window_w = 30;
  int window_h = 30;
  double gauss_sigma = 1.0;

  [[nodiscard]] int effective_stride() const noexcept { return stride == 0 ? slide : stride; }
  /// Throws ConfigError. `window_count` is M of the grid in use, or 0 to
  /// skip the pool-size upper bound.
  void validate(int window_count = 0) const;
};

struct BoundingBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  double score = 0.0;

  [[nodiscard]] double area() const noexcept { return w * h; }
  /// Intersection with the frame rectangle; w/h stay positive.
  [[nodiscard]] BoundingBox clamped(int frame_w, int frame_h) const;
};

struct TrajectoryVector {
  std::vector<int> windows;
  friend bool operator==(const TrajectoryVector&, const TrajectoryVector&) = default;
};

struct IntensityVector {
  std::vector<double> values;
};

/// Normalized 1-D Gaussian taps, radius ceil(3*sigma). sigma <= 0 gives {1}.
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian blur of one channel with edge replication.
std::vector<double> gaussian_blur(std::span<const double> plane, int width, int height, double sigma);

/// Blurred intensity plane of a gray frame.
std::vector<double> blurred_plane(const Frame& gray, double sigma);

Rect window_rect(const GridConfig& grid, int i);

/// Mean of the blurred pixels inside window i. Gray frames only.
double window_intensity(const Frame& gray, const GridConfig& grid, int i, double sigma = 1.0);

/// All M window intensities of one frame (one blur pass).
std::vector<double> window_intensities(const Frame& gray, const GridConfig& grid, double sigma = 1.0);

/// Rec.601 luma, rounded half-up. Gray input passes through.
Frame luminance(const Frame& frame);

}  // namespace diverlink
