#include "diverlink/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "diverlink/errors.hpp"

namespace diverlink {

namespace {

void check_size(int width, int height) {
  if (width < 1 || height < 1) throw ArgumentError("frame size must be positive");
}

}  // namespace

Frame Frame::gray(int width, int height, std::uint8_t fill) {
  check_size(width, height);
  Frame f;
  f.width = width;
  f.height = height;
  f.channels = 1;
  f.pixels.assign(static_cast<std::size_t>(width) * height, fill);
  return f;
}

Frame Frame::rgb(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  check_size(width, height);
  Frame f;
  f.width = width;
  f.height = height;
  f.channels = 3;
  f.pixels.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < f.pixels.size(); i += 3) {
    f.pixels[i] = r;
    f.pixels[i + 1] = g;
    f.pixels[i + 2] = b;
  }
  return f;
}

void Frame::validate() const {
  if (width <= 0 || height <= 0) throw ArgumentError("frame dimensions must be positive");
  if (channels != 1 && channels != 3) throw ArgumentError("frame channels must be 1 or 3");
  if (pixels.size() != static_cast<std::size_t>(width) * height * channels) {
    throw ArgumentError("frame pixel count does not match width*height*channels");
  }
}

GridConfig::GridConfig(int frame_w, int frame_h, int window_w, int window_h)
    : frame_w_(frame_w), frame_h_(frame_h), window_w_(window_w), window_h_(window_h) {
  if (window_w <= 0 || window_h <= 0) throw ConfigError("window dimensions must be positive");
  if (window_w > frame_w || window_h > frame_h) {
    throw ConfigError("window " + std::to_string(window_w) + "x" + std::to_string(window_h) +
                      " does not fit frame " + std::to_string(frame_w) + "x" + std::to_string(frame_h));
  }
  cols_ = frame_w / window_w;
  rows_ = frame_h / window_h;
}

Rect GridConfig::window_rect(int i) const {
  if (i < 0 || i >= count()) {
    throw ArgumentError("window index " + std::to_string(i) + " out of range [0," + std::to_string(count()) + ")");
  }
  return Rect{(i % cols_) * window_w_, (i / cols_) * window_h_, window_w_, window_h_};
}

Point2 GridConfig::window_center(int i) const {
  const Rect r = window_rect(i);
  return {r.x + r.w / 2.0, r.y + r.h / 2.0};
}

int GridConfig::window_at(double x, double y) const {
  const int col = std::clamp(static_cast<int>(std::floor(x / window_w_)), 0, cols_ - 1);
  const int row = std::clamp(static_cast<int>(std::floor(y / window_h_)), 0, rows_ - 1);
  return row * cols_ + col;
}

int GridConfig::grid_distance(int a, int b) const {
  (void)window_rect(a);
  (void)window_rect(b);
  return std::max(std::abs(a % cols_ - b % cols_), std::abs(a / cols_ - b / cols_));
}

void MdpmConfig::validate(int window_count) const {
  if (slide < 1) throw ConfigError("T (slide) must be >= 1");
  if (pool < 1) throw ConfigError("p (pool) must be >= 1");
  if (window_count > 0 && pool > window_count) {
    throw ConfigError("p (pool) = " + std::to_string(pool) + " exceeds window count M = " + std::to_string(window_count));
  }
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw ConfigError("epsilon must lie in (0, 0.5)");
  if (!(range.lo >= 0.0 && range.lo <= range.hi && range.hi <= 255.0)) {
    throw ConfigError("R must satisfy 0 <= lo <= hi <= 255");
  }
  if (!(fps > 0.0)) throw ConfigError("fps must be positive");
  if (!(band.low < band.high)) throw ConfigError("band.low must be below band.high");
  const int s = effective_stride();
  if (s < 1 || s > slide) throw ConfigError("stride must lie in [1, T]");
  if (window_w <= 0 || window_h <= 0) throw ConfigError("window dimensions must be positive");
  if (gauss_sigma < 0.0) throw ConfigError("gauss_sigma must be >= 0");
  bool any_bin = false;
  for (int k = 1; k < slide; ++k) {
    const double f = k * fps / slide;
    if (f >= band.low && f <= band.high) any_bin = true;
  }
  if (!any_bin) throw ConfigError("frequency band contains no DFT bin for the given T and fps");
}

BoundingBox BoundingBox::clamped(int frame_w, int frame_h) const {
  const double x0 = std::clamp(cx - w / 2.0, 0.0, static_cast<double>(frame_w));
  const double x1 = std::clamp(cx + w / 2.0, 0.0, static_cast<double>(frame_w));
  const double y0 = std::clamp(cy - h / 2.0, 0.0, static_cast<double>(frame_h));
  const double y1 = std::clamp(cy + h / 2.0, 0.0, static_cast<double>(frame_h));
  BoundingBox out = *this;
  out.w = std::max(x1 - x0, 1.0);
  out.h = std::max(y1 - y0, 1.0);
  out.cx = std::clamp((x0 + x1) / 2.0, out.w / 2.0, frame_w - out.w / 2.0);
  out.cy = std::clamp((y0 + y1) / 2.0, out.h / 2.0, frame_h - out.h / 2.0);
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (sigma <= 0.0) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

std::vector<double> gaussian_blur(std::span<const double> plane, int width, int height, double sigma) {
  if (plane.size() != static_cast<std::size_t>(width) * height) {
    throw ArgumentError("plane size does not match width*height");
  }
  const std::vector<double> k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  if (radius == 0) return {plane.begin(), plane.end()};

  std::vector<double> tmp(plane.size());
  for (int y = 0; y < height; ++y) {
    const double* row = plane.data() + static_cast<std::size_t>(y) * width;
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int d = -radius; d <= radius; ++d) {
        acc += k[d + radius] * row[std::clamp(x + d, 0, width - 1)];
      }
      tmp[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  std::vector<double> out(plane.size());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int d = -radius; d <= radius; ++d) {
        acc += k[d + radius] * tmp[static_cast<std::size_t>(std::clamp(y + d, 0, height - 1)) * width + x];
      }
      out[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  return out;
}

std::vector<double> blurred_plane(const Frame& gray, double sigma) {
  gray.validate();
  if (!gray.is_gray()) throw FrameFormatError("expected a grayscale frame; convert RGB with luminance() first");
  std::vector<double> plane(gray.pixels.begin(), gray.pixels.end());
  return gaussian_blur(plane, gray.width, gray.height, sigma);
}

Rect window_rect(const GridConfig& grid, int i) { return grid.window_rect(i); }

namespace {

void check_grid_fits(const Frame& frame, const GridConfig& grid) {
  if (frame.width != grid.frame_width() || frame.height != grid.frame_height()) {
    throw ArgumentError("frame " + std::to_string(frame.width) + "x" + std::to_string(frame.height) +
                        " does not match grid frame " + std::to_string(grid.frame_width()) + "x" +
                        std::to_string(grid.frame_height()));
  }
}

double window_mean(const std::vector<double>& plane, int width, const Rect& r) {
  double acc = 0.0;
  for (int y = r.y; y < r.y + r.h; ++y) {
    const double* row = plane.data() + static_cast<std::size_t>(y) * width;
    for (int x = r.x; x < r.x + r.w; ++x) acc += row[x];
  }
  return acc / (static_cast<double>(r.w) * r.h);
}

}  // namespace

double window_intensity(const Frame& gray, const GridConfig& grid, int i, double sigma) {
  const Rect r = grid.window_rect(i);
  const std::vector<double> plane = blurred_plane(gray, sigma);
  check_grid_fits(gray, grid);
  return window_mean(plane, gray.width, r);
}

std::vector<double> window_intensities(const Frame& gray, const GridConfig& grid, double sigma) {
  const std::vector<double> plane = blurred_plane(gray, sigma);
  check_grid_fits(gray, grid);
  std::vector<double> out(grid.count());
  for (int i = 0; i < grid.count(); ++i) out[i] = window_mean(plane, gray.width, grid.window_rect(i));
  return out;
}

Frame luminance(const Frame& frame) {
  frame.validate();
  if (frame.is_gray()) return frame;
  Frame out = Frame::gray(frame.width, frame.height);
  out.index = frame.index;
  out.timestamp_s = frame.timestamp_s;
  for (std::size_t p = 0, n = out.pixels.size(); p < n; ++p) {
    const double y = 0.299 * frame.pixels[3 * p] + 0.587 * frame.pixels[3 * p + 1] + 0.114 * frame.pixels[3 * p + 2];
    out.pixels[p] = static_cast<std::uint8_t>(std::clamp(std::floor(y + 0.5), 0.0, 255.0));
  }
  return out;
}

}  // namespace diverlink
