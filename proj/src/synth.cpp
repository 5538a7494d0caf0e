#include "diverlink/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "diverlink/errors.hpp"

namespace diverlink {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

std::uint8_t to_pixel(double v) { return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0)); }

}  // namespace

std::vector<double> seeded_noise(std::uint64_t seed, double sigma, std::size_t count, std::uint64_t stream) {
  std::vector<double> out(count, 0.0);
  if (sigma <= 0.0) return out;
  auto engine = make_engine(seed, stream);
  std::normal_distribution<double> normal(0.0, sigma);
  for (double& v : out) v = normal(engine);
  return out;
}

void DiverSceneSpec::validate() const {
  if (frames < 1) throw ConfigError("frames: must be >= 1");
  if (!(fps > 0.0)) throw ConfigError("fps: must be positive");
  if (width < 1 || height < 1) throw ConfigError("width/height: must be positive");
  if (window_w < 1 || window_h < 1 || window_w > width || window_h > height) {
    throw ConfigError("window: must fit inside the frame");
  }
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma: must be >= 0");
  if (!(background >= 0.0 && background <= 255.0)) throw ConfigError("background: must lie in [0,255]");
  if (!(flipper.radius > 0.0)) throw ConfigError("flipper.radius: must be positive");
  if (!(flipper.frequency > 0.0 && flipper.frequency < fps / 2.0)) {
    throw ConfigError("flipper.frequency: must lie in (0, fps/2)");
  }
  if (flipper.base - std::abs(flipper.amplitude) < 0.0 || flipper.base + std::abs(flipper.amplitude) > 255.0) {
    throw ConfigError("flipper.base/amplitude: C +- A must stay within [0,255]");
  }
  if (path.kind == PathKind::Sinusoid && !(path.period > 0.0)) throw ConfigError("path.period: must be positive");
  for (int t = 0; t < frames; ++t) {
    const Point2 c = center_at(t);
    if (c.x < 0.0 || c.x >= width || c.y < 0.0 || c.y >= height) {
      throw ConfigError("path: blob center leaves the frame at t=" + std::to_string(t));
    }
  }
}

Point2 DiverSceneSpec::center_at(int t) const {
  switch (path.kind) {
    case PathKind::Static:
      return start;
    case PathKind::Straight:
      return {start.x + path.vx * t, start.y + path.vy * t};
    case PathKind::Sideways:
      return {start.x + path.vx * t, start.y};
    case PathKind::Sinusoid:
      return {start.x + path.amplitude * std::sin(2.0 * std::numbers::pi * t / path.period), start.y};
  }
  return start;
}

double DiverSceneSpec::blob_intensity(int t) const {
  return flipper.base + flipper.amplitude * std::sin(2.0 * std::numbers::pi * flipper.frequency * t / fps);
}

RenderedScene render_diver_sequence(const DiverSceneSpec& spec) {
  spec.validate();
  const GridConfig grid(spec.width, spec.height, spec.window_w, spec.window_h);
  RenderedScene scene;
  scene.frames.reserve(spec.frames);
  const double r2 = spec.flipper.radius * spec.flipper.radius;
  for (int t = 0; t < spec.frames; ++t) {
    const Point2 c = spec.center_at(t);
    const double blob = spec.blob_intensity(t);
    const auto noise = seeded_noise(spec.seed, spec.noise_sigma, static_cast<std::size_t>(spec.width) * spec.height,
                                    static_cast<std::uint64_t>(t));
    Frame f = Frame::gray(spec.width, spec.height);
    f.index = t;
    f.timestamp_s = t / spec.fps;
    for (int y = 0; y < spec.height; ++y) {
      const double dy = y + 0.5 - c.y;
      for (int x = 0; x < spec.width; ++x) {
        const double dx = x + 0.5 - c.x;
        const double base = dx * dx + dy * dy <= r2 ? blob : spec.background;
        const std::size_t p = static_cast<std::size_t>(y) * spec.width + x;
        f.pixels[p] = to_pixel(base + noise[p]);
      }
    }
    scene.frames.push_back(std::move(f));
    scene.truth.centers.push_back(c);
    scene.truth.windows.push_back(grid.window_at(c.x, c.y));
  }
  return scene;
}

int GestureSceneSpec::frame_count() const {
  int n = 0;
  for (const auto& s : segments) n += s.frames;
  return n;
}

void GestureSceneSpec::validate() const {
  if (width < 8 || height < 8) throw ConfigError("width/height: frame too small");
  if (!(fps > 0.0)) throw ConfigError("fps: must be positive");
  if (segments.empty()) throw ConfigError("segments: at least one segment required");
  for (const auto& s : segments) {
    if (s.frames < 1) throw ConfigError("segments.frames: must be >= 1");
  }
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma: must be >= 0");
  if (!(jitter >= 0.0)) throw ConfigError("jitter: must be >= 0");
}

Point2 hand_anchor(const GestureSceneSpec& spec, bool persons_left) {
  const double qx = std::floor(spec.width / 4.0);
  return {persons_left ? spec.width - qx : qx, std::floor(spec.height / 2.0)};
}

Mask rasterize_polygon(std::span<const Point2> polygon, int width, int height) {
  Mask m{width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 0)};
  const std::size_t n = polygon.size();
  if (n < 3) return m;
  std::vector<double> xs;
  for (int y = 0; y < height; ++y) {
    const double yc = y + 0.5;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& a = polygon[i];
      const Point2& b = polygon[(i + 1) % n];
      if ((a.y <= yc) != (b.y <= yc)) xs.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // pixel x is inside when its center x+0.5 lies in [xs[k], xs[k+1])
      const int x0 = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5)));
      const int x1 = std::min(width - 1, static_cast<int>(std::ceil(xs[k + 1] - 0.5)) - 1);
      for (int x = x0; x <= x1; ++x) m.bits[static_cast<std::size_t>(y) * width + x] = 1;
    }
  }
  return m;
}

RenderedScene render_gesture_sequence(const GestureSceneSpec& spec) {
  spec.validate();
  RenderedScene scene;
  const int n = spec.frame_count();
  scene.frames.reserve(n);
  scene.truth.gesture_labels.reserve(n);
  const std::size_t plane = static_cast<std::size_t>(spec.width) * spec.height;

  int t = 0;
  for (const auto& seg : spec.segments) {
    for (int k = 0; k < seg.frames; ++k, ++t) {
      std::vector<std::array<double, 3>> img(plane, {double(spec.background.r), double(spec.background.g),
                                                     double(spec.background.b)});
      auto jitter_engine = make_engine(spec.seed, 0x6a17000000000000ULL + static_cast<std::uint64_t>(t));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const auto draw = [&](const std::optional<GestureClass>& g, bool persons_left) {
        if (!g) return;
        const Point2 anchor = hand_anchor(spec, persons_left);
        std::vector<Point2> poly = canonical_polygon(*g);
        for (Point2& p : poly) {
          p.x += anchor.x;
          p.y += anchor.y;
          if (spec.jitter > 0.0) {
            const double r = spec.jitter * std::sqrt(unit(jitter_engine));
            const double a = 2.0 * std::numbers::pi * unit(jitter_engine);
            p.x += r * std::cos(a);
            p.y += r * std::sin(a);
          }
        }
        const Mask m = rasterize_polygon(poly, spec.width, spec.height);
        for (std::size_t p = 0; p < plane; ++p) {
          if (m.bits[p]) img[p] = {double(spec.skin.r), double(spec.skin.g), double(spec.skin.b)};
        }
      };
      draw(seg.labels.left, true);
      draw(seg.labels.right, false);

      const auto noise = seeded_noise(spec.seed, spec.noise_sigma, plane * 3, static_cast<std::uint64_t>(t));
      Frame f = Frame::rgb(spec.width, spec.height);
      f.index = t;
      f.timestamp_s = t / spec.fps;
      for (std::size_t p = 0; p < plane; ++p) {
        for (int c = 0; c < 3; ++c) f.pixels[3 * p + c] = to_pixel(img[p][c] + noise[3 * p + c]);
      }
      scene.frames.push_back(std::move(f));
      scene.truth.gesture_labels.push_back(seg.labels);
    }
  }
  return scene;
}

}  // namespace diverlink
