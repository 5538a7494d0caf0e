#pragma once

// Deterministic synthetic scenes with exact ground truth: an oscillating
// flipper blob over a noisy background, and two-hand gesture frames built
// from the canonical class silhouettes.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "diverlink/core.hpp"
#include "diverlink/gesture.hpp"

namespace diverlink {

enum class PathKind { Static, Straight, Sideways, Sinusoid };

struct DiverPath {
  PathKind kind = PathKind::Static;
  double vx = 0.0;         // px/frame (straight, sideways)
  double vy = 0.0;         // px/frame (straight)
  double amplitude = 0.0;  // px (sinusoid, horizontal)
  double period = 30.0;    // frames (sinusoid)
};

struct FlipperSpec {
  double radius = 20.0;
  double base = 215.0;       // C
  double amplitude = 40.0;   // A
  double frequency = 1.5;    // Hz
};

struct DiverSceneSpec {
  int frames = 300;
  double fps = 10.0;
  int width = 320;
  int height = 240;
  double background = 60.0;
  double noise_sigma = 2.0;
  FlipperSpec flipper;
  DiverPath path;
  Point2 start{165.0, 105.0};
  std::uint64_t seed = 1;
  int window_w = 30;  // grid used for the ground-truth window indices
  int window_h = 30;

  void validate() const;  // throws ConfigError naming the field
  [[nodiscard]] Point2 center_at(int t) const;
  [[nodiscard]] double blob_intensity(int t) const;
};

struct GroundTruth {
  std::vector<Point2> centers;               // diver scenes
  std::vector<int> windows;                  // diver scenes, per frame
  std::vector<GesturePair> gesture_labels;   // gesture scenes, per frame
};

struct RenderedScene {
  FrameSequence frames;
  GroundTruth truth;
};

/// Standard normal field scaled by sigma; deterministic in (seed, stream).
std::vector<double> seeded_noise(std::uint64_t seed, double sigma, std::size_t count, std::uint64_t stream = 0);

RenderedScene render_diver_sequence(const DiverSceneSpec& spec);

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
};

struct GestureSegment {
  GesturePair labels;
  int frames = 1;
};

struct GestureSceneSpec {
  int width = 320;
  int height = 240;
  double fps = 10.0;
  std::vector<GestureSegment> segments;
  Rgb skin{224, 172, 140};
  Rgb background{20, 70, 110};
  double noise_sigma = 0.0;
  double jitter = 0.0;  // px, per polygon vertex
  std::uint64_t seed = 1;

  [[nodiscard]] int frame_count() const;
  void validate() const;
};

/// The person's right hand is drawn on the viewer's left half and vice versa.
Point2 hand_anchor(const GestureSceneSpec& spec, bool persons_left);

RenderedScene render_gesture_sequence(const GestureSceneSpec& spec);

/// Pixel-center even-odd fill of a polygon into a mask of the given size.
Mask rasterize_polygon(std::span<const Point2> polygon, int width, int height);

}  // namespace diverlink
