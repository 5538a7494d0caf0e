#pragma once

// Classical hand-region pipeline: skin segmentation in HSV, 8-connected
// region extraction with shape descriptors, cache-based outlier rejection and
// nearest-template matching. Recognizers are pluggable; `ShapeRecognizer`
// runs this pipeline and `OracleRecognizer` replays ground-truth labels.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "diverlink/core.hpp"

namespace diverlink {

enum class GestureClass : std::uint8_t { Zero, One, Two, Three, Four, Five, Left, Right, Ok, Pic };

inline constexpr std::array<GestureClass, 10> kAllGestures = {
    GestureClass::Zero, GestureClass::One,  GestureClass::Two,   GestureClass::Three, GestureClass::Four,
    GestureClass::Five, GestureClass::Left, GestureClass::Right, GestureClass::Ok,    GestureClass::Pic};

std::string_view to_string(GestureClass g) noexcept;
std::optional<GestureClass> parse_gesture(std::string_view name) noexcept;

/// Outline of the canonical silhouette for a class, in pixels relative to
/// the hand anchor point (y grows downward).
const std::vector<Point2>& canonical_polygon(GestureClass g);

/// Raw (left, right) observation; sides follow the person's hands.
struct GesturePair {
  std::optional<GestureClass> left;
  std::optional<GestureClass> right;
  friend bool operator==(const GesturePair&, const GesturePair&) = default;
};

struct HandObservation {
  GestureClass gesture = GestureClass::Zero;
  double confidence = 0.0;
  friend bool operator==(const HandObservation&, const HandObservation&) = default;
};

struct GesturePairToken {
  std::optional<HandObservation> left;
  std::optional<HandObservation> right;
  std::int64_t frame = 0;

  [[nodiscard]] GesturePair pair() const {
    return {left ? std::optional(left->gesture) : std::nullopt, right ? std::optional(right->gesture) : std::nullopt};
  }
  /// Token with confidence 1 on every present side.
  static GesturePairToken from_pair(const GesturePair& p, std::int64_t frame);
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Hue in degrees [0, 360), saturation and value in [0, 1]. A hue interval
/// with lo > hi wraps through 0.
struct HsvRange {
  Interval h{0.0, 50.0};
  Interval s{0.2, 0.75};
  Interval v{0.35, 1.0};

  void validate() const;  // throws ConfigError on an empty interval
  [[nodiscard]] bool contains(double h_deg, double s_val, double v_val) const noexcept;
};

struct Hsv {
  double h = 0.0;
  double s = 0.0;
  double v = 0.0;
};
Hsv rgb_to_hsv(double r, double g, double b) noexcept;

struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  [[nodiscard]] bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  [[nodiscard]] std::size_t count() const;
};

/// Gaussian blur (sigma px) then per-pixel HSV interval test.
Mask segment_skin(const Frame& rgb, const HsvRange& range, double blur_sigma = 1.0);

struct ShapeDescriptor {
  double extent = 0.0;        // area / bounding-box area
  double eccentricity = 0.0;  // from second central moments
  double solidity = 0.0;      // area / convex hull area

  [[nodiscard]] std::array<double, 3> values() const { return {extent, eccentricity, solidity}; }
  [[nodiscard]] double distance(const ShapeDescriptor& o) const;
  friend bool operator==(const ShapeDescriptor&, const ShapeDescriptor&) = default;
};

struct Region {
  BoundingBox bbox;
  Point2 centroid;
  double area = 0.0;
  ShapeDescriptor descriptor;
};

inline constexpr int kDefaultMinRegionArea = 100;

/// 8-connected components; drops components smaller than min_area. Ordered
/// by descending area, then smaller centroid x.
std::vector<Region> extract_regions(const Mask& mask, int min_area = kDefaultMinRegionArea);

struct CachedRegion {
  BoundingBox bbox;
  Point2 centroid;
  double area = 0.0;
  std::int64_t frame = 0;
};

struct RegionCache {
  std::optional<CachedRegion> left;
  std::optional<CachedRegion> right;
  int horizon = 15;  // frames

  [[nodiscard]] std::vector<CachedRegion> valid_entries(std::int64_t frame) const;
};

struct OutlierParams {
  double distance_factor = 1.5;  // K
  double area_factor = 3.0;
};

/// With a valid cache entry, keeps regions near (centroid within K * scale)
/// and of similar area to some cached hand. No valid entry: identity.
std::vector<Region> reject_outliers(std::vector<Region> regions, const RegionCache& cache, std::int64_t frame,
                                    const OutlierParams& params = {});

/// One descriptor per gesture class.
struct TemplateBank {
  std::vector<std::pair<GestureClass, ShapeDescriptor>> entries;
};

struct GestureMatch {
  GestureClass gesture = GestureClass::Zero;
  double confidence = 0.0;
  double distance = 0.0;
};

/// Nearest template by L2 distance; confidence = 1 / (1 + distance).
GestureMatch match_gesture(const Region& region, const TemplateBank& bank);

struct GestureConfig {
  HsvRange hsv;
  TemplateBank bank;
  double blur_sigma = 1.0;
  int min_area = kDefaultMinRegionArea;
  OutlierParams outliers;
  int cache_horizon = 15;
};

/// Full pipeline for one frame. Updates `cache` for each side reported.
GesturePairToken recognize_pair(const Frame& rgb, std::int64_t frame, RegionCache& cache, const GestureConfig& cfg);

class GestureRecognizer {
 public:
  virtual ~GestureRecognizer() = default;
  virtual GesturePairToken recognize(const Frame& frame) = 0;
};

class ShapeRecognizer final : public GestureRecognizer {
 public:
  explicit ShapeRecognizer(GestureConfig cfg);
  GesturePairToken recognize(const Frame& frame) override;
  [[nodiscard]] const RegionCache& cache() const noexcept { return cache_; }

 private:
  GestureConfig cfg_;
  RegionCache cache_;
};

/// Replays per-frame labels, keyed by Frame::index.
class OracleRecognizer final : public GestureRecognizer {
 public:
  explicit OracleRecognizer(std::vector<GesturePair> labels);
  GesturePairToken recognize(const Frame& frame) override;

 private:
  std::vector<GesturePair> labels_;
};

/// Templates measured by running the pipeline on noise-free renderings of
/// the canonical polygons.
TemplateBank default_template_bank();

/// Default HSV range with default_template_bank().
GestureConfig default_gesture_config();

}  // namespace diverlink
