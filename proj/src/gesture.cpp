#include "diverlink/gesture.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <string>

#include "diverlink/errors.hpp"
#include "diverlink/synth.hpp"

namespace diverlink {

namespace {

constexpr std::array<std::string_view, 10> kGestureNames = {"zero", "one",  "two",   "three", "four",
                                                              "five", "left", "right", "ok",    "pic"};

}  // namespace

std::string_view to_string(GestureClass g) noexcept { return kGestureNames[static_cast<std::size_t>(g)]; }

std::optional<GestureClass> parse_gesture(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kGestureNames.size(); ++i) {
    if (kGestureNames[i] == name) return static_cast<GestureClass>(i);
  }
  return std::nullopt;
}

const std::vector<Point2>& canonical_polygon(GestureClass g) {
  // Silhouettes are chosen to be well separated in (extent, eccentricity,
  // solidity) space and to stay within a factor of 3 in area.
  static const std::array<std::vector<Point2>, 10> polygons = {{
      // zero: closed fist
      {{-30, -40}, {30, -40}, {50, -20}, {50, 20}, {30, 40}, {-30, 40}, {-50, 20}, {-50, -20}},
      // one: single raised finger
      {{-14, -60}, {14, -60}, {14, 10}, {26, 10}, {26, 40}, {-26, 40}, {-26, 10}, {-14, 10}},
      // two: spread V
      {{-45, -50}, {-25, -50}, {0, 10}, {25, -50}, {45, -50}, {10, 45}, {-10, 45}},
      // three: fanned fingers, triangular outline
      {{0, -55}, {50, 40}, {-50, 40}},
      // four: four fingers over the palm
      {{-50, -45}, {-34, -45}, {-34, 0}, {-18, 0}, {-18, -45}, {-2, -45}, {-2, 0}, {14, 0}, {14, -45},
       {30, -45}, {30, 0}, {50, 0}, {50, 40}, {-50, 40}},
      // five: open hand, cross outline
      {{-8, -58}, {8, -58}, {8, -8}, {55, -8}, {55, 8}, {8, 8}, {8, 48}, {-8, 48}, {-8, 8},
       {-55, 8}, {-55, -8}, {-8, -8}},
      // left: flat hand, horizontal
      {{-55, -22}, {55, -22}, {55, 22}, {-55, 22}},
      // right: flat hand with spread base
      {{-30, -40}, {30, -40}, {55, 40}, {-55, 40}},
      // ok: pinched fingers, rhombus outline
      {{0, -60}, {28, 0}, {0, 60}, {-28, 0}},
      // pic: framing corner
      {{-50, -40}, {50, -40}, {50, -22}, {-32, -22}, {-32, 40}, {-50, 40}},
  }};
  return polygons[static_cast<std::size_t>(g)];
}

GesturePairToken GesturePairToken::from_pair(const GesturePair& p, std::int64_t frame) {
  GesturePairToken t;
  t.frame = frame;
  if (p.left) t.left = HandObservation{*p.left, 1.0};
  if (p.right) t.right = HandObservation{*p.right, 1.0};
  return t;
}

void HsvRange::validate() const {
  if (s.lo > s.hi) throw ConfigError("hsv.s: empty interval");
  if (v.lo > v.hi) throw ConfigError("hsv.v: empty interval");
  if (h.lo < 0.0 || h.hi > 360.0 || h.hi < 0.0 || h.lo > 360.0) throw ConfigError("hsv.h: bounds must lie in [0,360]");
  if (s.lo < 0.0 || s.hi > 1.0 || v.lo < 0.0 || v.hi > 1.0) throw ConfigError("hsv.s/v: bounds must lie in [0,1]");
}

bool HsvRange::contains(double h_deg, double s_val, double v_val) const noexcept {
  const bool hue = h.lo <= h.hi ? (h_deg >= h.lo && h_deg <= h.hi) : (h_deg >= h.lo || h_deg <= h.hi);
  return hue && s_val >= s.lo && s_val <= s.hi && v_val >= v.lo && v_val <= v.hi;
}

Hsv rgb_to_hsv(double r, double g, double b) noexcept {
  r /= 255.0;
  g /= 255.0;
  b /= 255.0;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double d = mx - mn;
  Hsv out;
  out.v = mx;
  out.s = mx > 0.0 ? d / mx : 0.0;
  if (d <= 0.0) return out;
  double h;
  if (mx == r) {
    h = 60.0 * std::fmod((g - b) / d, 6.0);
  } else if (mx == g) {
    h = 60.0 * ((b - r) / d + 2.0);
  } else {
    h = 60.0 * ((r - g) / d + 4.0);
  }
  if (h < 0.0) h += 360.0;
  out.h = h;
  return out;
}

std::size_t Mask::count() const { return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1)); }

Mask segment_skin(const Frame& rgb, const HsvRange& range, double blur_sigma) {
  rgb.validate();
  if (rgb.channels != 3) throw FrameFormatError("segment_skin needs an RGB frame");
  range.validate();
  const std::size_t plane = static_cast<std::size_t>(rgb.width) * rgb.height;
  std::array<std::vector<double>, 3> blurred;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> ch(plane);
    for (std::size_t p = 0; p < plane; ++p) ch[p] = rgb.pixels[3 * p + c];
    blurred[c] = gaussian_blur(ch, rgb.width, rgb.height, blur_sigma);
  }
  Mask m{rgb.width, rgb.height, std::vector<std::uint8_t>(plane, 0)};
  for (std::size_t p = 0; p < plane; ++p) {
    const Hsv hsv = rgb_to_hsv(blurred[0][p], blurred[1][p], blurred[2][p]);
    m.bits[p] = range.contains(hsv.h, hsv.s, hsv.v) ? 1 : 0;
  }
  return m;
}

double ShapeDescriptor::distance(const ShapeDescriptor& o) const {
  const double a = extent - o.extent;
  const double b = eccentricity - o.eccentricity;
  const double c = solidity - o.solidity;
  return std::sqrt(a * a + b * b + c * c);
}

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Andrew's monotone chain; returns the hull's area.
double convex_hull_area(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return 0.0;
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  double area = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    area += a.x * b.y - b.x * a.y;
  }
  return std::abs(area) / 2.0;
}

struct ComponentStats {
  long area = 0;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  int minx = 0, maxx = 0, miny = 0, maxy = 0;
  std::map<int, std::pair<int, int>> row_span;  // y -> (min x, max x)
};

Region finish_region(const ComponentStats& s) {
  Region r;
  r.area = static_cast<double>(s.area);
  const double n = r.area;
  // Pixel centers sit at (x + 0.5, y + 0.5).
  r.centroid = {s.sx / n + 0.5, s.sy / n + 0.5};
  const double bw = s.maxx - s.minx + 1;
  const double bh = s.maxy - s.miny + 1;
  r.bbox = BoundingBox{s.minx + bw / 2.0, s.miny + bh / 2.0, bw, bh, 0.0};

  const double mx = s.sx / n;
  const double my = s.sy / n;
  // Central moments of unit squares: add 1/12 for the pixel extent.
  const double cxx = s.sxx / n - mx * mx + 1.0 / 12.0;
  const double cyy = s.syy / n - my * my + 1.0 / 12.0;
  const double cxy = s.sxy / n - mx * my;
  const double tr = cxx + cyy;
  const double disc = std::sqrt(std::max(0.0, (cxx - cyy) * (cxx - cyy) + 4.0 * cxy * cxy));
  const double l1 = (tr + disc) / 2.0;
  const double l2 = std::max(0.0, (tr - disc) / 2.0);

  std::vector<Point2> corners;
  corners.reserve(s.row_span.size() * 4);
  for (const auto& [y, span] : s.row_span) {
    corners.push_back({double(span.first), double(y)});
    corners.push_back({double(span.first), double(y + 1)});
    corners.push_back({double(span.second + 1), double(y)});
    corners.push_back({double(span.second + 1), double(y + 1)});
  }
  const double hull = convex_hull_area(std::move(corners));

  r.descriptor.extent = n / (bw * bh);
  r.descriptor.eccentricity = l1 > 0.0 ? std::sqrt(std::max(0.0, 1.0 - l2 / l1)) : 0.0;
  r.descriptor.solidity = hull > 0.0 ? std::min(1.0, n / hull) : 1.0;
  return r;
}

}  // namespace

std::vector<Region> extract_regions(const Mask& mask, int min_area) {
  const int w = mask.width;
  const int h = mask.height;
  std::vector<std::uint8_t> seen(mask.bits.size(), 0);
  std::vector<Region> regions;
  std::deque<std::pair<int, int>> queue;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      const std::size_t p0 = static_cast<std::size_t>(y0) * w + x0;
      if (!mask.bits[p0] || seen[p0]) continue;
      ComponentStats s;
      s.minx = s.maxx = x0;
      s.miny = s.maxy = y0;
      seen[p0] = 1;
      queue.emplace_back(x0, y0);
      while (!queue.empty()) {
        const auto [x, y] = queue.front();
        queue.pop_front();
        ++s.area;
        s.sx += x;
        s.sy += y;
        s.sxx += double(x) * x;
        s.syy += double(y) * y;
        s.sxy += double(x) * y;
        s.minx = std::min(s.minx, x);
        s.maxx = std::max(s.maxx, x);
        s.miny = std::min(s.miny, y);
        s.maxy = std::max(s.maxy, y);
        auto [it, inserted] = s.row_span.try_emplace(y, x, x);
        if (!inserted) {
          it->second.first = std::min(it->second.first, x);
          it->second.second = std::max(it->second.second, x);
        }
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx;
            const int ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            const std::size_t q = static_cast<std::size_t>(ny) * w + nx;
            if (mask.bits[q] && !seen[q]) {
              seen[q] = 1;
              queue.emplace_back(nx, ny);
            }
          }
        }
      }
      if (s.area >= min_area) regions.push_back(finish_region(s));
    }
  }
  std::stable_sort(regions.begin(), regions.end(), [](const Region& a, const Region& b) {
    if (a.area != b.area) return a.area > b.area;
    return a.centroid.x < b.centroid.x;
  });
  return regions;
}

std::vector<CachedRegion> RegionCache::valid_entries(std::int64_t frame) const {
  std::vector<CachedRegion> out;
  for (const auto& e : {left, right}) {
    if (e && frame >= e->frame && frame - e->frame <= horizon) out.push_back(*e);
  }
  return out;
}

std::vector<Region> reject_outliers(std::vector<Region> regions, const RegionCache& cache, std::int64_t frame,
                                    const OutlierParams& params) {
  const auto entries = cache.valid_entries(frame);
  if (entries.empty()) return regions;
  const auto consistent = [&](const Region& r) {
    for (const auto& e : entries) {
      const double scale = std::max(e.bbox.w, e.bbox.h);
      const double dist = std::hypot(r.centroid.x - e.centroid.x, r.centroid.y - e.centroid.y);
      const double ratio = std::max(r.area, e.area) / std::min(r.area, e.area);
      if (dist <= params.distance_factor * scale && ratio <= params.area_factor) return true;
    }
    return false;
  };
  std::erase_if(regions, [&](const Region& r) { return !consistent(r); });
  return regions;
}

GestureMatch match_gesture(const Region& region, const TemplateBank& bank) {
  if (bank.entries.empty()) throw ConfigError("template bank is empty");
  GestureMatch best;
  bool have = false;
  for (const auto& [cls, desc] : bank.entries) {
    const double d = region.descriptor.distance(desc);
    if (!have || d < best.distance || (d == best.distance && cls < best.gesture)) {
      best.gesture = cls;
      best.distance = d;
      have = true;
    }
  }
  best.confidence = 1.0 / (1.0 + best.distance);
  return best;
}

GesturePairToken recognize_pair(const Frame& rgb, std::int64_t frame, RegionCache& cache, const GestureConfig& cfg) {
  GesturePairToken token;
  token.frame = frame;
  const Mask mask = segment_skin(rgb, cfg.hsv, cfg.blur_sigma);
  cache.horizon = cfg.cache_horizon;
  const auto regions = reject_outliers(extract_regions(mask, cfg.min_area), cache, frame, cfg.outliers);
  if (regions.empty()) return token;

  struct Candidate {
    const Region* region;
    GestureMatch match;
  };
  std::vector<Candidate> cands;
  cands.reserve(regions.size());
  for (const auto& r : regions) cands.push_back({&r, match_gesture(r, cfg.bank)});
  // Stable: equal confidence keeps the larger region first.
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) { return a.match.confidence > b.match.confidence; });
  if (cands.size() > 2) cands.resize(2);

  const auto assign = [&](const Candidate& c, bool persons_left) {
    const HandObservation obs{c.match.gesture, c.match.confidence};
    const CachedRegion cached{c.region->bbox, c.region->centroid, c.region->area, frame};
    if (persons_left) {
      token.left = obs;
      cache.left = cached;
    } else {
      token.right = obs;
      cache.right = cached;
    }
  };
  // Person faces the camera: the viewer's left is the person's right.
  if (cands.size() == 2) {
    const bool first_is_viewer_left = cands[0].region->centroid.x <= cands[1].region->centroid.x;
    assign(cands[0], !first_is_viewer_left);
    assign(cands[1], first_is_viewer_left);
  } else {
    assign(cands[0], cands[0].region->centroid.x >= rgb.width / 2.0);
  }
  return token;
}

ShapeRecognizer::ShapeRecognizer(GestureConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.hsv.validate();
  if (cfg_.bank.entries.empty()) throw ConfigError("template bank is empty");
  cache_.horizon = cfg_.cache_horizon;
}

GesturePairToken ShapeRecognizer::recognize(const Frame& frame) {
  return recognize_pair(frame, frame.index, cache_, cfg_);
}

OracleRecognizer::OracleRecognizer(std::vector<GesturePair> labels) : labels_(std::move(labels)) {}

GesturePairToken OracleRecognizer::recognize(const Frame& frame) {
  if (frame.index < 0 || frame.index >= static_cast<std::int64_t>(labels_.size())) {
    return GesturePairToken::from_pair({}, frame.index);
  }
  return GesturePairToken::from_pair(labels_[static_cast<std::size_t>(frame.index)], frame.index);
}

TemplateBank default_template_bank() {
  static const TemplateBank bank = [] {
    TemplateBank b;
    const HsvRange hsv;
    for (GestureClass g : kAllGestures) {
      GestureSceneSpec spec;
      spec.segments.push_back({GesturePair{g, std::nullopt}, 1});
      const auto scene = render_gesture_sequence(spec);
      const auto regions = extract_regions(segment_skin(scene.frames.front(), hsv));
      if (regions.size() != 1) throw StateError("template rendering for " + std::string(to_string(g)) + " is not a single region");
      b.entries.emplace_back(g, regions.front().descriptor);
    }
    return b;
  }();
  return bank;
}

GestureConfig default_gesture_config() {
  GestureConfig cfg;
  cfg.bank = default_template_bank();
  return cfg;
}

}  // namespace diverlink
