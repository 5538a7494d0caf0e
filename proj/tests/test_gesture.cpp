#include <cmath>

#include "doctest.h"

#include "diverlink/errors.hpp"
#include "diverlink/gesture.hpp"
#include "diverlink/synth.hpp"

using namespace diverlink;

namespace {

Mask blank(int w, int h) { return Mask{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, 0)}; }

void fill(Mask& m, int x0, int y0, int w, int h) {
  for (int y = y0; y < y0 + h; ++y)
    for (int x = x0; x < x0 + w; ++x) m.bits[static_cast<std::size_t>(y) * m.width + x] = 1;
}

Frame hands(std::optional<GestureClass> left, std::optional<GestureClass> right) {
  GestureSceneSpec s;
  s.segments = {{{left, right}, 1}};
  return render_gesture_sequence(s).frames.front();
}

}  // namespace

TEST_CASE("rgb to hsv") {
  auto c = rgb_to_hsv(255, 0, 0);
  CHECK(c.h == 0.0);
  CHECK(c.s == 1.0);
  CHECK(c.v == 1.0);
  CHECK(rgb_to_hsv(0, 255, 0).h == doctest::Approx(120));
  CHECK(rgb_to_hsv(0, 0, 255).h == doctest::Approx(240));
  CHECK(rgb_to_hsv(255, 0, 128).h == doctest::Approx(360 - 60 * 128 / 255.0));
  c = rgb_to_hsv(128, 128, 128);
  CHECK(c.s == 0.0);
  CHECK(c.h == 0.0);
  CHECK(rgb_to_hsv(0, 0, 0).v == 0.0);
}

TEST_CASE("hue interval wraps through zero") {
  HsvRange r;
  r.h = {340, 20};
  CHECK(r.contains(350, 0.5, 0.5));
  CHECK(r.contains(10, 0.5, 0.5));
  CHECK_FALSE(r.contains(180, 0.5, 0.5));
  r.s = {0.8, 0.2};
  CHECK_THROWS_AS(r.validate(), ConfigError);
}

TEST_CASE("skin segmentation") {
  const HsvRange r;
  CHECK(segment_skin(Frame::rgb(20, 20, 224, 172, 140), r).count() == 400);
  CHECK(segment_skin(Frame::rgb(20, 20, 20, 70, 110), r).count() == 0);
  CHECK_THROWS_AS(segment_skin(Frame::gray(20, 20), r), FrameFormatError);
}

TEST_CASE("regions and descriptors") {
  Mask m = blank(100, 60);
  fill(m, 10, 10, 20, 10);  // 200 px
  fill(m, 60, 30, 15, 15);  // 225 px
  fill(m, 90, 50, 5, 5);    // below min area
  const auto rs = extract_regions(m);
  REQUIRE(rs.size() == 2);
  CHECK(rs[0].area == 225);
  CHECK(rs[1].area == 200);
  const auto& r = rs[1];
  CHECK(r.centroid.x == doctest::Approx(20));
  CHECK(r.centroid.y == doctest::Approx(15));
  CHECK(r.bbox.w == 20);
  CHECK(r.bbox.h == 10);
  CHECK(r.descriptor.extent == doctest::Approx(1.0));
  CHECK(r.descriptor.solidity == doctest::Approx(1.0));
  CHECK(r.descriptor.eccentricity == doctest::Approx(std::sqrt(0.75)));
  CHECK(rs[0].descriptor.eccentricity == doctest::Approx(0.0));
  CHECK(extract_regions(m, 1).size() == 3);
}

TEST_CASE("diagonal pixels join under 8-connectivity") {
  Mask m = blank(10, 10);
  for (int i = 0; i < 10; ++i) m.bits[static_cast<std::size_t>(i) * 10 + i] = 1;
  const auto rs = extract_regions(m, 1);
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].area == 10);
}

TEST_CASE("L-shape solidity below one") {
  Mask m = blank(40, 40);
  fill(m, 0, 0, 30, 10);
  fill(m, 0, 10, 10, 20);
  const auto rs = extract_regions(m);
  REQUIRE(rs.size() == 1);
  // area 500, hull is the square minus a triangle of legs 20: 900 - 200
  CHECK(rs[0].descriptor.solidity == doctest::Approx(500.0 / 700.0));
  CHECK(rs[0].descriptor.extent == doctest::Approx(500.0 / 900.0));
}

TEST_CASE("outlier rejection against the cache") {
  RegionCache cache;
  cache.left = CachedRegion{BoundingBox{100, 100, 40, 40}, {100, 100}, 1000, 5};
  Region near, far, huge;
  near.centroid = {120, 110};
  near.area = 900;
  far.centroid = {250, 100};
  far.area = 1000;
  huge.centroid = {100, 100};
  huge.area = 5000;
  auto kept = reject_outliers({near, far, huge}, cache, 10);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].centroid.x == 120);
  // expired entry -> identity
  kept = reject_outliers({near, far, huge}, cache, 5 + cache.horizon + 1);
  CHECK(kept.size() == 3);
  CHECK(reject_outliers({far}, RegionCache{}, 0).size() == 1);
}

TEST_CASE("template match ties go to the lower class") {
  TemplateBank bank;
  const ShapeDescriptor d{0.5, 0.5, 0.5};
  bank.entries = {{GestureClass::Two, d}, {GestureClass::One, d}};
  Region r;
  r.descriptor = {0.5, 0.5, 0.6};
  const auto m = match_gesture(r, bank);
  CHECK(m.gesture == GestureClass::One);
  CHECK(m.distance == doctest::Approx(0.1));
  CHECK(m.confidence == doctest::Approx(1 / 1.1));
  CHECK_THROWS_AS(match_gesture(r, TemplateBank{}), ConfigError);
}

TEST_CASE("default bank recognizes every noise-free silhouette") {
  const auto cfg = default_gesture_config();
  CHECK(cfg.bank.entries.size() == 10);
  for (GestureClass g : kAllGestures) {
    RegionCache cache;
    CAPTURE(to_string(g));
    const auto t = recognize_pair(hands(g, std::nullopt), 0, cache, cfg);
    REQUIRE(t.left);
    CHECK(t.left->gesture == g);
    CHECK(t.left->confidence == doctest::Approx(1.0));
    CHECK_FALSE(t.right);
  }
}

TEST_CASE("sides follow the person's hands") {
  const auto cfg = default_gesture_config();
  RegionCache cache;
  auto t = recognize_pair(hands(GestureClass::Three, GestureClass::Left), 0, cache, cfg);
  REQUIRE(t.left);
  REQUIRE(t.right);
  CHECK(t.left->gesture == GestureClass::Three);
  CHECK(t.right->gesture == GestureClass::Left);
  REQUIRE(cache.left);
  CHECK(cache.left->centroid.x > 160);
  REQUIRE(cache.right);
  CHECK(cache.right->centroid.x < 160);

  RegionCache fresh;
  t = recognize_pair(hands(std::nullopt, GestureClass::Ok), 0, fresh, cfg);
  CHECK_FALSE(t.left);
  REQUIRE(t.right);
  CHECK(t.right->gesture == GestureClass::Ok);

  t = recognize_pair(hands(std::nullopt, std::nullopt), 0, fresh, cfg);
  CHECK(t.pair() == GesturePair{});
}

TEST_CASE("recognizers") {
  ShapeRecognizer shape(default_gesture_config());
  Frame f = hands(GestureClass::Pic, GestureClass::Pic);
  f.index = 3;
  const auto t = shape.recognize(f);
  CHECK(t.frame == 3);
  CHECK(t.pair() == GesturePair{GestureClass::Pic, GestureClass::Pic});
  CHECK(shape.cache().left->frame == 3);

  GestureConfig empty;
  CHECK_THROWS_AS(ShapeRecognizer{empty}, ConfigError);

  OracleRecognizer oracle({{GestureClass::Zero, GestureClass::Zero}, {}});
  Frame g = Frame::rgb(4, 4);
  g.index = 0;
  CHECK(oracle.recognize(g).pair() == GesturePair{GestureClass::Zero, GestureClass::Zero});
  g.index = 7;
  CHECK(oracle.recognize(g).pair() == GesturePair{});
}

TEST_CASE("gesture names round trip") {
  for (GestureClass g : kAllGestures) CHECK(parse_gesture(to_string(g)) == g);
  CHECK_FALSE(parse_gesture("six"));
}
