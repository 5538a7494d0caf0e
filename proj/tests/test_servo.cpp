#include <cmath>
#include <random>

#include "doctest.h"

#include "diverlink/errors.hpp"
#include "diverlink/servo.hpp"

using namespace diverlink;

TEST_CASE("bbox error") {
  auto e = bbox_error({160, 120, 100, 76.8}, 320, 240, 0.1);
  CHECK(e.ex == 0.0);
  CHECK(e.ey == 0.0);
  CHECK(e.ea == doctest::Approx(0.0));
  CHECK(bbox_error({320, 120, 10, 10}, 320, 240, 0.1).ex == 1.0);
  CHECK(bbox_error({160, 0, 10, 10}, 320, 240, 0.1).ey == -1.0);
  CHECK(bbox_error({160, 120, 0.05 * 320, 240}, 320, 240, 0.1).ea == doctest::Approx(0.05));
}

TEST_CASE("servo step") {
  PidBank zero(ServoGains{});
  const auto c = servo_step({}, zero, 0.1);
  CHECK(c.max_abs() == 0.0);

  ServoGains p;
  p.yaw = {1, 0, 0, 1};
  PidBank bank(p);
  for (int k = 0; k < 5; ++k) CHECK(servo_step({0.5, 0, 0}, bank, 0.1).yaw_rate == doctest::Approx(0.5));
  PidBank signs(p);
  CHECK(servo_step({0.2, 0, 0}, signs, 0.1).yaw_rate > 0);
  CHECK_THROWS_AS(servo_step({}, signs, 0.0), ArgumentError);
}

TEST_CASE("kinematics") {
  const SpeedScales unit{1.0, std::numbers::pi / 4};
  RobotState s;
  auto n = kinematic_step(s, {}, 0.5, unit);
  CHECK(n.position.x == 0.0);
  CHECK(n.yaw == 0.0);
  CHECK(n.time == 0.5);
  n = kinematic_step(s, {0, 0, 1.0, 0}, 1.0, unit);
  CHECK(std::abs(n.position.x - 1.0) < 1e-9);
  CHECK(n.position.y == 0.0);
  n = kinematic_step(s, {1.0, 0, 0, 0}, 1.0, unit);
  CHECK(n.yaw == doctest::Approx(std::numbers::pi / 4));
  s.pitch = kPitchLimit - 0.01;
  CHECK(kinematic_step(s, {0, 1.0, 0, 0}, 1.0, unit).pitch == kPitchLimit);
  n = kinematic_step({}, {0, 0, 0, -1.0}, 1.0, unit);
  CHECK(n.position.z == -1.0);
}

TEST_CASE("anti-windup bounds recovery after saturation") {
  const ServoGains g;
  Pid pid(g.yaw);
  for (int k = 0; k < 100; ++k) CHECK(pid.update(5.0, 0.1) == 1.0);
  CHECK(pid.integral() == g.yaw.integral_clamp);
  int crossed = -1;
  for (int k = 0; k < 20 && crossed < 0; ++k)
    if (pid.update(-0.3, 0.1) < 0.0) crossed = k;
  CHECK(crossed >= 0);
}

TEST_CASE("commands stay clamped under fuzz") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> big(-1e6, 1e6);
  std::uniform_real_distribution<double> dts(1e-4, 2.0);
  ServoGains g;
  g.yaw = {50, 20, 10, 100};
  g.forward = {-30, 5, 40, 10};
  PidBank bank(g);
  for (int k = 0; k < 5000; ++k) {
    ImageError e{big(rng), big(rng), big(rng)};
    if (k % 97 == 0) e.ex = std::nan("");
    if (k % 89 == 0) e.ea = std::numeric_limits<double>::infinity();
    const auto c = servo_step(e, bank, dts(rng));
    CHECK(c.max_abs() <= 1.0);
    CHECK_FALSE(std::isnan(c.yaw_rate));
  }
  CHECK(ServoCommand{3, -4, std::nan(""), 0.5}.clamped().max_abs() == 1.0);
}

TEST_CASE("projection places the diver where asked") {
  const Camera cam;
  RobotState r;
  r.yaw = 0.3;
  r.pitch = -0.2;
  const auto d = diver_at_image_offset(r, cam, 0.3, -0.2, 0.1);
  const auto b = project_diver(r, d, cam);
  REQUIRE(b);
  const auto e = bbox_error(*b, cam.width, cam.height, 0.1);
  CHECK(e.ex == doctest::Approx(0.3));
  CHECK(e.ey == doctest::Approx(-0.2));
  CHECK(e.ea == doctest::Approx(0.0).epsilon(1e-9));
  RobotState behind = r;
  behind.yaw += std::numbers::pi;
  CHECK_FALSE(project_diver(behind, d, cam));
}

TEST_CASE("lost diver: command decays geometrically") {
  const Camera cam;
  const auto diver = diver_at_image_offset({}, cam, 0.3, 0.0, 0.1);
  DropoutDetector det(30);
  FollowSettings s;
  s.seconds = 6;
  const auto log = follow_loop(diver, det, ServoGains{}, s);
  REQUIRE(log.size() == 60);
  CHECK(log[29].detected);
  CHECK_FALSE(log[30].detected);
  CHECK(log[30].command.yaw_rate == doctest::Approx(log[29].command.yaw_rate * 0.8));
  CHECK(log[29 + 21].command.max_abs() < 0.01);
}

TEST_CASE("centered diver: zero-error hold") {
  const Camera cam;
  const auto diver = diver_at_image_offset({}, cam, 0.0, 0.0, 0.1);
  TruthDetector det;
  const auto log = follow_loop(diver, det, ServoGains{}, {});
  double lo = 0, hi = 0;
  for (const auto& row : log) {
    lo = std::min(lo, row.state.yaw);
    hi = std::max(hi, row.state.yaw);
  }
  CHECK(hi - lo < 0.01);
}

TEST_CASE("closed loop converges from each offset") {
  const Camera cam;
  const ServoGains g;
  for (auto [ox, oy] : {std::pair{0.3, 0.0}, {-0.3, 0.0}, {0.0, 0.3}, {0.0, -0.3}}) {
    CAPTURE(ox);
    CAPTURE(oy);
    const auto diver = diver_at_image_offset({}, cam, ox, oy, g.target_area_fraction);
    TruthDetector det;
    const auto log = follow_loop(diver, det, g, {});
    REQUIRE(log.size() == 100);
    const auto& last = log.back();
    REQUIRE(last.detected);
    CHECK(std::abs(last.error.ex) < 0.05);
    CHECK(std::abs(last.error.ey) < 0.05);
    CHECK(std::abs(last.error.ea) <= 0.1 * g.target_area_fraction);
    for (const auto& row : log) CHECK(row.command.max_abs() <= 1.0);
  }
}

TEST_CASE("invalid gains") {
  CHECK_THROWS_AS(Pid(PidGains{1, 0, 0, 0}), ConfigError);
  CHECK_THROWS_AS(diver_at_image_offset({}, Camera{}, 0, 0, 0.0), ArgumentError);
}
