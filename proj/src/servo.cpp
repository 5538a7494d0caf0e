#include "diverlink/servo.hpp"

#include <algorithm>
#include <cmath>

#include "diverlink/errors.hpp"

namespace diverlink {

Pid::Pid(PidGains gains) : gains_(gains) {
  if (!(gains_.integral_clamp > 0.0)) throw ConfigError("PID integral clamp must be positive");
}

double Pid::update(double error, double dt) {
  if (!(dt > 0.0)) throw ArgumentError("PID dt must be positive");
  if (std::isnan(error)) return 0.0;  // keep the integrator clean
  integral_ = std::clamp(integral_ + error * dt, -gains_.integral_clamp, gains_.integral_clamp);
  const double derivative = has_prev_ ? (error - prev_error_) / dt : 0.0;
  prev_error_ = error;
  has_prev_ = true;
  const double out = gains_.kp * error + gains_.ki * integral_ + gains_.kd * derivative;
  if (std::isnan(out)) return 0.0;
  return std::clamp(out, -1.0, 1.0);
}

void Pid::reset() {
  integral_ = 0.0;
  prev_error_ = 0.0;
  has_prev_ = false;
}

ImageError bbox_error(const BoundingBox& bbox, int frame_w, int frame_h, double target_area_fraction) {
  const double hw = frame_w / 2.0;
  const double hh = frame_h / 2.0;
  return {(bbox.cx - hw) / hw, (bbox.cy - hh) / hh,
          target_area_fraction - bbox.area() / (static_cast<double>(frame_w) * frame_h)};
}

ServoCommand ServoCommand::clamped() const {
  const auto c = [](double v) { return std::isnan(v) ? 0.0 : std::clamp(v, -1.0, 1.0); };
  return {c(yaw_rate), c(pitch_rate), c(forward_speed), c(vertical_speed)};
}

ServoCommand ServoCommand::scaled(double factor) const {
  return ServoCommand{yaw_rate * factor, pitch_rate * factor, forward_speed * factor, vertical_speed * factor}.clamped();
}

double ServoCommand::max_abs() const {
  return std::max({std::abs(yaw_rate), std::abs(pitch_rate), std::abs(forward_speed), std::abs(vertical_speed)});
}

PidBank::PidBank(const ServoGains& gains)
    : yaw(gains.yaw), pitch(gains.pitch), vertical(gains.vertical), forward(gains.forward) {}

ServoCommand servo_step(const ImageError& err, PidBank& pids, double dt) {
  ServoCommand cmd;
  cmd.yaw_rate = pids.yaw.update(err.ex, dt);
  cmd.pitch_rate = pids.pitch.update(err.ey, dt);
  cmd.vertical_speed = pids.vertical.update(err.ey, dt);
  cmd.forward_speed = pids.forward.update(err.ea, dt);
  return cmd.clamped();
}

RobotState kinematic_step(const RobotState& state, const ServoCommand& cmd, double dt, const SpeedScales& scales) {
  if (!(dt > 0.0)) throw ArgumentError("kinematic dt must be positive");
  RobotState next = state;
  next.yaw = state.yaw + cmd.yaw_rate * scales.omega_max * dt;
  next.pitch = std::clamp(state.pitch + cmd.pitch_rate * scales.omega_max * dt, -kPitchLimit, kPitchLimit);
  const double step = cmd.forward_speed * scales.v_max * dt;
  next.position.x = state.position.x + step * std::cos(state.yaw);
  next.position.y = state.position.y + step * std::sin(state.yaw);
  next.position.z = state.position.z + cmd.vertical_speed * scales.v_max * dt;
  next.time = state.time + dt;
  return next;
}

namespace {

struct CameraAxes {
  Vec3 forward;
  Vec3 right;
  Vec3 down;
};

CameraAxes axes(const RobotState& r) {
  const double cy = std::cos(r.yaw), sy = std::sin(r.yaw);
  const double cp = std::cos(r.pitch), sp = std::sin(r.pitch);
  return {{cp * cy, cp * sy, sp}, {-sy, cy, 0.0}, {-sp * cy, -sp * sy, cp}};
}

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

}  // namespace

std::optional<BoundingBox> project_diver(const RobotState& robot, const DiverModel& diver, const Camera& cam) {
  const Vec3 p = diver.position(robot.time);
  const Vec3 d{p.x - robot.position.x, p.y - robot.position.y, p.z - robot.position.z};
  const CameraAxes ax = axes(robot);
  const double zc = dot(d, ax.forward);
  if (zc <= 0.05) return std::nullopt;
  const double u = cam.width / 2.0 + cam.focal_px * dot(d, ax.right) / zc;
  const double v = cam.height / 2.0 + cam.focal_px * dot(d, ax.down) / zc;
  const double w = cam.focal_px * diver.width_m / zc;
  const double h = cam.focal_px * diver.height_m / zc;
  if (u + w / 2 <= 0.0 || u - w / 2 >= cam.width || v + h / 2 <= 0.0 || v - h / 2 >= cam.height) return std::nullopt;
  return BoundingBox{u, v, w, h, 1.0}.clamped(cam.width, cam.height);
}

DiverModel diver_at_image_offset(const RobotState& robot, const Camera& cam, double ox, double oy, double area_fraction,
                                 double width_m, double height_m) {
  if (!(area_fraction > 0.0)) throw ArgumentError("area fraction must be positive");
  const double zc = cam.focal_px * std::sqrt(width_m * height_m / (area_fraction * cam.width * cam.height));
  const double xc = ox * (cam.width / 2.0) * zc / cam.focal_px;
  const double yc = oy * (cam.height / 2.0) * zc / cam.focal_px;
  const CameraAxes ax = axes(robot);
  DiverModel m;
  m.width_m = width_m;
  m.height_m = height_m;
  m.start = {robot.position.x + zc * ax.forward.x + xc * ax.right.x + yc * ax.down.x,
             robot.position.y + zc * ax.forward.y + xc * ax.right.y + yc * ax.down.y,
             robot.position.z + zc * ax.forward.z + xc * ax.right.z + yc * ax.down.z};
  return m;
}

std::optional<BoundingBox> TruthDetector::detect(const RobotState& robot, const DiverModel& diver, const Camera& cam,
                                                 int /*frame*/) {
  return project_diver(robot, diver, cam);
}

std::optional<BoundingBox> DropoutDetector::detect(const RobotState& robot, const DiverModel& diver, const Camera& cam,
                                                   int frame) {
  if (frame >= lost_after_) return std::nullopt;
  return truth_.detect(robot, diver, cam, frame);
}

std::vector<FollowLogRow> follow_loop(const DiverModel& diver, BoxDetector& detector, const ServoGains& gains,
                                      const FollowSettings& settings, RobotState start) {
  if (!(settings.fps > 0.0) || !(settings.seconds > 0.0)) throw ArgumentError("follow loop needs fps > 0 and seconds > 0");
  const double dt = 1.0 / settings.fps;
  const int steps = static_cast<int>(std::lround(settings.seconds * settings.fps));
  const SpeedScales scales{gains.v_max, gains.omega_max};
  PidBank pids(gains);
  RobotState state = start;
  ServoCommand last;
  std::vector<FollowLogRow> log;
  log.reserve(steps);
  for (int k = 0; k < steps; ++k) {
    FollowLogRow row;
    row.bbox = detector.detect(state, diver, settings.camera, k);
    row.detected = row.bbox.has_value();
    if (row.bbox) {
      row.error = bbox_error(*row.bbox, settings.camera.width, settings.camera.height, gains.target_area_fraction);
      row.command = servo_step(row.error, pids, dt);
    } else {
      row.command = last.scaled(kMissedDetectionDecay);
    }
    last = row.command;
    state = kinematic_step(state, row.command, dt, scales);
    row.state = state;
    log.push_back(row);
  }
  return log;
}

}  // namespace diverlink
