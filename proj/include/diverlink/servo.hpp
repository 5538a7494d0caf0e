#pragma once

// Visual-servoing follow controller. Bounding-box image error drives four
// PID loops (yaw, pitch, vertical, forward); a toy kinematic robot with a
// pinhole camera closes the loop in simulation. Roll is left to an autopilot
// and is not modelled.

#include <array>
#include <memory>
#include <numbers>
#include <optional>
#include <vector>

#include "diverlink/core.hpp"

namespace diverlink {

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  double integral_clamp = 1.0;  // |integral| bound (anti-windup)
};

/// Output is always clamped to [-1, 1].
class Pid {
 public:
  explicit Pid(PidGains gains = {});
  double update(double error, double dt);
  void reset();
  [[nodiscard]] double integral() const noexcept { return integral_; }
  [[nodiscard]] const PidGains& gains() const noexcept { return gains_; }

 private:
  PidGains gains_;
  double integral_ = 0.0;
  double prev_error_ = 0.0;
  bool has_prev_ = false;
};

struct ServoGains {
  PidGains yaw{0.8, 0.05, 0.1, 1.0};
  PidGains pitch{0.8, 0.05, 0.1, 1.0};
  PidGains vertical{0.3, 0.0, 0.0, 1.0};
  PidGains forward{1.5, 0.1, 0.0, 1.0};
  double target_area_fraction = 0.1;
  double v_max = 0.5;                             // m/s at command 1.0
  double omega_max = std::numbers::pi / 4.0;      // rad/s at command 1.0
};

struct ImageError {
  double ex = 0.0;  // +1 at the right edge
  double ey = 0.0;  // +1 at the bottom edge
  double ea = 0.0;  // target area fraction minus observed
};

ImageError bbox_error(const BoundingBox& bbox, int frame_w, int frame_h, double target_area_fraction);

struct ServoCommand {
  double yaw_rate = 0.0;
  double pitch_rate = 0.0;
  double forward_speed = 0.0;
  double vertical_speed = 0.0;

  [[nodiscard]] ServoCommand clamped() const;
  [[nodiscard]] ServoCommand scaled(double factor) const;
  [[nodiscard]] double max_abs() const;
};

class PidBank {
 public:
  explicit PidBank(const ServoGains& gains);
  Pid yaw;
  Pid pitch;
  Pid vertical;
  Pid forward;
};

/// yaw <- ex, pitch <- ey, vertical <- ey, forward <- ea.
ServoCommand servo_step(const ImageError& err, PidBank& pids, double dt);

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// World frame: x forward at yaw 0, y to the right, z down (depth).
/// Positive yaw turns right, positive pitch noses down.
struct RobotState {
  Vec3 position;
  double yaw = 0.0;
  double pitch = 0.0;
  double time = 0.0;
};

inline constexpr double kPitchLimit = std::numbers::pi / 3.0;

struct SpeedScales {
  double v_max = 0.5;
  double omega_max = std::numbers::pi / 4.0;
};

/// Forward Euler step. Forward speed moves along the horizontal heading,
/// vertical speed moves along z.
RobotState kinematic_step(const RobotState& state, const ServoCommand& cmd, double dt, const SpeedScales& scales);

struct Camera {
  int width = 320;
  int height = 240;
  double focal_px = 277.0;  // about 60 degrees horizontal field of view
};

struct DiverModel {
  Vec3 start;
  Vec3 velocity;  // m/s
  double width_m = 0.8;
  double height_m = 0.6;

  [[nodiscard]] Vec3 position(double t) const {
    return {start.x + velocity.x * t, start.y + velocity.y * t, start.z + velocity.z * t};
  }
};

/// Pinhole projection of the diver's extent; nullopt when behind the camera
/// or entirely outside the image.
std::optional<BoundingBox> project_diver(const RobotState& robot, const DiverModel& diver, const Camera& cam);

/// Diver placed so that, seen from `robot`, its box center sits at normalized
/// image offset (ox, oy) and its area fraction equals `area_fraction`.
DiverModel diver_at_image_offset(const RobotState& robot, const Camera& cam, double ox, double oy, double area_fraction,
                                 double width_m = 0.8, double height_m = 0.6);

class BoxDetector {
 public:
  virtual ~BoxDetector() = default;
  virtual std::optional<BoundingBox> detect(const RobotState& robot, const DiverModel& diver, const Camera& cam,
                                            int frame) = 0;
};

/// Exact projection of the simulated diver.
class TruthDetector final : public BoxDetector {
 public:
  std::optional<BoundingBox> detect(const RobotState& robot, const DiverModel& diver, const Camera& cam,
                                    int frame) override;
};

/// Truth detections until `lost_after` frames, nothing afterwards.
class DropoutDetector final : public BoxDetector {
 public:
  explicit DropoutDetector(int lost_after) : lost_after_(lost_after) {}
  std::optional<BoundingBox> detect(const RobotState& robot, const DiverModel& diver, const Camera& cam,
                                    int frame) override;

 private:
  int lost_after_;
  TruthDetector truth_;
};

inline constexpr double kMissedDetectionDecay = 0.8;

struct FollowLogRow {
  RobotState state;  // after the step
  ImageError error;
  ServoCommand command;
  bool detected = false;
  std::optional<BoundingBox> bbox;
};

struct FollowSettings {
  double fps = 10.0;
  double seconds = 10.0;
  Camera camera;
};

/// detect -> error -> servo_step -> kinematic_step at dt = 1/fps. A missed
/// detection repeats the previous command scaled by kMissedDetectionDecay.
std::vector<FollowLogRow> follow_loop(const DiverModel& diver, BoxDetector& detector, const ServoGains& gains,
                                      const FollowSettings& settings, RobotState start = {});

}  // namespace diverlink
