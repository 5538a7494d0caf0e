#pragma once

// Mixed Domain Periodic Motion tracker.
//
// A detection cycle covers T frames. Each frame is reduced to an evidence
// vector of M window intensities. A log-domain Viterbi pass over the window
// grid (one hidden state per window) prunes the M^T candidate trajectories to
// the p best terminal windows; each surviving trajectory's intensity series is
// transformed with a direct DFT and scored by its peak amplitude inside the
// flipper-gait band. The best-scoring trajectory is reported as a detection
// when its score reaches delta.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "diverlink/core.hpp"

namespace diverlink {

/// Numeric distance from x to the closed interval R (0 inside).
double intensity_distance(double x, const IntensityRange& range);

/// log P(e | window holds flipper): log(1-eps) inside R, log(eps) outside.
double evidence_loglik(double intensity, const MdpmConfig& cfg);

/// Unnormalized flipper-presence weight 1 / (1 + Dist(intensity, R)).
/// Only seeds the table before the first frame of a cycle.
double evidence_prior(double intensity, const MdpmConfig& cfg);

/// Row-normalized log transition weights between grid windows. Raw weight is
/// 1 / (1 + euclidean center distance in px).
class TransitionModel {
 public:
  explicit TransitionModel(const GridConfig& grid);

  [[nodiscard]] int size() const noexcept { return m_; }
  [[nodiscard]] double log_weight(int from, int to) const noexcept {
    return log_w_[static_cast<std::size_t>(from) * m_ + to];
  }
  [[nodiscard]] static double raw_weight(const GridConfig& grid, int from, int to);

 private:
  int m_;
  std::vector<double> log_w_;
};

/// Convenience form computing a single normalized entry from scratch.
double transition_logweight(int from, int to, const GridConfig& grid);

/// Dynamic-programming state of one detection cycle.
///
/// log_mu[j] is the best log path score over trajectories ending at window j
/// after `cycle_t` frames. `backptr` stores, per processed frame, the argmax
/// predecessor of every window. Before the first frame log_mu holds the
/// normalized log prior, which acts as the predecessor distribution of frame 0.
struct HmmTables {
  int windows = 0;   // M
  int capacity = 0;  // T
  int cycle_t = 0;
  std::vector<double> log_mu;
  std::vector<int> backptr;  // capacity x windows, row per frame
  std::uint64_t transition_evaluations = 0;

  /// Seeds log_mu from the evidence prior of the cycle's first frame.
  static HmmTables initialize(std::span<const double> first_evidence, const MdpmConfig& cfg, int capacity);

  [[nodiscard]] int predecessor(int t, int window) const {
    return backptr[static_cast<std::size_t>(t) * windows + window];
  }
};

/// Candidates closer than this in log score count as tied. Sums that are
/// equal in exact arithmetic can differ by a few ulps in floating point.
inline constexpr double kLogTieTolerance = 1e-12;

/// One Viterbi step: new_mu[j] = loglik(e[j]) + max_i(logA(i,j) + mu[i]).
/// Examines exactly M^2 (i, j) pairs; ties (within kLogTieTolerance) pick
/// the lowest i.
/// Throws StateError once `capacity` frames have been consumed.
void viterbi_update(HmmTables& tables, std::span<const double> evidence, const MdpmConfig& cfg,
                    const TransitionModel& transitions);

struct ScoredTrajectory {
  TrajectoryVector trajectory;
  double log_score = 0.0;
};

/// The min(p, M) best terminal windows with their backtracked trajectories,
/// by descending score (ties: lower terminal index).
std::vector<ScoredTrajectory> top_p_trajectories(const HmmTables& tables, int p);

struct Spectrum {
  std::vector<std::complex<double>> bins;
};

/// Direct O(T^2) DFT with N = T. Adds T*T to `term_counter` when given.
Spectrum dtft(std::span<const double> series, std::uint64_t* term_counter = nullptr);

/// Integer bins k in [1, T-1] whose frequency k*fps/T lies in the band.
/// Throws ConfigError when none exists.
std::vector<int> band_bins(int slide, const MdpmConfig& cfg);

/// Peak |X[k]| over the band bins. The DC bin never participates.
double band_score(const Spectrum& spectrum, const MdpmConfig& cfg);

struct DetectionResult {
  TrajectoryVector trajectory;
  double score = 0.0;
  bool detected = false;
  BoundingBox bbox;
  int cycle_index = 0;
  std::int64_t last_frame = 0;  // frame index of trajectory[T-1]

  [[nodiscard]] int window() const { return trajectory.windows.back(); }
  friend bool operator==(const DetectionResult& a, const DetectionResult& b) {
    return a.trajectory == b.trajectory && a.score == b.score && a.detected == b.detected &&
           a.bbox.cx == b.bbox.cx && a.bbox.cy == b.bbox.cy && a.bbox.w == b.bbox.w && a.bbox.h == b.bbox.h &&
           a.bbox.score == b.bbox.score && a.cycle_index == b.cycle_index && a.last_frame == b.last_frame;
  }
};

struct WorkCounters {
  std::uint64_t transition_evaluations = 0;
  std::uint64_t dft_terms = 0;
  std::uint64_t cycles = 0;
};

/// Stateful across cycles only through the cycle counter and work counters.
/// Not thread-safe; use one instance per stream.
class MdpmTracker {
 public:
  MdpmTracker(GridConfig grid, MdpmConfig cfg);

  [[nodiscard]] const GridConfig& grid() const noexcept { return grid_; }
  [[nodiscard]] const MdpmConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const WorkCounters& counters() const noexcept { return counters_; }

  /// Runs one cycle over exactly T frames. RGB frames are converted with
  /// luminance() first.
  DetectionResult run_detection_cycle(std::span<const Frame> frames);

  /// Same as above on precomputed evidence vectors (one per frame).
  DetectionResult run_detection_cycle(std::span<const std::vector<double>> evidence, std::int64_t last_frame);

  /// Bootstraps on the first T frames, then one cycle every stride frames.
  std::vector<DetectionResult> track_sequence(std::span<const Frame> frames);

  /// Number of cycles track_sequence produces for a sequence of n frames.
  [[nodiscard]] int cycle_count(int n_frames) const;

 private:
  GridConfig grid_;
  MdpmConfig cfg_;
  TransitionModel transitions_;
  std::vector<int> bins_;
  int next_cycle_ = 0;
  WorkCounters counters_;
};

/// MdpmTracker over a frame geometry with the config's window size.
MdpmTracker make_tracker(int frame_w, int frame_h, const MdpmConfig& cfg);

}  // namespace diverlink
