#include "diverlink/mdpm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "diverlink/errors.hpp"

namespace diverlink {

double intensity_distance(double x, const IntensityRange& range) {
  if (range.contains(x)) return 0.0;
  return std::min(std::abs(x - range.lo), std::abs(x - range.hi));
}

double evidence_loglik(double intensity, const MdpmConfig& cfg) {
  return cfg.range.contains(intensity) ? std::log(1.0 - cfg.epsilon) : std::log(cfg.epsilon);
}

double evidence_prior(double intensity, const MdpmConfig& cfg) {
  return 1.0 / (1.0 + intensity_distance(intensity, cfg.range));
}

double TransitionModel::raw_weight(const GridConfig& grid, int from, int to) {
  const Point2 a = grid.window_center(from);
  const Point2 b = grid.window_center(to);
  return 1.0 / (1.0 + std::hypot(a.x - b.x, a.y - b.y));
}

TransitionModel::TransitionModel(const GridConfig& grid) : m_(grid.count()) {
  log_w_.resize(static_cast<std::size_t>(m_) * m_);
  std::vector<double> row(m_);
  for (int i = 0; i < m_; ++i) {
    double sum = 0.0;
    for (int j = 0; j < m_; ++j) {
      row[j] = raw_weight(grid, i, j);
      sum += row[j];
    }
    for (int j = 0; j < m_; ++j) log_w_[static_cast<std::size_t>(i) * m_ + j] = std::log(row[j] / sum);
  }
}

double transition_logweight(int from, int to, const GridConfig& grid) {
  (void)grid.window_rect(from);
  (void)grid.window_rect(to);
  double sum = 0.0;
  for (int j = 0; j < grid.count(); ++j) sum += TransitionModel::raw_weight(grid, from, j);
  return std::log(TransitionModel::raw_weight(grid, from, to) / sum);
}

HmmTables HmmTables::initialize(std::span<const double> first_evidence, const MdpmConfig& cfg, int capacity) {
  if (first_evidence.empty()) throw ArgumentError("evidence vector is empty");
  if (capacity < 1) throw ArgumentError("table capacity must be >= 1");
  HmmTables t;
  t.windows = static_cast<int>(first_evidence.size());
  t.capacity = capacity;
  t.log_mu.resize(t.windows);
  t.backptr.assign(static_cast<std::size_t>(capacity) * t.windows, 0);
  double total = 0.0;
  for (int i = 0; i < t.windows; ++i) {
    t.log_mu[i] = evidence_prior(first_evidence[i], cfg);
    total += t.log_mu[i];
  }
  for (double& v : t.log_mu) v = std::log(v / total);
  return t;
}

void viterbi_update(HmmTables& tables, std::span<const double> evidence, const MdpmConfig& cfg,
                    const TransitionModel& transitions) {
  if (tables.cycle_t >= tables.capacity) {
    throw StateError("HMM table already holds " + std::to_string(tables.capacity) + " frames");
  }
  const int m = tables.windows;
  if (static_cast<int>(evidence.size()) != m || transitions.size() != m) {
    throw ArgumentError("evidence/transition size does not match table window count");
  }
  std::vector<double> next(m);
  int* back = tables.backptr.data() + static_cast<std::size_t>(tables.cycle_t) * m;
  for (int j = 0; j < m; ++j) {
    int best_i = 0;
    double best = transitions.log_weight(0, j) + tables.log_mu[0];
    for (int i = 1; i < m; ++i) {
      const double s = transitions.log_weight(i, j) + tables.log_mu[i];
      if (s > best + kLogTieTolerance) {
        best = s;
        best_i = i;
      }
    }
    next[j] = best + evidence_loglik(evidence[j], cfg);
    back[j] = best_i;
  }
  tables.transition_evaluations += static_cast<std::uint64_t>(m) * m;
  tables.log_mu = std::move(next);
  ++tables.cycle_t;
}

std::vector<ScoredTrajectory> top_p_trajectories(const HmmTables& tables, int p) {
  if (tables.cycle_t < tables.capacity) {
    throw StateError("top_p_trajectories needs " + std::to_string(tables.capacity) + " frames, table has " +
                     std::to_string(tables.cycle_t));
  }
  if (p < 1) throw ArgumentError("pool size must be >= 1");
  std::vector<int> order(tables.windows);
  std::iota(order.begin(), order.end(), 0);
  const auto& mu = tables.log_mu;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return mu[a] > mu[b]; });
  order.resize(std::min<std::size_t>(p, order.size()));

  std::vector<ScoredTrajectory> out;
  out.reserve(order.size());
  const int T = tables.capacity;
  for (int terminal : order) {
    ScoredTrajectory st;
    st.log_score = mu[terminal];
    st.trajectory.windows.resize(T);
    st.trajectory.windows[T - 1] = terminal;
    for (int t = T - 1; t > 0; --t) st.trajectory.windows[t - 1] = tables.predecessor(t, st.trajectory.windows[t]);
    out.push_back(std::move(st));
  }
  return out;
}

Spectrum dtft(std::span<const double> series, std::uint64_t* term_counter) {
  const std::size_t n = series.size();
  if (n == 0) throw ArgumentError("dtft of an empty series");
  Spectrum s;
  s.bins.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t t = 0; t < n; ++t) {
      // (t*k) mod n keeps the phase argument small and exact.
      const double phase = -2.0 * std::numbers::pi * static_cast<double>((t * k) % n) / static_cast<double>(n);
      acc += series[t] * std::polar(1.0, phase);
    }
    s.bins[k] = acc;
  }
  if (term_counter != nullptr) *term_counter += static_cast<std::uint64_t>(n) * n;
  return s;
}

std::vector<int> band_bins(int slide, const MdpmConfig& cfg) {
  std::vector<int> bins;
  for (int k = 1; k < slide; ++k) {
    const double f = k * cfg.fps / slide;
    if (f >= cfg.band.low && f <= cfg.band.high) bins.push_back(k);
  }
  if (bins.empty()) throw ConfigError("frequency band contains no DFT bin for the given T and fps");
  return bins;
}

double band_score(const Spectrum& spectrum, const MdpmConfig& cfg) {
  double best = 0.0;
  for (int k : band_bins(static_cast<int>(spectrum.bins.size()), cfg)) best = std::max(best, std::abs(spectrum.bins[k]));
  return best;
}

MdpmTracker::MdpmTracker(GridConfig grid, MdpmConfig cfg)
    : grid_(grid), cfg_(cfg), transitions_(grid), bins_() {
  cfg_.validate(grid_.count());
  bins_ = band_bins(cfg_.slide, cfg_);
}

DetectionResult MdpmTracker::run_detection_cycle(std::span<const std::vector<double>> evidence,
                                                 std::int64_t last_frame) {
  const int T = cfg_.slide;
  if (static_cast<int>(evidence.size()) != T) {
    throw ArgumentError("detection cycle needs exactly T=" + std::to_string(T) + " evidence vectors");
  }
  HmmTables tables = HmmTables::initialize(evidence.front(), cfg_, T);
  for (const auto& e : evidence) viterbi_update(tables, e, cfg_, transitions_);
  counters_.transition_evaluations += tables.transition_evaluations;

  const auto pool = top_p_trajectories(tables, cfg_.pool);
  DetectionResult best;
  best.score = -1.0;
  std::vector<double> series(T);
  for (const auto& candidate : pool) {
    for (int t = 0; t < T; ++t) series[t] = evidence[t][candidate.trajectory.windows[t]];
    const Spectrum spec = dtft(series, &counters_.dft_terms);
    double score = 0.0;
    for (int k : bins_) score = std::max(score, std::abs(spec.bins[k]));
    if (score > best.score) {
      best.score = score;
      best.trajectory = candidate.trajectory;
    }
  }
  best.detected = best.score >= cfg_.delta;
  const Rect r = grid_.window_rect(best.window());
  best.bbox = BoundingBox{r.x + r.w / 2.0, r.y + r.h / 2.0, static_cast<double>(r.w), static_cast<double>(r.h), best.score};
  best.cycle_index = next_cycle_++;
  best.last_frame = last_frame;
  ++counters_.cycles;
  return best;
}

namespace {

std::vector<double> frame_evidence(const Frame& frame, const GridConfig& grid, double sigma) {
  if (frame.is_gray()) return window_intensities(frame, grid, sigma);
  return window_intensities(luminance(frame), grid, sigma);
}

}  // namespace

DetectionResult MdpmTracker::run_detection_cycle(std::span<const Frame> frames) {
  const int T = cfg_.slide;
  if (static_cast<int>(frames.size()) != T) {
    throw ArgumentError("detection cycle needs exactly T=" + std::to_string(T) + " frames, got " +
                        std::to_string(frames.size()));
  }
  std::vector<std::vector<double>> evidence;
  evidence.reserve(T);
  for (const Frame& f : frames) evidence.push_back(frame_evidence(f, grid_, cfg_.gauss_sigma));
  return run_detection_cycle(evidence, frames.back().index);
}

int MdpmTracker::cycle_count(int n_frames) const {
  if (n_frames < cfg_.slide) return 0;
  return (n_frames - cfg_.slide) / cfg_.effective_stride() + 1;
}

std::vector<DetectionResult> MdpmTracker::track_sequence(std::span<const Frame> frames) {
  const int n = static_cast<int>(frames.size());
  if (n < cfg_.slide) {
    throw ArgumentError("sequence has " + std::to_string(n) + " frames, needs at least T=" + std::to_string(cfg_.slide));
  }
  std::vector<std::vector<double>> evidence;
  evidence.reserve(n);
  for (const Frame& f : frames) evidence.push_back(frame_evidence(f, grid_, cfg_.gauss_sigma));

  std::vector<DetectionResult> results;
  const int cycles = cycle_count(n);
  results.reserve(cycles);
  for (int c = 0; c < cycles; ++c) {
    const int start = c * cfg_.effective_stride();
    std::span<const std::vector<double>> window(evidence.data() + start, cfg_.slide);
    results.push_back(run_detection_cycle(window, frames[start + cfg_.slide - 1].index));
  }
  return results;
}

MdpmTracker make_tracker(int frame_w, int frame_h, const MdpmConfig& cfg) {
  return MdpmTracker(GridConfig(frame_w, frame_h, cfg.window_w, cfg.window_h), cfg);
}

}  // namespace diverlink
