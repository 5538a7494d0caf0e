#pragma once

// Independent brute-force references used by unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "diverlink/core.hpp"
#include "diverlink/mdpm.hpp"

namespace oracle {

using diverlink::GridConfig;
using diverlink::MdpmConfig;

/// Direct 2-D convolution with the product of two truncated Gaussians,
/// renormalized, clamp-to-edge sampling.
inline std::vector<double> blur2d(const std::vector<double>& img, int w, int h, double sigma) {
  if (sigma <= 0.0) return img;
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> out(img.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0, norm = 0.0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const double g = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
          const int sx = std::clamp(x + dx, 0, w - 1);
          const int sy = std::clamp(y + dy, 0, h - 1);
          acc += g * img[static_cast<std::size_t>(sy) * w + sx];
          norm += g;
        }
      out[static_cast<std::size_t>(y) * w + x] = acc / norm;
    }
  return out;
}

/// Textbook DFT evaluated with the unreduced phase 2*pi*t*k/N.
inline std::vector<std::complex<double>> dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> X(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t t = 0; t < n; ++t)
      X[k] += x[t] * std::exp(std::complex<double>(0.0, -2.0 * std::numbers::pi * double(t * k) / double(n)));
  return X;
}

inline double log_transition(const GridConfig& g, int i, int j) {
  const auto raw = [&](int a, int b) {
    const auto ca = g.window_center(a);
    const auto cb = g.window_center(b);
    return 1.0 / (1.0 + std::hypot(ca.x - cb.x, ca.y - cb.y));
  };
  double sum = 0.0;
  for (int k = 0; k < g.count(); ++k) sum += raw(i, k);
  return std::log(raw(i, j) / sum);
}

struct Path {
  std::vector<int> windows;
  double score = 0.0;
};

/// Every one of the M^T trajectories scored as
///   max_i(logprior_i + logA(i, v0)) + loglik(e0[v0]) + sum_t (logA(v_{t-1}, v_t) + loglik(e_t[v_t])),
/// accumulated left to right. For each terminal window the best path is
/// kept; ties (scores within kLogTieTolerance) go to the path that is
/// smallest when read from v[T-2] backwards (the lower-predecessor rule
/// applied at every step).
/// Returns the min(p, M) best terminals, sorted by descending score then
/// terminal index.
inline std::vector<Path> exhaustive_top_p(const std::vector<std::vector<double>>& ev, const MdpmConfig& cfg,
                                          const GridConfig& g, int p) {
  const int M = g.count();
  const int T = static_cast<int>(ev.size());
  const auto ll = [&](double v) { return (v >= cfg.range.lo && v <= cfg.range.hi) ? std::log(1 - cfg.epsilon) : std::log(cfg.epsilon); };
  std::vector<double> prior(M);
  double total = 0.0;
  for (int i = 0; i < M; ++i) {
    const double x = ev[0][i];
    const double d = x < cfg.range.lo ? cfg.range.lo - x : x > cfg.range.hi ? x - cfg.range.hi : 0.0;
    prior[i] = 1.0 / (1.0 + d);
    total += prior[i];
  }
  for (double& v : prior) v = std::log(v / total);

  std::vector<std::vector<double>> A(M, std::vector<double>(M));
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) A[i][j] = log_transition(g, i, j);

  constexpr double tol = diverlink::kLogTieTolerance;
  std::vector<double> start(M);
  for (int j = 0; j < M; ++j) {
    double best = A[0][j] + prior[0];
    for (int i = 1; i < M; ++i)
      if (A[i][j] + prior[i] > best + tol) best = A[i][j] + prior[i];
    start[j] = best + ll(ev[0][j]);
  }

  const auto rev_less = [&](const std::vector<int>& a, const std::vector<int>& b) {
    for (int t = T - 2; t >= 0; --t)
      if (a[t] != b[t]) return a[t] < b[t];
    return false;
  };

  std::vector<Path> best(M);
  std::vector<bool> seen(M, false);
  std::vector<int> v(T, 0);
  std::uint64_t total_paths = 1;
  for (int t = 0; t < T; ++t) total_paths *= static_cast<std::uint64_t>(M);
  for (std::uint64_t code = 0; code < total_paths; ++code) {
    std::uint64_t c = code;
    for (int t = 0; t < T; ++t) {
      v[t] = static_cast<int>(c % M);
      c /= M;
    }
    double s = start[v[0]];
    for (int t = 1; t < T; ++t) s = (A[v[t - 1]][v[t]] + s) + ll(ev[t][v[t]]);
    const int j = v[T - 1];
    if (!seen[j] || s > best[j].score + tol ||
        (std::abs(s - best[j].score) <= tol && rev_less(v, best[j].windows))) {
      best[j] = {v, s};
      seen[j] = true;
    }
  }
  std::vector<int> order(M);
  for (int j = 0; j < M; ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return best[a].score > best[b].score; });
  std::vector<Path> out;
  for (int k = 0; k < std::min(p, M); ++k) out.push_back(best[order[k]]);
  return out;
}

/// Random evidence with a mix of in-range and out-of-range intensities plus
/// exact boundary values so that ties actually occur.
inline std::vector<std::vector<double>> random_evidence(std::mt19937_64& rng, int T, int M) {
  std::uniform_real_distribution<double> u(0.0, 255.0);
  std::uniform_int_distribution<int> pick(0, 5);
  std::vector<std::vector<double>> ev(T, std::vector<double>(M));
  for (auto& row : ev)
    for (auto& x : row) {
      const int k = pick(rng);
      x = k == 0 ? 180.0 : k == 1 ? 60.0 : u(rng);
    }
  return ev;
}

}  // namespace oracle
