// One PASS/FAIL line per acceptance criterion; exit status is the number of
// failures. Data files come from DIVERLINK_DATA_DIR.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "diverlink/harness.hpp"
#include "oracles.hpp"

using namespace diverlink;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path data_dir() {
  if (const char* env = std::getenv("DIVERLINK_DATA_DIR")) return env;
  return DIVERLINK_DATA_DIR;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("diverlink_accept_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// [1] Viterbi top-p against exhaustive enumeration.
Outcome viterbi_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  int instances = 0, mismatches = 0;
  double worst = 0.0;
  const MdpmConfig cfg;
  for (int side : {2, 3}) {
    const GridConfig g(30 * side, 30 * side, 30, 30);
    const int M = g.count();
    const TransitionModel tm(g);
    for (int T : {3, 4, 5}) {
      for (int k = 0; k < 18; ++k) {
        const int p = std::uniform_int_distribution<int>(1, M)(rng);
        const auto ev = oracle::random_evidence(rng, T, M);
        auto tables = HmmTables::initialize(ev.front(), cfg, T);
        for (const auto& e : ev) viterbi_update(tables, e, cfg, tm);
        const auto got = top_p_trajectories(tables, p);
        const auto want = oracle::exhaustive_top_p(ev, cfg, g, p);
        bool same = got.size() == want.size();
        for (std::size_t i = 0; same && i < got.size(); ++i) {
          same = got[i].trajectory.windows == want[i].windows;
          worst = std::max(worst, std::abs(got[i].log_score - want[i].score));
        }
        ++instances;
        if (!same) ++mismatches;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {instances >= 100 && mismatches == 0 && worst <= 1e-9 && secs < 10.0,
          fmt("%d instances, %d mismatches, max score diff %.2e, %.2f s", instances, mismatches, worst, secs)};
}

// [2] DFT magnitude, Parseval, constant series.
Outcome dft_checks() {
  std::vector<double> x(15);
  for (int t = 0; t < 15; ++t) x[t] = 20.0 * std::cos(2 * std::numbers::pi * 2.0 * t / 10.0);
  const double mag = std::abs(dtft(x).bins[3]);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-255, 255);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    std::vector<double> s(std::uniform_int_distribution<int>(2, 64)(rng));
    for (double& v : s) v = u(rng);
    const auto X = dtft(s).bins;
    double lhs = 0, rhs = 0;
    for (double v : s) lhs += v * v;
    for (const auto& c : X) rhs += std::norm(c);
    rhs /= static_cast<double>(s.size());
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, lhs));
  }
  const MdpmConfig cfg;
  const double flat = band_score(dtft(std::vector<double>(15, 200.0)), cfg);
  return {std::abs(mag - 150.0) <= 1e-6 && worst <= 1e-6 && std::abs(flat) <= 1e-6,
          fmt("|X[3]| = %.9f, worst Parseval rel. error %.2e, constant band score %.2e", mag, worst, flat)};
}

// [3] Desk scenes (straight-on, sideways) from the bundled experiment.
Outcome table1() {
  const auto t0 = Clock::now();
  ExperimentOptions opts;
  opts.out_root = scratch("table1");
  const auto reports = run_experiment_file(data_dir() / "experiments" / "table1_desk.json", opts);
  const double secs = seconds_since(t0);
  bool ok = secs < 30.0 && reports.size() == 2;
  std::string detail;
  for (const auto& r : reports) {
    const double pos = r["positive_pct"].get<double>();
    const double wrong = r["wrong_pct"].get<double>();
    const int cycles = r["cycles"].get<int>();
    ok = ok && cycles == 20 && pos >= 85.0 && wrong <= 5.0;
    detail += fmt("%s %d cycles %.0f%% pos / %.0f%% missed / %.0f%% wrong; ", r["name"].get<std::string>().c_str(),
                  cycles, pos, r["missed_pct"].get<double>(), wrong);
  }
  return {ok, detail + fmt("%.2f s", secs)};
}

// [4] Work per cycle is T*M^2; M 25 -> 100 scales by 16.
Outcome complexity() {
  const auto per_cycle = [](int cols, int rows, int T) {
    MdpmConfig cfg;
    cfg.slide = T;
    cfg.pool = 1;
    MdpmTracker tr(GridConfig(30 * cols, 30 * rows), cfg);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 255);
    const int M = cols * rows;
    std::vector<std::vector<double>> ev(T, std::vector<double>(M));
    for (int c = 0; c < 3; ++c) {
      for (auto& row : ev)
        for (double& v : row) v = u(rng);
      tr.run_detection_cycle(ev, (c + 1) * T - 1);
    }
    return tr.counters().transition_evaluations / tr.counters().cycles;
  };
  bool ok = true;
  std::string detail;
  for (auto [c, r] : {std::pair{5, 5}, {10, 10}, {10, 8}})
    for (int T : {15, 30}) {
      const auto n = per_cycle(c, r, T);
      const auto want = static_cast<std::uint64_t>(T) * (c * r) * (c * r);
      ok = ok && n == want;
      if (T == 15) detail += fmt("M=%d: %llu; ", c * r, static_cast<unsigned long long>(n));
    }
  const double ratio = double(per_cycle(10, 10, 15)) / double(per_cycle(5, 5, 15));
  ok = ok && ratio == 16.0;
  return {ok, detail + fmt("ratio M=100/M=25 = %.6f", ratio)};
}

// [5] Grammar golden vectors and debounce fuzz.
Outcome grammar() {
  const auto m = MappingTable::default_table();
  const std::vector<Instruction> study{TaskSwitch{Task::Hover, {}, 50}, ParamReconfig{3, Direction::Decrease},
                                       TaskSwitch{Task::Execute, 1, {}}, Snapshot{20}};
  const auto as_list = [&](const std::vector<GesturePair>& pairs) {
    std::vector<Instruction> out;
    for (const auto& d : decode(to_tokens(pairs), m)) out.push_back(d.instruction);
    return out;
  };
  bool golden = true;
  for (const auto& ins : study) golden = golden && as_list(canonical_pairs({&ins, 1}, m)) == std::vector{ins};
  const StreamLayout layout{20, 10};
  auto base = std::vector<GesturePair>(10);  // lead-in
  const auto body = canonical_pairs(study, m, layout);
  base.insert(base.end(), body.begin(), body.end());
  golden = golden && as_list(base) == study;

  // any pair, including one-handed and empty
  std::vector<GesturePair> alphabet{{}};
  for (auto a : kAllGestures) {
    alphabet.push_back({a, std::nullopt});
    alphabet.push_back({std::nullopt, a});
    for (auto b : kAllGestures) alphabet.push_back({a, b});
  }
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<std::size_t> frame(0, base.size() - 1);
  int single_changes = 0;
  for (int k = 0; k < 1000; ++k) {
    auto s = base;
    s[frame(rng)] = alphabet[pick(rng)];
    if (as_list(s) != study) ++single_changes;
  }
  // bursts live in the empty gaps (and lead-in) between holds
  std::vector<std::pair<std::size_t, std::size_t>> gaps{{0, 10}};
  const std::size_t period = static_cast<std::size_t>(layout.hold + layout.gap);
  for (std::size_t start = 10 + layout.hold; start < base.size(); start += period) gaps.emplace_back(start, layout.gap);
  int burst_changes = 0;
  for (int k = 0; k < 1000; ++k) {
    auto s = base;
    const auto [g0, glen] = gaps[std::uniform_int_distribution<std::size_t>(0, gaps.size() - 1)(rng)];
    const auto len = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(9, glen))(rng);
    const auto off = std::uniform_int_distribution<std::size_t>(0, glen - len)(rng);
    const auto p = alphabet[pick(rng)];
    for (std::size_t i = 0; i < len; ++i) s[g0 + off + i] = p;
    if (as_list(s) != study) ++burst_changes;
  }
  return {golden && single_changes == 0 && burst_changes == 0,
          fmt("golden %s, %d/1000 single-frame mutations and %d/1000 bursts changed the output", golden ? "ok" : "BAD",
              single_changes, burst_changes)};
}

// [6] Gesture recognition over all ordered pairs.
Outcome gestures() {
  const auto t0 = Clock::now();
  const auto cfg = default_gesture_config();
  int perfect_clean = 0;
  double worst_noisy = 100.0;
  std::string worst_pair;
  for (auto a : kAllGestures)
    for (auto b : kAllGestures) {
      for (bool noisy : {false, true}) {
        GestureSceneSpec s;
        s.segments = {{{a, b}, 20}};
        if (noisy) {
          s.noise_sigma = 10;
          s.jitter = 3;
          s.seed = 1000 + static_cast<std::uint64_t>(a) * 10 + static_cast<std::uint64_t>(b);
        }
        const auto scene = render_gesture_sequence(s);
        ShapeRecognizer rec(cfg);
        int correct = 0;
        for (const auto& f : scene.frames)
          if (rec.recognize(f).pair() == GesturePair{a, b}) ++correct;
        const double pct = 100.0 * correct / 20;
        if (!noisy && correct == 20) ++perfect_clean;
        if (noisy && pct < worst_noisy) {
          worst_noisy = pct;
          worst_pair = std::string(to_string(a)) + "," + std::string(to_string(b));
        }
      }
    }
  const double secs = seconds_since(t0);
  return {perfect_clean == 100 && worst_noisy >= 80.0 && secs < 60.0,
          fmt("%d/100 pairs perfect noise-free, worst noisy pair %.0f%% (%s), %.2f s", perfect_clean, worst_noisy,
              worst_pair.c_str(), secs)};
}

// [7] Servo convergence and clamping.
Outcome servo() {
  const ServoGains g;
  const Camera cam;
  bool ok = true;
  std::string detail;
  for (auto [ox, oy] : {std::pair{0.3, 0.0}, {-0.3, 0.0}, {0.0, 0.3}, {0.0, -0.3}}) {
    const auto diver = diver_at_image_offset({}, cam, ox, oy, g.target_area_fraction);
    TruthDetector det;
    const auto log = follow_loop(diver, det, g, {10.0, 10.0, cam});
    const auto& e = log.back().error;
    const bool conv = log.back().detected && std::abs(e.ex) < 0.05 && std::abs(e.ey) < 0.05 &&
                      std::abs(e.ea) <= 0.1 * g.target_area_fraction;
    ok = ok && conv;
    detail += fmt("(%+.1f,%+.1f)->|ex|=%.3f |ey|=%.3f area %+.1f%%; ", ox, oy, std::abs(e.ex), std::abs(e.ey),
                  -100.0 * e.ea / g.target_area_fraction);
  }
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  PidBank bank(g);
  double peak = 0.0;
  for (int k = 0; k < 10000; ++k) {
    ImageError e{u(rng), u(rng), u(rng)};
    if (k % 101 == 0) e.ey = std::nan("");
    peak = std::max(peak, servo_step(e, bank, std::uniform_real_distribution<double>(1e-3, 1.0)(rng)).max_abs());
  }
  ok = ok && peak <= 1.0;
  return {ok, detail + fmt("fuzz max |cmd| = %.3f", peak)};
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), root).generic_string()] = ss.str();
  }
  return out;
}

// [8] Experiment outputs are byte-identical across runs.
Outcome determinism() {
  const auto root = scratch("determinism");
  int files = 0;
  bool same = true;
  for (const char* spec : {"table1_desk.json", "study_instructions.json", "follow_offsets.json"}) {
    ExperimentOptions a, b;
    a.out_root = root / "a";
    b.out_root = root / "b";
    b.workers = 1;
    run_experiment_file(data_dir() / "experiments" / spec, a);
    run_experiment_file(data_dir() / "experiments" / spec, b);
  }
  const auto ta = tree_bytes(root / "a");
  const auto tb = tree_bytes(root / "b");
  same = ta == tb;
  for (const auto& [k, v] : ta) files += k.ends_with("report.json");
  return {same && files == 8, fmt("%d reports (+logs) compared, %s", files, same ? "identical" : "DIFFERENT")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"Viterbi top-p matches exhaustive enumeration", viterbi_oracle},
      {"DFT magnitude, Parseval, constant series", dft_checks},
      {"desk scenes detection rates", table1},
      {"transition evaluations = T*M^2 per cycle", complexity},
      {"grammar golden vectors and debounce fuzz", grammar},
      {"gesture pairs noise-free and noisy", gestures},
      {"servo convergence and command clamping", servo},
      {"experiment reports are reproducible", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s [%zu] %s: %s\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failures += o.ok ? 0 : 1;
  }
  return failures;
}
