// diverlink command-line front end.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>

#include "CLI11.hpp"

#include "diverlink/errors.hpp"
#include "diverlink/harness.hpp"
#include "diverlink/image_io.hpp"

namespace fs = std::filesystem;
using namespace diverlink;

namespace {

struct SynthArgs {
  std::string kind = "diver";
  std::string spec;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthArgs& a) {
  const Json spec = read_json_file(a.spec);
  RenderedScene scene;
  if (a.kind == "diver") {
    DiverSceneSpec s = diver_scene_from_json(spec);
    if (a.seed) s.seed = *a.seed;
    scene = render_diver_sequence(s);
    save_sequence(a.out, scene.frames, s.fps);
  } else {
    GestureSceneSpec s = gesture_scene_from_json(spec);
    if (a.seed) s.seed = *a.seed;
    if (s.segments.empty() && spec.contains("script")) {
      std::vector<Instruction> script;
      for (const auto& e : spec["script"]) script.push_back(instruction_from_json(e));
      s.segments = script_segments(script, MappingTable::default_table());
    }
    s.validate();
    scene = render_gesture_sequence(s);
    save_sequence(a.out, scene.frames, s.fps);
  }
  write_json_file(fs::path(a.out) / "truth.json", to_json(scene.truth));
  std::cerr << scene.frames.size() << " frames written to " << a.out << "\n";
  return 0;
}

struct TrackArgs {
  std::string seq;
  std::string config;
  std::string out;
  int tol = 1;
};

int cmd_track(const TrackArgs& a) {
  const MdpmConfig cfg = a.config.empty() ? MdpmConfig{} : mdpm_config_from_json(read_json_file(a.config));
  const FrameSequence frames = load_sequence(a.seq);
  if (frames.empty()) throw ArgumentError("sequence is empty");
  MdpmTracker tracker = make_tracker(frames.front().width, frames.front().height, cfg);
  const auto results = tracker.track_sequence(frames);
  std::vector<Json> lines;
  for (const auto& r : results) lines.push_back(detection_to_json(r));
  write_text_file(a.out, to_jsonl(lines));
  std::cerr << results.size() << " cycles written to " << a.out << "\n";
  const fs::path truth_path = fs::path(a.seq) / "truth.json";
  if (fs::exists(truth_path)) {
    const auto rep = score_detection(results, truth_from_json(read_json_file(truth_path)), tracker.grid(), a.tol);
    Json summary = to_json(rep);
    summary.erase("outcomes");
    std::cout << Json{{"summary", summary}}.dump() << "\n";
  }
  return 0;
}

struct DecodeArgs {
  std::string tokens;
  std::string seq;
  std::string mapping;
  std::string recognizer = "oracle";
  std::string gesture;
  std::string out;
  std::string tokens_out;
};

int cmd_decode(const DecodeArgs& a) {
  const MappingTable mapping = a.mapping.empty() ? MappingTable::default_table() : load_mapping(a.mapping);
  std::vector<GesturePairToken> tokens;
  if (!a.tokens.empty()) {
    for (const auto& row : read_jsonl_file(a.tokens)) tokens.push_back(token_from_json(row));
  } else {
    const FrameSequence frames = load_sequence(a.seq);
    std::unique_ptr<GestureRecognizer> rec;
    if (a.recognizer == "oracle") {
      const fs::path truth_path = fs::path(a.seq) / "truth.json";
      rec = std::make_unique<OracleRecognizer>(truth_from_json(read_json_file(truth_path)).gesture_labels);
    } else {
      rec = std::make_unique<ShapeRecognizer>(a.gesture.empty() ? default_gesture_config()
                                                                : gesture_config_from_json(read_json_file(a.gesture)));
    }
    for (const auto& f : frames) tokens.push_back(rec->recognize(f));
    if (!a.tokens_out.empty()) {
      std::vector<Json> rows;
      for (const auto& t : tokens) rows.push_back(token_to_json(t));
      write_text_file(a.tokens_out, to_jsonl(rows));
    }
  }
  std::vector<Json> lines;
  for (const auto& d : decode(tokens, mapping)) lines.push_back(to_json(d));
  write_text_file(a.out, to_jsonl(lines));
  std::cerr << lines.size() << " instructions written to " << a.out << "\n";
  return 0;
}

struct FollowArgs {
  std::string gains;
  std::vector<double> offset{0.3, 0.0};
  double seconds = 10.0;
  double fps = 10.0;
  std::string detector = "truth";
  int lost_after = 0;
  std::string out;
};

int cmd_follow(const FollowArgs& a) {
  const ServoGains gains = a.gains.empty() ? ServoGains{} : gains_from_json(read_json_file(a.gains));
  FollowSettings settings;
  settings.seconds = a.seconds;
  settings.fps = a.fps;
  const RobotState start;
  const DiverModel diver =
      diver_at_image_offset(start, settings.camera, a.offset[0], a.offset[1], gains.target_area_fraction);
  std::unique_ptr<BoxDetector> det;
  if (a.detector == "truth")
    det = std::make_unique<TruthDetector>();
  else
    det = std::make_unique<DropoutDetector>(a.lost_after);
  const auto log = follow_loop(diver, *det, gains, settings, start);
  write_text_file(a.out, trajectory_csv(log));
  const auto& last = log.back();
  std::printf("%zu steps; final ex=%.4f ey=%.4f ea=%.4f\n", log.size(), last.error.ex, last.error.ey, last.error.ea);
  return 0;
}

struct ExperimentArgs {
  std::string spec;
  std::string out_root;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;
};

int cmd_experiment(const ExperimentArgs& a) {
  ExperimentOptions opts;
  opts.out_root = a.out_root;
  opts.seed = a.seed;
  opts.workers = a.workers;
  const auto reports = run_experiment_file(a.spec, opts);
  for (const auto& r : reports) {
    Json brief = {{"kind", r["kind"]}, {"out", r["out"]}};
    for (const char* k : {"positive_pct", "wrong_pct", "missed_pct", "instruction_accuracy", "token_accuracy", "converged"})
      if (r.contains(k)) brief[k] = r[k];
    std::cout << brief.dump() << "\n";
  }
  return 0;
}

struct BenchArgs {
  std::vector<int> m{25, 100};
  std::vector<int> t{15};
  int cycles = 10;
  std::uint64_t seed = 1;
  bool json = false;
};

GridConfig bench_grid(int m) {
  int rows = static_cast<int>(std::sqrt(static_cast<double>(m)));
  while (m % rows != 0) --rows;
  return GridConfig(m / rows * 30, rows * 30, 30, 30);
}

int cmd_bench(const BenchArgs& a) {
  if (a.cycles < 1) throw ArgumentError("--cycles must be at least 1");
  Json rows = Json::array();
  if (!a.json) std::printf("%6s %4s %7s %16s %16s %12s %14s\n", "M", "T", "cycles", "transitions", "expected", "dft_terms",
                           "ms_per_cycle");
  for (int m : a.m) {
    if (m < 1) throw ArgumentError("--M entries must be positive");
    for (int t : a.t) {
      MdpmConfig cfg;
      cfg.slide = t;
      cfg.pool = std::min(cfg.pool, m);
      const GridConfig grid = bench_grid(m);
      MdpmTracker tracker(grid, cfg);
      std::mt19937_64 rng(a.seed);
      std::uniform_real_distribution<double> dist(0.0, 255.0);
      std::vector<std::vector<double>> evidence(static_cast<std::size_t>(t), std::vector<double>(static_cast<std::size_t>(m)));
      double seconds = 0.0;
      for (int c = 0; c < a.cycles; ++c) {
        for (auto& e : evidence)
          for (auto& v : e) v = dist(rng);
        const auto t0 = std::chrono::steady_clock::now();
        tracker.run_detection_cycle(evidence, static_cast<std::int64_t>(c + 1) * t - 1);
        seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      }
      const auto& k = tracker.counters();
      const std::uint64_t expected = static_cast<std::uint64_t>(a.cycles) * t * m * m;
      const double ms = 1000.0 * seconds / a.cycles;
      rows.push_back({{"M", m}, {"T", t}, {"cycles", a.cycles}, {"transition_evaluations", k.transition_evaluations},
                      {"expected", expected}, {"dft_terms", k.dft_terms}, {"ms_per_cycle", ms}});
      if (!a.json)
        std::printf("%6d %4d %7d %16llu %16llu %12llu %14.4f\n", m, t, a.cycles,
                    static_cast<unsigned long long>(k.transition_evaluations),
                    static_cast<unsigned long long>(expected), static_cast<unsigned long long>(k.dft_terms), ms);
    }
  }
  if (a.json) std::cout << rows.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diver detection, following and gesture-instruction toolkit"};
  app.set_version_flag("--version", std::string(DIVERLINK_VERSION));
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Render a synthetic scene with ground truth");
  s->add_option("--kind", synth.kind, "Scene kind")->check(CLI::IsMember({"diver", "gesture"}));
  s->add_option("--spec", synth.spec, "Scene spec (JSON)")->required();
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--seed", synth.seed, "Override the scene seed");

  TrackArgs track;
  auto* t = app.add_subcommand("track", "Run the periodic-motion tracker over a sequence");
  t->add_option("--seq", track.seq, "Sequence directory")->required();
  t->add_option("--config", track.config, "Tracker config (JSON)");
  t->add_option("--out", track.out, "Detection JSONL output")->required();
  t->add_option("--tol", track.tol, "Positive-detection tolerance in windows")->check(CLI::NonNegativeNumber);

  DecodeArgs dec;
  auto* d = app.add_subcommand("decode", "Decode gesture tokens into instructions");
  auto* tok_opt = d->add_option("--tokens", dec.tokens, "Token JSONL input");
  auto* seq_opt = d->add_option("--seq", dec.seq, "Gesture sequence directory");
  tok_opt->excludes(seq_opt);
  d->add_option("--mapping", dec.mapping, "Mapping table (JSON)");
  d->add_option("--recognizer", dec.recognizer, "Recognizer for --seq")->check(CLI::IsMember({"oracle", "shape"}));
  d->add_option("--gesture", dec.gesture, "HSV range and templates (JSON)");
  d->add_option("--tokens-out", dec.tokens_out, "Write the recognized token stream (JSONL)");
  d->add_option("--out", dec.out, "Instruction JSONL output")->required();

  FollowArgs fol;
  auto* f = app.add_subcommand("follow", "Simulate the visual-servo follow loop");
  f->add_option("--gains", fol.gains, "Gains (JSON)");
  f->add_option("--offset", fol.offset, "Initial normalized image offset ox oy")->expected(2);
  f->add_option("--seconds", fol.seconds, "Simulated duration")->check(CLI::PositiveNumber);
  f->add_option("--fps", fol.fps, "Control rate")->check(CLI::PositiveNumber);
  f->add_option("--detector", fol.detector, "Detector")->check(CLI::IsMember({"truth", "dropout"}));
  f->add_option("--lost-after", fol.lost_after, "Dropout detector: frames before the diver is lost");
  f->add_option("--out", fol.out, "Trajectory CSV output")->required();

  ExperimentArgs exp;
  auto* e = app.add_subcommand("experiment", "Run an experiment spec");
  e->add_option("--spec", exp.spec, "Experiment spec (JSON)")->required();
  e->add_option("--out-root", exp.out_root, "Directory the runs' out paths are relative to");
  e->add_option("--seed", exp.seed, "Override every scene seed");
  e->add_option("--workers", exp.workers, "Worker threads (0 = hardware concurrency)");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Count tracker work and time detection cycles");
  b->add_option("--M", bench.m, "Window counts")->delimiter(',');
  b->add_option("--T", bench.t, "Slide lengths")->delimiter(',');
  b->add_option("--cycles", bench.cycles, "Cycles per configuration");
  b->add_option("--seed", bench.seed, "Evidence seed");
  b->add_flag("--json", bench.json, "Print JSON instead of a table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForVersion& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 1;
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*t) return cmd_track(track);
    if (*d) {
      if (dec.tokens.empty() && dec.seq.empty()) throw ArgumentError("decode needs --tokens or --seq");
      return cmd_decode(dec);
    }
    if (*f) return cmd_follow(fol);
    if (*e) return cmd_experiment(exp);
    if (*b) return cmd_bench(bench);
  } catch (const IoError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
