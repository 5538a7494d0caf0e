#include "diverlink/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <set>
#include <thread>

#include "diverlink/errors.hpp"

namespace diverlink {

std::string_view to_string(CycleOutcome o) noexcept {
  switch (o) {
    case CycleOutcome::Positive: return "positive";
    case CycleOutcome::Missed: return "missed";
    case CycleOutcome::Wrong: return "wrong";
  }
  return "missed";
}

double DetectionReport::percent(CycleOutcome o) const {
  const int n = total();
  if (n == 0) return 0.0;
  const int c = o == CycleOutcome::Positive ? positive : o == CycleOutcome::Missed ? missed : wrong;
  return 100.0 * c / n;
}

DetectionReport score_detection(std::span<const DetectionResult> results, const GroundTruth& truth,
                                const GridConfig& grid, int tol_windows) {
  if (tol_windows < 0) throw ArgumentError("tol_windows must be non-negative");
  DetectionReport rep;
  rep.tol_windows = tol_windows;
  rep.outcomes.reserve(results.size());
  for (const auto& r : results) {
    if (r.last_frame < 0 || static_cast<std::size_t>(r.last_frame) >= truth.windows.size())
      throw ArgumentError("ground truth does not cover cycle " + std::to_string(r.cycle_index) + " (frame " +
                          std::to_string(r.last_frame) + ", truth has " + std::to_string(truth.windows.size()) + ")");
    CycleOutcome o = CycleOutcome::Missed;
    if (r.detected) {
      const int tw = truth.windows[static_cast<std::size_t>(r.last_frame)];
      o = grid.grid_distance(r.window(), tw) <= tol_windows ? CycleOutcome::Positive : CycleOutcome::Wrong;
    }
    rep.outcomes.push_back(o);
    (o == CycleOutcome::Positive ? rep.positive : o == CycleOutcome::Missed ? rep.missed : rep.wrong)++;
  }
  return rep;
}

Json to_json(const DetectionReport& r) {
  Json cycles = Json::array();
  for (auto o : r.outcomes) cycles.push_back(std::string(to_string(o)));
  return {{"cycles", r.total()},
          {"positive", r.positive},
          {"missed", r.missed},
          {"wrong", r.wrong},
          {"positive_pct", r.percent(CycleOutcome::Positive)},
          {"missed_pct", r.percent(CycleOutcome::Missed)},
          {"wrong_pct", r.percent(CycleOutcome::Wrong)},
          {"tol_windows", r.tol_windows},
          {"outcomes", cycles}};
}

double InstructionReport::instruction_accuracy() const {
  return total_instructions == 0 ? 0.0 : 100.0 * correct_instructions / total_instructions;
}

double InstructionReport::token_accuracy() const {
  return total_tokens == 0 ? 0.0 : 100.0 * correct_tokens / total_tokens;
}

InstructionReport score_instructions(std::span<const Instruction> decoded, std::span<const Instruction> expected,
                                     std::span<const GesturePair> truth_labels,
                                     std::span<const GesturePairToken> recognized) {
  InstructionReport rep;
  rep.total_instructions = static_cast<int>(expected.size());
  for (std::size_t i = 0; i < expected.size() && i < decoded.size(); ++i)
    if (decoded[i] == expected[i]) ++rep.correct_instructions;

  std::size_t i = 0;
  while (i < truth_labels.size()) {
    std::size_t j = i;
    while (j < truth_labels.size() && truth_labels[j] == truth_labels[i]) ++j;
    const GesturePair& label = truth_labels[i];
    if ((label.left || label.right) && j - i >= static_cast<std::size_t>(kDebounceFrames)) {
      ++rep.total_tokens;
      int run = 0;
      bool ok = false;
      for (std::size_t k = i; k < j && k < recognized.size() && !ok; ++k) {
        run = recognized[k].pair() == label ? run + 1 : 0;
        ok = run >= kDebounceFrames;
      }
      if (ok) ++rep.correct_tokens;
    }
    i = j;
  }
  return rep;
}

Json to_json(const InstructionReport& r) {
  return {{"total_instructions", r.total_instructions},
          {"correct_instructions", r.correct_instructions},
          {"instruction_accuracy", r.instruction_accuracy()},
          {"total_tokens", r.total_tokens},
          {"correct_tokens", r.correct_tokens},
          {"token_accuracy", r.token_accuracy()}};
}

std::vector<GestureSegment> script_segments(std::span<const Instruction> program, const MappingTable& mapping,
                                            const StreamLayout& layout, int lead) {
  if (lead < 0) throw ArgumentError("lead must be non-negative");
  std::vector<GesturePair> pairs(static_cast<std::size_t>(lead));
  const auto body = canonical_pairs(program, mapping, layout);
  pairs.insert(pairs.end(), body.begin(), body.end());
  std::vector<GestureSegment> segs;
  for (const auto& p : pairs) {
    if (!segs.empty() && segs.back().labels == p)
      ++segs.back().frames;
    else
      segs.push_back({p, 1});
  }
  return segs;
}

namespace {

const Json& require(const Json& j, const char* key, std::string_view ctx) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) throw ConfigError(std::string(ctx) + ": missing field '" + key + "'");
  return *it;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

/// A config given inline as an object, or as a path to a JSON file.
std::optional<Json> config_value(const Json& run, const char* key, const std::filesystem::path& base) {
  const auto it = run.find(key);
  if (it == run.end() || it->is_null()) return std::nullopt;
  if (it->is_object()) return *it;
  if (it->is_string()) return read_json_file(resolve(base, it->get<std::string>()));
  throw ConfigError(std::string(key) + ": expected a path or an object");
}

Json run_track(const Json& run, const std::filesystem::path& base, const ExperimentOptions& opts,
               const std::filesystem::path& out) {
  DiverSceneSpec scene = diver_scene_from_json(require(run, "scene", "experiment"));
  if (opts.seed) scene.seed = *opts.seed;
  const auto tj = config_value(run, "tracker", base);
  const MdpmConfig cfg = tj ? mdpm_config_from_json(*tj) : MdpmConfig{};
  scene.window_w = cfg.window_w;
  scene.window_h = cfg.window_h;
  scene.validate();
  const int tol = run.value("tol_windows", 1);

  const RenderedScene rendered = render_diver_sequence(scene);
  MdpmTracker tracker = make_tracker(scene.width, scene.height, cfg);
  const auto results = tracker.track_sequence(rendered.frames);
  const DetectionReport rep = score_detection(results, rendered.truth, tracker.grid(), tol);

  std::vector<Json> lines;
  lines.reserve(results.size());
  for (const auto& r : results) lines.push_back(detection_to_json(r));
  write_text_file(out / "detections.jsonl", to_jsonl(lines));

  Json report = to_json(rep);
  report["tracker"] = to_json(cfg);
  report["scene"] = to_json(scene);
  report["transition_evaluations"] = tracker.counters().transition_evaluations;
  report["dft_terms"] = tracker.counters().dft_terms;
  return report;
}

Json run_decode(const Json& run, const std::filesystem::path& base, const ExperimentOptions& opts,
                const std::filesystem::path& out) {
  const auto mj = config_value(run, "mapping", base);
  const MappingTable mapping = mj ? mapping_from_json(*mj) : MappingTable::default_table();

  GestureSceneSpec scene = gesture_scene_from_json(require(run, "scene", "experiment"));
  if (opts.seed) scene.seed = *opts.seed;

  std::vector<Instruction> script;
  if (const auto it = run.find("script"); it != run.end()) {
    if (!it->is_array()) throw ConfigError("script: expected an array of instructions");
    for (const auto& e : *it) script.push_back(instruction_from_json(e));
  }
  if (scene.segments.empty()) {
    if (script.empty()) throw ConfigError("experiment: decode run needs 'script' or scene.segments");
    StreamLayout layout;
    int lead = 10;
    if (const auto it = run.find("layout"); it != run.end()) {
      layout.hold = it->value("hold", layout.hold);
      layout.gap = it->value("gap", layout.gap);
      lead = it->value("lead", lead);
    }
    scene.segments = script_segments(script, mapping, layout, lead);
  }
  std::vector<Instruction> expected = script;
  if (const auto it = run.find("expected"); it != run.end()) {
    expected.clear();
    for (const auto& e : *it) expected.push_back(instruction_from_json(e));
  }
  scene.validate();

  const std::string kind = run.value("recognizer", std::string("oracle"));
  const RenderedScene rendered = render_gesture_sequence(scene);
  std::unique_ptr<GestureRecognizer> recognizer;
  if (kind == "oracle") {
    recognizer = std::make_unique<OracleRecognizer>(rendered.truth.gesture_labels);
  } else if (kind == "shape") {
    const auto gj = config_value(run, "gesture", base);
    recognizer = std::make_unique<ShapeRecognizer>(gj ? gesture_config_from_json(*gj) : default_gesture_config());
  } else {
    throw ConfigError("recognizer: unknown recognizer '" + kind + "'");
  }

  std::vector<GesturePairToken> tokens;
  tokens.reserve(rendered.frames.size());
  for (const auto& f : rendered.frames) tokens.push_back(recognizer->recognize(f));
  const auto decoded = decode(tokens, mapping);

  std::vector<Instruction> got;
  std::vector<Json> token_lines, ins_lines;
  for (const auto& t : tokens) token_lines.push_back(token_to_json(t));
  for (const auto& d : decoded) {
    got.push_back(d.instruction);
    ins_lines.push_back(to_json(d));
  }
  write_text_file(out / "tokens.jsonl", to_jsonl(token_lines));
  write_text_file(out / "instructions.jsonl", to_jsonl(ins_lines));

  Json report = to_json(score_instructions(got, expected, rendered.truth.gesture_labels, tokens));
  report["recognizer"] = kind;
  report["frames"] = rendered.frames.size();
  report["decoded"] = Json::array();
  for (const auto& d : decoded) report["decoded"].push_back(to_json(d));
  report["expected"] = Json::array();
  for (const auto& e : expected) report["expected"].push_back(instruction_to_json(e));
  return report;
}

Json run_follow(const Json& run, const std::filesystem::path& base, const std::filesystem::path& out) {
  const Json& scene = require(run, "scene", "experiment");
  if (!scene.is_object()) throw ConfigError("scene: expected an object");
  const auto gj = config_value(run, "gains", base);
  const ServoGains gains = gj ? gains_from_json(*gj) : ServoGains{};

  FollowSettings settings;
  settings.fps = scene.value("fps", settings.fps);
  settings.seconds = scene.value("seconds", settings.seconds);
  const auto offset = scene.value("offset", std::vector<double>{0.0, 0.0});
  if (offset.size() != 2) throw ConfigError("scene.offset: expected [ox, oy]");
  const double area = scene.value("area_fraction", gains.target_area_fraction);
  const auto vel = scene.value("velocity", std::vector<double>{0.0, 0.0, 0.0});
  if (vel.size() != 3) throw ConfigError("scene.velocity: expected [vx, vy, vz]");

  const RobotState start;
  DiverModel diver = diver_at_image_offset(start, settings.camera, offset[0], offset[1], area);
  diver.velocity = {vel[0], vel[1], vel[2]};

  const std::string det = scene.value("detector", std::string("truth"));
  std::unique_ptr<BoxDetector> detector;
  if (det == "truth")
    detector = std::make_unique<TruthDetector>();
  else if (det == "dropout")
    detector = std::make_unique<DropoutDetector>(scene.value("lost_after", 0));
  else
    throw ConfigError("scene.detector: unknown detector '" + det + "'");

  const auto log = follow_loop(diver, *detector, gains, settings, start);
  write_text_file(out / "trajectory.csv", trajectory_csv(log));

  double max_cmd = 0.0;
  int detected = 0;
  for (const auto& r : log) {
    max_cmd = std::max(max_cmd, r.command.max_abs());
    detected += r.detected ? 1 : 0;
  }
  Json report = {{"frames", log.size()}, {"detected_frames", detected}, {"max_abs_command", max_cmd},
                 {"gains", to_json(gains)}};
  if (!log.empty()) {
    const auto& last = log.back();
    report["final"] = {{"ex", last.error.ex}, {"ey", last.error.ey}, {"ea", last.error.ea},
                       {"yaw", last.state.yaw}, {"pitch", last.state.pitch}};
    report["converged"] = last.detected && std::abs(last.error.ex) < 0.05 && std::abs(last.error.ey) < 0.05 &&
                          std::abs(last.error.ea) <= 0.1 * gains.target_area_fraction;
  }
  return report;
}

}  // namespace

Json run_experiment(const Json& run, const std::filesystem::path& base_dir, const ExperimentOptions& opts) {
  if (!run.is_object()) throw ConfigError("experiment: expected an object");
  const Json& kind_j = require(run, "kind", "experiment");
  if (!kind_j.is_string()) throw ConfigError("experiment.kind: expected a string");
  const std::string kind = kind_j.get<std::string>();
  if (kind != "track" && kind != "decode" && kind != "follow")
    throw ConfigError("experiment.kind: unknown experiment kind '" + kind + "'");
  require(run, "scene", "experiment");
  const Json& out_j = require(run, "out", "experiment");
  if (!out_j.is_string()) throw ConfigError("experiment.out: expected a directory path");
  const std::string out_name = out_j.get<std::string>();
  const std::filesystem::path out = opts.out_root.empty() ? std::filesystem::path(out_name) : opts.out_root / out_name;
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());

  Json report = kind == "track"    ? run_track(run, base_dir, opts, out)
                : kind == "decode" ? run_decode(run, base_dir, opts, out)
                                   : run_follow(run, base_dir, out);
  report["kind"] = kind;
  report["out"] = out_name;
  if (const auto it = run.find("name"); it != run.end()) report["name"] = *it;
  write_json_file(out / "report.json", report);
  return report;
}

std::vector<Json> run_experiment_file(const std::filesystem::path& spec, const ExperimentOptions& opts) {
  const Json doc = read_json_file(spec);
  std::vector<Json> runs;
  if (doc.is_object() && doc.contains("runs")) {
    if (!doc["runs"].is_array() || doc["runs"].empty()) throw ConfigError("runs: expected a non-empty array");
    runs.assign(doc["runs"].begin(), doc["runs"].end());
  } else {
    runs.push_back(doc);
  }
  std::set<std::string> outs;
  for (const auto& r : runs) {
    if (r.is_object() && r.contains("out") && r["out"].is_string() && !outs.insert(r["out"].get<std::string>()).second)
      throw ConfigError("runs: duplicate output directory '" + r["out"].get<std::string>() + "'");
  }

  const std::filesystem::path base = spec.parent_path();
  std::vector<Json> reports(runs.size());
  std::vector<std::exception_ptr> errors(runs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        reports[i] = run_experiment(runs[i], base, opts);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned n = opts.workers ? opts.workers : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::size_t>(n, runs.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return reports;
}

}  // namespace diverlink
