// Python bindings. Structured values cross the boundary as JSON text; the
// package's __init__ turns them into dicts. Frames travel as numpy arrays.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "diverlink/errors.hpp"
#include "diverlink/harness.hpp"

namespace py = pybind11;
using namespace diverlink;

namespace {

Json parse(const std::string& s) { return s.empty() ? Json::object() : Json::parse(s); }

py::array_t<std::uint8_t> frames_to_array(const FrameSequence& frames) {
  if (frames.empty()) return py::array_t<std::uint8_t>(std::vector<py::ssize_t>{0, 0, 0});
  const Frame& f0 = frames.front();
  std::vector<py::ssize_t> shape{static_cast<py::ssize_t>(frames.size()), f0.height, f0.width};
  if (f0.channels == 3) shape.push_back(3);
  py::array_t<std::uint8_t> out(shape);
  auto* dst = out.mutable_data();
  for (const auto& f : frames) dst = std::copy(f.pixels.begin(), f.pixels.end(), dst);
  return out;
}

Frame array_to_frame(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a, std::int64_t index) {
  if (a.ndim() != 2 && !(a.ndim() == 3 && a.shape(2) == 3))
    throw ArgumentError("frame must have shape (H, W) or (H, W, 3)");
  Frame f = a.ndim() == 2 ? Frame::gray(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)))
                          : Frame::rgb(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), f.pixels.begin());
  f.index = index;
  return f;
}

FrameSequence array_to_frames(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 3 && a.ndim() != 4) throw ArgumentError("frames must have shape (N, H, W) or (N, H, W, 3)");
  FrameSequence frames;
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> one = a[py::int_(i)].cast<py::array>();
    frames.push_back(array_to_frame(one, i));
  }
  return frames;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "diverlink native core";
  m.attr("__version__") = DIVERLINK_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<StateError>(m, "StateError", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("dtft", [](const std::vector<double>& x) { return dtft(x).bins; }, py::arg("series"));
  m.def(
      "band_score",
      [](const std::vector<double>& x, const std::string& cfg) { return band_score(dtft(x), mdpm_config_from_json(parse(cfg))); },
      py::arg("series"), py::arg("config_json") = "");

  m.def(
      "render_diver_sequence",
      [](const std::string& spec) {
        const auto scene = render_diver_sequence(diver_scene_from_json(parse(spec)));
        return py::make_tuple(frames_to_array(scene.frames), to_json(scene.truth).dump());
      },
      py::arg("spec_json"));

  m.def(
      "render_gesture_sequence",
      [](const std::string& spec) {
        const auto scene = render_gesture_sequence(gesture_scene_from_json(parse(spec)));
        return py::make_tuple(frames_to_array(scene.frames), to_json(scene.truth).dump());
      },
      py::arg("spec_json"));

  m.def(
      "track",
      [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& frames, const std::string& cfg,
         const std::string& truth, int tol) {
        const FrameSequence seq = array_to_frames(frames);
        if (seq.empty()) throw ArgumentError("no frames");
        MdpmTracker tracker = make_tracker(seq.front().width, seq.front().height, mdpm_config_from_json(parse(cfg)));
        const auto results = tracker.track_sequence(seq);
        Json out = {{"detections", Json::array()},
                    {"transition_evaluations", tracker.counters().transition_evaluations}};
        for (const auto& r : results) out["detections"].push_back(detection_to_json(r));
        if (!truth.empty()) out["report"] = to_json(score_detection(results, truth_from_json(parse(truth)), tracker.grid(), tol));
        return out.dump();
      },
      py::arg("frames"), py::arg("config_json") = "", py::arg("truth_json") = "", py::arg("tol_windows") = 1);

  m.def(
      "recognize",
      [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& frames, const std::string& cfg) {
        ShapeRecognizer rec(cfg.empty() ? default_gesture_config() : gesture_config_from_json(parse(cfg)));
        Json out = Json::array();
        for (const auto& f : array_to_frames(frames)) out.push_back(token_to_json(rec.recognize(f)));
        return out.dump();
      },
      py::arg("frames"), py::arg("gesture_json") = "");

  m.def(
      "decode",
      [](const std::string& tokens, const std::string& mapping) {
        std::vector<GesturePairToken> stream;
        for (const auto& t : parse(tokens)) stream.push_back(token_from_json(t));
        const MappingTable table = mapping.empty() ? MappingTable::default_table() : mapping_from_json(parse(mapping));
        Json out = Json::array();
        for (const auto& d : decode(stream, table)) out.push_back(to_json(d));
        return out.dump();
      },
      py::arg("tokens_json"), py::arg("mapping_json") = "");

  m.def(
      "canonical_tokens",
      [](const std::string& program, const std::string& mapping, int hold, int gap) {
        std::vector<Instruction> ins;
        for (const auto& e : parse(program)) ins.push_back(instruction_from_json(e));
        const MappingTable table = mapping.empty() ? MappingTable::default_table() : mapping_from_json(parse(mapping));
        Json out = Json::array();
        for (const auto& t : to_tokens(canonical_pairs(ins, table, {hold, gap}))) out.push_back(token_to_json(t));
        return out.dump();
      },
      py::arg("program_json"), py::arg("mapping_json") = "", py::arg("hold") = 20, py::arg("gap") = 10);

  m.def("default_mapping", [] { return to_json(MappingTable::default_table()).dump(); });

  m.def(
      "follow",
      [](double ox, double oy, const std::string& gains_json, double seconds, double fps) {
        const ServoGains gains = gains_json.empty() ? ServoGains{} : gains_from_json(parse(gains_json));
        FollowSettings settings;
        settings.seconds = seconds;
        settings.fps = fps;
        const RobotState start;
        TruthDetector det;
        const auto log = follow_loop(diver_at_image_offset(start, settings.camera, ox, oy, gains.target_area_fraction),
                                     det, gains, settings, start);
        return trajectory_csv(log);
      },
      py::arg("ox"), py::arg("oy"), py::arg("gains_json") = "", py::arg("seconds") = 10.0, py::arg("fps") = 10.0);

  m.def(
      "run_experiment",
      [](const std::string& spec, const std::string& out_root, std::optional<std::uint64_t> seed) {
        ExperimentOptions opts;
        opts.out_root = out_root;
        opts.seed = seed;
        std::vector<Json> reports;
        {
          py::gil_scoped_release release;
          reports = run_experiment_file(spec, opts);
        }
        return Json(reports).dump();
      },
      py::arg("spec_path"), py::arg("out_root") = "", py::arg("seed") = py::none());
}
