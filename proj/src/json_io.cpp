#include "diverlink/json_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "diverlink/errors.hpp"

namespace diverlink {

namespace {

std::string where(std::string_view ctx, std::string_view key) {
  return ctx.empty() ? std::string(key) : std::string(ctx) + "." + std::string(key);
}

void require_object(const Json& j, std::string_view ctx) {
  if (!j.is_object()) throw ConfigError((ctx.empty() ? std::string("document") : std::string(ctx)) + ": expected an object");
}

const Json* find(const Json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

double number(const Json& j, const char* key, double def, std::string_view ctx) {
  const Json* v = find(j, key);
  if (!v) return def;
  if (!v->is_number()) throw ConfigError(where(ctx, key) + ": expected a number");
  return v->get<double>();
}

int integer(const Json& j, const char* key, int def, std::string_view ctx) {
  const Json* v = find(j, key);
  if (!v) return def;
  if (!v->is_number_integer()) throw ConfigError(where(ctx, key) + ": expected an integer");
  return v->get<int>();
}

std::uint64_t seed_value(const Json& j, const char* key, std::uint64_t def, std::string_view ctx) {
  const Json* v = find(j, key);
  if (!v) return def;
  if (!v->is_number_unsigned()) throw ConfigError(where(ctx, key) + ": expected a non-negative integer");
  return v->get<std::uint64_t>();
}

std::array<double, 2> number_pair(const Json& j, const char* key, std::array<double, 2> def, std::string_view ctx) {
  const Json* v = find(j, key);
  if (!v) return def;
  if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number())
    throw ConfigError(where(ctx, key) + ": expected [number, number]");
  return {(*v)[0].get<double>(), (*v)[1].get<double>()};
}

Rgb rgb_value(const Json& j, const char* key, Rgb def, std::string_view ctx) {
  const Json* v = find(j, key);
  if (!v) return def;
  if (!v->is_array() || v->size() != 3) throw ConfigError(where(ctx, key) + ": expected [r, g, b]");
  std::array<std::uint8_t, 3> c{};
  for (std::size_t i = 0; i < 3; ++i) {
    const Json& e = (*v)[i];
    if (!e.is_number_integer() || e.get<int>() < 0 || e.get<int>() > 255)
      throw ConfigError(where(ctx, key) + ": channels must be integers in 0..255");
    c[i] = static_cast<std::uint8_t>(e.get<int>());
  }
  return {c[0], c[1], c[2]};
}

std::optional<GestureClass> hand_value(const Json& v, const std::string& ctx) {
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) throw ConfigError(ctx + ": expected a gesture name or null");
  const auto s = v.get<std::string>();
  if (s == "none") return std::nullopt;
  const auto g = parse_gesture(s);
  if (!g) throw ConfigError(ctx + ": unknown gesture '" + s + "'");
  return g;
}

Json hand_json(const std::optional<GestureClass>& g) { return g ? Json(std::string(to_string(*g))) : Json(nullptr); }

Json pair_json(const GesturePair& p) { return Json::array({hand_json(p.left), hand_json(p.right)}); }

GesturePair pair_from_object(const Json& e, const std::string& ctx) {
  require_object(e, ctx);
  GesturePair p;
  if (const auto it = e.find("left"); it != e.end()) p.left = hand_value(*it, ctx + ".left");
  if (const auto it = e.find("right"); it != e.end()) p.right = hand_value(*it, ctx + ".right");
  return p;
}

PathKind parse_path_kind(const std::string& s) {
  if (s == "static") return PathKind::Static;
  if (s == "straight") return PathKind::Straight;
  if (s == "sideways") return PathKind::Sideways;
  if (s == "sinusoid") return PathKind::Sinusoid;
  throw ConfigError("path.kind: unknown path kind '" + s + "'");
}

std::string_view path_kind_name(PathKind k) {
  switch (k) {
    case PathKind::Static: return "static";
    case PathKind::Straight: return "straight";
    case PathKind::Sideways: return "sideways";
    case PathKind::Sinusoid: return "sinusoid";
  }
  return "static";
}

PidGains pid_from_json(const Json& j, const PidGains& def, const std::string& ctx) {
  const Json* v = find(j, ctx.c_str());
  if (!v) return def;
  require_object(*v, ctx);
  return {number(*v, "kp", def.kp, ctx), number(*v, "ki", def.ki, ctx), number(*v, "kd", def.kd, ctx),
          number(*v, "integral_clamp", def.integral_clamp, ctx)};
}

Json pid_json(const PidGains& g) {
  return {{"kp", g.kp}, {"ki", g.ki}, {"kd", g.kd}, {"integral_clamp", g.integral_clamp}};
}

std::optional<Task> parse_task(const std::string& s) {
  for (Task t : {Task::Hover, Task::Follow, Task::MoveLeft, Task::MoveRight, Task::MoveUp, Task::MoveDown, Task::Execute})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void write_json_file(const std::filesystem::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::string to_jsonl(std::span<const Json> rows) {
  std::string s;
  for (const auto& r : rows) {
    s += r.dump();
    s += '\n';
  }
  return s;
}

std::vector<Json> read_jsonl_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Json> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(Json::parse(line));
    } catch (const Json::parse_error&) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": invalid JSON line");
    }
  }
  return rows;
}

MdpmConfig mdpm_config_from_json(const Json& j) {
  require_object(j, "tracker");
  MdpmConfig c;
  c.slide = integer(j, "T", c.slide, "");
  c.pool = integer(j, "p", c.pool, "");
  c.delta = number(j, "delta", c.delta, "");
  c.epsilon = number(j, "epsilon", c.epsilon, "");
  const auto r = number_pair(j, "R", {c.range.lo, c.range.hi}, "");
  c.range = {r[0], r[1]};
  c.fps = number(j, "fps", c.fps, "");
  const auto b = number_pair(j, "band", {c.band.low, c.band.high}, "");
  c.band = {b[0], b[1]};
  c.stride = integer(j, "stride", c.stride, "");
  if (const Json* w = find(j, "window")) {
    if (!w->is_array() || w->size() != 2 || !(*w)[0].is_number_integer() || !(*w)[1].is_number_integer())
      throw ConfigError("window: expected [w, h] integers");
    c.window_w = (*w)[0].get<int>();
    c.window_h = (*w)[1].get<int>();
  }
  c.gauss_sigma = number(j, "gauss_sigma", c.gauss_sigma, "");
  c.validate();
  return c;
}

Json to_json(const MdpmConfig& c) {
  return {{"T", c.slide},
          {"p", c.pool},
          {"delta", c.delta},
          {"epsilon", c.epsilon},
          {"R", {c.range.lo, c.range.hi}},
          {"fps", c.fps},
          {"band", {c.band.low, c.band.high}},
          {"stride", c.stride},
          {"window", {c.window_w, c.window_h}},
          {"gauss_sigma", c.gauss_sigma}};
}

DiverSceneSpec diver_scene_from_json(const Json& j) {
  require_object(j, "scene");
  DiverSceneSpec s;
  s.frames = integer(j, "frames", s.frames, "scene");
  s.fps = number(j, "fps", s.fps, "scene");
  s.width = integer(j, "width", s.width, "scene");
  s.height = integer(j, "height", s.height, "scene");
  s.background = number(j, "background", s.background, "scene");
  s.noise_sigma = number(j, "noise_sigma", s.noise_sigma, "scene");
  if (const Json* f = find(j, "flipper")) {
    require_object(*f, "scene.flipper");
    s.flipper.radius = number(*f, "radius", s.flipper.radius, "scene.flipper");
    s.flipper.base = number(*f, "base", s.flipper.base, "scene.flipper");
    s.flipper.amplitude = number(*f, "amplitude", s.flipper.amplitude, "scene.flipper");
    s.flipper.frequency = number(*f, "frequency", s.flipper.frequency, "scene.flipper");
  }
  if (const Json* p = find(j, "path")) {
    require_object(*p, "scene.path");
    if (const Json* k = find(*p, "kind")) {
      if (!k->is_string()) throw ConfigError("scene.path.kind: expected a string");
      s.path.kind = parse_path_kind(k->get<std::string>());
    }
    s.path.vx = number(*p, "vx", s.path.vx, "scene.path");
    s.path.vy = number(*p, "vy", s.path.vy, "scene.path");
    s.path.amplitude = number(*p, "amplitude", s.path.amplitude, "scene.path");
    s.path.period = number(*p, "period", s.path.period, "scene.path");
  }
  const auto st = number_pair(j, "start", {s.start.x, s.start.y}, "scene");
  s.start = {st[0], st[1]};
  s.seed = seed_value(j, "seed", s.seed, "scene");
  if (const Json* w = find(j, "window")) {
    if (!w->is_array() || w->size() != 2 || !(*w)[0].is_number_integer() || !(*w)[1].is_number_integer())
      throw ConfigError("scene.window: expected [w, h] integers");
    s.window_w = (*w)[0].get<int>();
    s.window_h = (*w)[1].get<int>();
  }
  s.validate();
  return s;
}

Json to_json(const DiverSceneSpec& s) {
  return {{"frames", s.frames},
          {"fps", s.fps},
          {"width", s.width},
          {"height", s.height},
          {"background", s.background},
          {"noise_sigma", s.noise_sigma},
          {"flipper",
           {{"radius", s.flipper.radius},
            {"base", s.flipper.base},
            {"amplitude", s.flipper.amplitude},
            {"frequency", s.flipper.frequency}}},
          {"path",
           {{"kind", std::string(path_kind_name(s.path.kind))},
            {"vx", s.path.vx},
            {"vy", s.path.vy},
            {"amplitude", s.path.amplitude},
            {"period", s.path.period}}},
          {"start", {s.start.x, s.start.y}},
          {"seed", s.seed},
          {"window", {s.window_w, s.window_h}}};
}

GestureSceneSpec gesture_scene_from_json(const Json& j) {
  require_object(j, "scene");
  GestureSceneSpec s;
  s.width = integer(j, "width", s.width, "scene");
  s.height = integer(j, "height", s.height, "scene");
  s.fps = number(j, "fps", s.fps, "scene");
  if (const Json* segs = find(j, "segments")) {
    if (!segs->is_array()) throw ConfigError("scene.segments: expected an array");
    for (std::size_t i = 0; i < segs->size(); ++i) {
      const std::string ctx = "scene.segments[" + std::to_string(i) + "]";
      const Json& e = (*segs)[i];
      GestureSegment seg;
      seg.labels = pair_from_object(e, ctx);
      seg.frames = integer(e, "frames", seg.frames, ctx);
      s.segments.push_back(seg);
    }
  }
  s.skin = rgb_value(j, "skin", s.skin, "scene");
  s.background = rgb_value(j, "background", s.background, "scene");
  s.noise_sigma = number(j, "noise_sigma", s.noise_sigma, "scene");
  s.jitter = number(j, "jitter", s.jitter, "scene");
  s.seed = seed_value(j, "seed", s.seed, "scene");
  return s;
}

Json to_json(const GestureSceneSpec& s) {
  Json segs = Json::array();
  for (const auto& seg : s.segments)
    segs.push_back({{"left", hand_json(seg.labels.left)}, {"right", hand_json(seg.labels.right)}, {"frames", seg.frames}});
  return {{"width", s.width},
          {"height", s.height},
          {"fps", s.fps},
          {"segments", segs},
          {"skin", {s.skin.r, s.skin.g, s.skin.b}},
          {"background", {s.background.r, s.background.g, s.background.b}},
          {"noise_sigma", s.noise_sigma},
          {"jitter", s.jitter},
          {"seed", s.seed}};
}

GroundTruth truth_from_json(const Json& j) {
  require_object(j, "truth");
  GroundTruth t;
  if (const Json* c = find(j, "centers")) {
    for (const auto& e : *c) {
      if (!e.is_array() || e.size() != 2) throw ConfigError("truth.centers: expected [x, y] entries");
      t.centers.push_back({e[0].get<double>(), e[1].get<double>()});
    }
  }
  if (const Json* w = find(j, "windows")) {
    for (const auto& e : *w) {
      if (!e.is_number_integer()) throw ConfigError("truth.windows: expected integers");
      t.windows.push_back(e.get<int>());
    }
  }
  if (const Json* g = find(j, "gesture_labels")) {
    for (const auto& e : *g) {
      if (!e.is_array() || e.size() != 2) throw ConfigError("truth.gesture_labels: expected [left, right] entries");
      t.gesture_labels.push_back({hand_value(e[0], "truth.gesture_labels"), hand_value(e[1], "truth.gesture_labels")});
    }
  }
  return t;
}

Json to_json(const GroundTruth& t) {
  Json centers = Json::array();
  for (const auto& c : t.centers) centers.push_back({c.x, c.y});
  Json labels = Json::array();
  for (const auto& p : t.gesture_labels) labels.push_back(pair_json(p));
  return {{"centers", centers}, {"windows", t.windows}, {"gesture_labels", labels}};
}

GestureConfig gesture_config_from_json(const Json& j) {
  require_object(j, "gesture");
  GestureConfig cfg = default_gesture_config();
  if (const Json* h = find(j, "hsv")) {
    require_object(*h, "hsv");
    const auto hh = number_pair(*h, "h", {cfg.hsv.h.lo, cfg.hsv.h.hi}, "hsv");
    const auto ss = number_pair(*h, "s", {cfg.hsv.s.lo, cfg.hsv.s.hi}, "hsv");
    const auto vv = number_pair(*h, "v", {cfg.hsv.v.lo, cfg.hsv.v.hi}, "hsv");
    cfg.hsv = {{hh[0], hh[1]}, {ss[0], ss[1]}, {vv[0], vv[1]}};
    cfg.hsv.validate();
  }
  if (const Json* t = find(j, "templates")) {
    require_object(*t, "templates");
    TemplateBank bank;
    for (const auto& [name, v] : t->items()) {
      const auto g = parse_gesture(name);
      if (!g) throw ConfigError("templates." + name + ": unknown gesture class");
      if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number())
        throw ConfigError("templates." + name + ": expected [extent, eccentricity, solidity]");
      bank.entries.push_back({*g, {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()}});
    }
    if (bank.entries.empty()) throw ConfigError("templates: empty template bank");
    std::sort(bank.entries.begin(), bank.entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    cfg.bank = std::move(bank);
  }
  cfg.blur_sigma = number(j, "blur_sigma", cfg.blur_sigma, "");
  cfg.min_area = integer(j, "min_area", cfg.min_area, "");
  return cfg;
}

Json to_json(const GestureConfig& cfg) {
  Json templates = Json::object();
  for (const auto& [g, d] : cfg.bank.entries)
    templates[std::string(to_string(g))] = {d.extent, d.eccentricity, d.solidity};
  return {{"hsv",
           {{"h", {cfg.hsv.h.lo, cfg.hsv.h.hi}},
            {"s", {cfg.hsv.s.lo, cfg.hsv.s.hi}},
            {"v", {cfg.hsv.v.lo, cfg.hsv.v.hi}}}},
          {"templates", templates},
          {"blur_sigma", cfg.blur_sigma},
          {"min_area", cfg.min_area}};
}

MappingTable mapping_from_json(const Json& j) {
  require_object(j, "mapping");
  const Json* pairs = find(j, "pairs");
  if (!pairs) throw ConfigError("mapping: missing field 'pairs'");
  if (!pairs->is_array()) throw ConfigError("pairs: expected an array");
  MappingTable table;
  for (std::size_t i = 0; i < pairs->size(); ++i) {
    const std::string ctx = "pairs[" + std::to_string(i) + "]";
    const Json& e = (*pairs)[i];
    const GesturePair p = pair_from_object(e, ctx);
    const Json* tok = find(e, "token");
    if (!tok || !tok->is_string()) throw ConfigError(ctx + ".token: expected a token name");
    const auto t = parse_token(tok->get<std::string>());
    if (!t) throw ConfigError(ctx + ".token: unknown token '" + tok->get<std::string>() + "'");
    try {
      table.add(p, *t);
    } catch (const ConfigError& err) {
      throw ConfigError(ctx + ": " + err.what());
    }
  }
  table.validate();
  return table;
}

Json to_json(const MappingTable& table) {
  Json pairs = Json::array();
  for (const auto& e : table.entries())
    pairs.push_back({{"left", hand_json(e.pair.left)}, {"right", hand_json(e.pair.right)}, {"token", to_string(e.token)}});
  return {{"pairs", pairs}};
}

MappingTable load_mapping(const std::filesystem::path& path) {
  try {
    return mapping_from_json(read_json_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ServoGains gains_from_json(const Json& j) {
  require_object(j, "gains");
  ServoGains g;
  g.yaw = pid_from_json(j, g.yaw, "yaw");
  g.pitch = pid_from_json(j, g.pitch, "pitch");
  g.vertical = pid_from_json(j, g.vertical, "vertical");
  g.forward = pid_from_json(j, g.forward, "forward");
  g.target_area_fraction = number(j, "target_area_fraction", g.target_area_fraction, "");
  g.v_max = number(j, "v_max", g.v_max, "");
  g.omega_max = number(j, "omega_max", g.omega_max, "");
  if (!(g.target_area_fraction > 0.0 && g.target_area_fraction < 1.0))
    throw ConfigError("target_area_fraction: must be in (0, 1)");
  if (!(g.v_max > 0.0)) throw ConfigError("v_max: must be positive");
  if (!(g.omega_max > 0.0)) throw ConfigError("omega_max: must be positive");
  return g;
}

Json to_json(const ServoGains& g) {
  return {{"yaw", pid_json(g.yaw)},
          {"pitch", pid_json(g.pitch)},
          {"vertical", pid_json(g.vertical)},
          {"forward", pid_json(g.forward)},
          {"target_area_fraction", g.target_area_fraction},
          {"v_max", g.v_max},
          {"omega_max", g.omega_max}};
}

Json detection_to_json(const DetectionResult& r) {
  return {{"cycle", r.cycle_index},
          {"last_frame", r.last_frame},
          {"detected", r.detected},
          {"score", r.score},
          {"window", r.window()},
          {"bbox", {r.bbox.cx, r.bbox.cy, r.bbox.w, r.bbox.h}}};
}

Json token_to_json(const GesturePairToken& t) {
  return {{"frame", t.frame},
          {"left", t.left ? Json(std::string(to_string(t.left->gesture))) : Json(nullptr)},
          {"right", t.right ? Json(std::string(to_string(t.right->gesture))) : Json(nullptr)},
          {"conf_l", t.left ? Json(t.left->confidence) : Json(nullptr)},
          {"conf_r", t.right ? Json(t.right->confidence) : Json(nullptr)}};
}

GesturePairToken token_from_json(const Json& j) {
  require_object(j, "token");
  GesturePairToken t;
  const Json* f = find(j, "frame");
  if (!f || !f->is_number_integer()) throw ConfigError("token.frame: expected an integer");
  t.frame = f->get<std::int64_t>();
  const auto side = [&](const char* key, const char* conf) -> std::optional<HandObservation> {
    const auto it = j.find(key);
    if (it == j.end()) return std::nullopt;
    const auto g = hand_value(*it, std::string("token.") + key);
    if (!g) return std::nullopt;
    return HandObservation{*g, number(j, conf, 1.0, "token")};
  };
  t.left = side("left", "conf_l");
  t.right = side("right", "conf_r");
  return t;
}

Instruction instruction_from_json(const Json& j) {
  require_object(j, "instruction");
  const Json* type = find(j, "type");
  if (!type || !type->is_string()) throw ConfigError("instruction.type: missing field");
  const std::string ty = type->get<std::string>();
  const auto opt_int = [&](const char* key) -> std::optional<int> {
    const Json* v = find(j, key);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) throw ConfigError(std::string("instruction.") + key + ": expected an integer");
    return v->get<int>();
  };
  if (ty == "TaskSwitch") {
    const Json* task = find(j, "task");
    if (!task || !task->is_string()) throw ConfigError("instruction.task: missing field");
    const auto t = parse_task(task->get<std::string>());
    if (!t) throw ConfigError("instruction.task: unknown task '" + task->get<std::string>() + "'");
    return TaskSwitch{*t, opt_int("program"), opt_int("duration_s")};
  }
  if (ty == "ParamReconfig") {
    const auto param = opt_int("param");
    if (!param) throw ConfigError("instruction.param: missing field");
    const Json* dir = find(j, "direction");
    if (!dir || !dir->is_string()) throw ConfigError("instruction.direction: missing field");
    const std::string d = dir->get<std::string>();
    if (d != "INCREASE" && d != "DECREASE") throw ConfigError("instruction.direction: unknown direction '" + d + "'");
    return ParamReconfig{*param, d == "INCREASE" ? Direction::Increase : Direction::Decrease};
  }
  if (ty == "Snapshot") {
    const auto d = opt_int("duration_s");
    if (!d) throw ConfigError("instruction.duration_s: missing field");
    return Snapshot{*d};
  }
  throw ConfigError("instruction.type: unknown instruction type '" + ty + "'");
}

Json instruction_to_json(const Instruction& ins) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, TaskSwitch>) {
          Json j = {{"type", "TaskSwitch"}, {"task", std::string(to_string(v.task))}};
          if (v.program) j["program"] = *v.program;
          if (v.duration_s) j["duration_s"] = *v.duration_s;
          return j;
        } else if constexpr (std::is_same_v<T, ParamReconfig>) {
          return {{"type", "ParamReconfig"}, {"param", v.param}, {"direction", std::string(to_string(v.direction))}};
        } else {
          return {{"type", "Snapshot"}, {"duration_s", v.duration_s}};
        }
      },
      ins);
}

Json to_json(const DecodedInstruction& d) {
  Json j = instruction_to_json(d.instruction);
  j["emitted_at_frame"] = d.emitted_at_frame;
  return j;
}

std::string trajectory_csv(std::span<const FollowLogRow> log) {
  std::ostringstream os;
  os << "t,x,y,z,yaw,pitch,ex,ey,ea,cmd_yaw,cmd_pitch,cmd_fwd,cmd_vert,detected\n";
  for (const auto& r : log) {
    const double vals[] = {r.state.time,      r.state.position.x,    r.state.position.y,      r.state.position.z,
                           r.state.yaw,       r.state.pitch,         r.error.ex,              r.error.ey,
                           r.error.ea,        r.command.yaw_rate,    r.command.pitch_rate,    r.command.forward_speed,
                           r.command.vertical_speed};
    for (double v : vals) os << fmt(v) << ',';
    os << (r.detected ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace diverlink
