#include "diverlink/lang.hpp"

#include <algorithm>
#include <array>
#include <charconv>

#include "diverlink/errors.hpp"

namespace diverlink {

namespace {

constexpr std::array<std::string_view, 14> kTokenNames = {
    "STOP", "CONTD", "GO", "SNAPSHOT", "HOVER", "FOLLOW", "EXECUTE",
    "PARAM", "INCREASE", "DECREASE", "MOVE_LEFT", "MOVE_RIGHT", "MOVE_UP", "MOVE_DOWN"};

std::string pair_name(const GesturePair& p) {
  const auto side = [](const std::optional<GestureClass>& g) { return g ? std::string(to_string(*g)) : std::string("none"); };
  return "(" + side(p.left) + "," + side(p.right) + ")";
}

std::optional<Task> task_for(TokenKind k) {
  switch (k) {
    case TokenKind::Hover: return Task::Hover;
    case TokenKind::Follow: return Task::Follow;
    case TokenKind::MoveLeft: return Task::MoveLeft;
    case TokenKind::MoveRight: return Task::MoveRight;
    case TokenKind::MoveUp: return Task::MoveUp;
    case TokenKind::MoveDown: return Task::MoveDown;
    default: return std::nullopt;
  }
}

TokenKind token_for(Task t) {
  switch (t) {
    case Task::Hover: return TokenKind::Hover;
    case Task::Follow: return TokenKind::Follow;
    case Task::MoveLeft: return TokenKind::MoveLeft;
    case Task::MoveRight: return TokenKind::MoveRight;
    case Task::MoveUp: return TokenKind::MoveUp;
    case Task::MoveDown: return TokenKind::MoveDown;
    case Task::Execute: return TokenKind::Execute;
  }
  return TokenKind::Hover;
}

int accumulated(const std::string& digits) {
  int v = 0;
  std::from_chars(digits.data(), digits.data() + digits.size(), v);
  return v;
}

void append_digit(DecoderState& s, int d) {
  if (s.accumulator.size() < kMaxDigits) s.accumulator.push_back(static_cast<char>('0' + d));
}

}  // namespace

InstructionToken InstructionToken::make_digit(int d) {
  if (d < 0 || d > 5) throw ArgumentError("digit token payload must lie in [0,5]");
  return {TokenKind::Digit, d};
}

std::string to_string(const InstructionToken& t) {
  if (t.kind == TokenKind::Digit) return "DIGIT(" + std::to_string(t.digit) + ")";
  return std::string(kTokenNames[static_cast<std::size_t>(t.kind)]);
}

std::optional<InstructionToken> parse_token(std::string_view s) {
  if (s.size() == 8 && s.starts_with("DIGIT(") && s.back() == ')') {
    const char c = s[6];
    if (c >= '0' && c <= '5') return InstructionToken{TokenKind::Digit, c - '0'};
    return std::nullopt;
  }
  for (std::size_t i = 0; i < kTokenNames.size(); ++i) {
    if (kTokenNames[i] == s) return InstructionToken{static_cast<TokenKind>(i), 0};
  }
  return std::nullopt;
}

void MappingTable::add(const GesturePair& pair, const InstructionToken& token) {
  for (const auto& e : entries_) {
    if (e.pair == pair) throw ConfigError("mapping: duplicate gesture pair " + pair_name(pair));
    if (e.token == token) throw ConfigError("mapping: token " + to_string(token) + " mapped twice");
  }
  entries_.push_back({pair, token});
}

std::optional<InstructionToken> MappingTable::lookup(const GesturePair& pair) const {
  for (const auto& e : entries_) {
    if (e.pair == pair) return e.token;
  }
  return std::nullopt;
}

std::optional<GesturePair> MappingTable::pair_for(const InstructionToken& token) const {
  for (const auto& e : entries_) {
    if (e.token == token) return e.pair;
  }
  return std::nullopt;
}

void MappingTable::validate() const {
  for (const auto& e : entries_) {
    if (!e.pair.left || !e.pair.right) throw ConfigError("mapping: pair " + pair_name(e.pair) + " must name both hands");
  }
  if (!pair_for({TokenKind::Go, 0})) throw ConfigError("mapping: GO has no gesture pair (GO is mandatory)");
}

MappingTable MappingTable::default_table() {
  using G = GestureClass;
  MappingTable m;
  const auto add = [&](G l, G r, TokenKind k) { m.add({l, r}, {k, 0}); };
  add(G::Zero, G::Zero, TokenKind::Stop);
  add(G::Ok, G::Ok, TokenKind::Contd);
  add(G::Five, G::Five, TokenKind::Go);
  add(G::Pic, G::Pic, TokenKind::Snapshot);
  add(G::One, G::Ok, TokenKind::Hover);
  add(G::Two, G::Ok, TokenKind::Follow);
  add(G::Three, G::Ok, TokenKind::Execute);
  add(G::Four, G::Ok, TokenKind::Param);
  add(G::Left, G::Left, TokenKind::Decrease);
  add(G::Right, G::Right, TokenKind::Increase);
  add(G::Left, G::Ok, TokenKind::MoveLeft);
  add(G::Right, G::Ok, TokenKind::MoveRight);
  add(G::Left, G::Pic, TokenKind::MoveUp);
  add(G::Right, G::Pic, TokenKind::MoveDown);
  constexpr std::array<G, 6> digits = {G::Zero, G::One, G::Two, G::Three, G::Four, G::Five};
  for (int d = 0; d < 6; ++d) m.add({digits[d], G::Pic}, InstructionToken::make_digit(d));
  return m;
}

std::string_view to_string(Task t) noexcept {
  static constexpr std::array<std::string_view, 7> names = {"HOVER",   "FOLLOW",    "MOVE_LEFT", "MOVE_RIGHT",
                                                            "MOVE_UP", "MOVE_DOWN", "EXECUTE"};
  return names[static_cast<std::size_t>(t)];
}

std::string_view to_string(Direction d) noexcept { return d == Direction::Increase ? "INCREASE" : "DECREASE"; }

std::string_view to_string(FsmState s) noexcept {
  static constexpr std::array<std::string_view, 9> names = {
      "Idle", "GotStop", "GotContd", "TaskChosen", "AwaitProgramNum", "AwaitParamNum", "AwaitDirection",
      "AwaitSnapDuration", "Armed"};
  return names[static_cast<std::size_t>(s)];
}

std::string describe(const Instruction& ins) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, TaskSwitch>) {
          std::string s = "TaskSwitch{" + std::string(to_string(v.task));
          if (v.program) s += " " + std::to_string(*v.program);
          if (v.duration_s) s += ", " + std::to_string(*v.duration_s) + " s";
          return s + "}";
        } else if constexpr (std::is_same_v<T, ParamReconfig>) {
          return "ParamReconfig{" + std::to_string(v.param) + ", " + std::string(to_string(v.direction)) + "}";
        } else {
          return "Snapshot{" + std::to_string(v.duration_s) + " s}";
        }
      },
      ins);
}

std::optional<InstructionToken> debounce_step(DebounceState& state, const GesturePair& pair, const MappingTable& mapping) {
  if (state.run > 0 && pair == state.last) {
    state.run = std::min(state.run + 1, kDebounceFrames);
  } else {
    state.last = pair;
    state.run = 1;
    state.fired = false;
  }
  if (state.run < kDebounceFrames || state.fired) return std::nullopt;
  state.fired = true;
  return mapping.lookup(pair);
}

std::vector<ConfirmedToken> debounce(std::span<const GesturePairToken> stream, const MappingTable& mapping) {
  DebounceState st;
  std::vector<ConfirmedToken> out;
  for (const auto& tok : stream) {
    if (auto t = debounce_step(st, tok.pair(), mapping)) out.push_back({*t, tok.frame});
  }
  return out;
}

std::pair<DecoderState, std::optional<Instruction>> step_fsm(DecoderState s, const InstructionToken& token) {
  const TokenKind k = token.kind;
  std::optional<Instruction> emitted;
  const auto reset = [&s] {
    s.state = FsmState::Idle;
    s.accumulator.clear();
    s.param = 0;
  };
  switch (s.state) {
    case FsmState::Idle:
      if (k == TokenKind::Stop) s.state = FsmState::GotStop;
      if (k == TokenKind::Contd) s.state = FsmState::GotContd;
      break;
    case FsmState::GotStop:
      if (auto task = task_for(k)) {
        s.task = *task;
        s.state = FsmState::TaskChosen;
      } else if (k == TokenKind::Execute) {
        s.task = Task::Execute;
        s.state = FsmState::AwaitProgramNum;
      }
      break;
    case FsmState::GotContd:
      if (k == TokenKind::Snapshot) s.state = FsmState::AwaitSnapDuration;
      if (k == TokenKind::Param) s.state = FsmState::AwaitParamNum;
      break;
    case FsmState::TaskChosen:
      if (k == TokenKind::Digit) {
        append_digit(s, token.digit);
      } else if (k == TokenKind::Go) {
        TaskSwitch ts{s.task, std::nullopt, std::nullopt};
        if (!s.accumulator.empty()) ts.duration_s = accumulated(s.accumulator);
        if (!ts.duration_s || *ts.duration_s >= 1) {
          emitted = ts;
          reset();
        }
      }
      break;
    case FsmState::AwaitProgramNum:
      if (k == TokenKind::Digit) {
        append_digit(s, token.digit);
      } else if (k == TokenKind::Go && !s.accumulator.empty()) {
        emitted = TaskSwitch{Task::Execute, accumulated(s.accumulator), std::nullopt};
        reset();
      }
      break;
    case FsmState::AwaitSnapDuration:
      if (k == TokenKind::Digit) {
        append_digit(s, token.digit);
      } else if (k == TokenKind::Go && !s.accumulator.empty() && accumulated(s.accumulator) >= 1) {
        emitted = Snapshot{accumulated(s.accumulator)};
        reset();
      }
      break;
    case FsmState::AwaitParamNum:
      if (k == TokenKind::Digit) {
        append_digit(s, token.digit);
        s.state = FsmState::AwaitDirection;
      }
      break;
    case FsmState::AwaitDirection:
      if (k == TokenKind::Digit) {
        append_digit(s, token.digit);
      } else if (k == TokenKind::Increase || k == TokenKind::Decrease) {
        s.param = accumulated(s.accumulator);
        s.accumulator.clear();
        s.direction = k == TokenKind::Increase ? Direction::Increase : Direction::Decrease;
        s.state = FsmState::Armed;
      }
      break;
    case FsmState::Armed:
      if (k == TokenKind::Go) {
        emitted = ParamReconfig{s.param, s.direction};
        reset();
      }
      break;
  }
  return {std::move(s), std::move(emitted)};
}

InstructionDecoder::InstructionDecoder(MappingTable mapping) : mapping_(std::move(mapping)) {}

std::optional<DecodedInstruction> InstructionDecoder::push(const GesturePairToken& token) {
  const auto confirmed = debounce_step(state_.debounce, token.pair(), mapping_);
  if (!confirmed) {
    if (state_.state != FsmState::Idle && ++state_.frames_since_token >= kIdleResetFrames) {
      state_.state = FsmState::Idle;
      state_.accumulator.clear();
      state_.param = 0;
      state_.frames_since_token = 0;
    }
    return std::nullopt;
  }
  state_.frames_since_token = 0;
  auto [next, emitted] = step_fsm(std::move(state_), *confirmed);
  state_ = std::move(next);
  if (!emitted) return std::nullopt;
  return DecodedInstruction{std::move(*emitted), token.frame};
}

std::vector<DecodedInstruction> decode(std::span<const GesturePairToken> stream, const MappingTable& mapping) {
  InstructionDecoder dec(mapping);
  std::vector<DecodedInstruction> out;
  for (const auto& t : stream) {
    if (auto ins = dec.push(t)) out.push_back(std::move(*ins));
  }
  return out;
}

namespace {

void push_number(std::vector<InstructionToken>& out, int value) {
  if (value < 0) throw ArgumentError("instruction numbers must be >= 0");
  const std::string digits = std::to_string(value);
  for (char c : digits) {
    if (c > '5') throw ArgumentError("number " + digits + " uses digits above 5 and cannot be signed");
    out.push_back(InstructionToken::make_digit(c - '0'));
  }
}

}  // namespace

std::vector<InstructionToken> encode_instruction(const Instruction& ins) {
  std::vector<InstructionToken> out;
  std::visit(
      [&out](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, TaskSwitch>) {
          out.push_back({TokenKind::Stop, 0});
          out.push_back({token_for(v.task), 0});
          if (v.task == Task::Execute) {
            if (!v.program) throw ArgumentError("EXECUTE needs a program number");
            push_number(out, *v.program);
          } else if (v.duration_s) {
            push_number(out, *v.duration_s);
          }
        } else if constexpr (std::is_same_v<T, ParamReconfig>) {
          out.push_back({TokenKind::Contd, 0});
          out.push_back({TokenKind::Param, 0});
          push_number(out, v.param);
          out.push_back({v.direction == Direction::Increase ? TokenKind::Increase : TokenKind::Decrease, 0});
        } else {
          out.push_back({TokenKind::Contd, 0});
          out.push_back({TokenKind::Snapshot, 0});
          push_number(out, v.duration_s);
        }
      },
      ins);
  out.push_back({TokenKind::Go, 0});
  return out;
}

std::vector<GesturePair> canonical_pairs(std::span<const Instruction> program, const MappingTable& mapping,
                                         const StreamLayout& layout) {
  if (layout.hold < kDebounceFrames) throw ArgumentError("hold must be at least the debounce length");
  std::vector<GesturePair> out;
  for (const auto& ins : program) {
    for (const auto& tok : encode_instruction(ins)) {
      const auto pair = mapping.pair_for(tok);
      if (!pair) throw ConfigError("mapping has no gesture pair for " + to_string(tok));
      if (layout.gap == 0 && !out.empty() && out.back() == *pair) out.emplace_back();
      out.insert(out.end(), layout.hold, *pair);
      out.insert(out.end(), layout.gap, GesturePair{});
    }
  }
  return out;
}

std::vector<GesturePairToken> to_tokens(std::span<const GesturePair> pairs) {
  std::vector<GesturePairToken> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) out.push_back(GesturePairToken::from_pair(pairs[i], static_cast<std::int64_t>(i)));
  return out;
}

}  // namespace diverlink
