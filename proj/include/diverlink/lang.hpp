#pragma once

// Gesture instruction language: debounced gesture-pair tokens, a one-to-one
// pair -> instruction-token mapping, and the FSM that assembles instructions.
//
//   program := STOP task [DIGIT+] GO
//            | STOP EXECUTE DIGIT+ GO
//            | CONTD SNAPSHOT DIGIT+ GO
//            | CONTD PARAM DIGIT+ (INCREASE | DECREASE) GO
//
// Digits are 0..5 and concatenate decimally. Tokens with no transition from
// the current state are ignored.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "diverlink/gesture.hpp"

namespace diverlink {

enum class TokenKind : std::uint8_t {
  Stop, Contd, Go, Snapshot, Hover, Follow, Execute, Param,
  Increase, Decrease, MoveLeft, MoveRight, MoveUp, MoveDown, Digit
};

struct InstructionToken {
  TokenKind kind = TokenKind::Stop;
  int digit = 0;  // payload for Digit, 0..5

  static InstructionToken make_digit(int d);
  friend bool operator==(const InstructionToken&, const InstructionToken&) = default;
};

/// "STOP", "MOVE_LEFT", "DIGIT(3)", ...
std::string to_string(const InstructionToken& t);
std::optional<InstructionToken> parse_token(std::string_view s);

/// One-to-one gesture pair -> token table. Pairs not in the table are no-ops.
class MappingTable {
 public:
  struct Entry {
    GesturePair pair;
    InstructionToken token;
  };

  /// Throws ConfigError on a duplicate pair or duplicate target token.
  void add(const GesturePair& pair, const InstructionToken& token);
  [[nodiscard]] std::optional<InstructionToken> lookup(const GesturePair& pair) const;
  [[nodiscard]] std::optional<GesturePair> pair_for(const InstructionToken& token) const;
  [[nodiscard]] const std::vector<Entry>& entries() const noexcept { return entries_; }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  /// Requires both sides of every pair and a GO mapping.
  void validate() const;

  static MappingTable default_table();

 private:
  std::vector<Entry> entries_;
};

enum class Task : std::uint8_t { Hover, Follow, MoveLeft, MoveRight, MoveUp, MoveDown, Execute };
enum class Direction : std::uint8_t { Increase, Decrease };

std::string_view to_string(Task t) noexcept;
std::string_view to_string(Direction d) noexcept;

struct TaskSwitch {
  Task task = Task::Hover;
  std::optional<int> program;     // EXECUTE only
  std::optional<int> duration_s;  // >= 1 when present
  friend bool operator==(const TaskSwitch&, const TaskSwitch&) = default;
};

struct ParamReconfig {
  int param = 0;
  Direction direction = Direction::Increase;
  friend bool operator==(const ParamReconfig&, const ParamReconfig&) = default;
};

struct Snapshot {
  int duration_s = 1;
  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

using Instruction = std::variant<TaskSwitch, ParamReconfig, Snapshot>;

std::string describe(const Instruction& ins);

struct DecodedInstruction {
  Instruction instruction;
  std::int64_t emitted_at_frame = 0;
};

enum class FsmState : std::uint8_t {
  Idle, GotStop, GotContd, TaskChosen, AwaitProgramNum, AwaitParamNum, AwaitDirection, AwaitSnapDuration, Armed
};

std::string_view to_string(FsmState s) noexcept;

inline constexpr int kDebounceFrames = 10;
inline constexpr int kIdleResetFrames = 600;
inline constexpr std::size_t kMaxDigits = 6;

struct DebounceState {
  GesturePair last;
  int run = 0;  // consecutive frames of `last`, capped at kDebounceFrames
  bool fired = false;
};

struct DecoderState {
  FsmState state = FsmState::Idle;
  Task task = Task::Hover;
  std::string accumulator;  // decimal digits
  int param = 0;
  Direction direction = Direction::Increase;
  DebounceState debounce;
  int frames_since_token = 0;
};

/// Feeds one raw pair. Returns the mapped token on the frame its run reaches
/// kDebounceFrames; a held pair fires once until the run is broken.
std::optional<InstructionToken> debounce_step(DebounceState& state, const GesturePair& pair, const MappingTable& mapping);

struct ConfirmedToken {
  InstructionToken token;
  std::int64_t frame = 0;
};

std::vector<ConfirmedToken> debounce(std::span<const GesturePairToken> stream, const MappingTable& mapping);

/// Pure FSM transition. Emits on GO from a complete state, then resets.
std::pair<DecoderState, std::optional<Instruction>> step_fsm(DecoderState state, const InstructionToken& token);

/// Streaming debounce + FSM with the idle-reset timeout.
class InstructionDecoder {
 public:
  explicit InstructionDecoder(MappingTable mapping);

  std::optional<DecodedInstruction> push(const GesturePairToken& token);
  [[nodiscard]] const DecoderState& state() const noexcept { return state_; }

 private:
  MappingTable mapping_;
  DecoderState state_;
};

std::vector<DecodedInstruction> decode(std::span<const GesturePairToken> stream, const MappingTable& mapping);

/// Instruction tokens that spell `ins`, sentinels included.
std::vector<InstructionToken> encode_instruction(const Instruction& ins);

struct StreamLayout {
  int hold = 20;  // frames each pair is held
  int gap = 10;   // (none, none) frames after every hold
};

/// Per-frame gesture pairs that decode to `program` under `mapping`.
std::vector<GesturePair> canonical_pairs(std::span<const Instruction> program, const MappingTable& mapping,
                                         const StreamLayout& layout = {});

std::vector<GesturePairToken> to_tokens(std::span<const GesturePair> pairs);

}  // namespace diverlink
