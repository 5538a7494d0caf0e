#pragma once

// Scoring against synthetic ground truth and JSON-driven experiment runs.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "diverlink/json_io.hpp"

namespace diverlink {

enum class CycleOutcome : std::uint8_t { Positive, Missed, Wrong };

std::string_view to_string(CycleOutcome o) noexcept;

struct DetectionReport {
  std::vector<CycleOutcome> outcomes;  // one per cycle
  int positive = 0;
  int missed = 0;
  int wrong = 0;
  int tol_windows = 1;

  [[nodiscard]] int total() const noexcept { return positive + missed + wrong; }
  [[nodiscard]] double percent(CycleOutcome o) const;
};

/// A cycle is positive when detected with its terminal window within
/// `tol_windows` (Chebyshev grid distance) of the truth window at the
/// cycle's last frame, wrong when detected farther away, missed otherwise.
/// Throws ArgumentError when the truth does not cover a cycle.
DetectionReport score_detection(std::span<const DetectionResult> results, const GroundTruth& truth,
                                const GridConfig& grid, int tol_windows = 1);

Json to_json(const DetectionReport& r);

struct InstructionReport {
  int total_instructions = 0;
  int correct_instructions = 0;
  int total_tokens = 0;
  int correct_tokens = 0;

  [[nodiscard]] double instruction_accuracy() const;
  [[nodiscard]] double token_accuracy() const;
};

/// Instructions are compared positionally by exact AST equality. Gesture
/// tokens are the ground-truth segments (a hand present, at least
/// kDebounceFrames long); one counts as recognized when the recognized
/// stream holds the same pair for kDebounceFrames consecutive frames inside
/// the segment.
InstructionReport score_instructions(std::span<const Instruction> decoded, std::span<const Instruction> expected,
                                     std::span<const GesturePair> truth_labels,
                                     std::span<const GesturePairToken> recognized);

Json to_json(const InstructionReport& r);

/// Run-length segments spelling `program`, with `lead` empty frames first.
std::vector<GestureSegment> script_segments(std::span<const Instruction> program, const MappingTable& mapping,
                                            const StreamLayout& layout = {}, int lead = 10);

struct ExperimentOptions {
  /// Outputs go to out_root / <run out>; empty means relative to the cwd.
  std::filesystem::path out_root;
  /// Overrides every scene seed when set.
  std::optional<std::uint64_t> seed;
  /// Worker threads for multi-run specs; 0 picks hardware concurrency.
  unsigned workers = 0;
};

/// One run object {kind, scene, out, ...}. Relative config paths resolve
/// against `base_dir`. Writes report.json plus logs into the run's out dir
/// and returns the report.
Json run_experiment(const Json& run, const std::filesystem::path& base_dir, const ExperimentOptions& opts = {});

/// A spec file holding one run object or {"runs": [...]}; runs execute in
/// parallel. Reports are returned in spec order.
std::vector<Json> run_experiment_file(const std::filesystem::path& spec, const ExperimentOptions& opts = {});

}  // namespace diverlink
