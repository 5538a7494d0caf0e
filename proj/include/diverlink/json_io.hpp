#pragma once

// JSON / JSONL / CSV encodings of configs, ground truth and run outputs.
// Readers throw ConfigError naming the offending field; file helpers throw
// IoError naming the path.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "diverlink/core.hpp"
#include "diverlink/gesture.hpp"
#include "diverlink/lang.hpp"
#include "diverlink/mdpm.hpp"
#include "diverlink/servo.hpp"
#include "diverlink/synth.hpp"

namespace diverlink {

using Json = nlohmann::json;

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);
/// One compact JSON document per line.
std::string to_jsonl(std::span<const Json> rows);
std::vector<Json> read_jsonl_file(const std::filesystem::path& path);

MdpmConfig mdpm_config_from_json(const Json& j);
Json to_json(const MdpmConfig& cfg);

DiverSceneSpec diver_scene_from_json(const Json& j);
Json to_json(const DiverSceneSpec& spec);

GestureSceneSpec gesture_scene_from_json(const Json& j);
Json to_json(const GestureSceneSpec& spec);

GroundTruth truth_from_json(const Json& j);
Json to_json(const GroundTruth& truth);

/// {hsv: {h,s,v}, templates: {class: [extent, eccentricity, solidity]}}.
/// Missing templates fall back to default_template_bank().
GestureConfig gesture_config_from_json(const Json& j);
Json to_json(const GestureConfig& cfg);

MappingTable mapping_from_json(const Json& j);
Json to_json(const MappingTable& table);
MappingTable load_mapping(const std::filesystem::path& path);

ServoGains gains_from_json(const Json& j);
Json to_json(const ServoGains& gains);

Json detection_to_json(const DetectionResult& r);
Json token_to_json(const GesturePairToken& t);
GesturePairToken token_from_json(const Json& j);

Instruction instruction_from_json(const Json& j);
Json instruction_to_json(const Instruction& ins);
Json to_json(const DecodedInstruction& d);

std::string trajectory_csv(std::span<const FollowLogRow> log);

}  // namespace diverlink
