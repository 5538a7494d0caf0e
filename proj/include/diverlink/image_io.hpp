#pragma once

#include <filesystem>

#include "diverlink/core.hpp"

namespace diverlink {

/// Binary PGM (P5) for gray frames, PPM (P6) for RGB. maxval must be 255.
void write_pnm(const Frame& frame, const std::filesystem::path& path);
Frame read_pnm(const std::filesystem::path& path);

struct SequenceManifest {
  double fps = 10.0;
  int width = 0;
  int height = 0;
  int channels = 1;
  int frame_count = 0;
};

/// `frame_%06d.pgm` (or .ppm) per frame plus manifest.json.
std::filesystem::path frame_filename(int index, int channels);
void save_sequence(const std::filesystem::path& dir, const FrameSequence& frames, double fps);
SequenceManifest read_manifest(const std::filesystem::path& dir);
/// Loads every frame listed by the manifest; timestamps are index / fps.
FrameSequence load_sequence(const std::filesystem::path& dir);

}  // namespace diverlink
