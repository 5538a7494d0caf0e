#include "diverlink/image_io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <string>

#include "diverlink/errors.hpp"
#include "json.hpp"

namespace diverlink {

namespace fs = std::filesystem;

void write_pnm(const Frame& frame, const fs::path& path) {
  frame.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << (frame.is_gray() ? "P5" : "P6") << '\n' << frame.width << ' ' << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels.data()), static_cast<std::streamsize>(frame.pixels.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

namespace {

// Reads one whitespace-delimited header integer, skipping '#' comments.
int read_header_int(std::istream& in, const fs::path& path) {
  int c = in.peek();
  while (c != EOF) {
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
    c = in.peek();
  }
  int value = 0;
  if (!(in >> value)) throw IoError("malformed PNM header: " + path.string());
  return value;
}

}  // namespace

Frame read_pnm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open frame file: " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
    throw IoError("not a binary PGM/PPM file: " + path.string());
  }
  const int channels = magic[1] == '5' ? 1 : 3;
  const int w = read_header_int(in, path);
  const int h = read_header_int(in, path);
  const int maxval = read_header_int(in, path);
  if (w <= 0 || h <= 0 || maxval != 255) throw IoError("unsupported PNM header in " + path.string());
  in.get();  // single whitespace before raster
  Frame f;
  f.width = w;
  f.height = h;
  f.channels = channels;
  f.pixels.resize(static_cast<std::size_t>(w) * h * channels);
  in.read(reinterpret_cast<char*>(f.pixels.data()), static_cast<std::streamsize>(f.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(f.pixels.size())) {
    throw IoError("truncated raster in " + path.string());
  }
  return f;
}

fs::path frame_filename(int index, int channels) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06d.%s", index, channels == 1 ? "pgm" : "ppm");
  return buf;
}

void save_sequence(const fs::path& dir, const FrameSequence& frames, double fps) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  if (frames.empty()) throw ArgumentError("cannot save an empty sequence");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    write_pnm(frames[i], dir / frame_filename(static_cast<int>(i), frames[i].channels));
  }
  nlohmann::json m = {{"fps", fps},
                      {"width", frames.front().width},
                      {"height", frames.front().height},
                      {"channels", frames.front().channels},
                      {"frame_count", frames.size()}};
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
  out << m.dump(2) << '\n';
}

SequenceManifest read_manifest(const fs::path& dir) {
  const fs::path p = dir / "manifest.json";
  std::ifstream in(p);
  if (!in) throw IoError("missing manifest: " + p.string());
  nlohmann::json j;
  try {
    in >> j;
    SequenceManifest m;
    m.fps = j.at("fps").get<double>();
    m.width = j.at("width").get<int>();
    m.height = j.at("height").get<int>();
    m.channels = j.at("channels").get<int>();
    m.frame_count = j.at("frame_count").get<int>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed manifest " + p.string() + ": " + e.what());
  }
}

FrameSequence load_sequence(const fs::path& dir) {
  const SequenceManifest m = read_manifest(dir);
  FrameSequence frames;
  frames.reserve(m.frame_count);
  for (int i = 0; i < m.frame_count; ++i) {
    const fs::path p = dir / frame_filename(i, m.channels);
    Frame f = read_pnm(p);
    if (f.width != m.width || f.height != m.height || f.channels != m.channels) {
      throw IoError("frame does not match manifest: " + p.string());
    }
    f.index = i;
    f.timestamp_s = i / m.fps;
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace diverlink
