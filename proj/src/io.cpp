#include "affsr/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace affsr {

namespace {

void put_f32_le(std::ostream& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  const char bytes[4] = {char(bits & 0xFF), char((bits >> 8) & 0xFF),
                         char((bits >> 16) & 0xFF), char((bits >> 24) & 0xFF)};
  out.write(bytes, 4);
}

float get_f32_le(std::istream& in) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  const std::uint32_t bits = std::uint32_t(bytes[0]) | (std::uint32_t(bytes[1]) << 8) |
                             (std::uint32_t(bytes[2]) << 16) |
                             (std::uint32_t(bytes[3]) << 24);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

}  // namespace

void write_pgm(const std::string& path, const ImageBuffer& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "P5\n" << img.grid.width << " " << img.grid.height << "\n255\n";
  std::vector<unsigned char> row(img.grid.width);
  for (int v = 0; v < img.grid.height; ++v) {
    for (int u = 0; u < img.grid.width; ++u) {
      const double x = std::clamp(img.at(u, v), 0.0, 255.0);
      row[u] = static_cast<unsigned char>(std::lround(x));
    }
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
  if (!out) throw IoError("write failed: " + path);
}

ImageBuffer read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw IoError("not a binary PGM (P5): " + path);
  auto next_token = [&]() {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw IoError("truncated PGM header: " + path);
  };
  const int w = std::stoi(next_token());
  const int h = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (w < 1 || h < 1 || maxval != 255) throw IoError("unsupported PGM: " + path);
  in.get();  // single whitespace after maxval
  ImageBuffer img(GridSpec(w, h, 1.0));
  std::vector<unsigned char> row(w);
  for (int v = 0; v < h; ++v) {
    in.read(reinterpret_cast<char*>(row.data()), w);
    if (!in) throw IoError("truncated PGM data: " + path);
    for (int u = 0; u < w; ++u) img.at(u, v) = double(row[u]);
  }
  return img;
}

void write_f32(const std::string& path, const ImageBuffer& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << img.grid.width << " " << img.grid.height << "\n";
  for (double v : img.samples) put_f32_le(out, static_cast<float>(v));
  if (!out) throw IoError("write failed: " + path);
}

ImageBuffer read_f32(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  int w = 0, h = 0;
  if (!(hs >> w >> h) || w < 1 || h < 1)
    throw IoError("bad f32 header: " + path);
  ImageBuffer img(GridSpec(w, h, 1.0));
  for (double& v : img.samples) {
    v = double(get_f32_le(in));
    if (!in) throw IoError("truncated f32 data: " + path);
  }
  return img;
}

ImageBuffer read_image(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".f32")
    return read_f32(path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".pgm")
    return read_pgm(path);
  throw IoError("unknown image extension (expect .pgm or .f32): " + path);
}

void write_motion_file(const std::string& path,
                       const std::vector<AffineMap2D>& motions) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "# per-frame affine motions, SR-pitch units\n";
  out << "# index m11 m12 m21 m22 t1 t2\n";
  out.precision(17);
  for (std::size_t k = 0; k < motions.size(); ++k) {
    const AffineMap2D& w = motions[k];
    out << k << " " << w.m00 << " " << w.m01 << " " << w.m10 << " " << w.m11
        << " " << w.t.x << " " << w.t.y << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<AffineMap2D> read_motion_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<std::pair<int, AffineMap2D>> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    int idx;
    AffineMap2D w;
    if (!(ls >> idx)) continue;  // blank line
    if (!(ls >> w.m00 >> w.m01 >> w.m10 >> w.m11 >> w.t.x >> w.t.y))
      throw IoError(path + ":" + std::to_string(lineno) + ": malformed motion record");
    records.emplace_back(idx, w);
  }
  if (records.empty()) throw IoError("empty motion file: " + path);
  std::vector<AffineMap2D> motions(records.size());
  std::vector<char> seen(records.size(), 0);
  for (const auto& [idx, w] : records) {
    if (idx < 0 || idx >= static_cast<int>(records.size()) || seen[idx])
      throw IoError(path + ": frame indices must be 0..K-1, each exactly once");
    seen[idx] = 1;
    try {
      w.validate();
    } catch (const std::exception& e) {
      throw IoError(path + ": frame " + std::to_string(idx) + ": " + e.what());
    }
    motions[idx] = w;
  }
  return motions;
}

}  // namespace affsr
