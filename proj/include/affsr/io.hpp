#pragma once

/* ---
   File formats:
     - binary PGM (P5, 8-bit) for interchange; samples are clamped to
       [0, 255] and rounded on write;
     - raw float sidecar (.f32): one text header line "width height\n"
       followed by width*height little-endian 32-bit floats, row-major.
       All quantitative comparisons go through this format;
     - motion files: one text record per frame,
       "index m11 m12 m21 m22 t1 t2" in SR-pitch units, '#' comments.
   --- */

#include <string>
#include <vector>

#include "affsr/core.hpp"

namespace affsr {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_pgm(const std::string& path, const ImageBuffer& img);
ImageBuffer read_pgm(const std::string& path);

void write_f32(const std::string& path, const ImageBuffer& img);
ImageBuffer read_f32(const std::string& path);

/// Dispatches on extension: .f32 or .pgm.
ImageBuffer read_image(const std::string& path);

void write_motion_file(const std::string& path,
                       const std::vector<AffineMap2D>& motions);
/// Validates that indices 0..K-1 each appear exactly once and that every
/// matrix is invertible.
std::vector<AffineMap2D> read_motion_file(const std::string& path);

}  // namespace affsr
