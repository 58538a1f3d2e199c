#pragma once

/* ---
   Ground-truthed synthetic LR sequences: smooth rotation+zoom motion
   schedules, projection of an HR reference through the exact box/box
   model, additive Gaussian noise, test charts and PSNR scoring.

   The reference frame is the last one (the most resolved view); frame 0
   reaches the full rotation and zoom. Angles interpolate linearly and
   scales geometrically across frames. Every frame's map includes the
   SR<->LR grid alignment translation ((L-1)/2 per axis), so that under an
   identity schedule each LR pixel is the mean of its own L x L HR block.
   --- */

#include <cstdint>
#include <vector>

#include "affsr/core.hpp"
#include "affsr/obsmodels.hpp"

namespace affsr {

struct MotionSchedule {
  int n_frames = 1;
  double max_rotation_deg = 0.0;  // reached at frame 0
  double max_zoom = 1.0;          // reached at frame 0
  Vec2 center;                    // rotation/zoom center, SR coordinates
};

struct NoiseSpec {
  double variance = 0.0;  // additive i.i.d. Gaussian
  std::uint64_t seed = 0;
};

std::vector<AffineMap2D> schedule_to_motions(const MotionSchedule& sched,
                                             MagnificationFactor L);

struct SyntheticSequence {
  std::vector<ImageBuffer> frames;        // noisy LR frames
  std::vector<ImageBuffer> clean_frames;  // before noise
  std::vector<AffineMap2D> motions;
};

/// Projects `hr` through the exact model for every scheduled motion and
/// adds noise. HR dims must be divisible by L. Deterministic given the seed.
SyntheticSequence generate_sequence(const ImageBuffer& hr,
                                    const MotionSchedule& sched,
                                    MagnificationFactor L,
                                    const NoiseSpec& noise);

/// Same, with an explicit per-frame motion list.
SyntheticSequence generate_sequence(const ImageBuffer& hr,
                                    const std::vector<AffineMap2D>& motions,
                                    MagnificationFactor L,
                                    const NoiseSpec& noise);

struct PsnrResult {
  bool identical = false;  // zero mean square error
  double db = 0.0;         // 20 log10(255 / sqrt(e)); unset when identical
};

PsnrResult psnr(const ImageBuffer& a, const ImageBuffer& b);

/// PSNR restricted to the pixels flagged in `region`.
PsnrResult psnr_region(const ImageBuffer& a, const ImageBuffer& b,
                       const std::vector<std::uint8_t>& region);

/// Well-determined SR pixels: coverage at least half of the maximum.
std::vector<std::uint8_t> coverage_region(const std::vector<FrameModel>& models);

enum class ChartKind { bars, star, checker };

/// Deterministic bitonal (0/255) pattern with multi-scale detail:
/// bars carries vertical bar strips of periods 2, 4, 8 and 16; star is a
/// 16-wedge siemens star; checker has period 4.
ImageBuffer make_test_chart(int width, int height, ChartKind kind);

}  // namespace affsr
