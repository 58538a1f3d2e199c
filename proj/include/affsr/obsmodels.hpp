#pragma once

/* ---
   Per-frame observation operators A_k mapping the SR image vector to one
   LR frame, for each model family:

     Exact - box/box common-area coefficients via polygon clipping;
     CW    - convolve-then-warp: fixed axis-aligned box footprint at the
             warped detector center;
     EF0/1/3 - warp-then-convolve with pointwise interpolation of order
             0 (nearest), 1 (bilinear) or 3 (cubic convolution);
     TS0   - warp-then-convolve through the two-shear L2 decomposition.

   All kinds share the fused detector operator D*H (detector n averages the
   L x L SR samples whose centers fall in its half-open square, weight
   1/L^2) and a common row mask excluding LR pixels whose footprint comes
   near the SR boundary.
   --- */

#include <cstdint>
#include <vector>

#include "affsr/core.hpp"
#include "affsr/shear.hpp"

namespace affsr {

enum class ModelKind { Exact, ConvolveThenWarp, EF0, EF1, EF3, TS0 };

const char* model_kind_name(ModelKind kind);

/// One frame's observation model: N x M operator plus the boolean row mask.
/// Masked-in rows sum to 1 (EF3 included; its kernel has negative lobes but
/// reproduces constants). mask true implies the warped detector polygon
/// lies inside the SR image rectangle.
struct FrameModel {
  ModelKind kind = ModelKind::Exact;
  SparseOperator op;
  std::vector<std::uint8_t> mask;  // length N
};

/// Counterclockwise convex polygon. An empty vertex list is a valid
/// clipping result (no intersection).
struct ConvexPolygon {
  std::vector<Vec2> vertices;
};

/// Sutherland-Hodgman intersection of two convex CCW polygons.
ConvexPolygon clip(const ConvexPolygon& subject, const ConvexPolygon& window);

double polygon_area(const ConvexPolygon& p);

FrameModel assemble_exact(const AffineMap2D& w, const GridSpec& lr,
                          const GridSpec& sr, MagnificationFactor L);

/// round_centers selects the degenerate variant with detector centers
/// rounded to integer SR positions instead of bilinear positioning.
FrameModel assemble_cw(const AffineMap2D& w, const GridSpec& lr,
                       const GridSpec& sr, MagnificationFactor L,
                       bool round_centers = false);

FrameModel assemble_ef(int order, const AffineMap2D& w, const GridSpec& lr,
                       const GridSpec& sr, MagnificationFactor L);

FrameModel assemble_ts0(const AffineMap2D& w, const GridSpec& lr,
                        const GridSpec& sr, MagnificationFactor L);

FrameModel assemble_frame(ModelKind kind, const AffineMap2D& w,
                          const GridSpec& lr, const GridSpec& sr,
                          MagnificationFactor L);

/// One FrameModel per motion, frame order preserved. Per-frame errors are
/// rethrown with the offending frame index attached.
std::vector<FrameModel> assemble_sequence(ModelKind kind,
                                          const std::vector<AffineMap2D>& motions,
                                          const GridSpec& lr, const GridSpec& sr,
                                          MagnificationFactor L);

/// Column sums of the masked-in rows across all models: the total weight
/// with which each SR pixel is observed. Used to pick well-determined
/// pixels for scoring.
std::vector<double> masked_coverage(const std::vector<FrameModel>& models);

// --- operator-footprint diagnostics -------------------------------------

/// Stats over a normalized footprint patch. Interior pixels are those
/// fully covered by the exact footprint after one erosion ring.
struct FootprintStats {
  double min = 0.0;
  double max = 0.0;
  double interior_mean = 0.0;
  double interior_stddev = 0.0;
  double rms_vs_exact = 0.0;
  int interior_count = 0;
};

struct Footprint {
  ImageBuffer patch;  // full SR grid, normalized so the exact interior is 1
  FootprintStats stats;
};

/// Assembles `kind` for a rotation+zoom warp about the central detector of
/// an lr_size x lr_size LR grid and densifies that detector's row.
/// detector < 0 selects the central detector.
Footprint footprint_diagnostic(ModelKind kind, double rotation_deg, double zoom,
                               MagnificationFactor L, int lr_size = 15,
                               int detector = -1);

}  // namespace affsr
