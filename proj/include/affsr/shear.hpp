#pragma once

/* ---
   Factoring an invertible 2-D affine map into a horizontal and a vertical
   shear, and realizing each shear as a sparse image-resampling operator
   built from per-row (or per-column) 1-D L2 projections.

   A horizontal shear is the coordinate map S(u, v) = (alpha u + beta v + eps, v),
   a vertical one S(u, v) = (u, beta u + alpha v + eps). The pair satisfies
   recompose(pair) = second o first as coordinate maps.

   Warp-direction convention: the observation model needs x(w(v)) sampled on
   each stage's target grid, so every 1-D stage resamples the source signal
   at target positions; the Affine1D handed to the resampler is the inverse
   per-row map (a = 1/alpha, tau = -(beta*row + eps)/alpha).
   --- */

#include "affsr/bspline1d.hpp"
#include "affsr/core.hpp"

namespace affsr {

/// Raised when neither shear ordering has a usable pivot (e.g. rotations
/// near 90 degrees, which a two-shear cannot represent stably). Callers
/// must reject the frame or pre-rotate, never silently proceed.
struct DegenerateShear : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ShearAxis { horizontal, vertical };

struct Shear1D {
  ShearAxis axis = ShearAxis::horizontal;
  double alpha = 1.0;  // scale along the sheared axis
  double beta = 0.0;   // cross-coupling coefficient
  double eps = 0.0;    // offset
};

/// Applies the shear as a coordinate map.
Vec2 apply_shear(const Shear1D& s, Vec2 v);

enum class ShearOrder { horizontal_first, vertical_first };

/// Two 1-D shears of opposite axes whose composition (first, then second,
/// as coordinate maps) equals the source affine map. The image operator of
/// `second` is applied to the image before the operator of `first`.
struct ShearPair {
  Shear1D first;
  Shear1D second;
  ShearOrder order = ShearOrder::horizontal_first;
};

/// Factors w into the ordering whose two 1-D scale factors deviate least
/// from 1 (score: max over scales s of max(s, 1/s); ties go to
/// horizontal-first). Throws DegenerateShear when both orderings would
/// divide by a pivot entry smaller than 1e-9 in magnitude.
ShearPair decompose(const AffineMap2D& w);

/// The affine map equal to applying p.first then p.second.
AffineMap2D recompose(const ShearPair& p);

/// Sparse operator on the full image vector assembled from per-row
/// (horizontal) or per-column (vertical) 1-D resampling operators.
/// Negative per-row scales are realized by index reflection.
SparseOperator shear_image_operator(const Shear1D& s, const GridSpec& grid);

}  // namespace affsr
