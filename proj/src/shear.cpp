#include "affsr/shear.hpp"

#include <cmath>
#include <limits>

namespace affsr {

namespace {

constexpr double kPivotThreshold = 1e-9;

double ordering_score(double scale_a, double scale_b) {
  const double sa = std::abs(scale_a), sb = std::abs(scale_b);
  return std::max(std::max(sa, 1.0 / sa), std::max(sb, 1.0 / sb));
}

}  // namespace

Vec2 apply_shear(const Shear1D& s, Vec2 v) {
  if (s.axis == ShearAxis::horizontal)
    return {s.alpha * v.x + s.beta * v.y + s.eps, v.y};
  return {v.x, s.beta * v.x + s.alpha * v.y + s.eps};
}

ShearPair decompose(const AffineMap2D& w) {
  w.validate();
  const double det = w.det();

  const bool h_ok = std::abs(w.m00) >= kPivotThreshold;
  const bool v_ok = std::abs(w.m11) >= kPivotThreshold;
  if (!h_ok && !v_ok)
    throw DegenerateShear("decompose: both shear orderings have pivots below 1e-9");

  // horizontal-first: M = S_v * S_u, scales (m00, det/m00)
  // vertical-first:   M = S_u * S_v, scales (m11, det/m11)
  const double score_h = h_ok ? ordering_score(w.m00, det / w.m00)
                              : std::numeric_limits<double>::infinity();
  const double score_v = v_ok ? ordering_score(w.m11, det / w.m11)
                              : std::numeric_limits<double>::infinity();

  ShearPair p;
  if (score_h <= score_v) {
    p.order = ShearOrder::horizontal_first;
    p.first = {ShearAxis::horizontal, w.m00, w.m01, w.t.x};
    const double beta1 = w.m10 / w.m00;
    p.second = {ShearAxis::vertical, det / w.m00, beta1, w.t.y - beta1 * w.t.x};
  } else {
    p.order = ShearOrder::vertical_first;
    p.first = {ShearAxis::vertical, w.m11, w.m10, w.t.y};
    const double beta2 = w.m01 / w.m11;
    p.second = {ShearAxis::horizontal, det / w.m11, beta2, w.t.x - beta2 * w.t.y};
  }
  return p;
}

AffineMap2D recompose(const ShearPair& p) {
  auto as_map = [](const Shear1D& s) {
    AffineMap2D m;
    if (s.axis == ShearAxis::horizontal) {
      m.m00 = s.alpha;
      m.m01 = s.beta;
      m.t = {s.eps, 0.0};
    } else {
      m.m10 = s.beta;
      m.m11 = s.alpha;
      m.t = {0.0, s.eps};
    }
    return m;
  };
  return compose(as_map(p.second), as_map(p.first));
}

SparseOperator shear_image_operator(const Shear1D& s, const GridSpec& grid) {
  if (std::abs(s.alpha) < kPivotThreshold)
    throw DegenerateShear("shear_image_operator: |alpha| below 1e-9");
  const int W = grid.width, H = grid.height;
  const int count = static_cast<int>(grid.size());
  SparseBuilder builder(count, count);
  std::vector<std::pair<int, double>> weights;

  const double a = 1.0 / s.alpha;
  const double abs_a = std::abs(a);
  const PiecewisePoly xi = bikernel(abs_a);

  if (s.axis == ShearAxis::horizontal) {
    for (int v = 0; v < H; ++v) {
      const double tau = -(s.beta * v + s.eps) / s.alpha;
      const bool flip = a < 0.0;
      const double tt = flip ? (W - 1) - tau : tau;
      for (int k = 0; k < W; ++k) {
        const int out_k = flip ? (W - 1) - k : k;
        detail::resample_weights(W, abs_a, tt, k, xi, weights);
        for (auto [l, wl] : weights)
          builder.add(v * W + out_k, v * W + l, wl);
      }
    }
  } else {
    for (int u = 0; u < W; ++u) {
      const double tau = -(s.beta * u + s.eps) / s.alpha;
      const bool flip = a < 0.0;
      const double tt = flip ? (H - 1) - tau : tau;
      for (int k = 0; k < H; ++k) {
        const int out_k = flip ? (H - 1) - k : k;
        detail::resample_weights(H, abs_a, tt, k, xi, weights);
        for (auto [l, wl] : weights)
          builder.add(out_k * W + u, l * W + u, wl);
      }
    }
  }
  return builder.build();
}

}  // namespace affsr
