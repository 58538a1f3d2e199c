#pragma once

/* ---
   1-D bspline kernels, the scale-mixing bi-kernel and the L2-optimal
   1-D affine resampling operator.

   The target signal g approximates f((u - tau)/a) in the L2 sense on the
   shifted order-0 bspline basis. For order 0 the pre/post filters of the
   general four-step recipe are the identity (bspline coefficients equal
   samples), so the operator reduces to

       g[k] = sum_l f[l] * a * xi_a(k - tau - a l),

   with xi_a the convolution of the a-dilated box with the unit box.
   --- */

#include <utility>
#include <vector>

#include "affsr/core.hpp"

namespace affsr {

/// 1-D affine transform parameters: g(u) ~ f((u - tau)/a).
/// a < 1 is a reduction, a > 1 a magnification.
struct Affine1D {
  double a = 1.0;
  double tau = 0.0;
};

/// Compactly supported piecewise polynomial. Coefficients are in the
/// global variable u, ascending degree, one polynomial per interval
/// [breakpoints[i], breakpoints[i+1]). Evaluates to 0 outside support.
struct PiecewisePoly {
  std::vector<double> breakpoints;
  std::vector<std::vector<double>> coeffs;

  double operator()(double u) const;
  double support_min() const { return breakpoints.front(); }
  double support_max() const { return breakpoints.back(); }
};

/// Order-0 bspline (unit box), half-open: 1 on [-1/2, 1/2), else 0.
double box_kernel(double u);

/// Bi-kernel for order 0: the trapezoid box_a * box. Support
/// [-(1+a)/2, (1+a)/2], plateau min(1, 1/a) on [-|1-a|/2, |1-a|/2],
/// linear flanks, unit integral. At a = 1 this is the triangle kernel.
PiecewisePoly bikernel(double a);

/// n x n banded operator mapping samples f to the L2-optimal coefficients
/// of the affinely resampled signal. Requires t.a > 0 (negative scales are
/// handled one level up by index reflection). Out-of-range source samples
/// contribute zero; boundary rows are not renormalized.
SparseOperator shear_resample_operator(int n, const Affine1D& t);

/// Test utility: max_k |<g(u) - f((u - tau)/a), box(u - k)>| with f and g
/// expanded on the order-0 basis and zero-padded outside [0, n-1]. The
/// inner products are integrated exactly via interval overlaps.
double l2_projection_residual(const std::vector<double>& f,
                              const std::vector<double>& g,
                              const Affine1D& t);

namespace detail {
/// Weights of row k of the resampling operator: pairs (l, w) with
/// w = a * xi(k - tau - a l), l restricted to [0, n-1]. Requires a > 0
/// and xi = bikernel(a).
void resample_weights(int n, double a, double tau, int k,
                      const PiecewisePoly& xi,
                      std::vector<std::pair<int, double>>& out);
}  // namespace detail

}  // namespace affsr
