#include "affsr/bspline1d.hpp"

#include <algorithm>
#include <cmath>

namespace affsr {

double PiecewisePoly::operator()(double u) const {
  if (breakpoints.empty() || u < breakpoints.front() || u >= breakpoints.back())
    return 0.0;
  // index of the interval containing u
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), u);
  std::size_t piece = static_cast<std::size_t>(it - breakpoints.begin()) - 1;
  if (piece >= coeffs.size()) piece = coeffs.size() - 1;
  const std::vector<double>& c = coeffs[piece];
  double acc = 0.0;
  for (std::size_t d = c.size(); d-- > 0;) acc = acc * u + c[d];
  return acc;
}

double box_kernel(double u) { return (u >= -0.5 && u < 0.5) ? 1.0 : 0.0; }

PiecewisePoly bikernel(double a) {
  if (!(a > 0.0) || !std::isfinite(a))
    throw std::invalid_argument("bikernel: scale must be positive and finite");
  const double s0 = std::abs(1.0 - a) / 2.0;
  const double s1 = (1.0 + a) / 2.0;
  const double h = std::min(1.0, 1.0 / a);   // plateau height
  const double slope = h / (s1 - s0);        // s1 - s0 = min(1, a) > 0

  PiecewisePoly p;
  if (s0 == 0.0) {
    // a == 1: degenerate plateau, triangle kernel
    p.breakpoints = {-s1, 0.0, s1};
    p.coeffs = {{slope * s1, slope},    // rising flank: slope*(u + s1)
                {slope * s1, -slope}};  // falling flank: slope*(s1 - u)
  } else {
    p.breakpoints = {-s1, -s0, s0, s1};
    p.coeffs = {{slope * s1, slope},   // rising flank: slope*(u + s1)
                {h},                   // plateau
                {slope * s1, -slope}}; // falling flank: slope*(s1 - u)
  }
  return p;
}

SparseOperator shear_resample_operator(int n, const Affine1D& t) {
  if (n < 1) throw std::invalid_argument("shear_resample_operator: n must be >= 1");
  if (!(t.a > 0.0) || !std::isfinite(t.a) || !std::isfinite(t.tau))
    throw std::invalid_argument("shear_resample_operator: requires finite scale a > 0");
  const PiecewisePoly xi = bikernel(t.a);
  SparseBuilder builder(n, n);
  std::vector<std::pair<int, double>> w;
  for (int k = 0; k < n; ++k) {
    detail::resample_weights(n, t.a, t.tau, k, xi, w);
    for (auto [l, wl] : w) builder.add(k, l, wl);
  }
  return builder.build();
}

namespace detail {

void resample_weights(int n, double a, double tau, int k,
                      const PiecewisePoly& xi,
                      std::vector<std::pair<int, double>>& out) {
  out.clear();
  const double s1 = xi.support_max();
  int lo = static_cast<int>(std::ceil((k - tau - s1) / a));
  int hi = static_cast<int>(std::floor((k - tau + s1) / a));
  lo = std::max(lo, 0);
  hi = std::min(hi, n - 1);
  for (int l = lo; l <= hi; ++l) {
    const double w = a * xi(k - tau - a * l);
    if (w != 0.0) out.emplace_back(l, w);
  }
}

}  // namespace detail

namespace {

// length of [x0, x1] intersected with [y0, y1]
double overlap(double x0, double x1, double y0, double y1) {
  return std::max(0.0, std::min(x1, y1) - std::max(x0, y0));
}

}  // namespace

double l2_projection_residual(const std::vector<double>& f,
                              const std::vector<double>& g,
                              const Affine1D& t) {
  if (f.size() != g.size())
    throw std::invalid_argument("l2_projection_residual: length mismatch");
  const int n = static_cast<int>(f.size());
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    // <f((u - tau)/a), box(u - k)> = sum_l f[l] |[k -/+ 1/2] ^ (tau + a*[l -/+ 1/2])|
    double target = 0.0;
    for (int l = 0; l < n; ++l) {
      double y0 = t.tau + t.a * (l - 0.5);
      double y1 = t.tau + t.a * (l + 0.5);
      if (y0 > y1) std::swap(y0, y1);
      target += f[l] * overlap(k - 0.5, k + 0.5, y0, y1);
    }
    worst = std::max(worst, std::abs(g[k] - target));
  }
  return worst;
}

}  // namespace affsr
