#include <doctest.h>

#include <cmath>

#include "affsr/shear.hpp"
#include "oracles.hpp"

using namespace affsr;

namespace {

AffineMap2D map_from(double m00, double m01, double m10, double m11, double tx = 0,
                     double ty = 0) {
  AffineMap2D w;
  w.m00 = m00; w.m01 = m01; w.m10 = m10; w.m11 = m11;
  w.t = {tx, ty};
  return w;
}

AffineMap2D random_well_conditioned(oracles::Rng& rng) {
  // rotation * anisotropic scale * rotation keeps the condition number
  // equal to the scale ratio (<= 10 by construction)
  const double th1 = rng.uniform(-1.2, 1.2);  // stay away from 90 degrees
  const double th2 = rng.uniform(-0.6, 0.6);
  const double s1 = rng.uniform(0.5, 2.0);
  const double s2 = rng.uniform(0.5, 2.0);
  const AffineMap2D r1 = oracles::rotation_zoom_map(th1 * 180 / 3.14159265358979, 1.0, {0, 0});
  const AffineMap2D r2 = oracles::rotation_zoom_map(th2 * 180 / 3.14159265358979, 1.0, {0, 0});
  AffineMap2D s = map_from(s1, 0, 0, s2);
  AffineMap2D w = compose(r1, compose(s, r2));
  w.t = {rng.uniform(-3, 3), rng.uniform(-3, 3)};
  // reject near-degenerate pivots so the decomposition is well defined
  if (std::abs(w.m00) < 0.05 && std::abs(w.m11) < 0.05) return random_well_conditioned(rng);
  return w;
}

}  // namespace

TEST_CASE("decompose: worked quarter-fraction example") {
  const AffineMap2D w = map_from(1.0, 0.25, -0.25, 7.0 / 16.0);
  const ShearPair p = decompose(w);
  CHECK(p.order == ShearOrder::horizontal_first);
  CHECK(p.first.axis == ShearAxis::horizontal);
  CHECK(p.first.alpha == 1.0);
  CHECK(p.first.beta == 0.25);
  CHECK(p.first.eps == 0.0);
  CHECK(p.second.axis == ShearAxis::vertical);
  CHECK(p.second.alpha == 0.5);
  CHECK(p.second.beta == -0.25);
  CHECK(p.second.eps == 0.0);

  const AffineMap2D back = recompose(p);
  CHECK(back.m00 == 1.0);
  CHECK(back.m01 == 0.25);
  CHECK(back.m10 == -0.25);
  CHECK(back.m11 == 7.0 / 16.0);
}

TEST_CASE("decompose: identity and pure translation") {
  const ShearPair id = decompose(map_from(1, 0, 0, 1));
  CHECK(id.first.alpha == 1.0);
  CHECK(id.first.beta == 0.0);
  CHECK(id.first.eps == 0.0);
  CHECK(id.second.alpha == 1.0);
  CHECK(id.second.beta == 0.0);
  CHECK(id.second.eps == 0.0);

  const ShearPair tr = decompose(map_from(1, 0, 0, 1, 0.3, -0.7));
  CHECK(tr.first.alpha == 1.0);
  CHECK(tr.second.alpha == 1.0);
  CHECK(tr.first.beta == 0.0);
  CHECK(tr.second.beta == 0.0);
  // horizontal eps carries t1, vertical eps carries t2
  CHECK(tr.first.eps == 0.3);
  CHECK(tr.second.eps == -0.7);
}

TEST_CASE("decompose: ordering picks the smaller scale variation") {
  const ShearPair p = decompose(map_from(2, 0, 0, 1));
  const double s1 = std::abs(p.first.alpha), s2 = std::abs(p.second.alpha);
  CHECK(std::max(s1, s2) == doctest::Approx(2.0));
  CHECK(std::min(s1, s2) == doctest::Approx(1.0));
}

TEST_CASE("decompose/recompose: round trip on 1000 random maps") {
  oracles::Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const AffineMap2D w = random_well_conditioned(rng);
    const AffineMap2D back = recompose(decompose(w));
    CHECK(back.m00 == doctest::Approx(w.m00).epsilon(1e-12));
    CHECK(back.m01 == doctest::Approx(w.m01).epsilon(1e-12));
    CHECK(back.m10 == doctest::Approx(w.m10).epsilon(1e-12));
    CHECK(back.m11 == doctest::Approx(w.m11).epsilon(1e-12));
    CHECK(back.t.x == doctest::Approx(w.t.x).epsilon(1e-12));
    CHECK(back.t.y == doctest::Approx(w.t.y).epsilon(1e-12));
  }
}

TEST_CASE("decompose: near-90-degree rotations are rejected") {
  const AffineMap2D rot90 = oracles::rotation_zoom_map(90.0, 1.0, {0, 0});
  CHECK_THROWS_AS(decompose(rot90), DegenerateShear);
  AffineMap2D tiny = rot90;
  tiny.m00 = 1e-12;
  tiny.m11 = -1e-12;
  CHECK_THROWS_AS(decompose(tiny), DegenerateShear);
  // a usable pivot on one side is enough
  AffineMap2D ok = rot90;
  ok.m00 = 0.5;
  CHECK_NOTHROW(decompose(ok));
}

TEST_CASE("shear_image_operator: identity shear") {
  const GridSpec grid(5, 4, 1.0);
  const SparseOperator op = shear_image_operator({ShearAxis::horizontal, 1, 0, 0}, grid);
  CHECK(op.nnz() == grid.size());
  const auto d = oracles::to_dense(op);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(d[i][i] == 1.0);
}

TEST_CASE("shear_image_operator: pure half-pixel shift on a row image") {
  const GridSpec grid(8, 1, 1.0);
  const SparseOperator op =
      shear_image_operator({ShearAxis::horizontal, 1.0, 0.0, 0.5}, grid);
  // g(k) = f(k + 0.5): two taps 0.5/0.5 on k and k+1
  const auto d = oracles::to_dense(op);
  for (int k = 0; k < 7; ++k) {
    CHECK(d[k][k] == doctest::Approx(0.5));
    CHECK(d[k][k + 1] == doctest::Approx(0.5));
  }
}

TEST_CASE("shear_image_operator: constants pass through in the interior") {
  const GridSpec grid(24, 24, 1.0);
  for (const Shear1D s : {Shear1D{ShearAxis::horizontal, 1.25, 0.15, -0.4},
                          Shear1D{ShearAxis::vertical, 0.8, -0.2, 0.7}}) {
    const SparseOperator op = shear_image_operator(s, grid);
    const std::vector<double> ones(grid.size(), 1.0);
    const auto y = apply(op, ones);
    // rows whose source support stays inside the grid
    for (int v = 8; v < 16; ++v)
      for (int u = 8; u < 16; ++u)
        CHECK(y[v * grid.width + u] == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK_THROWS_AS(shear_image_operator({ShearAxis::horizontal, 1e-12, 0, 0},
                                       GridSpec(4, 4, 1.0)),
                  DegenerateShear);
}

TEST_CASE("shear_image_operator: negative alpha mirrors the image") {
  const GridSpec grid(9, 1, 1.0);
  const SparseOperator op =
      shear_image_operator({ShearAxis::horizontal, -1.0, 0.0, 0.0}, grid);
  std::vector<double> f(9);
  for (int i = 0; i < 9; ++i) f[i] = i;
  const auto y = apply(op, f);
  // g(k) = f(-k); only k = 0 lands on a source sample, the rest zero-pad
  CHECK(y[0] == doctest::Approx(0.0));
  // mirrored around alpha=-1 with eps = 8 covers the full reversal
  const SparseOperator rev =
      shear_image_operator({ShearAxis::horizontal, -1.0, 0.0, 8.0}, grid);
  const auto z = apply(rev, f);
  for (int k = 0; k < 9; ++k) CHECK(z[k] == doctest::Approx(8.0 - k));
}

TEST_CASE("composed shear pair matches dense resampling of the warped expansion") {
  // smooth [0,1] image; oracle integrates the order-0 expansion through the
  // warp over each target pixel with a fine quadrature grid
  const int N = 40;
  const GridSpec grid(N, N, 1.0);
  std::vector<double> x(grid.size());
  for (int v = 0; v < N; ++v)
    for (int u = 0; u < N; ++u)
      x[v * N + u] = 0.5 + 0.25 * std::sin(2 * 3.14159265358979 * u / 16.0) *
                               std::cos(2 * 3.14159265358979 * v / 20.0);

  auto expansion = [&](double px, double py) {
    const int i = static_cast<int>(std::floor(px + 0.5));
    const int j = static_cast<int>(std::floor(py + 0.5));
    if (i < 0 || i >= N || j < 0 || j >= N) return 0.0;
    return x[j * N + i];
  };

  oracles::Rng rng(5);
  for (int trial = 0; trial < 4; ++trial) {
    const double deg = rng.uniform(-45.0, 45.0);
    const double zoom = rng.uniform(0.7, 1.6);
    const AffineMap2D w = oracles::rotation_zoom_map(
        deg, zoom, {(N - 1) / 2.0, (N - 1) / 2.0},
        {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)});
    const ShearPair pair = decompose(w);
    const SparseOperator op = compose(shear_image_operator(pair.first, grid),
                                      shear_image_operator(pair.second, grid));
    const auto y = apply(op, x);

    const int G = 24;
    double err2 = 0.0;
    int count = 0;
    for (int v = 10; v < N - 10; ++v) {
      for (int u = 10; u < N - 10; ++u) {
        double acc = 0.0;
        for (int gv = 0; gv < G; ++gv)
          for (int gu = 0; gu < G; ++gu) {
            const Vec2 q{u - 0.5 + (gu + 0.5) / G, v - 0.5 + (gv + 0.5) / G};
            const Vec2 p = w.apply(q);
            acc += expansion(p.x, p.y);
          }
        acc /= double(G) * double(G);
        const double d = y[v * N + u] - acc;
        err2 += d * d;
        ++count;
      }
    }
    CHECK(std::sqrt(err2 / count) <= 1e-2);
  }
}
