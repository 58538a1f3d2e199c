#include "affsr/obsmodels.hpp"

#include <algorithm>
#include <cmath>

namespace affsr {

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Exact: return "exact";
    case ModelKind::ConvolveThenWarp: return "cw";
    case ModelKind::EF0: return "ef0";
    case ModelKind::EF1: return "ef1";
    case ModelKind::EF3: return "ef3";
    case ModelKind::TS0: return "ts0";
  }
  return "?";
}

double polygon_area(const ConvexPolygon& p) {
  const std::size_t n = p.vertices.size();
  if (n < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = p.vertices[j];
    const Vec2& b = p.vertices[i];
    acc += a.x * b.y - b.x * a.y;
  }
  return 0.5 * acc;
}

ConvexPolygon clip(const ConvexPolygon& subject, const ConvexPolygon& window) {
  ConvexPolygon out = subject;
  const std::size_t m = window.vertices.size();
  if (m < 3) return ConvexPolygon{};
  ConvexPolygon in;
  for (std::size_t e1 = m - 1, e2 = 0; e2 < m; e1 = e2++) {
    const Vec2 a = window.vertices[e1];
    const Vec2 b = window.vertices[e2];
    const double ex = b.x - a.x, ey = b.y - a.y;
    in.vertices.swap(out.vertices);
    out.vertices.clear();
    const std::size_t n = in.vertices.size();
    if (n == 0) break;
    auto side = [&](const Vec2& p) { return ex * (p.y - a.y) - ey * (p.x - a.x); };
    for (std::size_t v1 = n - 1, v2 = 0; v2 < n; v1 = v2++) {
      const Vec2 p = in.vertices[v1];
      const Vec2 q = in.vertices[v2];
      const double sp = side(p), sq = side(q);
      const bool p_in = sp >= 0.0, q_in = sq >= 0.0;  // CCW window: inside is left
      if (p_in != q_in) {
        const double t = sp / (sp - sq);
        out.vertices.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
      }
      if (q_in) out.vertices.push_back(q);
    }
  }
  if (out.vertices.size() < 3) out.vertices.clear();
  return out;
}

namespace {

struct DetectorGeometry {
  int n, l;           // LR indices
  Vec2 center;        // frame-plane position (nL, lL)
  Vec2 corners[4];    // frame-plane half-open square, CCW
};

DetectorGeometry detector_geometry(int n, int l, int L) {
  DetectorGeometry d;
  d.n = n;
  d.l = l;
  const double half = L / 2.0;
  d.center = {double(n) * L, double(l) * L};
  d.corners[0] = {d.center.x - half, d.center.y - half};
  d.corners[1] = {d.center.x + half, d.center.y - half};
  d.corners[2] = {d.center.x + half, d.center.y + half};
  d.corners[3] = {d.center.x - half, d.center.y + half};
  return d;
}

// Fused D*H: row (n, l) carries the exact response of the side-L box
// detector to the order-0 basis expansion, sampled on the SR grid. Per
// axis the weight of node offset o from the detector center is the overlap
// of [o - 1/2, o + 1/2] with [-L/2, L/2], divided by L. For odd L this is
// the plain 1/L block average over L nodes; for even L the L+1 taps get
// half weight at the ends, which keeps the response centered on the
// detector. Boundary rows keep partial support.
double detector_axis_weight(int offset, int L) {
  const double ov = std::min(offset + 0.5, L / 2.0) - std::max(offset - 0.5, -L / 2.0);
  return ov > 0.0 ? ov / L : 0.0;
}

SparseOperator detector_average(const GridSpec& lr, const GridSpec& sr, int L) {
  SparseBuilder builder(static_cast<int>(lr.size()), static_cast<int>(sr.size()));
  const int r = L / 2 + 1;
  std::vector<std::pair<int, double>> axis;
  for (int o = -r; o <= r; ++o) {
    const double w = detector_axis_weight(o, L);
    if (w > 0.0) axis.emplace_back(o, w);
  }
  for (int l = 0; l < lr.height; ++l) {
    for (int n = 0; n < lr.width; ++n) {
      const int row = l * lr.width + n;
      for (auto [ov, wv] : axis) {
        const int v = l * L + ov;
        if (v < 0 || v >= sr.height) continue;
        for (auto [ou, wu] : axis) {
          const int u = n * L + ou;
          if (u < 0 || u >= sr.width) continue;
          builder.add(row, v * sr.width + u, wu * wv);
        }
      }
    }
  }
  return builder.build();
}

// Row mask shared by every model kind: the warped detector polygon, padded
// by a safety margin of one detector width, must lie inside the SR support
// rectangle, and the detector's own sample block must be in-grid.
std::vector<std::uint8_t> compute_mask(const AffineMap2D& w, const GridSpec& lr,
                                       const GridSpec& sr, int L) {
  std::vector<std::uint8_t> mask(lr.size(), 0);
  const double x_min = -0.5, x_max = sr.width - 0.5;
  const double y_min = -0.5, y_max = sr.height - 0.5;
  const int node_reach = L % 2 == 0 ? L / 2 : (L - 1) / 2;
  for (int l = 0; l < lr.height; ++l) {
    for (int n = 0; n < lr.width; ++n) {
      const DetectorGeometry d = detector_geometry(n, l, L);
      double bx0 = 1e300, bx1 = -1e300, by0 = 1e300, by1 = -1e300;
      for (const Vec2& c : d.corners) {
        const Vec2 p = w.apply(c);
        bx0 = std::min(bx0, p.x);
        bx1 = std::max(bx1, p.x);
        by0 = std::min(by0, p.y);
        by1 = std::max(by1, p.y);
      }
      const double margin = std::max({2.0 * L, bx1 - bx0, by1 - by0});
      const bool inside = bx0 - margin >= x_min && bx1 + margin <= x_max &&
                          by0 - margin >= y_min && by1 + margin <= y_max;
      const bool nodes_ok = n * L - node_reach >= 0 && n * L + node_reach < sr.width &&
                            l * L - node_reach >= 0 && l * L + node_reach < sr.height;
      mask[l * lr.width + n] = (inside && nodes_ok) ? 1 : 0;
    }
  }
  return mask;
}

void check_grids(const GridSpec& lr, const GridSpec& sr, int L) {
  if (lr.pitch != sr.pitch * L)
    throw std::invalid_argument("assemble: lr.pitch must equal sr.pitch * L");
}

// Interpolation taps of the 1-D kernel of given order at position p.
// Order 0 is the half-open box, 1 the triangle, 3 cubic convolution with
// slope parameter -1/2 (negative lobes, reproduces constants).
void kernel_taps(int order, double p, std::vector<std::pair<int, double>>& taps) {
  taps.clear();
  if (order == 0) {
    taps.emplace_back(static_cast<int>(std::floor(p + 0.5)), 1.0);
  } else if (order == 1) {
    const int j0 = static_cast<int>(std::floor(p));
    const double f = p - j0;
    if (1.0 - f != 0.0) taps.emplace_back(j0, 1.0 - f);
    if (f != 0.0) taps.emplace_back(j0 + 1, f);
  } else if (order == 3) {
    auto keys = [](double t) {
      t = std::abs(t);
      if (t <= 1.0) return (1.5 * t - 2.5) * t * t + 1.0;
      if (t < 2.0) return ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0;
      return 0.0;
    };
    const int j0 = static_cast<int>(std::floor(p));
    for (int j = j0 - 1; j <= j0 + 2; ++j) {
      const double wgt = keys(p - j);
      if (wgt != 0.0) taps.emplace_back(j, wgt);
    }
  } else {
    throw std::invalid_argument("assemble_ef: order must be 0, 1 or 3");
  }
}

}  // namespace

FrameModel assemble_exact(const AffineMap2D& w, const GridSpec& lr,
                          const GridSpec& sr, MagnificationFactor L) {
  w.validate();
  check_grids(lr, sr, L.value);
  const double abs_det = std::abs(w.det());
  const double norm = 1.0 / (double(L.value) * double(L.value) * abs_det);
  const bool flip = w.det() < 0.0;

  SparseBuilder builder(static_cast<int>(lr.size()), static_cast<int>(sr.size()));
  for (int l = 0; l < lr.height; ++l) {
    for (int n = 0; n < lr.width; ++n) {
      const DetectorGeometry d = detector_geometry(n, l, L.value);
      ConvexPolygon quad;
      quad.vertices.reserve(4);
      for (int c = 0; c < 4; ++c)
        quad.vertices.push_back(w.apply(d.corners[flip ? 3 - c : c]));
      double bx0 = 1e300, bx1 = -1e300, by0 = 1e300, by1 = -1e300;
      for (const Vec2& p : quad.vertices) {
        bx0 = std::min(bx0, p.x);
        bx1 = std::max(bx1, p.x);
        by0 = std::min(by0, p.y);
        by1 = std::max(by1, p.y);
      }
      const int i_lo = std::max(0, static_cast<int>(std::ceil(bx0 - 0.5)));
      const int i_hi = std::min(sr.width - 1, static_cast<int>(std::floor(bx1 + 0.5)));
      const int j_lo = std::max(0, static_cast<int>(std::ceil(by0 - 0.5)));
      const int j_hi = std::min(sr.height - 1, static_cast<int>(std::floor(by1 + 0.5)));
      const int row = l * lr.width + n;
      ConvexPolygon pixel;
      pixel.vertices.resize(4);
      for (int j = j_lo; j <= j_hi; ++j) {
        for (int i = i_lo; i <= i_hi; ++i) {
          pixel.vertices[0] = {i - 0.5, j - 0.5};
          pixel.vertices[1] = {i + 0.5, j - 0.5};
          pixel.vertices[2] = {i + 0.5, j + 0.5};
          pixel.vertices[3] = {i - 0.5, j + 0.5};
          const double a = polygon_area(clip(quad, pixel));
          if (a > 0.0) builder.add(row, j * sr.width + i, a * norm);
        }
      }
    }
  }

  FrameModel fm;
  fm.kind = ModelKind::Exact;
  fm.op = builder.build();
  fm.mask = compute_mask(w, lr, sr, L.value);
  // pixels with empty support are zero rows and masked out
  for (int r = 0; r < fm.op.rows; ++r)
    if (fm.op.row_starts[r] == fm.op.row_starts[r + 1]) fm.mask[r] = 0;
  return fm;
}

FrameModel assemble_cw(const AffineMap2D& w, const GridSpec& lr,
                       const GridSpec& sr, MagnificationFactor L,
                       bool round_centers) {
  w.validate();
  check_grids(lr, sr, L.value);
  const int Lv = L.value;
  const double half = Lv / 2.0;
  const double weight_norm = 1.0 / (double(Lv) * double(Lv));

  SparseBuilder builder(static_cast<int>(lr.size()), static_cast<int>(sr.size()));
  std::vector<std::pair<int, double>> wx, wy;
  auto axis_overlaps = [&](double c, int limit, std::vector<std::pair<int, double>>& out) {
    out.clear();
    const double lo = c - half, hi = c + half;
    for (int i = std::max(0, static_cast<int>(std::ceil(lo - 0.5)));
         i <= std::min(limit - 1, static_cast<int>(std::floor(hi + 0.5))); ++i) {
      const double ov = std::min(hi, i + 0.5) - std::max(lo, i - 0.5);
      if (ov > 0.0) out.emplace_back(i, ov);
    }
  };

  for (int l = 0; l < lr.height; ++l) {
    for (int n = 0; n < lr.width; ++n) {
      Vec2 c = w.apply({double(n) * Lv, double(l) * Lv});
      if (round_centers) c = {std::floor(c.x + 0.5), std::floor(c.y + 0.5)};
      axis_overlaps(c.x, sr.width, wx);
      axis_overlaps(c.y, sr.height, wy);
      const int row = l * lr.width + n;
      for (auto [j, oy] : wy)
        for (auto [i, ox] : wx)
          builder.add(row, j * sr.width + i, ox * oy * weight_norm);
    }
  }

  FrameModel fm;
  fm.kind = ModelKind::ConvolveThenWarp;
  fm.op = builder.build();
  fm.mask = compute_mask(w, lr, sr, Lv);
  for (int r = 0; r < fm.op.rows; ++r)
    if (fm.op.row_starts[r] == fm.op.row_starts[r + 1]) fm.mask[r] = 0;
  return fm;
}

FrameModel assemble_ef(int order, const AffineMap2D& w, const GridSpec& lr,
                       const GridSpec& sr, MagnificationFactor L) {
  w.validate();
  check_grids(lr, sr, L.value);
  const int W = sr.width, H = sr.height;
  const int M = static_cast<int>(sr.size());

  // warp matrix: rows are frame-plane SR nodes, entries are the
  // interpolation weights of x at the warped node position
  SparseBuilder wb(M, M);
  std::vector<std::pair<int, double>> tx, ty;
  for (int l2 = 0; l2 < H; ++l2) {
    for (int l1 = 0; l1 < W; ++l1) {
      const Vec2 p = w.apply({double(l1), double(l2)});
      kernel_taps(order, p.x, tx);
      kernel_taps(order, p.y, ty);
      const int row = l2 * W + l1;
      for (auto [j2, wy] : ty) {
        if (j2 < 0 || j2 >= H) continue;
        for (auto [j1, wx] : tx) {
          if (j1 < 0 || j1 >= W) continue;
          wb.add(row, j2 * W + j1, wx * wy);
        }
      }
    }
  }

  FrameModel fm;
  fm.kind = order == 0 ? ModelKind::EF0 : (order == 1 ? ModelKind::EF1 : ModelKind::EF3);
  fm.op = compose(detector_average(lr, sr, L.value), wb.build());
  fm.mask = compute_mask(w, lr, sr, L.value);
  for (int r = 0; r < fm.op.rows; ++r)
    if (fm.op.row_starts[r] == fm.op.row_starts[r + 1]) fm.mask[r] = 0;
  return fm;
}

FrameModel assemble_ts0(const AffineMap2D& w, const GridSpec& lr,
                        const GridSpec& sr, MagnificationFactor L) {
  w.validate();
  check_grids(lr, sr, L.value);
  const ShearPair pair = decompose(w);
  // x is warped by the second coordinate map first: op = S_first * S_second
  const SparseOperator warp = compose(shear_image_operator(pair.first, sr),
                                      shear_image_operator(pair.second, sr));
  FrameModel fm;
  fm.kind = ModelKind::TS0;
  fm.op = compose(detector_average(lr, sr, L.value), warp);
  fm.mask = compute_mask(w, lr, sr, L.value);
  for (int r = 0; r < fm.op.rows; ++r)
    if (fm.op.row_starts[r] == fm.op.row_starts[r + 1]) fm.mask[r] = 0;
  return fm;
}

FrameModel assemble_frame(ModelKind kind, const AffineMap2D& w,
                          const GridSpec& lr, const GridSpec& sr,
                          MagnificationFactor L) {
  switch (kind) {
    case ModelKind::Exact: return assemble_exact(w, lr, sr, L);
    case ModelKind::ConvolveThenWarp: return assemble_cw(w, lr, sr, L);
    case ModelKind::EF0: return assemble_ef(0, w, lr, sr, L);
    case ModelKind::EF1: return assemble_ef(1, w, lr, sr, L);
    case ModelKind::EF3: return assemble_ef(3, w, lr, sr, L);
    case ModelKind::TS0: return assemble_ts0(w, lr, sr, L);
  }
  throw std::invalid_argument("assemble_frame: unknown model kind");
}

std::vector<FrameModel> assemble_sequence(ModelKind kind,
                                          const std::vector<AffineMap2D>& motions,
                                          const GridSpec& lr, const GridSpec& sr,
                                          MagnificationFactor L) {
  if (motions.empty())
    throw std::invalid_argument("assemble_sequence: empty motion list");
  std::vector<FrameModel> models;
  models.reserve(motions.size());
  for (std::size_t k = 0; k < motions.size(); ++k) {
    try {
      models.push_back(assemble_frame(kind, motions[k], lr, sr, L));
    } catch (const DegenerateShear& e) {
      throw DegenerateShear("frame " + std::to_string(k) + ": " + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error("frame " + std::to_string(k) + ": " + e.what());
    }
  }
  return models;
}

std::vector<double> masked_coverage(const std::vector<FrameModel>& models) {
  if (models.empty()) return {};
  std::vector<double> cov(models.front().op.cols, 0.0);
  for (const FrameModel& fm : models) {
    for (int r = 0; r < fm.op.rows; ++r) {
      if (!fm.mask[r]) continue;
      for (std::size_t k = fm.op.row_starts[r]; k < fm.op.row_starts[r + 1]; ++k)
        cov[fm.op.col_indices[k]] += fm.op.values[k];
    }
  }
  return cov;
}

Footprint footprint_diagnostic(ModelKind kind, double rotation_deg, double zoom,
                               MagnificationFactor L, int lr_size, int detector) {
  if (lr_size < 3) throw std::invalid_argument("footprint_diagnostic: lr_size too small");
  const GridSpec lr(lr_size, lr_size, L.value);
  const GridSpec sr(lr_size * L.value, lr_size * L.value, 1.0);
  if (detector < 0) detector = (lr_size / 2) * lr_size + lr_size / 2;
  if (detector >= static_cast<int>(lr.size()))
    throw std::invalid_argument("footprint_diagnostic: detector index out of range");

  // rotation + zoom about the detector's own center position
  const int n = detector % lr_size, l = detector / lr_size;
  const Vec2 c{double(n) * L.value, double(l) * L.value};
  constexpr double kPi = 3.14159265358979323846;
  const double th = rotation_deg * kPi / 180.0;
  AffineMap2D w;
  w.m00 = zoom * std::cos(th);
  w.m01 = -zoom * std::sin(th);
  w.m10 = zoom * std::sin(th);
  w.m11 = zoom * std::cos(th);
  w.t = {c.x - (w.m00 * c.x + w.m01 * c.y), c.y - (w.m10 * c.x + w.m11 * c.y)};

  const double norm = double(L.value) * double(L.value) * std::abs(w.det());
  auto patch_for = [&](ModelKind k) {
    const FrameModel fm = assemble_frame(k, w, lr, sr, L);
    ImageBuffer img = densify_row(fm.op, detector, sr);
    for (double& v : img.samples) v *= norm;
    return img;
  };

  const ImageBuffer exact = patch_for(ModelKind::Exact);
  const ImageBuffer patch = kind == ModelKind::Exact ? exact : patch_for(kind);

  // interior: pixels fully covered by the exact footprint, eroded by one ring
  const int W = sr.width, H = sr.height;
  std::vector<std::uint8_t> covered(sr.size(), 0);
  for (std::size_t i = 0; i < sr.size(); ++i)
    covered[i] = std::abs(exact.samples[i] - 1.0) <= 1e-6 ? 1 : 0;
  std::vector<std::uint8_t> interior(sr.size(), 0);
  for (int v = 1; v + 1 < H; ++v)
    for (int u = 1; u + 1 < W; ++u) {
      bool all = true;
      for (int dv = -1; dv <= 1 && all; ++dv)
        for (int du = -1; du <= 1 && all; ++du)
          all = covered[(v + dv) * W + (u + du)] != 0;
      interior[v * W + u] = all ? 1 : 0;
    }

  Footprint fp;
  fp.patch = patch;
  FootprintStats& st = fp.stats;
  st.min = 1e300;
  st.max = -1e300;
  double mean = 0.0, m2 = 0.0, rms = 0.0;
  int n_union = 0;
  for (std::size_t i = 0; i < sr.size(); ++i) {
    st.min = std::min(st.min, patch.samples[i]);
    st.max = std::max(st.max, patch.samples[i]);
    if (interior[i]) {
      st.interior_count++;
      mean += patch.samples[i];
    }
    if (std::abs(patch.samples[i]) > 1e-12 || std::abs(exact.samples[i]) > 1e-12) {
      n_union++;
      const double d = patch.samples[i] - exact.samples[i];
      rms += d * d;
    }
  }
  if (st.interior_count > 0) {
    mean /= st.interior_count;
    for (std::size_t i = 0; i < sr.size(); ++i)
      if (interior[i]) {
        const double d = patch.samples[i] - mean;
        m2 += d * d;
      }
    st.interior_mean = mean;
    st.interior_stddev = std::sqrt(m2 / st.interior_count);
  }
  st.rms_vs_exact = n_union > 0 ? std::sqrt(rms / n_union) : 0.0;
  return fp;
}

}  // namespace affsr
