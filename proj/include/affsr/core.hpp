#pragma once

/* ---
   Grids, images, affine maps and row-compressed sparse linear operators
   shared by every observation model.

   Geometric conventions used throughout the library:
     - all lengths are in SR-pitch units: SR pitch = 1, LR pitch = L;
     - SR pixel i = (i, j) is the half-open unit square
       [i - 1/2, i + 1/2) x [j - 1/2, j + 1/2);
     - detector n = (n, l) is the half-open square of side L centered
       at (nL, lL) on its frame's plane;
     - images are stored row-major, sample (u, v) at index v*width + u.
   --- */

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace affsr {

/// Raised when a computation produces or detects non-finite values.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }

/// Regular sampling grid. `pitch` is the sample spacing in abstract
/// length units (1 for the SR grid, L for the LR grid).
struct GridSpec {
  int width = 1;
  int height = 1;
  double pitch = 1.0;

  GridSpec() = default;
  GridSpec(int w, int h, double p = 1.0);

  std::size_t size() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  bool same_dims(const GridSpec& o) const {
    return width == o.width && height == o.height;
  }
};

/// 2-D scalar field on a regular grid; carries LR frames and SR estimates.
/// Values are stored as reals, nominally in [0, 255] for 8-bit sources.
struct ImageBuffer {
  GridSpec grid;
  std::vector<double> samples;

  ImageBuffer() = default;
  explicit ImageBuffer(const GridSpec& g) : grid(g), samples(g.size(), 0.0) {}
  ImageBuffer(const GridSpec& g, std::vector<double> data);

  double& at(int u, int v) {
    return samples[static_cast<std::size_t>(v) * grid.width + u];
  }
  double at(int u, int v) const {
    return samples[static_cast<std::size_t>(v) * grid.width + u];
  }
};

/// Affine warp w(v) = M v + t taking a point on a frame's acquisition
/// plane (SR-pitch units) to the reference plane (SR-pitch units).
struct AffineMap2D {
  double m00 = 1.0, m01 = 0.0;
  double m10 = 0.0, m11 = 1.0;
  Vec2 t;

  Vec2 apply(Vec2 v) const {
    return {m00 * v.x + m01 * v.y + t.x, m10 * v.x + m11 * v.y + t.y};
  }
  double det() const { return m00 * m11 - m01 * m10; }
  AffineMap2D inverse() const;
  void validate() const;  // throws if singular or non-finite
};

/// compose(a, b)(v) = a(b(v))
AffineMap2D compose(const AffineMap2D& a, const AffineMap2D& b);

/// Ratio of LR to SR pixel pitch; experiments use 2, 3 and 5.
struct MagnificationFactor {
  int value = 1;
  MagnificationFactor() = default;
  explicit MagnificationFactor(int L);
};

/// Row-compressed sparse matrix. For an assembled frame model,
/// rows = N (LR pixels) and cols = M (SR pixels).
struct SparseOperator {
  int rows = 0;
  int cols = 0;
  std::vector<std::size_t> row_starts;  // size rows + 1
  std::vector<int> col_indices;         // strictly increasing per row
  std::vector<double> values;

  static SparseOperator identity(int n);
  std::size_t nnz() const { return values.size(); }
};

/// Accumulates (row, col, value) triplets, then sorts, merges duplicates
/// and validates finiteness.
class SparseBuilder {
 public:
  SparseBuilder(int rows, int cols);
  void add(int row, int col, double value);
  SparseOperator build();

 private:
  int rows_;
  int cols_;
  std::vector<int> trip_rows_;
  std::vector<int> trip_cols_;
  std::vector<double> trip_vals_;
};

std::vector<double> apply(const SparseOperator& op, const std::vector<double>& x);
std::vector<double> apply_transpose(const SparseOperator& op, const std::vector<double>& r);
SparseOperator compose(const SparseOperator& a, const SparseOperator& b);

/// Reshape row `row` of `op` into an image on `grid` (the SR-grid patch of
/// weights contributing to one detector). Zeros where no stored entry.
ImageBuffer densify_row(const SparseOperator& op, int row, const GridSpec& grid);

}  // namespace affsr
