#include "affsr/core.hpp"

#include <algorithm>
#include <numeric>

namespace affsr {

GridSpec::GridSpec(int w, int h, double p) : width(w), height(h), pitch(p) {
  if (w < 1 || h < 1)
    throw std::invalid_argument("GridSpec: width and height must be >= 1");
  if (!(p > 0.0) || !std::isfinite(p))
    throw std::invalid_argument("GridSpec: pitch must be positive and finite");
}

ImageBuffer::ImageBuffer(const GridSpec& g, std::vector<double> data)
    : grid(g), samples(std::move(data)) {
  if (samples.size() != grid.size())
    throw std::invalid_argument("ImageBuffer: sample count does not match grid");
  for (double v : samples)
    if (!std::isfinite(v)) throw NumericError("ImageBuffer: non-finite sample");
}

void AffineMap2D::validate() const {
  for (double v : {m00, m01, m10, m11, t.x, t.y})
    if (!std::isfinite(v)) throw NumericError("AffineMap2D: non-finite entry");
  if (det() == 0.0) throw std::invalid_argument("AffineMap2D: singular matrix");
}

AffineMap2D AffineMap2D::inverse() const {
  const double d = det();
  if (d == 0.0 || !std::isfinite(d))
    throw std::invalid_argument("AffineMap2D: not invertible");
  AffineMap2D inv;
  inv.m00 = m11 / d;
  inv.m01 = -m01 / d;
  inv.m10 = -m10 / d;
  inv.m11 = m00 / d;
  // inv.t = -M^{-1} t
  inv.t = {-(inv.m00 * t.x + inv.m01 * t.y), -(inv.m10 * t.x + inv.m11 * t.y)};
  return inv;
}

AffineMap2D compose(const AffineMap2D& a, const AffineMap2D& b) {
  AffineMap2D c;
  c.m00 = a.m00 * b.m00 + a.m01 * b.m10;
  c.m01 = a.m00 * b.m01 + a.m01 * b.m11;
  c.m10 = a.m10 * b.m00 + a.m11 * b.m10;
  c.m11 = a.m10 * b.m01 + a.m11 * b.m11;
  c.t = a.apply(b.t);
  return c;
}

MagnificationFactor::MagnificationFactor(int L) : value(L) {
  if (L < 1) throw std::invalid_argument("MagnificationFactor: L must be >= 1");
}

SparseOperator SparseOperator::identity(int n) {
  SparseOperator op;
  op.rows = n;
  op.cols = n;
  op.row_starts.resize(n + 1);
  op.col_indices.resize(n);
  op.values.assign(n, 1.0);
  for (int i = 0; i <= n; ++i) op.row_starts[i] = i;
  std::iota(op.col_indices.begin(), op.col_indices.end(), 0);
  return op;
}

SparseBuilder::SparseBuilder(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0)
    throw std::invalid_argument("SparseBuilder: negative dimensions");
}

void SparseBuilder::add(int row, int col, double value) {
  if (row < 0 || row >= rows_ || col < 0 || col >= cols_)
    throw std::invalid_argument("SparseBuilder: index out of range");
  if (!std::isfinite(value)) throw NumericError("SparseBuilder: non-finite value");
  if (value == 0.0) return;
  trip_rows_.push_back(row);
  trip_cols_.push_back(col);
  trip_vals_.push_back(value);
}

SparseOperator SparseBuilder::build() {
  SparseOperator op;
  op.rows = rows_;
  op.cols = cols_;
  op.row_starts.assign(static_cast<std::size_t>(rows_) + 1, 0);

  const std::size_t n = trip_vals_.size();
  // counting sort by row
  for (std::size_t i = 0; i < n; ++i) op.row_starts[trip_rows_[i] + 1]++;
  for (int r = 0; r < rows_; ++r) op.row_starts[r + 1] += op.row_starts[r];

  std::vector<int> cols(n);
  std::vector<double> vals(n);
  {
    std::vector<std::size_t> cursor(op.row_starts.begin(), op.row_starts.end() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t pos = cursor[trip_rows_[i]]++;
      cols[pos] = trip_cols_[i];
      vals[pos] = trip_vals_[i];
    }
  }

  // per-row: sort by column, merge duplicates
  op.col_indices.reserve(n);
  op.values.reserve(n);
  std::vector<std::size_t> order;
  std::vector<std::size_t> new_starts(static_cast<std::size_t>(rows_) + 1, 0);
  for (int r = 0; r < rows_; ++r) {
    const std::size_t b = op.row_starts[r], e = op.row_starts[r + 1];
    order.resize(e - b);
    std::iota(order.begin(), order.end(), b);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return cols[i] < cols[j]; });
    int last_col = -1;
    for (std::size_t k : order) {
      if (cols[k] == last_col) {
        op.values.back() += vals[k];
      } else {
        op.col_indices.push_back(cols[k]);
        op.values.push_back(vals[k]);
        last_col = cols[k];
      }
    }
    new_starts[r + 1] = op.values.size();
  }
  op.row_starts = std::move(new_starts);
  return op;
}

std::vector<double> apply(const SparseOperator& op, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != op.cols)
    throw std::invalid_argument("apply: vector length does not match op.cols");
  std::vector<double> y(op.rows, 0.0);
  for (int r = 0; r < op.rows; ++r) {
    double acc = 0.0;
    for (std::size_t k = op.row_starts[r]; k < op.row_starts[r + 1]; ++k)
      acc += op.values[k] * x[op.col_indices[k]];
    y[r] = acc;
  }
  return y;
}

std::vector<double> apply_transpose(const SparseOperator& op, const std::vector<double>& r) {
  if (static_cast<int>(r.size()) != op.rows)
    throw std::invalid_argument("apply_transpose: vector length does not match op.rows");
  std::vector<double> y(op.cols, 0.0);
  for (int row = 0; row < op.rows; ++row) {
    const double rv = r[row];
    if (rv == 0.0) continue;
    for (std::size_t k = op.row_starts[row]; k < op.row_starts[row + 1]; ++k)
      y[op.col_indices[k]] += op.values[k] * rv;
  }
  return y;
}

SparseOperator compose(const SparseOperator& a, const SparseOperator& b) {
  if (a.cols != b.rows)
    throw std::invalid_argument("compose: a.cols must equal b.rows");
  SparseOperator c;
  c.rows = a.rows;
  c.cols = b.cols;
  c.row_starts.assign(static_cast<std::size_t>(a.rows) + 1, 0);

  std::vector<double> acc(b.cols, 0.0);
  std::vector<char> seen(b.cols, 0);
  std::vector<int> touched;
  for (int r = 0; r < a.rows; ++r) {
    touched.clear();
    for (std::size_t k = a.row_starts[r]; k < a.row_starts[r + 1]; ++k) {
      const double av = a.values[k];
      const int mid = a.col_indices[k];
      for (std::size_t j = b.row_starts[mid]; j < b.row_starts[mid + 1]; ++j) {
        const int col = b.col_indices[j];
        if (!seen[col]) {
          seen[col] = 1;
          touched.push_back(col);
          acc[col] = 0.0;
        }
        acc[col] += av * b.values[j];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (int col : touched) {
      if (acc[col] != 0.0) {
        c.col_indices.push_back(col);
        c.values.push_back(acc[col]);
      }
      seen[col] = 0;
    }
    c.row_starts[r + 1] = c.values.size();
  }
  return c;
}

ImageBuffer densify_row(const SparseOperator& op, int row, const GridSpec& grid) {
  if (row < 0 || row >= op.rows)
    throw std::invalid_argument("densify_row: row out of range");
  if (grid.size() != static_cast<std::size_t>(op.cols))
    throw std::invalid_argument("densify_row: grid size does not match op.cols");
  ImageBuffer img(grid);
  for (std::size_t k = op.row_starts[row]; k < op.row_starts[row + 1]; ++k)
    img.samples[op.col_indices[k]] = op.values[k];
  return img;
}

}  // namespace affsr
