#include "affsr/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace affsr {

void RegularizationSettings::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("regularization: lambda must be finite and >= 0");
  if (!(s > 0.0))  // infinity is allowed
    throw std::invalid_argument("regularization: s must be > 0 or infinity");
  if (clique_directions.empty())
    throw std::invalid_argument("regularization: no clique directions");
}

void OptimizerSettings::validate() const {
  if (max_iters < 1) throw std::invalid_argument("optimizer: max_iters must be >= 1");
  if (!(grad_tol > 0.0) || !(f_tol > 0.0))
    throw std::invalid_argument("optimizer: tolerances must be positive");
  if (memory < 1) throw std::invalid_argument("optimizer: memory must be >= 1");
}

void ReconstructionProblem::validate() const {
  reg.validate();
  optimizer.validate();
  if (frames.empty() || frames.size() != models.size())
    throw std::invalid_argument("problem: frames and models must have equal length >= 1");
  const int m = static_cast<int>(sr_grid.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    if (models[k].op.cols != m)
      throw std::invalid_argument("problem: model cols do not match SR grid");
    if (models[k].op.rows != static_cast<int>(frames[k].grid.size()))
      throw std::invalid_argument("problem: model rows do not match frame size");
    if (models[k].mask.size() != static_cast<std::size_t>(models[k].op.rows))
      throw std::invalid_argument("problem: mask length does not match model rows");
  }
  if (optimizer.init == InitKind::given &&
      optimizer.init_image.size() != static_cast<std::size_t>(m))
    throw std::invalid_argument("problem: init image does not match SR grid");
}

double potential(double u, double s) {
  if (std::isinf(s)) return u * u;
  // algebraically equal to 2s(sqrt(s^2+u^2) - s), without the cancellation
  return 2.0 * s * u * u / (std::sqrt(s * s + u * u) + s);
}

double potential_deriv(double u, double s) {
  if (std::isinf(s)) return 2.0 * u;
  return 2.0 * s * u / std::sqrt(s * s + u * u);
}

namespace {

struct CliqueOffset {
  int du, dv;
};

CliqueOffset clique_offset(CliqueDirection d) {
  switch (d) {
    case CliqueDirection::horizontal: return {1, 0};
    case CliqueDirection::vertical: return {0, 1};
    case CliqueDirection::diag_main: return {1, 1};
    case CliqueDirection::diag_anti: return {1, -1};
  }
  return {1, 0};
}

}  // namespace

CriterionParts criterion_parts(const std::vector<double>& x,
                               const ReconstructionProblem& p) {
  if (x.size() != p.sr_grid.size())
    throw std::invalid_argument("criterion: vector length does not match SR grid");
  CriterionParts parts;
  for (std::size_t k = 0; k < p.models.size(); ++k) {
    const std::vector<double> pred = apply(p.models[k].op, x);
    const std::vector<double>& y = p.frames[k].samples;
    double acc = 0.0;
    for (std::size_t n = 0; n < pred.size(); ++n) {
      if (!p.models[k].mask[n]) continue;
      const double r = y[n] - pred[n];
      acc += r * r;
    }
    parts.data += acc;
  }
  if (p.reg.lambda > 0.0) {
    const int W = p.sr_grid.width, H = p.sr_grid.height;
    double acc = 0.0;
    for (CliqueDirection dir : p.reg.clique_directions) {
      const CliqueOffset d = clique_offset(dir);
      for (int v = 0; v < H; ++v) {
        if (v - d.dv < 0 || v - d.dv >= H || v + d.dv < 0 || v + d.dv >= H) continue;
        for (int u = std::abs(d.du); u < W - std::abs(d.du); ++u) {
          const double t = x[(v - d.dv) * W + (u - d.du)] - 2.0 * x[v * W + u] +
                           x[(v + d.dv) * W + (u + d.du)];
          acc += potential(t, p.reg.s);
        }
      }
    }
    parts.penalty = p.reg.lambda * acc;
  }
  return parts;
}

double criterion(const std::vector<double>& x, const ReconstructionProblem& p) {
  return criterion_parts(x, p).total();
}

std::vector<double> gradient(const std::vector<double>& x,
                             const ReconstructionProblem& p) {
  if (x.size() != p.sr_grid.size())
    throw std::invalid_argument("gradient: vector length does not match SR grid");
  std::vector<double> g(x.size(), 0.0);
  for (std::size_t k = 0; k < p.models.size(); ++k) {
    std::vector<double> resid = apply(p.models[k].op, x);
    const std::vector<double>& y = p.frames[k].samples;
    for (std::size_t n = 0; n < resid.size(); ++n)
      resid[n] = p.models[k].mask[n] ? resid[n] - y[n] : 0.0;
    const std::vector<double> bp = apply_transpose(p.models[k].op, resid);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * bp[i];
  }
  if (p.reg.lambda > 0.0) {
    const int W = p.sr_grid.width, H = p.sr_grid.height;
    for (CliqueDirection dir : p.reg.clique_directions) {
      const CliqueOffset d = clique_offset(dir);
      for (int v = 0; v < H; ++v) {
        if (v - d.dv < 0 || v - d.dv >= H || v + d.dv < 0 || v + d.dv >= H) continue;
        for (int u = std::abs(d.du); u < W - std::abs(d.du); ++u) {
          const int im = (v - d.dv) * W + (u - d.du);
          const int i0 = v * W + u;
          const int ip = (v + d.dv) * W + (u + d.du);
          const double t = x[im] - 2.0 * x[i0] + x[ip];
          const double e = p.reg.lambda * potential_deriv(t, p.reg.s);
          g[im] += e;
          g[i0] -= 2.0 * e;
          g[ip] += e;
        }
      }
    }
  }
  return g;
}

std::vector<double> mean_backprojection(const ReconstructionProblem& p) {
  std::vector<double> num(p.sr_grid.size(), 0.0);
  std::vector<double> den(p.sr_grid.size(), 0.0);
  for (std::size_t k = 0; k < p.models.size(); ++k) {
    const SparseOperator& op = p.models[k].op;
    const std::vector<double>& y = p.frames[k].samples;
    for (int r = 0; r < op.rows; ++r) {
      if (!p.models[k].mask[r]) continue;
      for (std::size_t j = op.row_starts[r]; j < op.row_starts[r + 1]; ++j) {
        num[op.col_indices[j]] += op.values[j] * y[r];
        den[op.col_indices[j]] += op.values[j];
      }
    }
  }
  for (std::size_t i = 0; i < num.size(); ++i)
    num[i] = den[i] > 1e-12 ? num[i] / den[i] : 0.0;
  return num;
}

const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::grad_tol: return "grad_tol";
    case StopReason::f_tol: return "f_tol";
    case StopReason::max_iters: return "max_iters";
  }
  return "?";
}

namespace {

double norm2(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

SolveResult solve(const ReconstructionProblem& p) {
  p.validate();
  const std::size_t m = p.sr_grid.size();

  std::vector<double> x;
  switch (p.optimizer.init) {
    case InitKind::zero: x.assign(m, 0.0); break;
    case InitKind::mean_backprojection: x = mean_backprojection(p); break;
    case InitKind::given: x = p.optimizer.init_image; break;
  }
  auto project = [&](std::vector<double>& v) {
    if (p.reg.positivity)
      for (double& e : v) e = std::max(0.0, e);
  };
  project(x);

  CriterionParts parts = criterion_parts(x, p);
  double fx = parts.total();
  if (!std::isfinite(fx)) throw NumericError("solve: initial criterion not finite");
  std::vector<double> g = gradient(x, p);

  SolveResult result;
  result.trace.push_back({0, fx, parts.data, parts.penalty, norm2(g), 0.0});

  // limited-memory BFGS history
  std::deque<std::vector<double>> hist_s, hist_y;
  std::deque<double> hist_rho;

  std::vector<double> dir(m), x_new(m), g_new(m), step_vec(m);
  StopReason reason = StopReason::max_iters;
  int iter = 0;
  for (iter = 1; iter <= p.optimizer.max_iters; ++iter) {
    // two-loop recursion
    dir = g;
    std::vector<double> alpha_hist(hist_s.size());
    for (std::size_t h = hist_s.size(); h-- > 0;) {
      alpha_hist[h] = hist_rho[h] * dot(hist_s[h], dir);
      for (std::size_t i = 0; i < m; ++i) dir[i] -= alpha_hist[h] * hist_y[h][i];
    }
    if (!hist_s.empty()) {
      const double gamma = dot(hist_s.back(), hist_y.back()) /
                           std::max(dot(hist_y.back(), hist_y.back()), 1e-300);
      for (double& d : dir) d *= gamma;
    }
    for (std::size_t h = 0; h < hist_s.size(); ++h) {
      const double beta = hist_rho[h] * dot(hist_y[h], dir);
      for (std::size_t i = 0; i < m; ++i) dir[i] += (alpha_hist[h] - beta) * hist_s[h][i];
    }
    for (double& d : dir) d = -d;

    // safeguard: fall back to steepest descent on a non-descent direction
    double dg = dot(dir, g);
    if (!(dg < 0.0)) {
      const double gn = norm2(g);
      const double scale = gn > 0.0 ? 1.0 / gn : 1.0;
      for (std::size_t i = 0; i < m; ++i) dir[i] = -g[i] * scale;
      dg = dot(dir, g);
    }

    // projected backtracking line search (Armijo on the realized step)
    double alpha = 1.0;
    double fx_new = fx;
    CriterionParts parts_new = parts;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < m; ++i) x_new[i] = x[i] + alpha * dir[i];
      project(x_new);
      for (std::size_t i = 0; i < m; ++i) step_vec[i] = x_new[i] - x[i];
      const double pred = dot(g, step_vec);
      if (pred >= 0.0 && norm2(step_vec) == 0.0) break;  // projection removed all progress
      parts_new = criterion_parts(x_new, p);
      fx_new = parts_new.total();
      if (!std::isfinite(fx_new))
        throw NumericError("solve: criterion became non-finite during line search");
      if (fx_new <= fx + 1e-4 * std::min(pred, 0.0)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted || fx_new > fx) {
      // no decreasing step found: converged as far as the line search can tell
      reason = StopReason::f_tol;
      --iter;
      break;
    }

    g_new = gradient(x_new, p);
    for (std::size_t i = 0; i < m; ++i) step_vec[i] = x_new[i] - x[i];
    std::vector<double> yk(m);
    for (std::size_t i = 0; i < m; ++i) yk[i] = g_new[i] - g[i];
    const double sy = dot(step_vec, yk);
    if (sy > 1e-10 * norm2(step_vec) * norm2(yk)) {
      hist_s.push_back(step_vec);
      hist_y.push_back(yk);
      hist_rho.push_back(1.0 / sy);
      if (static_cast<int>(hist_s.size()) > p.optimizer.memory) {
        hist_s.pop_front();
        hist_y.pop_front();
        hist_rho.pop_front();
      }
    }

    const double decrease = fx - fx_new;
    x.swap(x_new);
    g.swap(g_new);
    parts = parts_new;
    fx = fx_new;

    const double gnorm = norm2(g);
    result.trace.push_back({iter, fx, parts.data, parts.penalty, gnorm, alpha});

    if (gnorm <= p.optimizer.grad_tol * (1.0 + std::abs(fx))) {
      reason = StopReason::grad_tol;
      break;
    }
    if (decrease <= p.optimizer.f_tol * (1.0 + std::abs(fx))) {
      reason = StopReason::f_tol;
      break;
    }
  }
  if (iter > p.optimizer.max_iters) {
    iter = p.optimizer.max_iters;
    reason = StopReason::max_iters;
  }

  result.image = ImageBuffer(p.sr_grid, std::move(x));
  result.reason = reason;
  result.iterations = iter;
  return result;
}

}  // namespace affsr
