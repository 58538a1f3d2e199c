#pragma once

/* ---
   Regularized SR criterion, its analytic gradient, and a bound-constrained
   limited-memory quasi-Newton minimizer.

     J(x) = sum_k || mask .* (y_k - A_k x) ||^2
          + lambda * sum_cliques psi_s(second difference)

   psi_s(u) = 2s (sqrt(s^2 + u^2) - s) is quadratic below the threshold s
   and linear above it; s = infinity selects the pure quadratic branch u^2.
   Cliques are second-order differences x[p-d] - 2 x[p] + x[p+d] over the
   enabled directions, interior pixels only. Masked LR rows contribute
   zero to both the criterion and the gradient. The data-term gradient
   carries an explicit factor 2 (no 1/2 convention anywhere).
   --- */

#include <limits>
#include <vector>

#include "affsr/core.hpp"
#include "affsr/obsmodels.hpp"

namespace affsr {

enum class CliqueDirection { horizontal, vertical, diag_main, diag_anti };

struct RegularizationSettings {
  double lambda = 0.0;
  double s = std::numeric_limits<double>::infinity();  // inf = pure quadratic
  std::vector<CliqueDirection> clique_directions = {
      CliqueDirection::horizontal, CliqueDirection::vertical,
      CliqueDirection::diag_main, CliqueDirection::diag_anti};
  bool positivity = false;

  void validate() const;
};

enum class InitKind { zero, mean_backprojection, given };

struct OptimizerSettings {
  int max_iters = 500;
  double grad_tol = 1e-8;   // relative gradient-norm stop
  double f_tol = 1e-12;     // relative decrease stop
  int memory = 10;          // quasi-Newton history length
  InitKind init = InitKind::mean_backprojection;
  std::vector<double> init_image;  // used when init == given

  void validate() const;
};

struct ReconstructionProblem {
  std::vector<ImageBuffer> frames;
  std::vector<FrameModel> models;
  GridSpec sr_grid;
  RegularizationSettings reg;
  OptimizerSettings optimizer;

  void validate() const;
};

/// Hyperbolic potential psi_s(u); s = infinity gives u^2.
double potential(double u, double s);
/// psi_s'(u); odd, bounded by 2s. s = infinity gives 2u.
double potential_deriv(double u, double s);

double criterion(const std::vector<double>& x, const ReconstructionProblem& p);

/// Data and penalty terms of the criterion, separately.
struct CriterionParts {
  double data = 0.0;
  double penalty = 0.0;
  double total() const { return data + penalty; }
};
CriterionParts criterion_parts(const std::vector<double>& x,
                               const ReconstructionProblem& p);

std::vector<double> gradient(const std::vector<double>& x,
                             const ReconstructionProblem& p);

struct TraceRow {
  int iter = 0;
  double criterion = 0.0;
  double data_term = 0.0;
  double penalty_term = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

enum class StopReason { grad_tol, f_tol, max_iters };
const char* stop_reason_name(StopReason r);

struct SolveResult {
  ImageBuffer image;
  std::vector<TraceRow> trace;  // monotone non-increasing criterion values
  StopReason reason = StopReason::max_iters;
  int iterations = 0;
};

/// Projected limited-memory quasi-Newton descent. Guarantees feasible
/// iterates under the positivity constraint, monotone descent, and
/// J(result) <= J(init). Throws NumericError if the criterion becomes
/// non-finite (signals a model/data bug).
SolveResult solve(const ReconstructionProblem& p);

/// Default initial image: back-projection of the masked data rescaled to
/// unit DC gain.
std::vector<double> mean_backprojection(const ReconstructionProblem& p);

}  // namespace affsr
