#pragma once

/* ---
   Command-line surface: synth, reconstruct, footprint, bench, psnr.
   Commands are plain functions over a RunConfig so they can be driven
   from tests; cli_main adds flag parsing and maps errors to exit codes
   (0 success, 2 config error, 3 numeric failure, 4 I/O).
   --- */

#include <string>
#include <vector>

#include "affsr/config.hpp"
#include "affsr/core.hpp"
#include "affsr/obsmodels.hpp"
#include "affsr/reconstruct.hpp"
#include "affsr/synth.hpp"

namespace affsr {

ModelKind parse_model_kind(const std::string& name);

int cmd_synth(const RunConfig& cfg);
int cmd_reconstruct(const RunConfig& cfg);
int cmd_footprint(const RunConfig& cfg);
int cmd_bench(const RunConfig& cfg);
int cmd_psnr(const std::string& path_a, const std::string& path_b);

// --- benchmark machinery, shared with the acceptance tests ---------------

struct BenchInput {
  ImageBuffer hr;
  std::vector<ImageBuffer> frames;
  std::vector<AffineMap2D> motions;
  GridSpec lr, sr;
  MagnificationFactor L;
  std::vector<ModelKind> models;
  std::vector<std::string> settings;  // quad, quad_pos, hyper, hyper_pos
  std::vector<double> lambdas;
  double s_hyper = 10.0;
  OptimizerSettings optimizer;
};

struct BenchCell {
  std::string model;
  std::string setting;
  double lambda = 0.0;
  double psnr_db = 0.0;
  bool identical = false;
  int iters = 0;
  double sec_per_iter = 0.0;
  bool monotone = true;
  std::string status = "ok";  // partial failures recorded per cell
};

RegularizationSettings make_setting(const std::string& name, double lambda,
                                    double s_hyper);

/// Runs every model x setting x lambda cell; PSNR is scored against the HR
/// reference over the coverage region. Per-cell failures are recorded in
/// `status` and the run continues.
std::vector<BenchCell> run_bench(const BenchInput& input);

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace);

/// argv-style entry point; returns the process exit code.
int cli_main(const std::vector<std::string>& args);

}  // namespace affsr
