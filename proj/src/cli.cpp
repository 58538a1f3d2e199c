#include "affsr/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "affsr/io.hpp"
#include "affsr/shear.hpp"

namespace fs = std::filesystem;

namespace affsr {

namespace {

std::string frame_name(const char* prefix, std::size_t k, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu.%s", prefix, k, ext);
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory: " + dir);
}

MotionSchedule schedule_from_config(const RunConfig& cfg, const GridSpec& sr) {
  MotionSchedule sched;
  sched.n_frames = cfg.get_int("motion.frames", 20);
  sched.max_rotation_deg = cfg.get_double("motion.max_rotation_deg", 0.0);
  sched.max_zoom = cfg.get_double("motion.max_zoom", 1.0);
  sched.center = {cfg.get_double("motion.center_u", (sr.width - 1) / 2.0),
                  cfg.get_double("motion.center_v", (sr.height - 1) / 2.0)};
  return sched;
}

std::vector<CliqueDirection> parse_cliques(const RunConfig& cfg) {
  if (!cfg.has("regularization.cliques"))
    return {CliqueDirection::horizontal, CliqueDirection::vertical,
            CliqueDirection::diag_main, CliqueDirection::diag_anti};
  std::vector<CliqueDirection> dirs;
  for (const std::string& name : cfg.get_list("regularization.cliques")) {
    if (name == "horizontal") dirs.push_back(CliqueDirection::horizontal);
    else if (name == "vertical") dirs.push_back(CliqueDirection::vertical);
    else if (name == "diag_main") dirs.push_back(CliqueDirection::diag_main);
    else if (name == "diag_anti") dirs.push_back(CliqueDirection::diag_anti);
    else throw ConfigError("regularization.cliques: unknown direction '" + name + "'");
  }
  return dirs;
}

RegularizationSettings reg_from_config(const RunConfig& cfg) {
  RegularizationSettings reg;
  reg.lambda = cfg.get_double("regularization.lambda", 1e-3);
  reg.s = cfg.get_double_or_inf("regularization.s",
                                std::numeric_limits<double>::infinity());
  reg.positivity = cfg.get_bool("regularization.positivity", false);
  reg.clique_directions = parse_cliques(cfg);
  reg.validate();
  return reg;
}

OptimizerSettings optimizer_from_config(const RunConfig& cfg) {
  OptimizerSettings opt;
  opt.max_iters = cfg.get_int("optimizer.max_iters", 500);
  opt.grad_tol = cfg.get_double("optimizer.grad_tol", 1e-8);
  opt.f_tol = cfg.get_double("optimizer.f_tol", 1e-12);
  opt.memory = cfg.get_int("optimizer.memory", 10);
  const std::string init = cfg.get_string("optimizer.init", "mean_backprojection");
  if (init == "zero") opt.init = InitKind::zero;
  else if (init == "mean_backprojection") opt.init = InitKind::mean_backprojection;
  else if (init == "file") {
    opt.init = InitKind::given;
    opt.init_image = read_image(cfg.get_string("optimizer.init_file")).samples;
  } else {
    throw ConfigError("optimizer.init: unknown init '" + init + "'");
  }
  opt.validate();
  return opt;
}

ImageBuffer hr_from_config(const RunConfig& cfg) {
  if (cfg.has("io.hr_image")) return read_image(cfg.get_string("io.hr_image"));
  const std::string chart = cfg.get_string("io.chart", "");
  if (chart.empty())
    throw ConfigError("synth needs io.hr_image or io.chart");
  ChartKind kind;
  if (chart == "bars") kind = ChartKind::bars;
  else if (chart == "star") kind = ChartKind::star;
  else if (chart == "checker") kind = ChartKind::checker;
  else throw ConfigError("io.chart: unknown chart kind '" + chart + "'");
  return make_test_chart(cfg.get_int("grids.sr_width"),
                         cfg.get_int("grids.sr_height"), kind);
}

struct Dataset {
  ImageBuffer hr;  // may be empty (bench requires it, reconstruct does not)
  std::vector<ImageBuffer> frames;
  std::vector<AffineMap2D> motions;
  GridSpec lr, sr;
};

Dataset load_dataset(const RunConfig& cfg, bool need_hr) {
  Dataset ds;
  const std::string dir = cfg.get_string("io.data_dir");
  ds.motions = read_motion_file(dir + "/motions.txt");
  const MagnificationFactor L(cfg.get_int("grids.L"));
  for (std::size_t k = 0; k < ds.motions.size(); ++k) {
    const std::string base = dir + "/" + frame_name("frame", k, "f32");
    ds.frames.push_back(fs::exists(base) ? read_f32(base)
                                         : read_pgm(dir + "/" + frame_name("frame", k, "pgm")));
  }
  ds.sr = GridSpec(cfg.get_int("grids.sr_width"), cfg.get_int("grids.sr_height"), 1.0);
  ds.lr = GridSpec(ds.frames.front().grid.width, ds.frames.front().grid.height,
                   double(L.value));
  for (const ImageBuffer& f : ds.frames)
    if (!f.grid.same_dims(ds.lr))
      throw IoError("frames have inconsistent dimensions in " + dir);
  if (need_hr) ds.hr = read_image(dir + "/hr_ref.f32");
  return ds;
}

}  // namespace

ModelKind parse_model_kind(const std::string& name) {
  if (name == "exact") return ModelKind::Exact;
  if (name == "cw") return ModelKind::ConvolveThenWarp;
  if (name == "ef0") return ModelKind::EF0;
  if (name == "ef1") return ModelKind::EF1;
  if (name == "ef3") return ModelKind::EF3;
  if (name == "ts0") return ModelKind::TS0;
  throw ConfigError("unknown model kind '" + name +
                    "' (expect exact|cw|ef0|ef1|ef3|ts0)");
}

int cmd_synth(const RunConfig& cfg) {
  cfg.require("grids.L");
  cfg.require("io.out_dir");
  const MagnificationFactor L(cfg.get_int("grids.L"));
  const ImageBuffer hr = hr_from_config(cfg);
  const GridSpec sr = hr.grid;

  NoiseSpec noise;
  noise.variance = cfg.get_double("noise.variance", 0.0);
  noise.seed = static_cast<std::uint64_t>(cfg.get_int64("noise.seed", 1));

  SyntheticSequence seq;
  if (cfg.get_string("motion.source", "schedule") == "file") {
    const std::vector<AffineMap2D> motions = read_motion_file(cfg.get_string("motion.file"));
    seq = generate_sequence(hr, motions, L, noise);
  } else {
    seq = generate_sequence(hr, schedule_from_config(cfg, sr), L, noise);
  }

  const std::string out = cfg.get_string("io.out_dir");
  ensure_dir(out);
  std::vector<std::string> written;
  for (std::size_t k = 0; k < seq.frames.size(); ++k) {
    write_f32(out + "/" + frame_name("frame", k, "f32"), seq.frames[k]);
    write_pgm(out + "/" + frame_name("frame", k, "pgm"), seq.frames[k]);
    write_f32(out + "/" + frame_name("clean", k, "f32"), seq.clean_frames[k]);
    written.push_back(frame_name("frame", k, "f32"));
  }
  write_motion_file(out + "/motions.txt", seq.motions);
  write_f32(out + "/hr_ref.f32", hr);
  write_pgm(out + "/hr_ref.pgm", hr);

  std::ofstream manifest(out + "/manifest.txt");
  manifest << "# resolved config\n" << cfg.dump() << "# files\n";
  for (const std::string& f : written) manifest << f << "\n";
  manifest << "motions.txt\nhr_ref.f32\n";

  std::cout << "synth: wrote " << seq.frames.size() << " frames ("
            << seq.frames.front().grid.width << "x" << seq.frames.front().grid.height
            << ", L=" << L.value << ") to " << out << "\n";
  return 0;
}

int cmd_reconstruct(const RunConfig& cfg) {
  cfg.require("grids.L");
  cfg.require("io.data_dir");
  cfg.require("io.out_dir");
  cfg.require("model.kind");
  const MagnificationFactor L(cfg.get_int("grids.L"));
  const ModelKind kind = parse_model_kind(cfg.get_string("model.kind"));
  Dataset ds = load_dataset(cfg, false);

  ReconstructionProblem problem;
  problem.sr_grid = ds.sr;
  problem.models = assemble_sequence(kind, ds.motions, ds.lr, ds.sr, L);
  problem.frames = std::move(ds.frames);
  problem.reg = reg_from_config(cfg);
  problem.optimizer = optimizer_from_config(cfg);

  const auto t0 = std::chrono::steady_clock::now();
  const SolveResult result = solve(problem);
  const double seconds = std::chrono::duration<double>(
      std::chrono::steady_clock::now() - t0).count();
  const double sec_per_iter = result.iterations > 0 ? seconds / result.iterations : seconds;

  const std::string out = cfg.get_string("io.out_dir");
  ensure_dir(out);
  write_f32(out + "/sr.f32", result.image);
  write_pgm(out + "/sr.pgm", result.image);
  write_trace_csv(out + "/trace.csv", result.trace);

  std::ostringstream summary;
  summary << "model = " << model_kind_name(kind) << "\n"
          << "lambda = " << problem.reg.lambda << "\n"
          << "s = " << problem.reg.s << "\n"
          << "positivity = " << (problem.reg.positivity ? "true" : "false") << "\n"
          << "final_J = " << result.trace.back().criterion << "\n"
          << "iterations = " << result.iterations << "\n"
          << "stop_reason = " << stop_reason_name(result.reason) << "\n"
          << "sec_per_iter = " << sec_per_iter << "\n";
  std::ofstream(out + "/summary.txt") << summary.str();
  std::cout << summary.str();
  return 0;
}

int cmd_footprint(const RunConfig& cfg) {
  cfg.require("grids.L");
  cfg.require("footprint.model");
  cfg.require("io.out_dir");
  const MagnificationFactor L(cfg.get_int("grids.L"));
  const ModelKind kind = parse_model_kind(cfg.get_string("footprint.model"));
  const double rotation = cfg.get_double("footprint.rotation_deg", 0.0);
  const double zoom = cfg.get_double("footprint.zoom", 1.0);
  const int lr_size = cfg.get_int("footprint.lr_size", 15);
  const int detector = cfg.get_int("footprint.detector", -1);

  const Footprint fp = footprint_diagnostic(kind, rotation, zoom, L, lr_size, detector);

  const std::string out = cfg.get_string("io.out_dir");
  ensure_dir(out);
  const std::string base = out + "/footprint_" + std::string(model_kind_name(kind));
  write_f32(base + ".f32", fp.patch);
  ImageBuffer display = fp.patch;  // scale to 8-bit range for the PGM copy
  const double peak = std::max(std::abs(fp.stats.max), std::abs(fp.stats.min));
  if (peak > 0.0)
    for (double& v : display.samples) v = v / peak * 255.0;
  write_pgm(base + ".pgm", display);

  char line[256];
  std::snprintf(line, sizeof line,
                "model=%s min=%.6f max=%.6f interior_mean=%.6f "
                "interior_stddev=%.6f rms_vs_exact=%.6f\n",
                model_kind_name(kind), fp.stats.min, fp.stats.max,
                fp.stats.interior_mean, fp.stats.interior_stddev,
                fp.stats.rms_vs_exact);
  std::ofstream(base + "_stats.txt") << line;
  std::cout << line;
  return 0;
}

RegularizationSettings make_setting(const std::string& name, double lambda,
                                    double s_hyper) {
  RegularizationSettings reg;
  reg.lambda = lambda;
  if (name == "quad") {
    reg.s = std::numeric_limits<double>::infinity();
  } else if (name == "quad_pos") {
    reg.s = std::numeric_limits<double>::infinity();
    reg.positivity = true;
  } else if (name == "hyper") {
    reg.s = s_hyper;
  } else if (name == "hyper_pos") {
    reg.s = s_hyper;
    reg.positivity = true;
  } else {
    throw ConfigError("unknown setting '" + name +
                      "' (expect quad|quad_pos|hyper|hyper_pos)");
  }
  return reg;
}

std::vector<BenchCell> run_bench(const BenchInput& input) {
  std::vector<BenchCell> cells;
  // every model is scored on the same region: the well-determined pixels
  // of the exact (data-side) geometry
  const std::vector<std::uint8_t> region = coverage_region(
      assemble_sequence(ModelKind::Exact, input.motions, input.lr, input.sr, input.L));
  for (ModelKind kind : input.models) {
    std::vector<FrameModel> models;
    std::string assembly_error;
    try {
      models = assemble_sequence(kind, input.motions, input.lr, input.sr, input.L);
    } catch (const std::exception& e) {
      assembly_error = e.what();
    }
    for (const std::string& setting : input.settings) {
      for (double lambda : input.lambdas) {
        BenchCell cell;
        cell.model = model_kind_name(kind);
        cell.setting = setting;
        cell.lambda = lambda;
        if (!assembly_error.empty()) {
          cell.status = assembly_error;
          cells.push_back(cell);
          continue;
        }
        try {
          ReconstructionProblem problem;
          problem.frames = input.frames;
          problem.models = models;
          problem.sr_grid = input.sr;
          problem.reg = make_setting(setting, lambda, input.s_hyper);
          problem.optimizer = input.optimizer;
          const auto t0 = std::chrono::steady_clock::now();
          const SolveResult result = solve(problem);
          const double seconds = std::chrono::duration<double>(
              std::chrono::steady_clock::now() - t0).count();
          for (std::size_t i = 1; i < result.trace.size(); ++i)
            if (result.trace[i].criterion > result.trace[i - 1].criterion)
              cell.monotone = false;
          const PsnrResult score = psnr_region(result.image, input.hr, region);
          cell.psnr_db = score.db;
          cell.identical = score.identical;
          cell.iters = result.iterations;
          cell.sec_per_iter = result.iterations > 0 ? seconds / result.iterations : seconds;
        } catch (const std::exception& e) {
          cell.status = e.what();
        }
        cells.push_back(cell);
      }
    }
  }
  return cells;
}

int cmd_bench(const RunConfig& cfg) {
  cfg.require("grids.L");
  cfg.require("io.data_dir");
  cfg.require("io.out_dir");
  cfg.require("bench.models");
  cfg.require("bench.lambdas");

  BenchInput input;
  Dataset ds = load_dataset(cfg, true);
  input.hr = std::move(ds.hr);
  input.frames = std::move(ds.frames);
  input.motions = std::move(ds.motions);
  input.lr = ds.lr;
  input.sr = ds.sr;
  input.L = MagnificationFactor(cfg.get_int("grids.L"));
  for (const std::string& name : cfg.get_list("bench.models"))
    input.models.push_back(parse_model_kind(name));
  if (cfg.has("bench.settings")) {
    input.settings = cfg.get_list("bench.settings");
  } else {
    input.settings = {"quad"};
  }
  for (const std::string& l : cfg.get_list("bench.lambdas")) {
    try {
      input.lambdas.push_back(std::stod(l));
    } catch (...) {
      throw ConfigError("bench.lambdas: not a number: '" + l + "'");
    }
  }
  input.s_hyper = cfg.get_double("bench.s", 10.0);
  input.optimizer = optimizer_from_config(cfg);

  const std::vector<BenchCell> cells = run_bench(input);

  const std::string out = cfg.get_string("io.out_dir");
  ensure_dir(out);
  const std::string csv_path = out + "/bench.csv";
  const bool existed = fs::exists(csv_path);
  std::ofstream csv(csv_path, std::ios::app);
  if (!csv) throw IoError("cannot open for writing: " + csv_path);
  if (!existed) csv << "model,setting,lambda,psnr_db,iters,sec_per_iter,status\n";
  csv.precision(10);
  for (const BenchCell& c : cells) {
    csv << c.model << "," << c.setting << "," << c.lambda << ","
        << (c.identical ? std::numeric_limits<double>::infinity() : c.psnr_db) << ","
        << c.iters << "," << c.sec_per_iter << "," << c.status << "\n";
  }
  csv.close();

  // best lambda per model x setting
  std::ofstream best(out + "/bench_best.csv");
  best << "model,setting,best_lambda,psnr_db\n";
  best.precision(10);
  for (ModelKind kind : input.models) {
    for (const std::string& setting : input.settings) {
      const BenchCell* top = nullptr;
      for (const BenchCell& c : cells)
        if (c.model == model_kind_name(kind) && c.setting == setting &&
            c.status == "ok" && (!top || c.psnr_db > top->psnr_db))
          top = &c;
      if (top) {
        best << top->model << "," << top->setting << "," << top->lambda << ","
             << top->psnr_db << "\n";
        std::cout << "best " << top->model << " " << top->setting
                  << ": lambda=" << top->lambda << " psnr=" << top->psnr_db << " dB\n";
      }
    }
  }
  return 0;
}

int cmd_psnr(const std::string& path_a, const std::string& path_b) {
  const ImageBuffer a = read_image(path_a);
  const ImageBuffer b = read_image(path_b);
  if (!a.grid.same_dims(b.grid))
    throw std::invalid_argument("psnr: images have different dimensions");
  const PsnrResult r = psnr(a, b);
  if (r.identical) {
    std::cout << "identical\n";
  } else {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f dB\n", r.db);
    std::cout << buf;
  }
  return 0;
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "iter,J,data_term,penalty_term,grad_norm,step\n";
  out.precision(12);
  for (const TraceRow& row : trace)
    out << row.iter << "," << row.criterion << "," << row.data_term << ","
        << row.penalty_term << "," << row.grad_norm << "," << row.step << "\n";
}

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"multi-frame super-resolution under affine motion"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string psnr_a, psnr_b;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration file");
    sub->add_option("--set", overrides,
                    "override a config key as a dotted path, key=value");
  };
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic LR sequence");
  add_common(synth);
  CLI::App* reconstruct = app.add_subcommand("reconstruct", "reconstruct the SR image");
  add_common(reconstruct);
  CLI::App* footprint = app.add_subcommand("footprint", "operator footprint diagnostics");
  add_common(footprint);
  CLI::App* bench = app.add_subcommand("bench", "model x setting x lambda sweep");
  add_common(bench);
  CLI::App* psnr_cmd = app.add_subcommand("psnr", "PSNR between two images");
  psnr_cmd->add_option("a", psnr_a, "first image")->required();
  psnr_cmd->add_option("b", psnr_b, "second image")->required();

  try {
    std::vector<const char*> argv;
    argv.push_back("affsr");
    for (const std::string& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (psnr_cmd->parsed()) return cmd_psnr(psnr_a, psnr_b);
    RunConfig cfg = config_path.empty() ? RunConfig::parse_text("", "<empty>")
                                        : RunConfig::parse_file(config_path);
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate_known_keys();
    if (synth->parsed()) return cmd_synth(cfg);
    if (reconstruct->parsed()) return cmd_reconstruct(cfg);
    if (footprint->parsed()) return cmd_footprint(cfg);
    if (bench->parsed()) return cmd_bench(cfg);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace affsr
