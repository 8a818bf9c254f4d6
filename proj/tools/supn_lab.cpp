#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "supn/harness.hpp"

namespace fs = std::filesystem;
using namespace supn;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool desk = false;
};

constexpr int kOk = 0;
constexpr int kRunFailure = 1;
constexpr int kConfigError = 2;

ExperimentConfig resolve(const std::string& study, const Options& opt) {
  ExperimentConfig cfg = opt.config.empty() ? default_config(study, opt.desk) : load_config(opt.config);
  if (!opt.config.empty() && opt.desk) apply_desk_scale(cfg);
  if (opt.seed) cfg.seeds = {*opt.seed};
  if (!opt.out.empty()) cfg.out_dir = opt.out;
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const ExperimentConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  const fs::path path = fs::path(cfg.out_dir) / name;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

std::size_t count_failures(const std::vector<MetricReport>& runs) {
  std::size_t n = 0;
  for (const auto& r : runs) {
    if (r.failed()) {
      std::cerr << "run failed: " << r.arch.label() << " seed " << r.seed << ": " << r.failure << '\n';
      ++n;
    }
  }
  return n;
}

void write_sweep(const ExperimentConfig& cfg, const SweepResult& res, const std::string& stem) {
  auto csv = open_out(cfg, stem + ".csv");
  write_runs_csv(csv, res.runs);
  auto summary = open_out(cfg, stem + "_summary.csv");
  write_summary_csv(summary, res.summary);
  auto jl = open_out(cfg, stem + ".jsonl");
  write_runs_jsonl(jl, res.runs, config_hash(cfg));
  auto cj = open_out(cfg, "config.json");
  cj << config_to_json(cfg).dump(2) << '\n';
}

void print_summary(const std::vector<ArchSummary>& summary) {
  for (const auto& s : summary) {
    std::printf("%-28s P=%-5zu mean_rel_l2=%.3e std=%.2e failed=%zu\n", s.arch.label().c_str(), s.parameter_count,
                s.rel_l2.mean, s.rel_l2.stddev, s.rel_l2.failed);
  }
}

int cmd_sweep(const std::string& study, const Options& opt) {
  ExperimentConfig cfg = resolve(study, opt);
  if (study == "project") {
    std::erase_if(cfg.architectures, [](const Architecture& a) { return a.family != ModelFamily::Projection; });
    if (cfg.architectures.empty()) throw ConfigError("field 'models': project needs projection architectures");
  }
  const SweepResult res = best_approx_sweep(cfg);
  const std::string stem = study == "sweep" ? "runs" : study == "project" ? "projection" : "train";
  write_sweep(cfg, res, stem);
  if (study == "train") {
    const std::size_t dim = cfg.dimension();
    fs::create_directories(fs::path(cfg.out_dir) / "models");
    for (const auto& r : res.runs) {
      if (r.failed()) continue;
      std::string name = r.arch.label() + "_seed" + std::to_string(r.seed) + ".json";
      for (char& ch : name) {
        if (ch == ':' || ch == ',' || ch == '=') ch = '_';
      }
      std::ofstream os(fs::path(cfg.out_dir) / "models" / name);
      os << model_to_json(r.arch, dim, r.theta).dump() << '\n';
    }
  }
  print_summary(res.summary);
  return count_failures(res.runs) > 0 ? kRunFailure : kOk;
}

int cmd_sampling(const Options& opt) {
  const ExperimentConfig cfg = resolve("sampling-study", opt);
  const SamplingResult res = sampling_study(cfg);
  auto rows = open_out(cfg, "sampling.csv");
  write_sampling_csv(rows, res.rows);
  auto summary = open_out(cfg, "sampling_summary.csv");
  write_sampling_summary_csv(summary, res.summary);
  std::size_t failed = 0;
  for (const auto& s : res.summary) {
    std::printf("%-8s %-15s K=%-6zu mean=%.3e p10=%.3e p90=%.3e\n", s.tier.c_str(), s.sampler.c_str(), s.samples,
                s.mean, s.p10, s.p90);
    failed += s.failed;
  }
  return failed > 0 ? kRunFailure : kOk;
}

int cmd_runge(const Options& opt) {
  const ExperimentConfig cfg = resolve("runge-rates", opt);
  const RungeResult res = runge_rate_study(cfg);
  auto pts = open_out(cfg, "runge_points.csv");
  write_runge_points_csv(pts, res.points);
  auto fits = open_out(cfg, "runge_fits.csv");
  write_runge_fits_csv(fits, res.fits);
  bool ok = count_failures(res.runs) == 0;
  for (const auto& f : res.fits) {
    if (!f.failure.empty()) {
      std::printf("c=%-4g %-10s fit rejected: %s\n", f.c, f.method.c_str(), f.failure.c_str());
      ok = false;
      continue;
    }
    std::printf("c=%-4g %-10s %-11s slope=%.4f +- %.4f R2=%.4f\n", f.c, f.method.c_str(), f.model.c_str(),
                f.fit.slope, f.fit.slope_stderr, f.fit.r_squared);
  }
  return ok ? kOk : kRunFailure;
}

int cmd_constructive(const Options& opt) {
  const ExperimentConfig cfg = resolve("constructive-check", opt);
  const auto rows = constructive_check(cfg);
  auto os = open_out(cfg, "constructive.csv");
  write_constructive_csv(os, rows);
  bool ok = true;
  for (const auto& r : rows) {
    std::printf("%-22s M=%-3d delta=%-5g err=%.3e bound=%.3e %s", r.target.c_str(), r.degree, r.delta, r.rel_l2,
                r.bound, r.pass ? "ok" : "VIOLATED");
    if (r.trained) {
      std::printf("  test %.3e -> %.3e%s", r.init_test_err, r.trained_test_err, r.test_ok ? "" : " (test higher)");
      if (!r.train_ok) std::printf(" TRAIN LOSS ROSE");
    }
    std::printf("\n");
    ok = ok && r.pass && r.train_ok;
  }
  return ok ? kOk : kRunFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"supn-lab: shallow universal polynomial network experiments"};
  app.require_subcommand(1);
  Options opt;
  const char* studies[] = {"train", "project", "sweep", "sampling-study", "runge-rates", "constructive-check"};
  const char* help[] = {"train architectures from the config and save the models",
                        "fit polynomial projections over a degree ladder",
                        "best-approximation sweep over architectures and seeds",
                        "finite-sampling study over K/P ratios and samplers",
                        "convergence-rate fits for the Runge family",
                        "constructive initialization error bounds"};
  for (int i = 0; i < 6; ++i) {
    auto* sub = app.add_subcommand(studies[i], help[i]);
    sub->add_option("--config", opt.config, "JSON experiment configuration");
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--seed", opt.seed, "run a single seed");
    sub->add_flag("--desk-scale", opt.desk, "desk-scale grids and ladders (P <= 500)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }
  const std::string study = app.get_subcommands().front()->get_name();
  try {
    if (study == "sampling-study") return cmd_sampling(opt);
    if (study == "runge-rates") return cmd_runge(opt);
    if (study == "constructive-check") return cmd_constructive(opt);
    return cmd_sweep(study, opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRunFailure;
  }
}
