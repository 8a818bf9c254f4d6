#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "supn/basis.hpp"
#include "supn/metrics.hpp"
#include "supn/optim.hpp"
#include "supn/targets.hpp"

namespace supn {

/// Malformed or inconsistent experiment configuration; the message names the line or field.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ModelFamily { Supn, Mlp, Projection };
std::string to_string(ModelFamily f);
ModelFamily parse_family(const std::string& name);

std::string to_string(IndexSetKind k);
IndexSetKind parse_index_set_kind(const std::string& name);

struct Architecture {
  ModelFamily family = ModelFamily::Supn;
  std::size_t width = 0;  // N for SUPN and MLP
  int level = 0;          // polynomial degree or index-set level for SUPN and projection
  std::size_t depth = 0;  // MLP hidden layers
  IndexSetKind index_set = IndexSetKind::TotalDegree;

  /// Polynomial index set in `dimension` dimensions (SUPN and projection only).
  MultiIndexSet polynomial_set(std::size_t dimension) const;
  /// Trainable parameter count: N|Lambda| + N, MLP N(D+2) + (L-1)(N^2+N), or |Lambda|.
  std::size_t parameter_count(std::size_t dimension) const;
  /// Stable textual identity, e.g. "supn:N=5,M=18".
  std::string label() const;
};

struct SamplingTier {
  std::string name;
  Architecture arch;
};

struct SamplingConfig {
  std::vector<double> ratios{0.25, 0.5, 1.0, 2.0, 4.0};
  std::vector<GridSpec::Kind> samplers{GridSpec::Kind::Uniform, GridSpec::Kind::Equidistant,
                                       GridSpec::Kind::GaussLegendre};
  int realizations = 10;
  bool include_full = true;
  std::vector<SamplingTier> tiers;
};

struct RungeConfig {
  std::vector<double> c_values{5.0, 10.0, 20.0};
  std::vector<int> projection_degrees;
  std::vector<Architecture> supn;
};

struct ConstructiveConfig {
  std::vector<std::string> targets{"runge:c=5", "f1"};
  std::vector<int> degrees{10, 20};
  std::vector<double> deltas{0.5, 0.1, 0.01};
  std::size_t eval_nodes = 512;
  bool train = true;
};

struct ExperimentConfig {
  std::string target = "f1";
  std::vector<Architecture> architectures;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::optional<GridPrescription> grids;  // unset: catalog grids for the target dimension
  AdamConfig adam{};
  TrustRegionConfig trust_region{};
  std::size_t max_parameters = 0;  // 0 means no cap
  bool desk_scale = false;
  std::string out_dir = "supn_out";
  SamplingConfig sampling{};
  RungeConfig runge{};
  ConstructiveConfig constructive{};

  std::size_t dimension() const;
  GridPrescription resolved_grids() const;
  /// Throws ConfigError on empty ladders, duplicate seeds, unknown targets or bad optimizer fields.
  void validate() const;
};

/// Parses a JSON config; syntax errors report line and column, schema errors the field path.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);
/// Built-in configuration for a subcommand ("train", "project", "sweep", "sampling-study",
/// "runge-rates", "constructive-check").
ExperimentConfig default_config(const std::string& study, bool desk_scale);
/// Desk grids for the target dimension and ladders capped at P <= 500.
void apply_desk_scale(ExperimentConfig& cfg);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// FNV-1a 64 of the canonical JSON form (output directory excluded).
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string hex64(std::uint64_t v);

// ---------------------------------------------------------------------------

struct ProblemData {
  TargetFunction target;
  Dataset train;
  Dataset validation;
  Dataset test;
};

ProblemData make_problem(const TargetFunction& f, const GridPrescription& grids);

struct MetricReport {
  Architecture arch;
  std::size_t parameter_count = 0;
  std::uint64_t seed = 0;
  double rel_l2 = 0.0;
  double rel_linf = 0.0;
  double wall_s = 0.0;
  std::string failure;  // empty on success; errors are NaN otherwise
  int adam_epochs = 0;
  int newton_steps = 0;
  std::string tr_status;
  std::vector<Checkpoint> checkpoints;
  std::vector<double> theta;  // parameters at the best validation checkpoint

  bool failed() const { return !failure.empty(); }
};

/// Trains (or fits) one architecture for one seed. Exceptions become a failed report.
MetricReport run_model(const Architecture& arch, std::uint64_t seed, const ProblemData& data,
                       const AdamConfig& adam, const TrustRegionConfig& tr);

/// Worker count: SUPN_LAB_THREADS if set, else hardware concurrency, capped by `tasks`.
std::size_t worker_count(std::size_t tasks);
/// Runs body(i) for i in [0, n) on the worker pool.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

struct ArchSummary {
  Architecture arch;
  std::size_t parameter_count = 0;
  Summary rel_l2;
  Summary rel_linf;
};

struct SweepResult {
  std::vector<MetricReport> runs;  // sorted by family, P, label, seed
  std::vector<ArchSummary> summary;
};

/// Trains every architecture x seed and aggregates test errors per architecture.
SweepResult best_approx_sweep(const ExperimentConfig& cfg);
std::vector<ArchSummary> summarize_runs(const std::vector<MetricReport>& runs);

inline constexpr const char* kCsvVersionLine = "# supn-lab v1";

void write_runs_csv(std::ostream& os, const std::vector<MetricReport>& runs);
void write_summary_csv(std::ostream& os, const std::vector<ArchSummary>& summary);
void write_runs_jsonl(std::ostream& os, const std::vector<MetricReport>& runs, std::uint64_t cfg_hash);

// ---------------------------------------------------------------------------

struct SamplingRow {
  std::string tier;
  Architecture arch;
  std::size_t parameter_count = 0;
  std::string sampler;  // uniform, equidistant, gauss_legendre or full
  double ratio = 0.0;   // K / P
  std::size_t samples = 0;
  int realization = 0;
  std::uint64_t seed = 0;
  double rel_l2 = 0.0;
  double rel_linf = 0.0;
  double wall_s = 0.0;
  std::string failure;
};

struct SamplingSummaryRow {
  std::string tier;
  std::string sampler;
  double ratio = 0.0;
  std::size_t samples = 0;
  std::size_t count = 0;
  std::size_t failed = 0;
  double mean = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
};

struct SamplingResult {
  std::vector<SamplingRow> rows;
  std::vector<SamplingSummaryRow> summary;
};

/// Finite-sampling study on a 1D target: K = ratio * P training samples per sampler; uniform
/// samples are redrawn for each realization.
SamplingResult sampling_study(const ExperimentConfig& cfg);
void write_sampling_csv(std::ostream& os, const std::vector<SamplingRow>& rows);
void write_sampling_summary_csv(std::ostream& os, const std::vector<SamplingSummaryRow>& rows);

// ---------------------------------------------------------------------------

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares; needs at least 4 points with distinct x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Fits log(err) against log(P) (algebraic) or P (spectral). Errors at or below `floor` are
/// dropped; fewer than 4 remaining points throws std::domain_error.
LineFit fit_convergence(const std::vector<double>& params, const std::vector<double>& errors,
                        bool log_params, double floor = 1e-13);

struct RungePoint {
  double c = 0.0;
  std::string method;  // projection or supn
  std::string label;
  std::size_t parameter_count = 0;
  double rel_l2 = 0.0;  // mean over seeds for SUPN
  std::size_t failed = 0;
};

struct RungeFit {
  double c = 0.0;
  std::string method;
  std::string model;  // "exponential" (log err vs P) or "algebraic" (log err vs log P)
  LineFit fit;
  std::string failure;
};

struct RungeResult {
  std::vector<RungePoint> points;
  std::vector<RungeFit> fits;
  std::vector<MetricReport> runs;
};

RungeResult runge_rate_study(const ExperimentConfig& cfg);
void write_runge_points_csv(std::ostream& os, const std::vector<RungePoint>& points);
void write_runge_fits_csv(std::ostream& os, const std::vector<RungeFit>& fits);

// ---------------------------------------------------------------------------

struct ConstructiveRow {
  std::string target;
  int degree = 0;
  double delta = 0.0;
  double eps_rel = 0.0;   // eps_Lambda / ||f||
  double bound = 0.0;     // (1 + delta) eps_rel, or delta / ||f|| for in-span targets
  double rel_l2 = 0.0;    // constructive network on the evaluation grid
  double R = 0.0;
  double S = 0.0;
  bool exact = false;
  bool pass = false;
  bool trained = false;
  double init_train_loss = 0.0;
  double trained_train_loss = 0.0;
  double init_test_err = 0.0;
  double trained_test_err = 0.0;  // at the validation minimum
  bool train_ok = true;           // final training loss no larger than at the constructive point
  bool test_ok = true;            // reported only: validation selection does not bound the test error
};

/// Builds constructive L2 SUPNs for each target x degree x delta and checks the error bound;
/// optionally trains from the constructive point and compares test errors.
std::vector<ConstructiveRow> constructive_check(const ExperimentConfig& cfg);
void write_constructive_csv(std::ostream& os, const std::vector<ConstructiveRow>& rows);

// ---------------------------------------------------------------------------

/// {family, D, N, index_set, theta} (plus depth for MLPs).
nlohmann::json model_to_json(const Architecture& arch, std::size_t dimension,
                             const std::vector<double>& theta);

struct SavedModel {
  Architecture arch;
  std::size_t dimension = 1;
  std::vector<double> theta;
};
SavedModel model_from_json(const nlohmann::json& j);
/// Evaluates a saved model at row-major points.
std::vector<double> predict_saved(const SavedModel& model, std::span<const double> points);

}  // namespace supn
