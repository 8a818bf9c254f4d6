#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "supn/model.hpp"

namespace supn {

struct AdamConfig {
  int epochs = 5000;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

/// First/second moment estimates and step counter for one parameter vector.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;

  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update of theta in place.
void adam_step(AdamState& state, std::span<double> theta, std::span<const double> grad,
               const AdamConfig& cfg);

/// Called with (epoch, theta, loss) where loss is evaluated at theta.
using EpochCallback = std::function<void(int, std::span<const double>, double)>;

struct AdamResult {
  std::vector<double> theta;
  double loss = 0.0;
  int epochs = 0;
};

/// Full-batch Adam. The callback fires at epoch 0, every `callback_every` epochs, and after the
/// final epoch. Throws std::runtime_error on a non-finite loss.
AdamResult adam_run(const DiffObjective& obj, std::vector<double> theta, const AdamConfig& cfg,
                    const EpochCallback& callback = {}, int callback_every = 100);

// ---------------------------------------------------------------------------

/// Limited-memory BFGS pairs; `apply_inverse` is the two-loop recursion (H v) with
/// H_0 = gamma I, gamma = s'y / y'y of the newest pair.
class LbfgsState {
 public:
  explicit LbfgsState(std::size_t capacity = 10) : capacity_(capacity) {}

  /// Stores (s, y) unless s'y <= 1e-12 |s||y|; returns whether it was stored.
  bool update(std::span<const double> s, std::span<const double> y);
  void clear() { pairs_.clear(); }
  std::size_t size() const { return pairs_.size(); }
  std::size_t capacity() const { return capacity_; }

  void apply_inverse(std::span<const double> v, std::span<double> out) const;
  /// B v with B = H^{-1}, via the direct BFGS recursion. O(m^2 n); meant for diagnostics.
  void apply_hessian(std::span<const double> v, std::span<double> out) const;

 private:
  struct Pair {
    std::vector<double> s;
    std::vector<double> y;
    double sy;
  };
  std::size_t capacity_;
  std::deque<Pair> pairs_;
};

using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

enum class CgStatus { Interior, Boundary, NegativeCurvature, MaxIters };
std::string to_string(CgStatus s);

struct CgTolerances {
  double abs_tol = 1e-4;
  double rel_tol = 1e-2;
  int max_iters = 500;
};

struct CgResult {
  std::vector<double> step;
  CgStatus status = CgStatus::Interior;
  int iterations = 0;
  /// ||s||_M with M the inverse of the preconditioner.
  double step_norm_m = 0.0;
  /// m(0) - m(s) for m(s) = g's + s'Hs/2.
  double predicted_reduction = 0.0;
  /// Decrease at the Cauchy point along -M^{-1} g inside the same M-norm ball.
  double cauchy_reduction = 0.0;
};

/// Preconditioned Steihaug-Toint truncated CG for min g's + s'Hs/2 s.t. ||s||_M <= radius.
/// `precond` applies M^{-1}; pass an empty function for M = I. Stops when the residual falls
/// to min(abs_tol, rel_tol ||g||), on the boundary, on negative curvature, or at max_iters.
CgResult steihaug_cg(const LinearOperator& hessian, std::span<const double> grad, double radius,
                     const LinearOperator& precond, const CgTolerances& tol);

struct TrustRegionConfig {
  int max_newton_steps = 1000;
  double grad_tol = 1e-6;
  double step_tol = 5e-5;
  CgTolerances cg{};
  double radius_init = 1.0;
  double radius_max = 1e4;
  double eta_accept = 0.1;
  double shrink_below = 0.25;
  double grow_above = 0.75;
  double shrink = 0.25;
  double grow = 2.0;
  std::size_t lbfgs_memory = 10;
  bool precondition = true;

  void validate() const;
};

enum class TrStatus { GradientTolerance, StepTolerance, MaxSteps, RadiusCollapse };
std::string to_string(TrStatus s);

struct TrIteration {
  int iteration = 0;
  double loss = 0.0;       // at the iterate the subproblem was built on
  double grad_norm = 0.0;
  double radius = 0.0;
  double rho = 0.0;
  bool accepted = false;
  CgStatus cg_status = CgStatus::Interior;
  int cg_iterations = 0;
  double step_norm = 0.0;    // Euclidean
  double step_norm_m = 0.0;  // preconditioner norm
  double predicted = 0.0;
  double cauchy = 0.0;
  double trial_loss = 0.0;
};

struct TrResult {
  std::vector<double> theta;
  double loss = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  int accepted = 0;
  TrStatus status = TrStatus::MaxSteps;
  std::vector<TrIteration> history;
};

/// Called after each accepted step with (iteration, theta, loss).
using AcceptCallback = std::function<void(int, std::span<const double>, double)>;

TrResult trust_region_run(const DiffObjective& obj, std::vector<double> theta,
                          const TrustRegionConfig& cfg, const AcceptCallback& on_accept = {});

// ---------------------------------------------------------------------------

/// Relative errors of a model on a fixed reference set.
class ErrorProbe {
 public:
  ErrorProbe(const Predictor& predictor, const Dataset& truth) : predictor_(&predictor), truth_(&truth) {}
  double rel_l2(std::span<const double> theta) const;
  double rel_linf(std::span<const double> theta) const;

 private:
  const Predictor* predictor_;
  const Dataset* truth_;
};

struct Checkpoint {
  std::string phase;  // "init", "adam" or "newton"
  int step = 0;
  double train_loss = 0.0;
  double val_err = 0.0;
  double test_err = 0.0;
};

struct TrainRecord {
  std::vector<Checkpoint> checkpoints;
  std::vector<double> best_theta;
  double best_val_err = 0.0;
  double test_rel_l2 = 0.0;    // at the validation minimum
  double test_rel_linf = 0.0;  // at the validation minimum
  double final_train_loss = 0.0;
  int adam_epochs = 0;
  int newton_steps = 0;
  TrStatus tr_status = TrStatus::MaxSteps;
  double wall_s = 0.0;
};

/// Adam burn-in, then trust-region Newton-CG; tracks validation error every 100 Adam epochs and
/// every accepted Newton step and reports test error at the best validation checkpoint.
TrainRecord train_pipeline(const DiffObjective& obj, std::vector<double> theta0,
                           const ErrorProbe& validation, const ErrorProbe& test,
                           const AdamConfig& adam, const TrustRegionConfig& tr);

}  // namespace supn
