#include "supn/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "supn/metrics.hpp"

namespace supn {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Positive root of |s + tau p|_M^2 = radius^2 given the M-inner products.
double boundary_tau(double ss, double sp, double pp, double radius) {
  const double disc = sp * sp + pp * (radius * radius - ss);
  return (-sp + std::sqrt(std::max(0.0, disc))) / pp;
}

}  // namespace

void AdamConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("adam.epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("adam.learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("adam.epsilon must be > 0");
}

void adam_step(AdamState& state, std::span<double> theta, std::span<const double> grad,
               const AdamConfig& cfg) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    theta[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
  }
}

AdamResult adam_run(const DiffObjective& obj, std::vector<double> theta, const AdamConfig& cfg,
                    const EpochCallback& callback, int callback_every) {
  cfg.validate();
  if (theta.size() != obj.parameter_count()) throw std::invalid_argument("adam_run: parameter length");
  if (!all_finite(theta)) throw std::invalid_argument("adam_run: non-finite initial parameters");
  AdamState state(theta.size());
  std::vector<double> grad(theta.size());
  double loss = 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    loss = obj.value_grad(theta, grad);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("Adam: non-finite loss at epoch " + std::to_string(epoch));
    }
    if (callback && epoch % callback_every == 0) callback(epoch, theta, loss);
    adam_step(state, theta, grad, cfg);
  }
  loss = obj.value(theta);
  if (!std::isfinite(loss)) throw std::runtime_error("Adam: non-finite final loss");
  if (callback) callback(cfg.epochs, theta, loss);
  return {std::move(theta), loss, cfg.epochs};
}

// ---------------------------------------------------------------------------

bool LbfgsState::update(std::span<const double> s, std::span<const double> y) {
  if (capacity_ == 0) return false;
  const double sy = dot(s, y);
  if (!(sy > 1e-12 * norm2(s) * norm2(y))) return false;
  if (pairs_.size() == capacity_) pairs_.pop_front();
  pairs_.push_back({{s.begin(), s.end()}, {y.begin(), y.end()}, sy});
  return true;
}

void LbfgsState::apply_inverse(std::span<const double> v, std::span<double> out) const {
  std::copy(v.begin(), v.end(), out.begin());
  if (pairs_.empty()) return;
  std::vector<double> alpha(pairs_.size());
  for (std::size_t i = pairs_.size(); i-- > 0;) {
    const auto& p = pairs_[i];
    alpha[i] = dot(p.s, out) / p.sy;
    axpy(-alpha[i], p.y, out);
  }
  const auto& newest = pairs_.back();
  const double gamma = newest.sy / dot(newest.y, newest.y);
  for (auto& x : out) x *= gamma;
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const auto& p = pairs_[i];
    const double beta = dot(p.y, out) / p.sy;
    axpy(alpha[i] - beta, p.s, out);
  }
}

void LbfgsState::apply_hessian(std::span<const double> v, std::span<double> out) const {
  if (pairs_.empty()) {
    std::copy(v.begin(), v.end(), out.begin());
    return;
  }
  const auto& newest = pairs_.back();
  const double inv_gamma = dot(newest.y, newest.y) / newest.sy;
  // bs[i] = B_i s_i where B_i uses the first i pairs.
  std::vector<std::vector<double>> bs;
  std::vector<double> sbs;
  auto apply_partial = [&](std::span<const double> x, std::size_t upto, std::span<double> res) {
    for (std::size_t k = 0; k < x.size(); ++k) res[k] = inv_gamma * x[k];
    for (std::size_t j = 0; j < upto; ++j) {
      axpy(-dot(bs[j], x) / sbs[j], bs[j], res);
      axpy(dot(pairs_[j].y, x) / pairs_[j].sy, pairs_[j].y, res);
    }
  };
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    std::vector<double> b(v.size());
    apply_partial(pairs_[i].s, i, b);
    sbs.push_back(dot(pairs_[i].s, b));
    bs.push_back(std::move(b));
  }
  apply_partial(v, pairs_.size(), out);
}

std::string to_string(CgStatus s) {
  switch (s) {
    case CgStatus::Interior: return "interior";
    case CgStatus::Boundary: return "boundary";
    case CgStatus::NegativeCurvature: return "negative_curvature";
    case CgStatus::MaxIters: return "max_iters";
  }
  return "unknown";
}

std::string to_string(TrStatus s) {
  switch (s) {
    case TrStatus::GradientTolerance: return "gradient_tolerance";
    case TrStatus::StepTolerance: return "step_tolerance";
    case TrStatus::MaxSteps: return "max_steps";
    case TrStatus::RadiusCollapse: return "radius_collapse";
  }
  return "unknown";
}

CgResult steihaug_cg(const LinearOperator& hessian, std::span<const double> grad, double radius,
                     const LinearOperator& precond, const CgTolerances& tol) {
  if (!(radius > 0.0)) throw std::invalid_argument("steihaug_cg: radius must be positive");
  if (!all_finite(grad)) throw std::invalid_argument("steihaug_cg: non-finite gradient");
  const std::size_t n = grad.size();
  CgResult res;
  res.step.assign(n, 0.0);
  std::vector<double> r(grad.begin(), grad.end());  // model gradient g + H s
  std::vector<double> z(n), p(n), hp(n), hs(n, 0.0);
  auto apply_precond = [&](std::span<const double> in, std::span<double> out) {
    if (precond) {
      precond(in, out);
    } else {
      std::copy(in.begin(), in.end(), out.begin());
    }
  };
  const double g_norm = norm2(grad);
  const double stop = std::min(tol.abs_tol, tol.rel_tol * g_norm);
  if (g_norm == 0.0) return res;

  apply_precond(r, z);
  double rz = dot(r, z);
  if (!(rz > 0.0)) throw std::runtime_error("steihaug_cg: preconditioner not positive definite");
  for (std::size_t i = 0; i < n; ++i) p[i] = -z[i];
  double ss = 0.0;  // s'Ms
  double sp = 0.0;  // s'Mp
  double pp = rz;   // p'Mp

  auto finish = [&](CgStatus status) {
    res.status = status;
    res.step_norm_m = std::sqrt(std::max(0.0, ss));
    // m(0) - m(s) = -(g's + s'Hs/2)
    res.predicted_reduction = -(dot(grad, res.step) + 0.5 * dot(res.step, hs));
    return res;
  };

  for (int it = 0; it < tol.max_iters; ++it) {
    hessian(p, hp);
    if (!all_finite(hp)) throw std::runtime_error("steihaug_cg: non-finite Hessian-vector product");
    const double kappa = dot(p, hp);
    if (it == 0) {
      // Cauchy point along p = -M^{-1} g in the M-norm ball: model is tau rz - tau^2 kappa / 2.
      const double tau_max = radius / std::sqrt(pp);
      const double tau = kappa > 0.0 ? std::min(rz / kappa, tau_max) : tau_max;
      res.cauchy_reduction = tau * rz - 0.5 * tau * tau * kappa;
    }
    res.iterations = it + 1;
    if (kappa <= 0.0) {
      const double tau = boundary_tau(ss, sp, pp, radius);
      axpy(tau, p, res.step);
      axpy(tau, hp, hs);
      ss = radius * radius;
      return finish(CgStatus::NegativeCurvature);
    }
    const double alpha = rz / kappa;
    const double ss_next = ss + 2.0 * alpha * sp + alpha * alpha * pp;
    if (ss_next >= radius * radius) {
      const double tau = boundary_tau(ss, sp, pp, radius);
      axpy(tau, p, res.step);
      axpy(tau, hp, hs);
      ss = radius * radius;
      return finish(CgStatus::Boundary);
    }
    axpy(alpha, p, res.step);
    axpy(alpha, hp, hs);
    axpy(alpha, hp, r);
    ss = ss_next;
    if (norm2(r) <= stop) return finish(CgStatus::Interior);
    apply_precond(r, z);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = -z[i] + beta * p[i];
    sp = beta * (sp + alpha * pp);
    pp = rz + beta * beta * pp;
  }
  return finish(CgStatus::MaxIters);
}

void TrustRegionConfig::validate() const {
  if (max_newton_steps < 0) throw std::invalid_argument("trust_region.max_newton_steps must be >= 0");
  if (!(grad_tol > 0.0) || !(step_tol > 0.0) || !(cg.abs_tol > 0.0) || !(cg.rel_tol > 0.0)) {
    throw std::invalid_argument("trust_region tolerances must be positive");
  }
  if (cg.max_iters <= 0) throw std::invalid_argument("trust_region.cg_max_iters must be positive");
  if (!(radius_init > 0.0) || !(radius_max >= radius_init)) {
    throw std::invalid_argument("trust_region radii must satisfy 0 < radius_init <= radius_max");
  }
  if (!(eta_accept > 0.0 && eta_accept < 1.0)) throw std::invalid_argument("eta_accept must lie in (0, 1)");
  if (!(shrink > 0.0 && shrink < 1.0) || !(grow > 1.0)) {
    throw std::invalid_argument("trust_region requires shrink < 1 < grow");
  }
}

TrResult trust_region_run(const DiffObjective& obj, std::vector<double> theta,
                          const TrustRegionConfig& cfg, const AcceptCallback& on_accept) {
  cfg.validate();
  const std::size_t n = obj.parameter_count();
  if (theta.size() != n) throw std::invalid_argument("trust_region_run: parameter length");
  if (!all_finite(theta)) throw std::invalid_argument("trust_region_run: non-finite initial parameters");

  TrResult res;
  std::vector<double> grad(n), trial(n), trial_grad(n), y(n);
  double loss = obj.value_grad(theta, grad);
  if (!std::isfinite(loss)) throw std::runtime_error("trust region: non-finite initial loss");
  double radius = cfg.radius_init;
  LbfgsState lbfgs(cfg.lbfgs_memory);
  res.status = TrStatus::MaxSteps;

  for (int it = 0;; ++it) {
    const double g_norm = norm2(grad);
    if (g_norm <= cfg.grad_tol) {
      res.status = TrStatus::GradientTolerance;
      break;
    }
    if (it >= cfg.max_newton_steps) {
      res.status = TrStatus::MaxSteps;
      break;
    }
    const LinearOperator hess = [&](std::span<const double> v, std::span<double> out) {
      obj.hvp(theta, v, out);
    };
    LinearOperator precond;
    if (cfg.precondition && lbfgs.size() > 0) {
      precond = [&](std::span<const double> v, std::span<double> out) { lbfgs.apply_inverse(v, out); };
    }
    const CgResult cg = steihaug_cg(hess, grad, radius, precond, cfg.cg);

    for (std::size_t i = 0; i < n; ++i) trial[i] = theta[i] + cg.step[i];
    const double trial_loss = obj.value_grad(trial, trial_grad);
    const double actual = loss - trial_loss;
    const double rho = std::isfinite(trial_loss) && cg.predicted_reduction > 0.0
                           ? actual / cg.predicted_reduction
                           : -1.0;

    TrIteration rec;
    rec.iteration = it;
    rec.loss = loss;
    rec.grad_norm = g_norm;
    rec.radius = radius;
    rec.rho = rho;
    rec.cg_status = cg.status;
    rec.cg_iterations = cg.iterations;
    rec.step_norm = norm2(cg.step);
    rec.step_norm_m = cg.step_norm_m;
    rec.predicted = cg.predicted_reduction;
    rec.cauchy = cg.cauchy_reduction;
    rec.trial_loss = trial_loss;
    rec.accepted = rho > cfg.eta_accept;
    res.history.push_back(rec);
    res.iterations = it + 1;

    const bool hit_boundary =
        cg.status == CgStatus::Boundary || cg.status == CgStatus::NegativeCurvature;
    if (rho < cfg.shrink_below) {
      radius *= cfg.shrink;
    } else if (rho > cfg.grow_above && hit_boundary) {
      radius = std::min(cfg.grow * radius, cfg.radius_max);
    }

    if (rec.accepted) {
      for (std::size_t i = 0; i < n; ++i) y[i] = trial_grad[i] - grad[i];
      lbfgs.update(cg.step, y);
      theta.swap(trial);
      grad.swap(trial_grad);
      loss = trial_loss;
      ++res.accepted;
      if (on_accept) on_accept(it, theta, loss);
      if (rec.step_norm <= cfg.step_tol) {
        res.status = TrStatus::StepTolerance;
        res.iterations = it + 1;
        break;
      }
    }

    if (radius < 1e-12) {
      if (lbfgs.size() == 0) {
        res.status = TrStatus::RadiusCollapse;
        break;
      }
      lbfgs.clear();
      radius = cfg.radius_init;
    }
  }
  res.theta = std::move(theta);
  res.loss = loss;
  res.grad_norm = norm2(grad);
  return res;
}

// ---------------------------------------------------------------------------

double ErrorProbe::rel_l2(std::span<const double> theta) const {
  const auto pred = predictor_->predict(theta);
  return relative_error(pred, truth_->values, truth_->weights, Norm::L2);
}

double ErrorProbe::rel_linf(std::span<const double> theta) const {
  const auto pred = predictor_->predict(theta);
  return relative_error(pred, truth_->values, truth_->weights, Norm::Linf);
}

TrainRecord train_pipeline(const DiffObjective& obj, std::vector<double> theta0,
                           const ErrorProbe& validation, const ErrorProbe& test,
                           const AdamConfig& adam, const TrustRegionConfig& tr) {
  adam.validate();
  tr.validate();
  const auto started = std::chrono::steady_clock::now();
  TrainRecord rec;
  rec.best_val_err = std::numeric_limits<double>::infinity();

  auto observe = [&](const char* phase, int step, std::span<const double> theta, double loss) {
    const double val = validation.rel_l2(theta);
    const double tst = test.rel_l2(theta);
    rec.checkpoints.push_back({phase, step, loss, val, tst});
    // NaN validation errors never become the best checkpoint.
    if (val < rec.best_val_err) {
      rec.best_val_err = val;
      rec.best_theta.assign(theta.begin(), theta.end());
    }
  };

  std::vector<double> theta = std::move(theta0);
  if (adam.epochs > 0) {
    auto res = adam_run(obj, std::move(theta), adam, [&](int epoch, std::span<const double> t, double loss) {
      observe(epoch == 0 ? "init" : "adam", epoch, t, loss);
    });
    theta = std::move(res.theta);
    rec.adam_epochs = res.epochs;
  } else {
    observe("init", 0, theta, obj.value(theta));
  }

  auto tr_res = trust_region_run(obj, std::move(theta), tr, [&](int it, std::span<const double> t, double loss) {
    observe("newton", it + 1, t, loss);
  });
  rec.newton_steps = tr_res.iterations;
  rec.tr_status = tr_res.status;
  rec.final_train_loss = tr_res.loss;

  if (rec.best_theta.empty()) throw std::runtime_error("training produced no finite validation error");
  rec.test_rel_l2 = test.rel_l2(rec.best_theta);
  rec.test_rel_linf = test.rel_linf(rec.best_theta);
  rec.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return rec;
}

}  // namespace supn
