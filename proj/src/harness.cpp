#include "supn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>
#include <tuple>

#include "supn/init.hpp"
#include "supn/projection.hpp"

namespace supn {

using json = nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Count without the SUPN outer coefficients, i.e. N|Lambda|.
std::size_t inner_count(const Architecture& a, std::size_t p) {
  return a.family == ModelFamily::Supn ? p - a.width : p;
}

std::string secs(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

auto arch_key(const Architecture& a, std::size_t p) {
  return std::make_tuple(static_cast<int>(a.family), p, a.label());
}

}  // namespace

ProblemData make_problem(const TargetFunction& f, const GridPrescription& grids) {
  const std::size_t d = f.dimension();
  return {f, make_dataset(f, build_grid(grids.train, d)), make_dataset(f, build_grid(grids.validation, d)),
          make_dataset(f, build_grid(grids.test, d))};
}

MetricReport run_model(const Architecture& arch, std::uint64_t seed, const ProblemData& data,
                       const AdamConfig& adam, const TrustRegionConfig& tr) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t dim = data.target.dimension();
  MetricReport rep;
  rep.arch = arch;
  rep.seed = seed;
  try {
    rep.parameter_count = arch.parameter_count(dim);
    auto take = [&](const TrainRecord& rec) {
      rep.rel_l2 = rec.test_rel_l2;
      rep.rel_linf = rec.test_rel_linf;
      rep.adam_epochs = rec.adam_epochs;
      rep.newton_steps = rec.newton_steps;
      rep.tr_status = to_string(rec.tr_status);
      rep.checkpoints = rec.checkpoints;
      rep.theta = rec.best_theta;
    };
    switch (arch.family) {
      case ModelFamily::Projection: {
        const auto fit = fit_projection(data.train, arch.polynomial_set(dim));
        const auto err = relative_errors(eval_surrogate(fit, data.test.points), data.test);
        rep.rel_l2 = err.rel_l2;
        rep.rel_linf = err.rel_linf;
        rep.theta = fit.coefficients;
        break;
      }
      case ModelFamily::Supn: {
        const auto set = arch.polynomial_set(dim);
        SupnObjective obj(set, arch.width, data.train);
        SupnPredictor val(set, arch.width, data.validation.points);
        SupnPredictor tst(set, arch.width, data.test.points);
        auto theta0 = kaiming_uniform_init(supn_param_blocks(set.size(), arch.width), seed);
        take(train_pipeline(obj, std::move(theta0), ErrorProbe(val, data.validation), ErrorProbe(tst, data.test),
                            adam, tr));
        break;
      }
      case ModelFamily::Mlp: {
        const MlpShape shape{dim, arch.width, arch.depth};
        MlpObjective obj(shape, data.train);
        MlpPredictor val(shape, data.validation.points);
        MlpPredictor tst(shape, data.test.points);
        auto theta0 = kaiming_uniform_init(mlp_param_blocks(shape), seed);
        take(train_pipeline(obj, std::move(theta0), ErrorProbe(val, data.validation), ErrorProbe(tst, data.test),
                            adam, tr));
        break;
      }
    }
    if (!std::isfinite(rep.rel_l2) || !std::isfinite(rep.rel_linf)) throw std::runtime_error("non-finite test error");
  } catch (const std::exception& e) {
    rep.failure = e.what();
    if (rep.failure.empty()) rep.failure = "unknown error";
    rep.rel_l2 = kNaN;
    rep.rel_linf = kNaN;
    rep.theta.clear();
  }
  rep.wall_s = seconds_since(t0);
  return rep;
}

std::size_t worker_count(std::size_t tasks) {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SUPN_LAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) n = static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::min(n, tasks));
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = worker_count(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<ArchSummary> summarize_runs(const std::vector<MetricReport>& runs) {
  std::map<std::tuple<int, std::size_t, std::string>, std::vector<const MetricReport*>> groups;
  for (const auto& r : runs) groups[arch_key(r.arch, r.parameter_count)].push_back(&r);
  std::vector<ArchSummary> out;
  for (const auto& [key, members] : groups) {
    std::vector<double> l2, linf;
    for (const auto* r : members) {
      l2.push_back(r->rel_l2);
      linf.push_back(r->rel_linf);
    }
    out.push_back({members.front()->arch, members.front()->parameter_count, summarize(l2), summarize(linf)});
  }
  return out;
}

SweepResult best_approx_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.architectures.empty()) throw ConfigError("field 'models': ladder is empty");
  const ProblemData data = make_problem(parse_target(cfg.target), cfg.resolved_grids());
  struct Task {
    std::size_t arch;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t a = 0; a < cfg.architectures.size(); ++a)
    for (auto s : cfg.seeds) tasks.push_back({a, s});
  SweepResult res;
  res.runs.resize(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t i) {
    res.runs[i] = run_model(cfg.architectures[tasks[i].arch], tasks[i].seed, data, cfg.adam, cfg.trust_region);
  });
  std::sort(res.runs.begin(), res.runs.end(), [](const MetricReport& a, const MetricReport& b) {
    return std::tuple_cat(arch_key(a.arch, a.parameter_count), std::make_tuple(a.seed)) <
           std::tuple_cat(arch_key(b.arch, b.parameter_count), std::make_tuple(b.seed));
  });
  res.summary = summarize_runs(res.runs);
  return res;
}

void write_runs_csv(std::ostream& os, const std::vector<MetricReport>& runs) {
  os << kCsvVersionLine << '\n' << "P,family,seed,rel_l2,rel_linf,wall_s\n";
  for (const auto& r : runs) {
    os << r.parameter_count << ',' << to_string(r.arch.family) << ',' << r.seed << ',' << num(r.rel_l2) << ','
       << num(r.rel_linf) << ',' << secs(r.wall_s) << '\n';
  }
}

void write_summary_csv(std::ostream& os, const std::vector<ArchSummary>& summary) {
  os << kCsvVersionLine << '\n'
     << "P,P_inner,family,architecture,runs,failed,mean_rel_l2,std_rel_l2,mean_rel_linf,std_rel_linf\n";
  for (const auto& s : summary) {
    os << s.parameter_count << ',' << inner_count(s.arch, s.parameter_count) << ',' << to_string(s.arch.family)
       << ",\"" << s.arch.label() << "\","
       << s.rel_l2.count << ',' << s.rel_l2.failed << ',' << num(s.rel_l2.mean) << ',' << num(s.rel_l2.stddev) << ','
       << num(s.rel_linf.mean) << ',' << num(s.rel_linf.stddev) << '\n';
  }
}

void write_runs_jsonl(std::ostream& os, const std::vector<MetricReport>& runs, std::uint64_t cfg_hash) {
  for (const auto& r : runs) {
    json cps = json::array();
    for (const auto& c : r.checkpoints) {
      cps.push_back({{"phase", c.phase}, {"step", c.step}, {"train_loss", c.train_loss}, {"val_err", c.val_err},
                     {"test_err", c.test_err}});
    }
    json j = {{"config_hash", hex64(cfg_hash)},
              {"family", to_string(r.arch.family)},
              {"architecture", r.arch.label()},
              {"P", r.parameter_count},
              {"P_inner", inner_count(r.arch, r.parameter_count)},
              {"seed", r.seed},
              {"rel_l2", r.rel_l2},
              {"rel_linf", r.rel_linf},
              {"adam_epochs", r.adam_epochs},
              {"newton_steps", r.newton_steps},
              {"tr_status", r.tr_status},
              {"failure", r.failure},
              {"checkpoints", cps},
              {"wall_s", r.wall_s}};
    os << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------

SamplingResult sampling_study(const ExperimentConfig& cfg) {
  cfg.validate();
  const TargetFunction f = parse_target(cfg.target);
  if (f.dimension() != 1) throw ConfigError("field 'target': the sampling study is one-dimensional");
  if (cfg.sampling.tiers.empty()) throw ConfigError("field 'sampling.tiers': must not be empty");
  const GridPrescription grids = cfg.resolved_grids();
  const ProblemData base = make_problem(f, grids);

  struct Task {
    SamplingRow row;
    GridSpec grid;
  };
  std::vector<Task> tasks;
  for (const auto& tier : cfg.sampling.tiers) {
    const std::size_t p = tier.arch.parameter_count(1);
    auto add = [&](const std::string& sampler, double ratio, const GridSpec& g, int realization) {
      for (auto seed : cfg.seeds) {
        Task t;
        t.row.tier = tier.name;
        t.row.arch = tier.arch;
        t.row.parameter_count = p;
        t.row.sampler = sampler;
        t.row.ratio = ratio;
        t.row.samples = g.count;
        t.row.realization = realization;
        t.row.seed = seed;
        t.grid = g;
        tasks.push_back(t);
      }
    };
    if (cfg.sampling.include_full) {
      add("full", static_cast<double>(grids.train.count) / static_cast<double>(p), grids.train, 0);
    }
    for (double ratio : cfg.sampling.ratios) {
      const std::size_t k = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(ratio * static_cast<double>(p))));
      for (auto kind : cfg.sampling.samplers) {
        const int reps = kind == GridSpec::Kind::Uniform ? cfg.sampling.realizations : 1;
        for (int r = 0; r < reps; ++r) {
          GridSpec g{kind, k, kind == GridSpec::Kind::Uniform ? static_cast<std::uint64_t>(r + 1) : 1};
          add(to_string(kind), ratio, g, r);
        }
      }
    }
  }

  SamplingResult res;
  res.rows.resize(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t i) {
    const Task& t = tasks[i];
    SamplingRow row = t.row;
    try {
      ProblemData data{base.target, make_dataset(f, build_grid(t.grid, 1)), base.validation, base.test};
      const auto rep = run_model(row.arch, row.seed, data, cfg.adam, cfg.trust_region);
      row.rel_l2 = rep.rel_l2;
      row.rel_linf = rep.rel_linf;
      row.wall_s = rep.wall_s;
      row.failure = rep.failure;
    } catch (const std::exception& e) {
      row.rel_l2 = row.rel_linf = kNaN;
      row.failure = e.what();
    }
    res.rows[i] = row;
  });
  auto key = [](const SamplingRow& r) {
    return std::make_tuple(r.tier, r.sampler, r.samples, r.realization, r.seed);
  };
  std::sort(res.rows.begin(), res.rows.end(), [&](const SamplingRow& a, const SamplingRow& b) { return key(a) < key(b); });

  std::map<std::tuple<std::string, std::string, std::size_t>, std::vector<const SamplingRow*>> groups;
  for (const auto& r : res.rows) groups[{r.tier, r.sampler, r.samples}].push_back(&r);
  for (const auto& [k, members] : groups) {
    std::vector<double> errs;
    for (const auto* r : members) errs.push_back(r->rel_l2);
    const Summary s = summarize(errs);
    res.summary.push_back({std::get<0>(k), std::get<1>(k), members.front()->ratio, std::get<2>(k), s.count, s.failed,
                           s.mean, percentile(errs, 0.1), percentile(errs, 0.9)});
  }
  return res;
}

void write_sampling_csv(std::ostream& os, const std::vector<SamplingRow>& rows) {
  os << kCsvVersionLine << '\n' << "tier,architecture,P,sampler,ratio,K,realization,seed,rel_l2,rel_linf,wall_s\n";
  for (const auto& r : rows) {
    os << r.tier << ",\"" << r.arch.label() << "\"," << r.parameter_count << ',' << r.sampler << ',' << num(r.ratio)
       << ',' << r.samples << ',' << r.realization << ',' << r.seed << ',' << num(r.rel_l2) << ',' << num(r.rel_linf)
       << ',' << secs(r.wall_s) << '\n';
  }
}

void write_sampling_summary_csv(std::ostream& os, const std::vector<SamplingSummaryRow>& rows) {
  os << kCsvVersionLine << '\n' << "tier,sampler,ratio,K,runs,failed,mean_rel_l2,p10_rel_l2,p90_rel_l2\n";
  for (const auto& r : rows) {
    os << r.tier << ',' << r.sampler << ',' << num(r.ratio) << ',' << r.samples << ',' << r.count << ',' << r.failed
       << ',' << num(r.mean) << ',' << num(r.p10) << ',' << num(r.p90) << '\n';
  }
}

// ---------------------------------------------------------------------------

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: length mismatch");
  const std::size_t n = x.size();
  if (n < 4) throw std::domain_error("fit_line: at least 4 points are required, got " + std::to_string(n));
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::domain_error("fit_line: abscissae are all equal");
  LineFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    sse += e * e;
  }
  fit.slope_stderr = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

LineFit fit_convergence(const std::vector<double>& params, const std::vector<double>& errors, bool log_params,
                        double floor) {
  if (params.size() != errors.size()) throw std::invalid_argument("fit_convergence: length mismatch");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!std::isfinite(errors[i]) || errors[i] <= floor || !(params[i] > 0.0)) continue;
    x.push_back(log_params ? std::log(params[i]) : params[i]);
    y.push_back(std::log(errors[i]));
  }
  if (x.size() < 4) {
    throw std::domain_error("insufficient ladder points above the error floor for a rate fit (" +
                            std::to_string(x.size()) + " < 4)");
  }
  return fit_line(x, y);
}

RungeResult runge_rate_study(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.runge.c_values.empty()) throw ConfigError("field 'runge.c': must not be empty");
  RungeResult res;
  const GridPrescription grids = grids_for_dimension(1, cfg.desk_scale);
  const GridPrescription g = cfg.grids ? *cfg.grids : grids;

  struct Task {
    std::size_t c_index;
    Architecture arch;
    std::uint64_t seed;
  };
  std::vector<ProblemData> problems;
  for (double c : cfg.runge.c_values) problems.push_back(make_problem(make_target("runge", {{"c", c}}), g));

  std::vector<Task> tasks;
  for (std::size_t ci = 0; ci < problems.size(); ++ci) {
    for (int deg : cfg.runge.projection_degrees) {
      Architecture a;
      a.family = ModelFamily::Projection;
      a.level = deg;
      tasks.push_back({ci, a, 0});
    }
    for (const auto& a : cfg.runge.supn)
      for (auto s : cfg.seeds) tasks.push_back({ci, a, s});
  }
  std::vector<MetricReport> runs(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t i) {
    runs[i] = run_model(tasks[i].arch, tasks[i].seed, problems[tasks[i].c_index], cfg.adam, cfg.trust_region);
  });

  for (std::size_t ci = 0; ci < problems.size(); ++ci) {
    const double c = cfg.runge.c_values[ci];
    std::vector<MetricReport> mine;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (tasks[i].c_index == ci) mine.push_back(runs[i]);
    }
    for (const auto& s : summarize_runs(mine)) {
      const bool proj = s.arch.family == ModelFamily::Projection;
      res.points.push_back({c, proj ? "projection" : "supn", s.arch.label(), s.parameter_count, s.rel_l2.mean,
                            s.rel_l2.failed});
    }
    for (const char* method : {"projection", "supn"}) {
      std::vector<double> p, e;
      for (const auto& pt : res.points) {
        if (pt.c == c && pt.method == method) {
          p.push_back(static_cast<double>(pt.parameter_count));
          e.push_back(pt.rel_l2);
        }
      }
      const bool proj = std::string(method) == "projection";
      if (p.empty()) continue;
      RungeFit fit{c, method, proj ? "exponential" : "algebraic", {}, ""};
      try {
        fit.fit = fit_convergence(p, e, !proj);
      } catch (const std::exception& ex) {
        fit.failure = ex.what();
      }
      res.fits.push_back(fit);
    }
    res.runs.insert(res.runs.end(), mine.begin(), mine.end());
  }
  return res;
}

void write_runge_points_csv(std::ostream& os, const std::vector<RungePoint>& points) {
  os << kCsvVersionLine << '\n' << "c,method,architecture,P,mean_rel_l2,failed\n";
  for (const auto& p : points) {
    os << num(p.c) << ',' << p.method << ",\"" << p.label << "\"," << p.parameter_count << ',' << num(p.rel_l2) << ','
       << p.failed << '\n';
  }
}

void write_runge_fits_csv(std::ostream& os, const std::vector<RungeFit>& fits) {
  os << kCsvVersionLine << '\n' << "c,method,model,points,slope,slope_stderr,intercept,r_squared,failure\n";
  for (const auto& f : fits) {
    os << num(f.c) << ',' << f.method << ',' << f.model << ',' << f.fit.points << ',' << num(f.fit.slope) << ','
       << num(f.fit.slope_stderr) << ',' << num(f.fit.intercept) << ',' << num(f.fit.r_squared) << ",\"" << f.failure
       << "\"\n";
  }
}

// ---------------------------------------------------------------------------

std::vector<ConstructiveRow> constructive_check(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ConstructiveRow> rows;
  for (const auto& spec : cfg.constructive.targets) {
    const TargetFunction f = parse_target(spec);
    const std::size_t dim = f.dimension();
    QuadratureRule eval = gauss_legendre_rule(cfg.constructive.eval_nodes);
    if (dim > 1) eval = tensor_quadrature(eval, dim);
    const Dataset eval_data = make_dataset(f, eval);
    std::optional<ProblemData> problem;
    if (cfg.constructive.train) problem = make_problem(f, grids_for_dimension(dim, cfg.desk_scale));

    for (int degree : cfg.constructive.degrees) {
      const MultiIndexSet set = dim == 1 ? MultiIndexSet::univariate(degree) : MultiIndexSet::total_degree(degree, dim);
      for (double delta : cfg.constructive.deltas) {
        const ConstructiveInit ci = constructive_supn_l2(f, set, delta, Measure::Lebesgue, eval);
        ConstructiveRow row;
        row.target = f.spec();
        row.degree = degree;
        row.delta = delta;
        row.R = ci.R;
        row.S = ci.S;
        row.exact = ci.exact;
        row.eps_rel = ci.eps_lambda / ci.f_norm;
        row.bound = ci.exact ? delta / ci.f_norm : (1.0 + delta) * row.eps_rel;
        const auto pred = supn_batch_forward(ci.params, eval_data.points);
        row.rel_l2 = relative_error(pred, eval_data.values, eval_data.weights, Norm::L2);
        row.pass = row.rel_l2 <= row.bound + 1e-9;
        if (problem && ci.R > 0.0) {
          SupnObjective obj(set, 1, problem->train);
          SupnPredictor val(set, 1, problem->validation.points);
          SupnPredictor tst(set, 1, problem->test.points);
          const ErrorProbe test_probe(tst, problem->test);
          const auto theta0 = ci.params.flatten();
          row.trained = true;
          row.init_test_err = test_probe.rel_l2(theta0);
          row.init_train_loss = obj.value(theta0);
          try {
            const auto rec = train_pipeline(obj, theta0, ErrorProbe(val, problem->validation), test_probe, cfg.adam,
                                            cfg.trust_region);
            row.trained_test_err = rec.test_rel_l2;
            row.trained_train_loss = rec.final_train_loss;
          } catch (const std::exception&) {
            row.trained_test_err = row.trained_train_loss = kNaN;
          }
          row.train_ok = row.trained_train_loss <= row.init_train_loss;
          row.test_ok = row.trained_test_err <= row.init_test_err * (1.0 + 1e-9) + 1e-15;
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_constructive_csv(std::ostream& os, const std::vector<ConstructiveRow>& rows) {
  os << kCsvVersionLine << '\n'
     << "target,degree,delta,eps_rel,bound,rel_l2,R,S,exact,pass,init_train_loss,trained_train_loss,init_test_err,"
        "trained_test_err,train_ok,test_ok\n";
  for (const auto& r : rows) {
    os << '"' << r.target << "\"," << r.degree << ',' << num(r.delta) << ',' << num(r.eps_rel) << ',' << num(r.bound)
       << ',' << num(r.rel_l2) << ',' << num(r.R) << ',' << num(r.S) << ',' << (r.exact ? 1 : 0) << ','
       << (r.pass ? 1 : 0) << ',' << (r.trained ? num(r.init_train_loss) : "") << ','
       << (r.trained ? num(r.trained_train_loss) : "") << ',' << (r.trained ? num(r.init_test_err) : "") << ','
       << (r.trained ? num(r.trained_test_err) : "") << ',' << (r.train_ok ? 1 : 0) << ',' << (r.test_ok ? 1 : 0)
       << '\n';
  }
}

// ---------------------------------------------------------------------------

json model_to_json(const Architecture& arch, std::size_t dimension, const std::vector<double>& theta) {
  json j;
  j["family"] = to_string(arch.family);
  j["D"] = dimension;
  j["N"] = arch.width;
  if (arch.family == ModelFamily::Mlp) {
    j["depth"] = arch.depth;
    j["index_set"] = nullptr;
  } else {
    const auto set = arch.polynomial_set(dimension);
    j["index_set"] = {{"kind", dimension == 1 ? std::string("univariate") : to_string(arch.index_set)},
                      {"level", arch.level},
                      {"indices", set.indices()}};
  }
  j["theta"] = theta;
  return j;
}

SavedModel model_from_json(const json& j) {
  try {
    SavedModel m;
    m.arch.family = parse_family(j.at("family").get<std::string>());
    m.dimension = j.at("D").get<std::size_t>();
    m.arch.width = j.at("N").get<std::size_t>();
    if (m.arch.family == ModelFamily::Mlp) {
      m.arch.depth = j.at("depth").get<std::size_t>();
    } else {
      const auto& is = j.at("index_set");
      const auto kind = is.at("kind").get<std::string>();
      if (kind != "univariate") m.arch.index_set = parse_index_set_kind(kind);
      m.arch.level = is.at("level").get<int>();
      const auto indices = is.at("indices").get<std::vector<MultiIndex>>();
      if (!(MultiIndexSet(m.dimension, indices) == m.arch.polynomial_set(m.dimension))) {
        throw std::invalid_argument("index_set.indices disagree with kind/level");
      }
    }
    m.theta = j.at("theta").get<std::vector<double>>();
    const std::size_t expected = m.arch.parameter_count(m.dimension);
    if (m.theta.size() != expected) {
      throw std::invalid_argument("theta has " + std::to_string(m.theta.size()) + " entries, expected " +
                                  std::to_string(expected));
    }
    return m;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("model JSON: ") + e.what());
  }
}

std::vector<double> predict_saved(const SavedModel& model, std::span<const double> points) {
  switch (model.arch.family) {
    case ModelFamily::Supn: {
      const auto set = model.arch.polynomial_set(model.dimension);
      return supn_batch_forward(SupnParams::unflatten(model.theta, set, model.arch.width), points);
    }
    case ModelFamily::Mlp:
      return mlp_batch_forward(MlpParams(MlpShape{model.dimension, model.arch.width, model.arch.depth}, model.theta),
                               points);
    case ModelFamily::Projection:
      return eval_surrogate({model.arch.polynomial_set(model.dimension), PolyFamily::Legendre, model.theta}, points);
  }
  return {};
}

}  // namespace supn
