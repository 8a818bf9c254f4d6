#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "supn/harness.hpp"
#include "supn/metrics.hpp"

using namespace supn;
namespace fs = std::filesystem;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "cfg.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string strip_wall(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto cut = line.rfind(',');
    out << (cut == std::string::npos ? line : line.substr(0, cut)) << '\n';
  }
  return out.str();
}

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.target = "f1";
  cfg.grids = GridPrescription{{GridSpec::Kind::GaussLegendre, 120}, {GridSpec::Kind::Equidistant, 151},
                               {GridSpec::Kind::Equidistant, 301}};
  cfg.adam.epochs = 200;
  cfg.trust_region.max_newton_steps = 40;
  cfg.seeds = {0, 1};
  return cfg;
}

struct Run {
  int code;
  std::string output;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(SUPN_LAB_BIN) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) out += buf;
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("supn_harness_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("relative error metric") {
  const std::vector<double> truth{1.0, -2.0, 3.0, 0.5};
  const std::vector<double> w(4, 0.25);
  CHECK(relative_error(truth, truth, w, Norm::L2) == 0.0);
  CHECK(relative_error(truth, truth, w, Norm::Linf) == 0.0);
  const std::vector<double> zero(4, 0.0);
  CHECK(relative_error(zero, truth, w, Norm::L2) == 1.0);
  CHECK(relative_error(zero, truth, w, Norm::Linf) == 1.0);
  const double eps = 1e-3;
  std::vector<double> shifted = truth;
  for (double& v : shifted) v += eps;
  const std::vector<double> ones(4, 1.0);
  double tn = 0.0;
  for (double v : truth) tn += v * v;
  CHECK(relative_error(shifted, truth, ones, Norm::L2) == doctest::Approx(eps * 2.0 / std::sqrt(tn)).epsilon(1e-12));
  CHECK_THROWS(relative_error(truth, zero, w, Norm::L2));
  CHECK_THROWS(relative_error(std::vector<double>{1.0}, truth, w, Norm::L2));
}

TEST_CASE("summaries skip failures") {
  const std::vector<double> v{1.0, 3.0, NAN, 5.0};
  const auto s = summarize(v);
  CHECK(s.count == 3);
  CHECK(s.failed == 1);
  CHECK(s.mean == doctest::Approx(3.0));
  CHECK(s.stddev == doctest::Approx(2.0));
  CHECK(summarize(std::vector<double>{4.0}).stddev == 0.0);
  CHECK(percentile({1, 2, 3, 4, 5}, 0.1) == doctest::Approx(1.4));
  CHECK(percentile({1, 2, 3, 4, 5}, 0.9) == doctest::Approx(4.6));
}

TEST_CASE("architecture parameter counts and labels") {
  Architecture s{ModelFamily::Supn, 5, 18, 0, IndexSetKind::TotalDegree};
  CHECK(s.parameter_count(1) == 5 * 19 + 5);
  CHECK(s.label() == "supn:N=5,M=18");
  Architecture hc{ModelFamily::Supn, 3, 7, 0, IndexSetKind::HyperbolicCross};
  CHECK(hc.parameter_count(2) == 3 * MultiIndexSet::hyperbolic_cross(7, 2).size() + 3);
  Architecture m{ModelFamily::Mlp, 9, 0, 3, IndexSetKind::TotalDegree};
  CHECK(m.parameter_count(1) == 9 * 3 + 2 * 90);
  Architecture p{ModelFamily::Projection, 0, 10, 0, IndexSetKind::TotalDegree};
  CHECK(p.parameter_count(1) == 11);
  CHECK(parse_family("dnn") == ModelFamily::Mlp);
  CHECK(parse_index_set_kind("hc") == IndexSetKind::HyperbolicCross);
  CHECK_THROWS(parse_family("kan"));
}

TEST_CASE("config parsing and diagnostics") {
  const auto cfg = parse_config(R"({
    "target": "runge:c=10",
    "models": [{"family": "supn", "width": [3, 5], "level": [4, 8]},
               {"family": "mlp", "architectures": [{"width": 4, "depth": 2}]}],
    "seeds": [1, 2],
    "adam": {"epochs": 10},
    "trust_region": {"max_newton_steps": 5}
  })");
  CHECK(cfg.target == "runge:c=10");
  CHECK(cfg.architectures.size() == 5);
  CHECK(cfg.adam.epochs == 10);
  CHECK(cfg.trust_region.max_newton_steps == 5);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2});

  const std::string syntax = config_error("{\n  \"target\": \"f1\",\n  \"seeds\": [1,,2]\n}");
  CHECK(syntax.find("cfg.json:3:") != std::string::npos);

  const std::string unknown = config_error(R"({"adam": {"epochz": 3}})");
  CHECK(unknown.find("adam.epochz") != std::string::npos);

  const std::string dup = config_error(R"({"models": [{"family": "projection", "level": 4}], "seeds": [1, 1]})");
  CHECK(dup.find("seeds") != std::string::npos);

  CHECK(config_error(R"({"models": []})").find("models") != std::string::npos);
  CHECK(config_error(R"({"target": "nope", "models": [{"family": "projection", "level": 4}]})").find("target") !=
        std::string::npos);
  CHECK(config_error(R"({"models": [{"family": "kan", "width": 3}]})").find("family") != std::string::npos);
  CHECK(config_error(R"({"trust_region": {"eta_accept": 2}, "models": [{"family": "projection", "level": 4}]})")
            .find("trust_region") != std::string::npos);
  CHECK(config_error(R"({"max_parameters": 5, "models": [{"family": "supn", "width": 5, "level": 18}]})") != "");
}

TEST_CASE("config hash round trip") {
  const auto a = default_config("sweep", true);
  const auto b = parse_config(config_to_json(a).dump());
  CHECK(config_hash(a) == config_hash(b));
  auto c = a;
  c.seeds = {7};
  CHECK(config_hash(c) != config_hash(a));
  auto d = a;
  d.out_dir = "elsewhere";
  CHECK(config_hash(d) == config_hash(a));
  CHECK(hex64(0xabcULL) == "0000000000000abc");
  for (const char* study : {"train", "project", "sweep", "sampling-study", "runge-rates", "constructive-check"}) {
    CAPTURE(study);
    const auto cfg = default_config(study, true);
    CHECK_NOTHROW(cfg.validate());
    CHECK(config_hash(parse_config(config_to_json(cfg).dump())) == config_hash(cfg));
  }
  for (const auto& arch : default_config("sweep", true).architectures) CHECK(arch.parameter_count(1) <= 500);
}

TEST_CASE("projection sweep is seed independent and csv schema is fixed") {
  auto cfg = tiny_config();
  cfg.seeds = {0, 1, 2};
  for (int level : {4, 8, 16}) cfg.architectures.push_back({ModelFamily::Projection, 0, level, 0, IndexSetKind::TotalDegree});
  const auto res = best_approx_sweep(cfg);
  REQUIRE(res.summary.size() == 3);
  for (const auto& s : res.summary) {
    CHECK(s.rel_l2.count == 3);
    CHECK(s.rel_l2.stddev == 0.0);
  }
  std::ostringstream csv;
  write_runs_csv(csv, res.runs);
  std::istringstream in(csv.str());
  std::string first;
  std::string header;
  std::getline(in, first);
  std::getline(in, header);
  CHECK(first == kCsvVersionLine);
  CHECK(header == "P,family,seed,rel_l2,rel_linf,wall_s");
}

TEST_CASE("trained sweep reproducibility and aggregation") {
  auto cfg = tiny_config();
  cfg.architectures = {{ModelFamily::Supn, 2, 6, 0, IndexSetKind::TotalDegree},
                       {ModelFamily::Mlp, 3, 0, 1, IndexSetKind::TotalDegree}};
  const auto a = best_approx_sweep(cfg);
  const auto b = best_approx_sweep(cfg);
  std::ostringstream ca;
  std::ostringstream cb;
  write_runs_csv(ca, a.runs);
  write_runs_csv(cb, b.runs);
  CHECK(strip_wall(ca.str()) == strip_wall(cb.str()));
  std::ostringstream sa;
  std::ostringstream sb;
  write_summary_csv(sa, a.summary);
  write_summary_csv(sb, b.summary);
  CHECK(sa.str() == sb.str());

  // Every run reports the test error at its validation minimum.
  for (const auto& r : a.runs) {
    REQUIRE(!r.failed());
    REQUIRE(!r.checkpoints.empty());
    const auto best = std::min_element(r.checkpoints.begin(), r.checkpoints.end(),
                                       [](const Checkpoint& x, const Checkpoint& y) { return x.val_err < y.val_err; });
    CHECK(best->test_err == r.rel_l2);
  }

  // Mean and std recomputed from the JSON lines.
  std::ostringstream jl;
  write_runs_jsonl(jl, a.runs, config_hash(cfg));
  std::map<std::string, std::vector<double>> by_arch;
  std::istringstream lines(jl.str());
  std::string line;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["config_hash"] == hex64(config_hash(cfg)));
    by_arch[j["architecture"]].push_back(j["rel_l2"].get<double>());
    if (j["family"] == "supn") CHECK(j["P_inner"].get<std::size_t>() == j["P"].get<std::size_t>() - 2);
  }
  for (const auto& s : a.summary) {
    const auto& v = by_arch.at(s.arch.label());
    const auto re = summarize(v);
    CHECK(re.mean == s.rel_l2.mean);
    CHECK(re.stddev == s.rel_l2.stddev);
    CHECK(s.rel_l2.stddev > 0.0);
  }

  auto single = cfg;
  single.seeds = {3};
  for (const auto& s : best_approx_sweep(single).summary) CHECK(s.rel_l2.stddev == 0.0);
}

TEST_CASE("supn ladder error decreases with parameters on f1") {
  ExperimentConfig cfg = default_config("sweep", true);
  cfg.architectures.clear();
  for (int m : {5, 9, 18, 27}) cfg.architectures.push_back({ModelFamily::Supn, 3, m, 0, IndexSetKind::TotalDegree});
  cfg.seeds = {0};
  const auto res = best_approx_sweep(cfg);
  std::vector<double> err;
  for (const auto& s : res.summary) err.push_back(s.rel_l2.mean);
  REQUIRE(err.size() == 4);
  // Spearman rank correlation between P (already ascending) and error.
  std::vector<double> rank(err.size());
  for (std::size_t i = 0; i < err.size(); ++i) {
    for (double e : err) rank[i] += e < err[i] ? 1.0 : 0.0;
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < err.size(); ++i) d2 += (rank[i] - static_cast<double>(i)) * (rank[i] - static_cast<double>(i));
  const double n = static_cast<double>(err.size());
  CHECK(1.0 - 6.0 * d2 / (n * (n * n - 1.0)) < 0.0);
}

TEST_CASE("failed runs are recorded with NaN errors") {
  auto cfg = tiny_config();
  cfg.target = "f1";
  cfg.seeds = {0};
  cfg.architectures = {{ModelFamily::Supn, 2, 4, 0, IndexSetKind::TotalDegree}};
  const ProblemData data = make_problem(parse_target("f1"), *cfg.grids);
  // Width zero fails inside the run, not at the call site.
  const auto rep = run_model({ModelFamily::Supn, 0, 4, 0, IndexSetKind::TotalDegree}, 0, data, cfg.adam, cfg.trust_region);
  CHECK(rep.failed());
  CHECK(std::isnan(rep.rel_l2));
  std::vector<MetricReport> runs{rep};
  const auto summary = summarize_runs(runs);
  REQUIRE(summary.size() == 1);
  CHECK(summary[0].rel_l2.failed == 1);
  CHECK(summary[0].rel_l2.count == 0);
}

TEST_CASE("sampling study structure") {
  auto cfg = tiny_config();
  cfg.seeds = {0};
  cfg.sampling.tiers = {{"low", {ModelFamily::Supn, 2, 4, 0, IndexSetKind::TotalDegree}}};
  cfg.sampling.ratios = {2.0};
  cfg.sampling.realizations = 3;
  const auto res = sampling_study(cfg);
  const std::size_t p = 2 * 5 + 2;
  std::map<std::string, std::size_t> count;
  for (const auto& r : res.rows) {
    ++count[r.sampler];
    if (r.sampler != "full") CHECK(r.samples == 2 * p);
  }
  CHECK(count["uniform"] == 3);
  CHECK(count["gauss_legendre"] == 1);
  CHECK(count["equidistant"] == 1);
  CHECK(count["full"] == 1);
  for (const auto& s : res.summary) {
    if (s.sampler != "uniform") CHECK(s.p10 == s.p90);
  }
  auto bad = cfg;
  bad.target = "f7";
  CHECK_THROWS_AS(sampling_study(bad), ConfigError);
}

TEST_CASE("convergence fit guards") {
  const std::vector<double> p{10, 20, 40, 80, 160};
  std::vector<double> e;
  for (double x : p) e.push_back(3.0 * std::pow(x, -2.0));
  const auto fit = fit_convergence(p, e, true);
  CHECK(fit.slope == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK(fit.points == 5);

  std::vector<double> spectral;
  for (double x : p) spectral.push_back(std::exp(-0.1 * x));
  CHECK(fit_convergence(p, spectral, false).slope == doctest::Approx(-0.1).epsilon(1e-10));

  // Exact-polynomial targets sit at the floor: no fit.
  const std::vector<double> floor(5, 1e-16);
  CHECK_THROWS_AS(fit_convergence(p, floor, true), std::domain_error);
  CHECK_THROWS(fit_line({1, 2, 3}, {1, 2, 3}));
}

TEST_CASE("runge study projection fit decays spectrally") {
  auto cfg = tiny_config();
  cfg.target = "runge:c=5";
  cfg.runge.c_values = {5.0};
  cfg.runge.projection_degrees = {4, 8, 12, 16, 20};
  cfg.runge.supn.clear();
  const auto res = runge_rate_study(cfg);
  REQUIRE(res.fits.size() == 1);
  CHECK(res.fits[0].failure.empty());
  CHECK(res.fits[0].fit.slope < 0.0);
}

TEST_CASE("saved model round trip") {
  auto cfg = tiny_config();
  const ProblemData data = make_problem(parse_target("f1"), *cfg.grids);
  for (const Architecture& arch : {Architecture{ModelFamily::Supn, 2, 5, 0, IndexSetKind::TotalDegree},
                                   Architecture{ModelFamily::Mlp, 3, 0, 2, IndexSetKind::TotalDegree},
                                   Architecture{ModelFamily::Projection, 0, 7, 0, IndexSetKind::TotalDegree}}) {
    CAPTURE(arch.label());
    const auto rep = run_model(arch, 0, data, cfg.adam, cfg.trust_region);
    REQUIRE(!rep.failed());
    const auto j = model_to_json(arch, 1, rep.theta);
    const auto saved = model_from_json(nlohmann::json::parse(j.dump()));
    CHECK(saved.arch.label() == arch.label());
    CHECK(saved.theta == rep.theta);
    const auto pred = predict_saved(saved, data.test.points);
    CHECK(relative_errors(pred, data.test).rel_l2 == doctest::Approx(rep.rel_l2).epsilon(1e-12));
  }
}

TEST_CASE("cli exit codes and outputs") {
  const fs::path dir = scratch_dir("cli");
  CHECK(run_cli("train --config " + (dir / "missing.json").string()).code == 2);
  CHECK(run_cli("").code == 2);
  CHECK(run_cli("sweep --no-such-flag").code == 2);

  {
    std::ofstream bad(dir / "bad.json");
    bad << "{\n  \"target\": \"f1\",\n  \"seeds\": [1,\n}\n";
  }
  const auto bad = run_cli("sweep --config " + (dir / "bad.json").string());
  CHECK(bad.code == 2);
  CHECK(bad.output.find("bad.json:4:") != std::string::npos);

  {
    std::ofstream cfg(dir / "sweep.json");
    cfg << R"({"target": "f1", "models": [{"family": "supn", "width": 2, "level": 4},
                                        {"family": "projection", "level": [4, 8]}],
              "seeds": [0], "adam": {"epochs": 50}, "trust_region": {"max_newton_steps": 10}})";
  }
  const fs::path out = dir / "out";
  const auto ok = run_cli("sweep --desk-scale --config " + (dir / "sweep.json").string() + " --out " + out.string());
  CHECK(ok.code == 0);
  const std::string csv = slurp(out / "runs.csv");
  CHECK(csv.rfind(std::string(kCsvVersionLine) + "\nP,family,seed,rel_l2,rel_linf,wall_s\n", 0) == 0);
  CHECK(fs::exists(out / "runs_summary.csv"));
  CHECK(fs::exists(out / "runs.jsonl"));
  CHECK(fs::exists(out / "config.json"));

  const auto train = run_cli("train --desk-scale --config " + (dir / "sweep.json").string() + " --seed 1 --out " +
                             (dir / "train").string());
  CHECK(train.code == 0);
  CHECK(fs::exists(dir / "train" / "models"));
  std::size_t models = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "train" / "models")) ++models;
  CHECK(models == 3);

  const auto cc = run_cli("constructive-check --desk-scale --out " + (dir / "cc").string());
  CHECK(cc.code == 0);
  CHECK(cc.output.find("VIOLATED") == std::string::npos);
  CHECK(cc.output.find("TRAIN LOSS ROSE") == std::string::npos);
  fs::remove_all(dir);
}
