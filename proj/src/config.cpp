#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "supn/harness.hpp"

namespace supn {

using json = nlohmann::json;

std::string to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::Supn: return "supn";
    case ModelFamily::Mlp: return "mlp";
    case ModelFamily::Projection: return "projection";
  }
  return "unknown";
}

ModelFamily parse_family(const std::string& name) {
  if (name == "supn") return ModelFamily::Supn;
  if (name == "mlp" || name == "dnn") return ModelFamily::Mlp;
  if (name == "projection") return ModelFamily::Projection;
  throw std::invalid_argument("unknown model family '" + name + "' (expected supn, mlp or projection)");
}

std::string to_string(IndexSetKind k) {
  switch (k) {
    case IndexSetKind::HyperbolicCross: return "hyperbolic_cross";
    case IndexSetKind::TotalDegree: return "total_degree";
    case IndexSetKind::Explicit: return "explicit";
  }
  return "unknown";
}

IndexSetKind parse_index_set_kind(const std::string& name) {
  if (name == "hyperbolic_cross" || name == "hc") return IndexSetKind::HyperbolicCross;
  if (name == "total_degree" || name == "td") return IndexSetKind::TotalDegree;
  throw std::invalid_argument("unknown index set '" + name + "' (expected total_degree or hyperbolic_cross)");
}

MultiIndexSet Architecture::polynomial_set(std::size_t dimension) const {
  if (family == ModelFamily::Mlp) throw std::logic_error("MLP architectures have no index set");
  if (dimension == 1) return MultiIndexSet::univariate(level);
  if (index_set == IndexSetKind::HyperbolicCross) return MultiIndexSet::hyperbolic_cross(level, dimension);
  return MultiIndexSet::total_degree(level, dimension);
}

std::size_t Architecture::parameter_count(std::size_t dimension) const {
  switch (family) {
    case ModelFamily::Supn: return supn_parameter_count(polynomial_set(dimension).size(), width);
    case ModelFamily::Mlp: return MlpShape{dimension, width, depth}.parameter_count();
    case ModelFamily::Projection: return polynomial_set(dimension).size();
  }
  return 0;
}

std::string Architecture::label() const {
  char buf[96];
  switch (family) {
    case ModelFamily::Supn:
      std::snprintf(buf, sizeof buf, "supn:N=%zu,M=%d%s", width, level,
                    index_set == IndexSetKind::HyperbolicCross ? ",hc" : "");
      break;
    case ModelFamily::Mlp: std::snprintf(buf, sizeof buf, "mlp:N=%zu,L=%zu", width, depth); break;
    case ModelFamily::Projection:
      std::snprintf(buf, sizeof buf, "projection:M=%d%s", level,
                    index_set == IndexSetKind::HyperbolicCross ? ",hc" : "");
      break;
  }
  return buf;
}

std::size_t ExperimentConfig::dimension() const { return parse_target(target).dimension(); }

GridPrescription ExperimentConfig::resolved_grids() const {
  return grids ? *grids : grids_for_dimension(dimension(), desk_scale);
}

void ExperimentConfig::validate() const {
  std::size_t dim = 0;
  try {
    dim = dimension();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("field 'target': ") + e.what());
  }
  if (seeds.empty()) throw ConfigError("field 'seeds': must not be empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("field 'seeds': seeds must be distinct");
  }
  for (const auto& a : architectures) {
    try {
      (void)a.parameter_count(dim);
    } catch (const std::exception& e) {
      throw ConfigError("field 'models': architecture " + a.label() + ": " + e.what());
    }
  }
  try {
    adam.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("field 'adam': ") + e.what());
  }
  try {
    trust_region.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("field 'trust_region': ") + e.what());
  }
  if (sampling.realizations < 1) throw ConfigError("field 'sampling.realizations': must be >= 1");
  for (double r : sampling.ratios) {
    if (!(r > 0.0)) throw ConfigError("field 'sampling.ratios': ratios must be positive");
  }
  for (double d : constructive.deltas) {
    if (!(d > 0.0)) throw ConfigError("field 'constructive.deltas': deltas must be positive");
  }
}

namespace {

std::string json_type(const json& j) { return j.type_name(); }

[[noreturn]] void field_error(const std::string& path, const std::string& msg) {
  throw ConfigError("field '" + path + "': " + msg);
}

// Object view that rejects keys nobody read.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) field_error(path_.empty() ? "<root>" : path_, "expected object, got " + json_type(j_));
  }

  std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) field_error(path(it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) field_error(path, "expected number, got " + json_type(j));
  const double v = j.get<double>();
  if (!std::isfinite(v)) field_error(path, "must be finite");
  return v;
}

long long as_integer(const json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<long long>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::floor(v) == v && std::abs(v) < 9e15) return static_cast<long long>(v);
  }
  field_error(path, "expected integer, got " + json_type(j));
}

long long as_nonneg(const json& j, const std::string& path) {
  const long long v = as_integer(j, path);
  if (v < 0) field_error(path, "must be non-negative");
  return v;
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) field_error(path, "expected string, got " + json_type(j));
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) field_error(path, "expected boolean, got " + json_type(j));
  return j.get<bool>();
}

// Scalars and one-element lists are fixed values; longer lists are sweep axes.
std::vector<long long> as_axis(const json& j, const std::string& path) {
  std::vector<long long> out;
  if (j.is_array()) {
    if (j.empty()) field_error(path, "list must not be empty");
    for (std::size_t i = 0; i < j.size(); ++i) {
      out.push_back(as_nonneg(j[i], path + "[" + std::to_string(i) + "]"));
    }
  } else {
    out.push_back(as_nonneg(j, path));
  }
  return out;
}

template <class T, class F>
std::vector<T> as_list(const json& j, const std::string& path, F convert) {
  if (!j.is_array()) field_error(path, "expected list, got " + json_type(j));
  std::vector<T> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(convert(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

GridSpec::Kind parse_grid_kind(const std::string& s, const std::string& path) {
  if (s == "gauss_legendre" || s == "gl") return GridSpec::Kind::GaussLegendre;
  if (s == "equidistant") return GridSpec::Kind::Equidistant;
  if (s == "uniform") return GridSpec::Kind::Uniform;
  if (s == "halton") return GridSpec::Kind::Halton;
  field_error(path, "unknown grid kind '" + s + "' (expected gauss_legendre, equidistant, uniform or halton)");
}

GridSpec parse_grid(const json& j, const std::string& path) {
  Fields f(j, path);
  GridSpec g;
  if (!f.has("kind")) field_error(f.path("kind"), "required");
  g.kind = parse_grid_kind(as_string(f.at("kind"), f.path("kind")), f.path("kind"));
  if (!f.has("count")) field_error(f.path("count"), "required");
  g.count = static_cast<std::size_t>(as_nonneg(f.at("count"), f.path("count")));
  if (g.count == 0) field_error(f.path("count"), "must be positive");
  if (f.has("start")) g.start = static_cast<std::uint64_t>(as_nonneg(f.at("start"), f.path("start")));
  f.finish();
  return g;
}

std::vector<Architecture> parse_model_entry(const json& j, const std::string& path,
                                            std::optional<ModelFamily> implied = std::nullopt) {
  Fields f(j, path);
  ModelFamily family = implied.value_or(ModelFamily::Supn);
  if (f.has("family")) {
    try {
      family = parse_family(as_string(f.at("family"), f.path("family")));
    } catch (const std::invalid_argument& e) {
      field_error(f.path("family"), e.what());
    }
  } else if (!implied) {
    field_error(f.path("family"), "required");
  }
  IndexSetKind kind = IndexSetKind::TotalDegree;
  if (f.has("index_set")) {
    try {
      kind = parse_index_set_kind(as_string(f.at("index_set"), f.path("index_set")));
    } catch (const std::invalid_argument& e) {
      field_error(f.path("index_set"), e.what());
    }
  }
  std::vector<Architecture> out;
  auto make = [&](long long width, long long level, long long depth) {
    Architecture a;
    a.family = family;
    a.width = static_cast<std::size_t>(width);
    a.level = static_cast<int>(level);
    a.depth = static_cast<std::size_t>(depth);
    a.index_set = kind;
    return a;
  };
  if (f.has("architectures")) {
    const json& list = f.at("architectures");
    const std::string lp = f.path("architectures");
    if (!list.is_array() || list.empty()) field_error(lp, "expected non-empty list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string ip = lp + "[" + std::to_string(i) + "]";
      Fields af(list[i], ip);
      long long width = 0, level = 0, depth = 0;
      if (af.has("width")) width = as_nonneg(af.at("width"), af.path("width"));
      if (af.has("level")) level = as_nonneg(af.at("level"), af.path("level"));
      if (af.has("depth")) depth = as_nonneg(af.at("depth"), af.path("depth"));
      af.finish();
      out.push_back(make(width, level, depth));
    }
  } else {
    std::vector<long long> widths{0}, levels{0}, depths{0};
    auto need = [&](const char* key, std::vector<long long>& dst) {
      if (!f.has(key)) field_error(f.path(key), "required for family " + to_string(family));
      dst = as_axis(f.at(key), f.path(key));
    };
    switch (family) {
      case ModelFamily::Supn:
        need("width", widths);
        need("level", levels);
        break;
      case ModelFamily::Mlp:
        need("width", widths);
        need("depth", depths);
        break;
      case ModelFamily::Projection: need("level", levels); break;
    }
    for (auto w : widths)
      for (auto l : levels)
        for (auto d : depths) out.push_back(make(w, l, d));
  }
  f.finish();
  for (const auto& a : out) {
    if (a.family != ModelFamily::Projection && a.width == 0) field_error(path, a.label() + ": width must be positive");
    if (a.family == ModelFamily::Mlp && a.depth == 0) field_error(path, a.label() + ": depth must be positive");
  }
  return out;
}

void parse_adam(const json& j, AdamConfig& a) {
  Fields f(j, "adam");
  if (f.has("epochs")) a.epochs = static_cast<int>(as_nonneg(f.at("epochs"), f.path("epochs")));
  if (f.has("learning_rate")) a.learning_rate = as_number(f.at("learning_rate"), f.path("learning_rate"));
  if (f.has("beta1")) a.beta1 = as_number(f.at("beta1"), f.path("beta1"));
  if (f.has("beta2")) a.beta2 = as_number(f.at("beta2"), f.path("beta2"));
  if (f.has("epsilon")) a.epsilon = as_number(f.at("epsilon"), f.path("epsilon"));
  f.finish();
}

void parse_trust_region(const json& j, TrustRegionConfig& t) {
  Fields f(j, "trust_region");
  auto num = [&](const char* key, double& dst) {
    if (f.has(key)) dst = as_number(f.at(key), f.path(key));
  };
  if (f.has("max_newton_steps")) {
    t.max_newton_steps = static_cast<int>(as_nonneg(f.at("max_newton_steps"), f.path("max_newton_steps")));
  }
  num("grad_tol", t.grad_tol);
  num("step_tol", t.step_tol);
  num("cg_abs_tol", t.cg.abs_tol);
  num("cg_rel_tol", t.cg.rel_tol);
  if (f.has("cg_max_iters")) t.cg.max_iters = static_cast<int>(as_nonneg(f.at("cg_max_iters"), f.path("cg_max_iters")));
  num("radius_init", t.radius_init);
  num("radius_max", t.radius_max);
  num("eta_accept", t.eta_accept);
  if (f.has("lbfgs_memory")) {
    t.lbfgs_memory = static_cast<std::size_t>(as_nonneg(f.at("lbfgs_memory"), f.path("lbfgs_memory")));
  }
  if (f.has("precondition")) t.precondition = as_bool(f.at("precondition"), f.path("precondition"));
  f.finish();
}

void parse_sampling(const json& j, SamplingConfig& s) {
  Fields f(j, "sampling");
  if (f.has("ratios")) s.ratios = as_list<double>(f.at("ratios"), f.path("ratios"), as_number);
  if (f.has("samplers")) {
    s.samplers = as_list<GridSpec::Kind>(f.at("samplers"), f.path("samplers"),
                                         [](const json& e, const std::string& p) {
                                           const auto k = parse_grid_kind(as_string(e, p), p);
                                           if (k == GridSpec::Kind::Halton) field_error(p, "halton is not a 1D sampler");
                                           return k;
                                         });
  }
  if (f.has("realizations")) s.realizations = static_cast<int>(as_integer(f.at("realizations"), f.path("realizations")));
  if (f.has("include_full")) s.include_full = as_bool(f.at("include_full"), f.path("include_full"));
  if (f.has("tiers")) {
    const json& list = f.at("tiers");
    const std::string lp = f.path("tiers");
    if (!list.is_array() || list.empty()) field_error(lp, "expected non-empty list");
    s.tiers.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string ip = lp + "[" + std::to_string(i) + "]";
      Fields tf(list[i], ip);
      SamplingTier t;
      if (!tf.has("name")) field_error(tf.path("name"), "required");
      t.name = as_string(tf.at("name"), tf.path("name"));
      t.arch.family = ModelFamily::Supn;
      if (!tf.has("width") || !tf.has("level")) field_error(ip, "width and level are required");
      t.arch.width = static_cast<std::size_t>(as_nonneg(tf.at("width"), tf.path("width")));
      t.arch.level = static_cast<int>(as_nonneg(tf.at("level"), tf.path("level")));
      if (t.arch.width == 0) field_error(tf.path("width"), "must be positive");
      tf.finish();
      s.tiers.push_back(t);
    }
  }
  f.finish();
}

void parse_runge(const json& j, RungeConfig& r) {
  Fields f(j, "runge");
  if (f.has("c")) r.c_values = as_list<double>(f.at("c"), f.path("c"), as_number);
  if (f.has("projection_degrees")) {
    r.projection_degrees = as_list<int>(f.at("projection_degrees"), f.path("projection_degrees"),
                                        [](const json& e, const std::string& p) { return static_cast<int>(as_nonneg(e, p)); });
  }
  if (f.has("supn")) r.supn = parse_model_entry(f.at("supn"), f.path("supn"), ModelFamily::Supn);
  f.finish();
  for (double c : r.c_values) {
    if (!(c >= 1.0)) field_error("runge.c", "Runge parameters must be >= 1");
  }
}

void parse_constructive(const json& j, ConstructiveConfig& c) {
  Fields f(j, "constructive");
  if (f.has("targets")) c.targets = as_list<std::string>(f.at("targets"), f.path("targets"), as_string);
  if (f.has("degrees")) {
    c.degrees = as_list<int>(f.at("degrees"), f.path("degrees"),
                             [](const json& e, const std::string& p) { return static_cast<int>(as_nonneg(e, p)); });
  }
  if (f.has("deltas")) c.deltas = as_list<double>(f.at("deltas"), f.path("deltas"), as_number);
  if (f.has("eval_nodes")) c.eval_nodes = static_cast<std::size_t>(as_nonneg(f.at("eval_nodes"), f.path("eval_nodes")));
  if (f.has("train")) c.train = as_bool(f.at("train"), f.path("train"));
  f.finish();
  for (std::size_t i = 0; i < c.targets.size(); ++i) {
    try {
      (void)parse_target(c.targets[i]);
    } catch (const std::exception& e) {
      field_error("constructive.targets[" + std::to_string(i) + "]", e.what());
    }
  }
}

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte);
    std::string what = e.what();
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error: " + what);
  }
  ExperimentConfig cfg;
  Fields f(root, "");
  if (f.has("target")) cfg.target = as_string(f.at("target"), "target");
  if (f.has("desk_scale")) cfg.desk_scale = as_bool(f.at("desk_scale"), "desk_scale");
  if (f.has("models")) {
    const json& list = f.at("models");
    if (!list.is_array() || list.empty()) field_error("models", "expected non-empty list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      auto archs = parse_model_entry(list[i], "models[" + std::to_string(i) + "]");
      cfg.architectures.insert(cfg.architectures.end(), archs.begin(), archs.end());
    }
  }
  if (f.has("seeds")) {
    cfg.seeds = as_list<std::uint64_t>(f.at("seeds"), "seeds", [](const json& e, const std::string& p) {
      return static_cast<std::uint64_t>(as_nonneg(e, p));
    });
  }
  if (f.has("max_parameters")) cfg.max_parameters = static_cast<std::size_t>(as_nonneg(f.at("max_parameters"), "max_parameters"));
  if (f.has("out")) cfg.out_dir = as_string(f.at("out"), "out");
  if (f.has("adam")) parse_adam(f.at("adam"), cfg.adam);
  if (f.has("trust_region")) parse_trust_region(f.at("trust_region"), cfg.trust_region);
  if (f.has("sampling")) parse_sampling(f.at("sampling"), cfg.sampling);
  if (f.has("runge")) parse_runge(f.at("runge"), cfg.runge);
  if (f.has("constructive")) parse_constructive(f.at("constructive"), cfg.constructive);

  std::size_t dim = 0;
  try {
    dim = cfg.dimension();
  } catch (const std::exception& e) {
    field_error("target", e.what());
  }
  if (f.has("grids")) {
    Fields g(f.at("grids"), "grids");
    GridPrescription p = grids_for_dimension(dim, cfg.desk_scale);
    if (g.has("train")) p.train = parse_grid(g.at("train"), "grids.train");
    if (g.has("validation")) p.validation = parse_grid(g.at("validation"), "grids.validation");
    if (g.has("test")) p.test = parse_grid(g.at("test"), "grids.test");
    g.finish();
    for (const GridSpec* s : {&p.train, &p.validation, &p.test}) {
      if (s->kind == GridSpec::Kind::Uniform && dim != 1) field_error("grids", "uniform grids are one-dimensional");
    }
    cfg.grids = p;
  }
  f.finish();

  if (cfg.max_parameters > 0) {
    std::erase_if(cfg.architectures, [&](const Architecture& a) { return a.parameter_count(dim) > cfg.max_parameters; });
    if (f.has("models") && cfg.architectures.empty()) {
      field_error("models", "no architecture satisfies max_parameters = " + std::to_string(cfg.max_parameters));
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

namespace {

std::vector<Architecture> cross(ModelFamily family, const std::vector<std::size_t>& widths,
                                const std::vector<int>& levels, const std::vector<std::size_t>& depths) {
  std::vector<Architecture> out;
  for (auto w : widths)
    for (auto l : levels)
      for (auto d : depths) {
        Architecture a;
        a.family = family;
        a.width = w;
        a.level = l;
        a.depth = d;
        out.push_back(a);
      }
  return out;
}

void cap_ladder(ExperimentConfig& cfg, std::vector<Architecture>& ladder) {
  if (cfg.max_parameters == 0) return;
  const std::size_t dim = cfg.dimension();
  std::erase_if(ladder, [&](const Architecture& a) { return a.parameter_count(dim) > cfg.max_parameters; });
}

}  // namespace

ExperimentConfig default_config(const std::string& study, bool desk_scale) {
  ExperimentConfig cfg;
  cfg.target = "f1";
  const std::vector<std::size_t> supn_axis{3, 5, 9, 18, 27, 35, 40};
  const std::vector<int> supn_levels{3, 5, 9, 18, 27, 35, 40};
  const std::vector<std::size_t> mlp_axis{2, 3, 5, 9, 12};
  if (study == "sweep") {
    cfg.max_parameters = 2000;
    cfg.architectures = cross(ModelFamily::Supn, supn_axis, supn_levels, {0});
    auto mlp = cross(ModelFamily::Mlp, mlp_axis, {0}, mlp_axis);
    cfg.architectures.insert(cfg.architectures.end(), mlp.begin(), mlp.end());
  } else if (study == "project") {
    cfg.seeds = {0};
    cfg.architectures = cross(ModelFamily::Projection, {0}, {5, 10, 20, 40, 80, 160}, {0});
  } else if (study == "train") {
    cfg.seeds = {0};
    cfg.architectures = cross(ModelFamily::Supn, {5}, {18}, {0});
  } else if (study == "sampling-study") {
    cfg.sampling.tiers = {{"low", cross(ModelFamily::Supn, {3}, {9}, {0})[0]},
                          {"medium", cross(ModelFamily::Supn, {5}, {18}, {0})[0]},
                          {"high", cross(ModelFamily::Supn, {9}, {27}, {0})[0]}};
  } else if (study == "runge-rates") {
    cfg.target = "runge:c=5";
    cfg.runge.projection_degrees = {4, 8, 12, 16, 20, 24, 28, 32, 36, 40};
    cfg.runge.supn = cross(ModelFamily::Supn, {3}, {5, 9, 18, 27, 40}, {0});
  } else if (study == "constructive-check") {
    cfg.adam.epochs = 0;
    cfg.constructive.targets = {"runge:c=5", "f1", "f3", "legendre:m=4"};
  } else {
    throw ConfigError("unknown study '" + study + "'");
  }
  cap_ladder(cfg, cfg.architectures);
  if (desk_scale) apply_desk_scale(cfg);
  cfg.validate();
  return cfg;
}

void apply_desk_scale(ExperimentConfig& cfg) {
  cfg.desk_scale = true;
  cfg.grids.reset();
  cfg.max_parameters = cfg.max_parameters == 0 ? 500 : std::min<std::size_t>(cfg.max_parameters, 500);
  const bool had = !cfg.architectures.empty();
  cap_ladder(cfg, cfg.architectures);
  if (had && cfg.architectures.empty()) throw ConfigError("field 'models': no architecture has P <= 500");
  cap_ladder(cfg, cfg.runge.supn);
}

namespace {

// Only the axes the parser accepts for the family, so the dump parses back.
json arch_to_json(const Architecture& a) {
  json j = {{"family", to_string(a.family)}};
  if (a.family != ModelFamily::Projection) j["width"] = a.width;
  if (a.family == ModelFamily::Mlp) {
    j["depth"] = a.depth;
  } else {
    j["level"] = a.level;
    j["index_set"] = to_string(a.index_set);
  }
  return j;
}

json grid_to_json(const GridSpec& g) { return {{"kind", to_string(g.kind)}, {"count", g.count}, {"start", g.start}}; }

}  // namespace

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["target"] = parse_target(cfg.target).spec();
  j["desk_scale"] = cfg.desk_scale;
  for (const auto& a : cfg.architectures) j["models"].push_back(arch_to_json(a));
  j["seeds"] = cfg.seeds;
  j["max_parameters"] = cfg.max_parameters;
  const auto g = cfg.resolved_grids();
  j["grids"] = {{"train", grid_to_json(g.train)}, {"validation", grid_to_json(g.validation)}, {"test", grid_to_json(g.test)}};
  j["adam"] = {{"epochs", cfg.adam.epochs},
               {"learning_rate", cfg.adam.learning_rate},
               {"beta1", cfg.adam.beta1},
               {"beta2", cfg.adam.beta2},
               {"epsilon", cfg.adam.epsilon}};
  const auto& t = cfg.trust_region;
  j["trust_region"] = {{"max_newton_steps", t.max_newton_steps}, {"grad_tol", t.grad_tol},
                       {"step_tol", t.step_tol},                 {"cg_abs_tol", t.cg.abs_tol},
                       {"cg_rel_tol", t.cg.rel_tol},             {"cg_max_iters", t.cg.max_iters},
                       {"radius_init", t.radius_init},           {"radius_max", t.radius_max},
                       {"eta_accept", t.eta_accept},             {"lbfgs_memory", t.lbfgs_memory},
                       {"precondition", t.precondition}};
  json samplers = json::array();
  for (auto k : cfg.sampling.samplers) samplers.push_back(to_string(k));
  json tiers = json::array();
  for (const auto& tier : cfg.sampling.tiers) {
    tiers.push_back({{"name", tier.name}, {"width", tier.arch.width}, {"level", tier.arch.level}});
  }
  j["sampling"] = {{"ratios", cfg.sampling.ratios},
                   {"samplers", samplers},
                   {"realizations", cfg.sampling.realizations},
                   {"include_full", cfg.sampling.include_full}};
  if (!tiers.empty()) j["sampling"]["tiers"] = tiers;
  j["runge"] = {{"c", cfg.runge.c_values}};
  if (!cfg.runge.projection_degrees.empty()) j["runge"]["projection_degrees"] = cfg.runge.projection_degrees;
  if (!cfg.runge.supn.empty()) {
    json list = json::array();
    for (const auto& a : cfg.runge.supn) list.push_back({{"width", a.width}, {"level", a.level}});
    j["runge"]["supn"] = {{"index_set", to_string(cfg.runge.supn.front().index_set)}, {"architectures", list}};
  }
  j["constructive"] = {{"targets", cfg.constructive.targets},
                       {"degrees", cfg.constructive.degrees},
                       {"deltas", cfg.constructive.deltas},
                       {"eval_nodes", cfg.constructive.eval_nodes},
                       {"train", cfg.constructive.train}};
  return j;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string text = config_to_json(cfg).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace supn
