#include "wkam/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "wkam/io.hpp"

namespace wkam {

namespace {

constexpr std::pair<StudyKind, const char*> kStudyNames[] = {
    {StudyKind::solve, "solve"},         {StudyKind::flow, "flow"},
    {StudyKind::alpha, "alpha"},         {StudyKind::measure, "measure"},
    {StudyKind::rate_c1, "rate-c1"},     {StudyKind::rate_c2, "rate-c2"},
    {StudyKind::selection, "selection"}, {StudyKind::barrier, "barrier"},
};

template <typename T>
T parse_scalar(const std::string& s, const std::string& key) {
  try {
    return boost::lexical_cast<T>(boost::trim_copy(s));
  } catch (const boost::bad_lexical_cast&) {
    throw ConfigError(key + ": cannot parse '" + s + "'");
  }
}

template <typename T>
std::vector<T> parse_list(const std::string& s, const std::string& key, char sep = ',') {
  std::vector<T> out;
  const std::string t = boost::trim_copy(s);
  if (t.empty()) return out;
  std::vector<std::string> parts;
  boost::split(parts, t, [sep](char ch) { return ch == sep; });
  for (const auto& p : parts) out.push_back(parse_scalar<T>(p, key));
  return out;
}

std::string join_reals(const std::vector<double>& v, const char* sep = ",") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + format_real(v[i]);
  return s;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

ModelKind model_kind_from_string(const std::string& s) {
  for (ModelKind k : {ModelKind::mechanical1d, ModelKind::quadraticKam, ModelKind::genericTonelli})
    if (s == to_string(k)) return k;
  throw ConfigError("model.kind: unknown kind '" + s + "'");
}

// "amp k0 [k1] sin|cos; ..."
std::vector<TermSpec> parse_terms(const std::string& s) {
  std::vector<TermSpec> out;
  const std::string t = boost::trim_copy(s);
  if (t.empty()) return out;
  std::vector<std::string> items;
  boost::split(items, t, boost::is_any_of(";"));
  for (const auto& item : items) {
    std::vector<std::string> f;
    const std::string trimmed = boost::trim_copy(item);
    boost::split(f, trimmed, boost::is_space(), boost::token_compress_on);
    if (f.size() < 3) throw ConfigError("model.u: term '" + item + "' needs amplitude, wave, sin|cos");
    TermSpec ts;
    ts.amplitude = parse_scalar<double>(f[0], "model.u");
    for (std::size_t i = 1; i + 1 < f.size(); ++i) ts.wave.push_back(parse_scalar<int>(f[i], "model.u"));
    if (f.back() == "sin") ts.is_sine = true;
    else if (f.back() == "cos") ts.is_sine = false;
    else throw ConfigError("model.u: expected sin or cos, got '" + f.back() + "'");
    out.push_back(ts);
  }
  return out;
}

std::string format_terms(const std::vector<TermSpec>& terms) {
  std::string s;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) s += "; ";
    s += format_real(terms[i].amplitude);
    for (int k : terms[i].wave) s += " " + std::to_string(k);
    s += terms[i].is_sine ? " sin" : " cos";
  }
  return s;
}

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Key {
  const char* name;
  Setter set;
  Getter get;
};

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"study.kind", [](ExperimentConfig& c, const std::string& v) { c.study = study_kind_from_string(boost::trim_copy(v)); },
       [](const ExperimentConfig& c) { return std::string(to_string(c.study)); }},
      {"model.preset", [](ExperimentConfig& c, const std::string& v) { c.model.preset = boost::trim_copy(v); },
       [](const ExperimentConfig& c) { return c.model.preset; }},
      {"model.kind", [](ExperimentConfig& c, const std::string& v) { c.model.kind = model_kind_from_string(boost::trim_copy(v)); },
       [](const ExperimentConfig& c) { return std::string(to_string(c.model.kind)); }},
      {"model.potential.a0", [](ExperimentConfig& c, const std::string& v) { c.model.a0 = parse_scalar<double>(v, "model.potential.a0"); },
       [](const ExperimentConfig& c) { return format_real(c.model.a0); }},
      {"model.potential.cos", [](ExperimentConfig& c, const std::string& v) { c.model.cos_coeffs = parse_list<double>(v, "model.potential.cos"); },
       [](const ExperimentConfig& c) { return join_reals(c.model.cos_coeffs); }},
      {"model.potential.sin", [](ExperimentConfig& c, const std::string& v) { c.model.sin_coeffs = parse_list<double>(v, "model.potential.sin"); },
       [](const ExperimentConfig& c) { return join_reals(c.model.sin_coeffs); }},
      {"model.omega", [](ExperimentConfig& c, const std::string& v) { c.model.omega = parse_list<double>(v, "model.omega"); },
       [](const ExperimentConfig& c) { return join_reals(c.model.omega); }},
      {"model.u", [](ExperimentConfig& c, const std::string& v) { c.model.u = parse_terms(v); },
       [](const ExperimentConfig& c) { return format_terms(c.model.u); }},
      {"study.c",
       [](ExperimentConfig& c, const std::string& v) {
         c.c.clear();
         std::vector<std::string> parts;
         const std::string t = boost::trim_copy(v);
         boost::split(parts, t, boost::is_any_of(";"));
         for (const auto& p : parts) c.c.push_back(parse_list<double>(p, "study.c"));
       },
       [](const ExperimentConfig& c) {
         std::string s;
         for (std::size_t i = 0; i < c.c.size(); ++i) s += (i ? "; " : "") + join_reals(c.c[i]);
         return s;
       }},
      {"study.eps_list", [](ExperimentConfig& c, const std::string& v) { c.eps_list = parse_list<double>(v, "study.eps_list"); },
       [](const ExperimentConfig& c) { return join_reals(c.eps_list); }},
      {"grid.n", [](ExperimentConfig& c, const std::string& v) { c.grid_n = parse_list<int>(v, "grid.n"); },
       [](const ExperimentConfig& c) { return join_ints(c.grid_n); }},
      {"solver.dt", [](ExperimentConfig& c, const std::string& v) { c.solver.dt = parse_scalar<double>(v, "solver.dt"); },
       [](const ExperimentConfig& c) { return format_real(c.solver.dt); }},
      {"solver.control_radius", [](ExperimentConfig& c, const std::string& v) { c.solver.control_radius = parse_scalar<double>(v, "solver.control_radius"); },
       [](const ExperimentConfig& c) { return format_real(c.solver.control_radius); }},
      {"solver.controls", [](ExperimentConfig& c, const std::string& v) { c.solver.controls = parse_scalar<int>(v, "solver.controls"); },
       [](const ExperimentConfig& c) { return std::to_string(c.solver.controls); }},
      {"solver.refine_levels", [](ExperimentConfig& c, const std::string& v) { c.solver.refine_levels = parse_scalar<int>(v, "solver.refine_levels"); },
       [](const ExperimentConfig& c) { return std::to_string(c.solver.refine_levels); }},
      {"solver.tol", [](ExperimentConfig& c, const std::string& v) { c.solver.tol = parse_scalar<double>(v, "solver.tol"); },
       [](const ExperimentConfig& c) { return format_real(c.solver.tol); }},
      {"solver.max_iter", [](ExperimentConfig& c, const std::string& v) { c.solver.max_iter = parse_scalar<int>(v, "solver.max_iter"); },
       [](const ExperimentConfig& c) { return std::to_string(c.solver.max_iter); }},
      {"solver.method",
       [](ExperimentConfig& c, const std::string& v) {
         const std::string t = boost::trim_copy(v);
         if (t == "policy") c.solver.method = SolverMethod::policy;
         else if (t == "value") c.solver.method = SolverMethod::value;
         else throw ConfigError("solver.method: expected policy or value, got '" + t + "'");
       },
       [](const ExperimentConfig& c) { return std::string(to_string(c.solver.method)); }},
      {"solver.cost",
       [](ExperimentConfig& c, const std::string& v) {
         const std::string t = boost::trim_copy(v);
         if (t == "midpoint") c.solver.cost = CostRule::midpoint;
         else if (t == "rectangle") c.solver.cost = CostRule::rectangle;
         else throw ConfigError("solver.cost: expected midpoint or rectangle, got '" + t + "'");
       },
       [](const ExperimentConfig& c) { return std::string(to_string(c.solver.cost)); }},
      {"solver.coarse_min", [](ExperimentConfig& c, const std::string& v) { c.solver.coarse_min = parse_scalar<int>(v, "solver.coarse_min"); },
       [](const ExperimentConfig& c) { return std::to_string(c.solver.coarse_min); }},
      {"study.seeds", [](ExperimentConfig& c, const std::string& v) { c.seeds = parse_scalar<int>(v, "study.seeds"); },
       [](const ExperimentConfig& c) { return std::to_string(c.seeds); }},
      {"study.T", [](ExperimentConfig& c, const std::string& v) { c.T = parse_scalar<double>(v, "study.T"); },
       [](const ExperimentConfig& c) { return format_real(c.T); }},
      {"study.ds", [](ExperimentConfig& c, const std::string& v) { c.ds = parse_scalar<double>(v, "study.ds"); },
       [](const ExperimentConfig& c) { return format_real(c.ds); }},
      {"study.resync", [](ExperimentConfig& c, const std::string& v) { c.resync = parse_scalar<int>(v, "study.resync"); },
       [](const ExperimentConfig& c) { return std::to_string(c.resync); }},
      {"study.window", [](ExperimentConfig& c, const std::string& v) { c.window = parse_scalar<double>(v, "study.window"); },
       [](const ExperimentConfig& c) { return format_real(c.window); }},
      {"study.cluster_radius", [](ExperimentConfig& c, const std::string& v) { c.cluster_radius = parse_scalar<double>(v, "study.cluster_radius"); },
       [](const ExperimentConfig& c) { return format_real(c.cluster_radius); }},
      {"study.x0", [](ExperimentConfig& c, const std::string& v) { c.x0 = parse_list<double>(v, "study.x0"); },
       [](const ExperimentConfig& c) { return join_reals(c.x0); }},
      {"study.p0", [](ExperimentConfig& c, const std::string& v) { c.p0 = parse_list<double>(v, "study.p0"); },
       [](const ExperimentConfig& c) { return join_reals(c.p0); }},
      {"study.tau", [](ExperimentConfig& c, const std::string& v) { c.tau = parse_scalar<double>(v, "study.tau"); },
       [](const ExperimentConfig& c) { return format_real(c.tau); }},
      {"study.delta", [](ExperimentConfig& c, const std::string& v) { c.delta = parse_scalar<double>(v, "study.delta"); },
       [](const ExperimentConfig& c) { return format_real(c.delta); }},
      {"study.delta_list", [](ExperimentConfig& c, const std::string& v) { c.delta_list = parse_list<double>(v, "study.delta_list"); },
       [](const ExperimentConfig& c) { return join_reals(c.delta_list); }},
      {"study.delta_exponent", [](ExperimentConfig& c, const std::string& v) { c.delta_exponent = parse_scalar<double>(v, "study.delta_exponent"); },
       [](const ExperimentConfig& c) { return format_real(c.delta_exponent); }},
      {"diophantine.eta", [](ExperimentConfig& c, const std::string& v) { c.eta = parse_scalar<double>(v, "diophantine.eta"); },
       [](const ExperimentConfig& c) { return format_real(c.eta); }},
      {"diophantine.z_max", [](ExperimentConfig& c, const std::string& v) { c.z_max = parse_scalar<int>(v, "diophantine.z_max"); },
       [](const ExperimentConfig& c) { return std::to_string(c.z_max); }},
      {"rng.seed", [](ExperimentConfig& c, const std::string& v) { c.rng_seed = parse_scalar<std::uint64_t>(v, "rng.seed"); },
       [](const ExperimentConfig& c) { return std::to_string(c.rng_seed); }},
      {"output.dir", [](ExperimentConfig& c, const std::string& v) { c.out_dir = boost::trim_copy(v); },
       [](const ExperimentConfig& c) { return c.out_dir; }},
  };
  return table;
}

}  // namespace

const char* to_string(StudyKind k) {
  for (const auto& [kind, name] : kStudyNames)
    if (kind == k) return name;
  return "?";
}

StudyKind study_kind_from_string(const std::string& s) {
  for (const auto& [kind, name] : kStudyNames)
    if (s == name) return kind;
  throw ConfigError("unknown study kind '" + s + "'");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::map<std::string, const Key*> index;
  for (const auto& k : keys()) index[k.name] = &k;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    boost::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = boost::trim_copy(line.substr(0, eq));
    const auto it = index.find(key);
    if (it == index.end())
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    try {
      it->second->set(cfg, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& k : keys()) out += std::string(k.name) + " = " + k.get(cfg) + "\n";
  return out;
}

int model_dim(const ModelSpec& spec) {
  if (!spec.preset.empty()) return make_preset(spec.preset).dim();
  if (spec.kind == ModelKind::quadraticKam) return static_cast<int>(spec.omega.size());
  return 1;
}

RealVec to_realvec(const std::vector<double>& v) {
  RealVec r(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) r[static_cast<int>(i)] = v[i];
  return r;
}

TonelliModel build_model(const ModelSpec& spec, const RealVec& c) {
  if (!spec.preset.empty()) {
    TonelliModel m = make_preset(spec.preset);
    if (m.kind() != ModelKind::quadraticKam) return m;
    return make_quadratic_kam(m.omega(), c, m.exact_solution(), m.name());
  }
  switch (spec.kind) {
    case ModelKind::mechanical1d:
      return TonelliModel::mechanical(TrigSeries{spec.a0, spec.cos_coeffs, spec.sin_coeffs}, "mechanical1d");
    case ModelKind::quadraticKam: {
      const int n = static_cast<int>(spec.omega.size());
      std::vector<TrigTerm> terms;
      for (const auto& t : spec.u) {
        if (static_cast<int>(t.wave.size()) != n) throw ConfigError("model.u: wave vector of the wrong length");
        terms.push_back(TrigTerm{t.amplitude, t.wave, t.is_sine});
      }
      return make_quadratic_kam(to_realvec(spec.omega), c, TrigPolynomial(n, terms));
    }
    case ModelKind::genericTonelli:
      break;
  }
  throw ConfigError("model.kind: genericTonelli models cannot be described in a config file");
}

void validate_config(const ExperimentConfig& cfg) {
  const ModelSpec& m = cfg.model;
  if (m.preset.empty() && m.kind == ModelKind::quadraticKam && (m.omega.empty() || m.omega.size() > 2))
    throw ConfigError("model.omega: one or two components required");
  const int n = model_dim(m);
  if (cfg.c.empty()) throw ConfigError("study.c: at least one vector required");
  for (const auto& c : cfg.c)
    if (static_cast<int>(c.size()) != n)
      throw ConfigError("study.c: every vector needs " + std::to_string(n) + " components");
  if (cfg.eps_list.empty()) throw ConfigError("study.eps_list: empty");
  for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) {
    if (!(cfg.eps_list[i] > 0.0)) throw ConfigError("study.eps_list: values must be positive");
    if (i > 0 && !(cfg.eps_list[i] < cfg.eps_list[i - 1]))
      throw ConfigError("study.eps_list: values must be strictly decreasing");
  }
  if (cfg.grid_n.empty() || (cfg.grid_n.size() != 1 && cfg.grid_n.size() != cfg.eps_list.size()))
    throw ConfigError("grid.n: give one size, or one per eps");
  for (int N : cfg.grid_n)
    if (!power_of_two(N) || N < 16) throw ConfigError("grid.n: sizes must be powers of two >= 16");
  if (cfg.seeds < 1) throw ConfigError("study.seeds: must be positive");
  if (!(cfg.T > 0.0) || !(cfg.ds > 0.0) || cfg.ds > 1e-2)
    throw ConfigError("study.T, study.ds: need T > 0 and 0 < ds <= 1e-2");
  if (cfg.study == StudyKind::flow || cfg.study == StudyKind::measure) {
    if (static_cast<int>(cfg.x0.size()) != n) throw ConfigError("study.x0: wrong number of components");
    if (!cfg.p0.empty() && static_cast<int>(cfg.p0.size()) != n)
      throw ConfigError("study.p0: wrong number of components");
  }
  if (!(cfg.window > 0.0 && cfg.window <= 1.0)) throw ConfigError("study.window: must lie in (0, 1]");
  if (cfg.z_max < 1) throw ConfigError("diophantine.z_max: must be positive");

  const TonelliModel model = build_model(m, to_realvec(cfg.c.front()));
  const bool mech = model.kind() == ModelKind::mechanical1d;
  switch (cfg.study) {
    case StudyKind::rate_c1:
    case StudyKind::selection:
    case StudyKind::barrier: {
      if (!mech) throw ConfigError(std::string(to_string(cfg.study)) + ": requires a mechanical1d model");
      const TrigSeries& F = model.potential();
      bool flat = F.a0 == 0.0;
      for (double a : F.cos_coeffs) flat = flat && a == 0.0;
      for (double b : F.sin_coeffs) flat = flat && b == 0.0;
      if (flat) throw ConfigError(std::string(to_string(cfg.study)) + ": F = 0 has no hyperbolic zeros");
      break;
    }
    case StudyKind::rate_c2:
      if (model.kind() != ModelKind::quadraticKam) throw ConfigError("rate-c2: requires a quadraticKam model");
      break;
    case StudyKind::alpha:
    case StudyKind::measure:
      if (!mech) throw ConfigError(std::string(to_string(cfg.study)) + ": requires a mechanical1d model");
      break;
    default:
      break;
  }
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

int grid_size_for(const ExperimentConfig& cfg, std::size_t eps_index) {
  return cfg.grid_n.size() == 1 ? cfg.grid_n.front() : cfg.grid_n.at(eps_index);
}

}  // namespace wkam
