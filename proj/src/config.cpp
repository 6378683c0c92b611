#include "dirac/config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>

#include "dirac/errors.hpp"
#include "dirac/rng.hpp"

namespace dirac {

std::string config_hash(const std::string& text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(CounterRng::fnv1a(text)));
  return buf;
}

namespace {

struct RawEntry {
  std::string value;
  int line = 0;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Parser {
 public:
  explicit Parser(const std::string& text) {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t nl = text.find('\n', pos);
      std::string line =
          text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
      pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
      ++line_no;

      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;

      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        errors.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
        continue;
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty() || value.empty()) {
        errors.push_back("line " + std::to_string(line_no) + ": empty key or value");
        continue;
      }
      const auto prev = entries_.find(key);
      if (prev != entries_.end()) {
        errors.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key +
                         "' (first set on line " + std::to_string(prev->second.line) + ")");
        continue;
      }
      entries_[key] = {value, line_no};
    }
  }

  double get_double(const std::string& key, double dflt) {
    const auto it = take(key);
    if (it == entries_.end()) return dflt;
    const std::string& v = it->second.value;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') {
      errors.push_back(where(it) + ": expected a number for '" + key + "', got '" + v + "'");
      return dflt;
    }
    return x;
  }

  int get_int(const std::string& key, int dflt) {
    const auto it = take(key);
    if (it == entries_.end()) return dflt;
    const std::string& v = it->second.value;
    int x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
      errors.push_back(where(it) + ": expected an integer for '" + key + "', got '" + v + "'");
      return dflt;
    }
    return x;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) {
    const auto it = take(key);
    if (it == entries_.end()) return dflt;
    const std::string& v = it->second.value;
    std::uint64_t x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
      errors.push_back(where(it) + ": expected an unsigned integer for '" + key + "'");
      return dflt;
    }
    return x;
  }

  std::string get_string(const std::string& key, std::string dflt) {
    const auto it = take(key);
    if (it == entries_.end()) return dflt;
    return it->second.value;
  }

  std::optional<double> get_opt_double(const std::string& key) {
    const auto it = take(key);
    if (it == entries_.end()) return std::nullopt;
    const std::string& v = it->second.value;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') {
      errors.push_back(where(it) + ": expected a number for '" + key + "'");
      return std::nullopt;
    }
    return x;
  }

  int line_of(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

  void reject_unknown() {
    for (const auto& [key, entry] : entries_)
      if (!consumed_.count(key))
        errors.push_back("line " + std::to_string(entry.line) + ": unknown key '" + key + "'");
  }

  std::vector<std::string> errors;

 private:
  std::map<std::string, RawEntry>::iterator take(const std::string& key) {
    const auto it = entries_.find(key);
    if (it != entries_.end()) consumed_.insert(key);
    return it;
  }
  std::string where(std::map<std::string, RawEntry>::const_iterator it) const {
    return "line " + std::to_string(it->second.line);
  }

  std::map<std::string, RawEntry> entries_;
  std::set<std::string> consumed_;
};

RunConfig parse_impl(const std::string& text, std::vector<std::string>& errors) {
  Parser p(text);
  RunConfig cfg;
  cfg.raw_text = text;
  cfg.hash = config_hash(text);

  cfg.lattice.l1 = p.get_double("lattice.l1", 1.0);
  cfg.lattice.l2 = p.get_double("lattice.l2", 1.0);
  cfg.lattice.l3 = p.get_double("lattice.l3", 1.0);
  cfg.lattice.K = p.get_int("lattice.K", 8);
  cfg.grid_dims.n1 = p.get_int("grid.n1", 0);
  cfg.grid_dims.n2 = p.get_int("grid.n2", 0);
  cfg.grid_dims.n3 = p.get_int("grid.n3", 0);

  cfg.m = p.get_double("params.m", 1.0);
  cfg.a = p.get_double("params.a", 0.5);
  cfg.schedule.eps0 = p.get_double("params.eps_start", 0.5);
  cfg.schedule.steps = p.get_int("params.eps_steps", 12);
  cfg.schedule.ratio = p.get_double("params.eps_ratio", 0.5);
  cfg.external_const = p.get_double("params.external_const", 0.0);
  cfg.external_cos1 = p.get_double("params.external_cos1", 0.0);

  cfg.model_type = p.get_string("model.type", "soler_power");
  cfg.model_p = p.get_double("model.p", 1.25);
  cfg.model_b = p.get_double("model.b", 0.0);
  cfg.model_delta = p.get_double("model.delta", 0.0);
  cfg.A1 = p.get_opt_double("model.A1");
  cfg.A2 = p.get_opt_double("model.A2");
  cfg.A3 = p.get_opt_double("model.A3");
  cfg.A4 = p.get_opt_double("model.A4");
  cfg.A5 = p.get_opt_double("model.A5");
  cfg.alpha = p.get_opt_double("model.alpha");
  cfg.beta = p.get_opt_double("model.beta");
  cfg.nu = p.get_opt_double("model.nu");
  cfg.alpha1 = p.get_opt_double("model.alpha1");
  cfg.alpha2 = p.get_opt_double("model.alpha2");

  cfg.solver.seed = p.get_u64("solver.seed", 12345);
  cfg.solver.neg_band = p.get_double("solver.neg_band", 3.0);
  cfg.solver.cloud_lambda = p.get_int("solver.cloud_lambda", 32);
  cfg.solver.cloud_ball = p.get_int("solver.cloud_ball", 16);
  cfg.solver.embed_samples = p.get_int("solver.embed_samples", 200);
  cfg.solver.c2_samples = p.get_int("solver.c2_samples", 10000);
  cfg.solver.audit_samples = p.get_int("solver.audit_samples", 1000);
  cfg.solver.flow_tol_level = p.get_double("solver.flow_tol_level", 1e-9);
  cfg.solver.flow_max_sweeps = p.get_int("solver.flow_max_sweeps", 4000);
  cfg.solver.flow_max_refinements = p.get_int("solver.flow_max_refinements", 24);
  cfg.solver.newton_tol = p.get_double("solver.newton_tol", 1e-12);
  cfg.solver.final_tol = p.get_double("solver.final_tol", 1e-12);
  cfg.solver.newton_max_iter = p.get_int("solver.newton_max_iter", 60);
  cfg.solver.gmres_max_iter = p.get_int("solver.gmres_max_iter", 320);
  cfg.solver.hess_delta = p.get_double("solver.hess_delta", 1e-6);
  cfg.solver.trivial_floor = p.get_double("solver.trivial_floor", 1e-6);
  cfg.output_dir = p.get_string("output.dir", "out");

  p.reject_unknown();

  // Cross-module constraints, re-checked here so errors carry line numbers
  // where possible.
  auto fail = [&p, &errors](const std::string& key, const std::string& msg) {
    const int ln = p.line_of(key);
    errors.push_back((ln > 0 ? "line " + std::to_string(ln) + ": " : "") + msg);
  };

  if (!(cfg.lattice.l1 > 0 && cfg.lattice.l1 <= cfg.lattice.l2 &&
        cfg.lattice.l2 <= cfg.lattice.l3))
    fail("lattice.l1", "lattice requires 0 < l1 <= l2 <= l3");
  if (cfg.lattice.K < 0) fail("lattice.K", "lattice requires K >= 0");
  if (cfg.grid_dims.n1 > 0 || cfg.grid_dims.n2 > 0 || cfg.grid_dims.n3 > 0) {
    const int need = 2 * cfg.lattice.K + 1;
    if (cfg.grid_dims.n1 < need || cfg.grid_dims.n2 < need || cfg.grid_dims.n3 < need)
      fail("grid.n1", "grid dims must be >= 2K+1 = " + std::to_string(need) + " per axis");
  }
  if (!(cfg.m > 0)) fail("params.m", "requires m > 0");
  if (!(cfg.a > 0 && cfg.a < cfg.m)) fail("params.a", "requires 0 < a < m");
  if (!(cfg.schedule.eps0 > 0 && cfg.schedule.eps0 <= 1))
    fail("params.eps_start", "requires eps_start in (0,1]");
  if (cfg.schedule.steps < 2) fail("params.eps_steps", "requires eps_steps >= 2");
  if (!(cfg.schedule.ratio > 0 && cfg.schedule.ratio < 1))
    fail("params.eps_ratio", "requires eps_ratio in (0,1)");
  if (cfg.external_const < 0 || cfg.external_cos1 < 0)
    fail("params.external_const", "external field requires M >= 0");
  if (cfg.a + cfg.external_const + 2.0 * cfg.external_cos1 >= cfg.m)
    fail("params.external_const", "external field requires 0 < a <= a + M < m");
  if (cfg.model_type != "soler_power" && cfg.model_type != "smoothed" &&
      cfg.model_type != "zero")
    fail("model.type", "model.type must be soler_power, smoothed or zero");
  if (cfg.model_type != "zero" && !(cfg.model_p > 1.0 && cfg.model_p < 1.5))
    fail("model.p", "requires 1 < p < 3/2");
  if (cfg.model_b < 0) fail("model.b", "requires b >= 0");
  if (cfg.model_delta < 0) fail("model.delta", "requires delta >= 0");

  errors.insert(errors.begin(), p.errors.begin(), p.errors.end());

  if (errors.empty()) {
    // The declared constants must define a valid hypothesis set.
    try {
      cfg.make_model();
    } catch (const std::exception& ex) {
      errors.push_back(std::string("model constants: ") + ex.what());
    }
  }
  return cfg;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  std::vector<std::string> errors;
  RunConfig cfg = parse_impl(text, errors);
  if (!errors.empty()) {
    std::string msg = "config invalid:";
    for (const std::string& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return cfg;
}

std::vector<std::string> config_errors(const std::string& text) {
  std::vector<std::string> errors;
  parse_impl(text, errors);
  return errors;
}

NonlinearityModel RunConfig::make_model() const {
  NonlinearityModel model =
      model_type == "zero"
          ? NonlinearityModel::zero()
          : (model_type == "smoothed"
                 ? NonlinearityModel::smoothed(model_p, model_b, model_delta)
                 : NonlinearityModel::soler_power(model_p, model_b));
  if (A1 || A2 || A3 || A4 || A5 || alpha || beta || nu || alpha1 || alpha2) {
    HypothesisConstants h = model.constants();
    if (A1) h.A1 = *A1;
    if (A2) h.A2 = *A2;
    if (A3) h.A3 = *A3;
    if (A4) h.A4 = *A4;
    if (A5) h.A5 = *A5;
    if (alpha) h.alpha = *alpha;
    if (beta) h.beta = *beta;
    if (nu) h.nu = *nu;
    if (alpha1) h.alpha1 = *alpha1;
    if (alpha2) h.alpha2 = *alpha2;
    h.validate();
    model.set_constants(h);
  }
  return model;
}

std::unique_ptr<DiracOperator> RunConfig::make_operator() const {
  return std::make_unique<DiracOperator>(lattice, effective_grid(), m);
}

ProblemParams RunConfig::make_params(const DiracOperator& op) const {
  ProblemParams params;
  params.m = m;
  params.a = a;
  params.eps = schedule.eps0;
  params.external = make_external_cos1(op, external_const, external_cos1);
  params.validate(op);
  return params;
}

}  // namespace dirac
