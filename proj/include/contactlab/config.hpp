#pragma once

// Experiment configuration: JSON schema, validation and catalog listing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "contactlab/contact_form.hpp"
#include "contactlab/contact_maps.hpp"
#include "contactlab/dissipation.hpp"
#include "contactlab/hamiltonian.hpp"

namespace contactlab {

using Json = nlohmann::ordered_json;

/// All problems found in a configuration, one message per entry.
class ConfigErrors : public ConfigError {
 public:
  explicit ConfigErrors(std::vector<std::string> errors)
      : ConfigError(join(errors)), errors_(std::move(errors)) {}
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  static std::string join(const std::vector<std::string>& e) {
    std::string s = "invalid configuration";
    for (const auto& m : e) s += "\n  " + m;
    return s;
  }
  std::vector<std::string> errors_;
};

inline const std::vector<std::string>& task_types() {
  static const std::vector<std::string> t = {"r_sequence", "lyapunov", "homology",     "shape",
                                             "displacement", "growth", "duality", "verify_bound"};
  return t;
}

inline const std::vector<std::string>& primitive_kinds() {
  static const std::vector<std::string> k = {"canonical_lift",  "shear_a",          "shear_b",     "shear_a_inverse",
                                             "shear_b_inverse", "reeb_translation", "contact_flow"};
  return k;
}

inline const std::vector<std::string>& form_kinds() {
  static const std::vector<std::string> k = {"round", "constant", "trig", "flat_metric", "hamiltonian"};
  return k;
}

struct TaskSpec {
  std::string id;
  std::string type;
  Json options;  ///< the task object as written
};

struct RunParams {
  int steps = 30;  ///< K
  SamplingGrid grid;
  Thresholds thresholds;
  double bound_tolerance = kBoundTolerance;
  bool refinement_check = false;
  double refinement_factor = 2.0;
  double refinement_limit = 0.01;  ///< accepted relative change of r_K
  int directions = 256;            ///< direction grid of shape tasks
  int shape_q_resolution = 64;
  int growth_steps = 40;
  std::size_t word_cap = kDefaultWordCap;
  int k_max = 20;
};

struct ExperimentConfig {
  std::string id;
  int dim = 2;
  std::uint64_t seed = 0;
  ContactForm form;
  ContactMap map;
  bool conservative = false;
  RunParams params;
  std::vector<TaskSpec> tasks;
  std::string output_dir = "out";
  Json source;
};

namespace detail {

/// Accumulates errors while walking a JSON document.
class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

  const Json* child(const Json& obj, const std::string& key) const {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  std::optional<double> number(const Json& obj, const std::string& key, const std::string& path) {
    const Json* v = child(obj, key);
    if (!v) return std::nullopt;
    if (!v->is_number()) {
      fail(path + "." + key, "expected a number");
      return std::nullopt;
    }
    return v->get<double>();
  }

  std::optional<std::int64_t> integer(const Json& obj, const std::string& key, const std::string& path) {
    const Json* v = child(obj, key);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) {
      fail(path + "." + key, "expected an integer");
      return std::nullopt;
    }
    return v->get<std::int64_t>();
  }

  std::optional<std::string> string(const Json& obj, const std::string& key, const std::string& path) {
    const Json* v = child(obj, key);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      fail(path + "." + key, "expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<bool> boolean(const Json& obj, const std::string& key, const std::string& path) {
    const Json* v = child(obj, key);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) {
      fail(path + "." + key, "expected true or false");
      return std::nullopt;
    }
    return v->get<bool>();
  }

  int positive(const Json& obj, const std::string& key, const std::string& path, int fallback) {
    auto v = integer(obj, key, path);
    if (!v) return fallback;
    if (*v <= 0) {
      fail(path + "." + key, "must be positive, got " + std::to_string(*v));
      return fallback;
    }
    return static_cast<int>(*v);
  }

  /// Row-major integer array of perfect-square length.
  std::optional<IntMatrix> int_matrix(const Json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) {
      fail(path, "expected a row-major integer array");
      return std::nullopt;
    }
    std::vector<std::int64_t> entries;
    for (const auto& x : v) {
      if (!x.is_number_integer()) {
        fail(path, "matrix entries must be integers");
        return std::nullopt;
      }
      entries.push_back(x.get<std::int64_t>());
    }
    const auto k = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(entries.size()))));
    if (k * k != entries.size() || k < 1 || k > 6) {
      fail(path, "matrix needs k*k entries with 1 <= k <= 6, got " + std::to_string(entries.size()));
      return std::nullopt;
    }
    return IntMatrix::from_row_major(entries);
  }

  std::optional<Eigen::MatrixXd> real_matrix(const Json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) {
      fail(path, "expected a row-major numeric array");
      return std::nullopt;
    }
    const auto k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(v.size()))));
    if (static_cast<std::size_t>(k * k) != v.size()) {
      fail(path, "matrix needs k*k entries");
      return std::nullopt;
    }
    Eigen::MatrixXd m(k, k);
    for (int i = 0; i < k * k; ++i) {
      if (!v[i].is_number()) {
        fail(path, "matrix entries must be numbers");
        return std::nullopt;
      }
      m(i / k, i % k) = v[i].get<double>();
    }
    return m;
  }

  std::optional<std::vector<std::int64_t>> int_vector(const Json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) {
      fail(path, "expected a nonempty integer array");
      return std::nullopt;
    }
    std::vector<std::int64_t> out;
    for (const auto& x : v) {
      if (!x.is_number_integer()) {
        fail(path, "entries must be integers");
        return std::nullopt;
      }
      out.push_back(x.get<std::int64_t>());
    }
    return out;
  }

  TrigTerm trig_term(const Json& t, const std::string& path, int n) {
    TrigTerm term;
    if (!t.is_object()) {
      fail(path, "expected an object");
      return term;
    }
    term.amplitude = number(t, "amplitude", path).value_or(0.0);
    const std::string kind = string(t, "kind", path).value_or("cos");
    try {
      term.kind = parse_trig(kind);
    } catch (const Error& e) {
      fail(path + ".kind", e.what());
    }
    if (const Json* w = child(t, "wave")) {
      if (auto v = int_vector(*w, path + ".wave")) {
        if (static_cast<int>(v->size()) != n)
          fail(path + ".wave", "dimension mismatch: wave has " + std::to_string(v->size()) + " entries, n=" +
                                   std::to_string(n));
        else
          for (int i = 0; i < n; ++i) term.wave[i] = static_cast<int>((*v)[i]);
      }
    }
    return term;
  }

  TrigSeries series(const Json& s, const std::string& path, int n, double default_constant) {
    TrigSeries out{default_constant, {}};
    if (s.is_number()) {
      out.constant = s.get<double>();
      return out;
    }
    if (!s.is_object()) {
      fail(path, "expected a number or {constant, terms}");
      return out;
    }
    out.constant = number(s, "constant", path).value_or(default_constant);
    if (const Json* terms = child(s, "terms")) {
      if (!terms->is_array()) fail(path + ".terms", "expected an array");
      else
        for (std::size_t i = 0; i < terms->size(); ++i)
          out.terms.push_back(trig_term((*terms)[i], path + ".terms[" + std::to_string(i) + "]", n));
    }
    return out;
  }

  std::shared_ptr<const Hamiltonian> hamiltonian(const Json& h, const std::string& path, int n) {
    const std::size_t before = errors.size();
    auto out = std::make_shared<Hamiltonian>();
    out->n = n;
    if (!h.is_object()) {
      fail(path, "expected a Hamiltonian object");
      return out;
    }
    if (const Json* w = child(h, "weight")) out->weight = series(*w, path + ".weight", n, 1.0);
    if (const Json* s = child(h, "quadratic")) {
      if (auto m = real_matrix(*s, path + ".quadratic")) {
        if (m->rows() != n) fail(path + ".quadratic", "dimension mismatch: expected " + std::to_string(n) + "x" +
                                                         std::to_string(n));
        else if (!m->isApprox(m->transpose(), 0.0)) fail(path + ".quadratic", "must be symmetric");
        else {
          const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*m);
          if (es.eigenvalues().minCoeff() <= 1e-10) fail(path + ".quadratic", "must be positive definite");
          out->quadratic.topLeftCorner(n, n) = *m;
        }
      }
    }
    if (const Json* d = child(h, "drift")) {
      if (!d->is_array() || static_cast<int>(d->size()) != n)
        fail(path + ".drift", "dimension mismatch: expected an array of " + std::to_string(n) + " series");
      else
        for (int i = 0; i < n; ++i)
          out->drift[i] = series((*d)[i], path + ".drift[" + std::to_string(i) + "]", n, 0.0);
    }
    if (before == errors.size() && !out->certified_positive()) {
      // Fall back to sampling H on the unit sphere bundle.
      double lo = std::numeric_limits<double>::infinity();
      for (const auto& u : sphere_grid(n, 64))
        for (const auto& q : torus_grid(n, n == 2 ? 64 : 16)) lo = std::min(lo, out->value(u.u, q.q));
      if (!(lo > 0.0)) fail(path, "Hamiltonian is not positive on the sphere bundle (sampled min " +
                                      std::to_string(lo) + ")");
    }
    return out;
  }
};

inline std::optional<ContactForm> parse_form(Reader& r, const Json& f, int n) {
  const std::string path = "form";
  if (!f.is_object()) {
    r.fail(path, "expected an object");
    return std::nullopt;
  }
  const std::string kind = r.string(f, "kind", path).value_or("round");
  const std::string id = r.string(f, "id", path).value_or(kind);
  const double scale = r.number(f, "scale", path).value_or(1.0);
  if (!(scale > 0.0)) {
    r.fail(path + ".scale", "must be positive");
    return std::nullopt;
  }
  const std::size_t before = r.errors.size();
  Profile profile = profiles::Round{};
  if (kind == "round") {
  } else if (kind == "constant") {
    const double v = r.number(f, "value", path).value_or(1.0);
    if (!(v > 0.0)) r.fail(path + ".value", "must be positive");
    profile = profiles::Constant{v};
  } else if (kind == "trig") {
    profiles::TrigPolynomial tp;
    tp.constant = r.number(f, "constant", path).value_or(1.0);
    if (const Json* terms = r.child(f, "terms")) {
      if (!terms->is_array()) r.fail(path + ".terms", "expected an array");
      else
        for (std::size_t i = 0; i < terms->size(); ++i) {
          const std::string tpath = path + ".terms[" + std::to_string(i) + "]";
          ProfileTerm pt;
          pt.base = r.trig_term((*terms)[i], tpath, n);
          if (const Json* th = r.child((*terms)[i], "theta")) {
            if (n != 2) r.fail(tpath + ".theta", "dimension mismatch: theta harmonics need n=2");
            pt.theta_harmonic = static_cast<int>(r.integer(*th, "harmonic", tpath + ".theta").value_or(1));
            try {
              pt.theta_kind = parse_trig(r.string(*th, "kind", tpath + ".theta").value_or("cos"));
            } catch (const Error& e) {
              r.fail(tpath + ".theta.kind", e.what());
            }
          }
          if (const Json* ex = r.child((*terms)[i], "exponents")) {
            if (auto v = r.int_vector(*ex, tpath + ".exponents")) {
              if (static_cast<int>(v->size()) != n) r.fail(tpath + ".exponents", "dimension mismatch");
              else
                for (int k = 0; k < n; ++k) {
                  if ((*v)[k] < 0) r.fail(tpath + ".exponents", "must be nonnegative");
                  pt.exponents[k] = static_cast<int>((*v)[k]);
                }
            }
          }
          tp.terms.push_back(pt);
        }
    }
    profile = tp;
  } else if (kind == "flat_metric") {
    profiles::FlatMetric fm;
    if (const Json* g = r.child(f, "metric")) {
      if (auto m = r.real_matrix(*g, path + ".metric")) {
        if (m->rows() != n) r.fail(path + ".metric", "dimension mismatch: expected " + std::to_string(n) + "x" +
                                                       std::to_string(n));
        else
          fm.metric.topLeftCorner(n, n) = *m;
      }
    } else {
      r.fail(path, "flat_metric form needs 'metric'");
    }
    profile = fm;
  } else if (kind == "hamiltonian") {
    if (const Json* h = r.child(f, "hamiltonian")) profile = profiles::HamiltonianLevel{r.hamiltonian(*h, path + ".hamiltonian", n)};
    else r.fail(path, "hamiltonian form needs 'hamiltonian'");
  } else {
    r.fail(path + ".kind", "unknown form kind '" + kind + "'");
  }
  if (r.errors.size() != before) return std::nullopt;
  try {
    ContactForm form(id, n, profile, scale);
    form.validate(n == 2 ? 64 : 16);
    return form;
  } catch (const Error& e) {
    r.fail(path, e.what());
    return std::nullopt;
  }
}

inline std::optional<Primitive> parse_primitive(Reader& r, const Json& p, const std::string& path, int n) {
  if (!p.is_object()) {
    r.fail(path, "expected an object");
    return std::nullopt;
  }
  const auto kind = r.string(p, "kind", path);
  if (!kind) {
    r.fail(path, "missing 'kind'");
    return std::nullopt;
  }
  try {
    if (*kind == "canonical_lift") {
      const Json* m = r.child(p, "matrix");
      if (!m) {
        r.fail(path, "canonical_lift needs 'matrix'");
        return std::nullopt;
      }
      auto mat = r.int_matrix(*m, path + ".matrix");
      if (!mat) return std::nullopt;
      if (mat->size() != n) {
        r.fail(path + ".matrix", "dimension mismatch: " + std::to_string(mat->size()) + "x" +
                                     std::to_string(mat->size()) + " matrix on n=" + std::to_string(n));
        return std::nullopt;
      }
      return canonical_lift(*mat);
    }
    if (*kind == "shear_a" || *kind == "shear_b" || *kind == "shear_a_inverse" || *kind == "shear_b_inverse") {
      if (n != 2) {
        r.fail(path, "dimension mismatch: " + *kind + " acts on n=2, config has n=" + std::to_string(n));
        return std::nullopt;
      }
      const bool inv = kind->ends_with("_inverse");
      if (kind->starts_with("shear_a")) return primitives::ShearA{inv};
      return primitives::ShearB{inv};
    }
    if (*kind == "reeb_translation") {
      return primitives::ReebTranslation{r.number(p, "t", path).value_or(0.0)};
    }
    if (*kind == "contact_flow") {
      const Json* h = r.child(p, "hamiltonian");
      if (!h) {
        r.fail(path, "contact_flow needs 'hamiltonian'");
        return std::nullopt;
      }
      const std::size_t before = r.errors.size();
      auto ham = r.hamiltonian(*h, path + ".hamiltonian", n);
      const double t = r.number(p, "t", path).value_or(1.0);
      const auto steps = r.integer(p, "steps", path);
      if (steps && *steps <= 0) r.fail(path + ".steps", "must be positive");
      if (r.errors.size() != before) return std::nullopt;
      return contact_flow(ham, t, steps ? static_cast<int>(*steps) : 0);
    }
  } catch (const Error& e) {
    r.fail(path, e.what());
    return std::nullopt;
  }
  r.fail(path + ".kind", "unknown primitive kind '" + *kind + "'");
  return std::nullopt;
}

inline std::optional<int> declared_dimension(Reader& r, const Json& obj, const std::string& path) {
  auto v = r.integer(obj, "dimension", path);
  if (v && *v != 2 && *v != 3) {
    r.fail(path + ".dimension", "unsupported dimension " + std::to_string(*v) + " (expected 2 or 3)");
    return std::nullopt;
  }
  if (v) return static_cast<int>(*v);
  return std::nullopt;
}

}  // namespace detail

/// Validates a parsed document. Throws ConfigErrors listing every problem.
inline ExperimentConfig parse_config(const Json& doc) {
  detail::Reader r;
  ExperimentConfig cfg;
  cfg.source = doc;
  if (!doc.is_object()) throw ConfigErrors({"config: expected a JSON object"});

  cfg.id = r.string(doc, "id", "config").value_or("experiment");
  cfg.seed = static_cast<std::uint64_t>(r.integer(doc, "seed", "config").value_or(0));
  cfg.output_dir = r.string(doc, "output_dir", "config").value_or("out");

  const Json empty = Json::object();
  const Json* form = r.child(doc, "form");
  const Json* map = r.child(doc, "map");
  // 0 marks a dimension that was not declared.
  const int top = detail::declared_dimension(r, doc, "config").value_or(0);
  const int form_n = form ? detail::declared_dimension(r, *form, "form").value_or(0) : 0;
  const int map_n = map ? detail::declared_dimension(r, *map, "map").value_or(0) : 0;
  const int n = top ? top : form_n ? form_n : map_n ? map_n : 2;
  if (!top && !form_n && !map_n) r.fail("config", "missing 'dimension'");
  if (form_n && form_n != n)
    r.fail("form.dimension", "dimension mismatch: form has n=" + std::to_string(form_n) + ", config has n=" +
                                 std::to_string(n));
  if (map_n && map_n != n)
    r.fail("map.dimension", "dimension mismatch: map has n=" + std::to_string(map_n) + ", " +
                                (top ? "config" : "form") + " has n=" + std::to_string(n));
  cfg.dim = n;

  if (auto f = detail::parse_form(r, form ? *form : empty, n)) cfg.form = *f;

  std::vector<Primitive> prims;
  std::string map_id = "identity";
  if (map) {
    map_id = r.string(*map, "id", "map").value_or("map");
    cfg.conservative = r.boolean(*map, "conservative", "map").value_or(false);
    if (const Json* ps = r.child(*map, "primitives")) {
      if (!ps->is_array()) r.fail("map.primitives", "expected an array");
      else
        for (std::size_t i = 0; i < ps->size(); ++i)
          if (auto p = detail::parse_primitive(r, (*ps)[i], "map.primitives[" + std::to_string(i) + "]", n))
            prims.push_back(std::move(*p));
    }
  }
  try {
    cfg.map = ContactMap::make_composite(n, std::move(prims), map_id);
  } catch (const Error& e) {
    r.fail("map", e.what());
  }

  const Json* params = r.child(doc, "params");
  const Json& p = params ? *params : empty;
  RunParams& rp = cfg.params;
  rp.grid = SamplingGrid::defaults(n);
  rp.directions = n == 2 ? 256 : 1024;
  rp.shape_q_resolution = n == 2 ? 64 : 16;
  rp.steps = r.positive(p, "K", "params", rp.steps);
  rp.grid.q_resolution = r.positive(p, "q_resolution", "params", rp.grid.q_resolution);
  rp.grid.fiber_resolution = r.positive(p, "fiber_resolution", "params", rp.grid.fiber_resolution);
  if (rp.grid.fiber_resolution < 4) r.fail("params.fiber_resolution", "must be at least 4");
  rp.directions = r.positive(p, "directions", "params", rp.directions);
  if (rp.directions < 4) r.fail("params.directions", "must be at least 4");
  rp.shape_q_resolution = r.positive(p, "shape_q_resolution", "params", rp.shape_q_resolution);
  rp.growth_steps = r.positive(p, "N", "params", rp.growth_steps);
  rp.word_cap = static_cast<std::size_t>(r.positive(p, "cap", "params", static_cast<int>(rp.word_cap)));
  rp.k_max = r.positive(p, "k_max", "params", rp.k_max);
  rp.bound_tolerance = r.number(p, "bound_tolerance", "params").value_or(rp.bound_tolerance);
  rp.refinement_check = r.boolean(p, "refinement_check", "params").value_or(false);
  rp.refinement_factor = r.number(p, "refinement_factor", "params").value_or(rp.refinement_factor);
  if (!(rp.refinement_factor >= 1.0)) r.fail("params.refinement_factor", "must be >= 1");
  if (const Json* t = r.child(p, "thresholds")) {
    rp.thresholds.hyperbolic_floor = r.number(*t, "hyperbolic_floor", "params.thresholds").value_or(0.05);
    rp.thresholds.max_relative_residual = r.number(*t, "max_relative_residual", "params.thresholds").value_or(0.10);
    rp.thresholds.bounded_ceiling = r.number(*t, "bounded_ceiling", "params.thresholds").value_or(0.5);
    rp.thresholds.stall_increment = r.number(*t, "stall_increment", "params.thresholds").value_or(1e-3);
  }

  const Json* tasks = r.child(doc, "tasks");
  if (!tasks || !tasks->is_array() || tasks->empty()) {
    r.fail("tasks", "expected a nonempty array");
  } else {
    std::vector<std::string> seen;
    for (std::size_t i = 0; i < tasks->size(); ++i) {
      const std::string path = "tasks[" + std::to_string(i) + "]";
      const Json& t = (*tasks)[i];
      if (!t.is_object()) {
        r.fail(path, "expected an object");
        continue;
      }
      TaskSpec spec;
      spec.type = r.string(t, "type", path).value_or("");
      spec.id = r.string(t, "id", path).value_or(spec.type);
      spec.options = t;
      if (std::find(task_types().begin(), task_types().end(), spec.type) == task_types().end())
        r.fail(path + ".type", "unknown task type '" + spec.type + "'");
      if (std::find(seen.begin(), seen.end(), spec.id) != seen.end()) r.fail(path + ".id", "duplicate task id");
      seen.push_back(spec.id);
      for (const char* key : {"K", "q_resolution", "fiber_resolution", "N", "k_max", "directions"})
        r.positive(t, key, path, 1);
      cfg.tasks.push_back(std::move(spec));
    }
  }

  if (!r.errors.empty()) throw ConfigErrors(std::move(r.errors));
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigErrors({path + ": cannot open file"});
  Json doc;
  try {
    doc = Json::parse(in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ConfigErrors({path + ": " + e.what()});
  }
  return parse_config(doc);
}

/// Deterministic generator seeded from the config; draws avoid the
/// implementation-defined std distributions so runs agree across platforms.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<std::int64_t>(engine_() % span);
  }
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

inline std::string catalog_text() {
  std::ostringstream os;
  os << "primitives (map.primitives[].kind):\n"
     << "  canonical_lift    matrix: row-major integer n x n, |det| = 1\n"
     << "  shear_a           n=2 strict shear, I[dq1] = [dq1] - [dtheta]\n"
     << "  shear_b           n=2 strict shear, I[dq2] = [dq2] - [dtheta]\n"
     << "  shear_a_inverse   inverse of shear_a\n"
     << "  shear_b_inverse   inverse of shear_b\n"
     << "  reeb_translation  t: real; (u, q) -> (u, q + t u)\n"
     << "  contact_flow      hamiltonian: {weight, quadratic, drift}, t: real, steps: integer\n"
     << "forms (form.kind):\n"
     << "  round             F = 1\n"
     << "  constant          value: positive real\n"
     << "  trig              constant + terms[{amplitude, wave, kind, theta:{harmonic, kind}, exponents}]\n"
     << "  flat_metric       metric: row-major SPD n x n; F = 1/sqrt(u^T G^-1 u)\n"
     << "  hamiltonian       hamiltonian: {weight, quadratic, drift}; F = 1/H\n"
     << "tasks (tasks[].type):\n";
  for (const auto& t : task_types()) os << "  " << t << '\n';
  return os.str();
}

}  // namespace contactlab
