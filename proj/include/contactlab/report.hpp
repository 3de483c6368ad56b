#pragma once

// Experiment runner: executes the tasks of a configuration, writes CSV/JSON
// artifacts and assembles the aggregate report.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "contactlab/algebra.hpp"
#include "contactlab/config.hpp"
#include "contactlab/contact_maps.hpp"
#include "contactlab/dissipation.hpp"
#include "contactlab/shapes.hpp"

namespace contactlab {

inline constexpr const char* kVersion = "1.0.0";

/// Largest accepted contact residual of a composite containing a flow.
inline constexpr double kFlowResidualLimit = 1e-6;

struct RunOptions {
  std::string output_dir;   ///< overrides the config when nonempty
  double refine = 1.0;      ///< multiplies every grid resolution
  bool write_files = true;
};

struct RunResult {
  Json report;
  bool checks_passed = true;
  std::vector<std::string> failed_checks;
  std::vector<std::string> artifacts;
};

namespace detail {

inline Json matrix_json(const IntMatrix& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.size(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.size(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

inline Json grid_json(const SamplingGrid& g, int n) {
  return Json{{"q_resolution", g.q_resolution}, {"fiber_resolution", g.fiber_resolution}, {"points", g.count(n)}};
}

inline Json series_json(const std::string& x, const std::string& y, const std::vector<double>& xs,
                        const std::vector<double>& ys) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < xs.size(); ++i) rows.push_back(Json::array({xs[i], ys[i]}));
  return Json{{"columns", Json::array({x, y})}, {"rows", rows}};
}

inline std::vector<double> index_axis(std::size_t size, double first) {
  std::vector<double> xs(size);
  for (std::size_t i = 0; i < size; ++i) xs[i] = first + static_cast<double>(i);
  return xs;
}

inline Json bound_json(const BoundCheck& b) {
  return Json{{"s_target", b.s_target},
              {"target_matrix", matrix_json(b.target_matrix)},
              {"chi_hat", b.chi_hat},
              {"tolerance", b.tolerance},
              {"pass", b.pass},
              {"declared_conservative", b.declared_conservative},
              {"conservative_contradiction", b.conservative_contradiction}};
}

/// The dissipation report document with exactly the published fields.
inline Json dissipation_json(const DissipationReport& r, int n) {
  Json j;
  j["map_id"] = r.map_id;
  j["lambda_id"] = r.lambda_id;
  j["K"] = r.steps;
  j["grid"] = grid_json(r.grid, n);
  j["r_series"] = r.r_series;
  j["chi_hat"] = r.chi.slope;
  j["chi_last"] = r.chi.last;
  j["lyap_hat"] = r.lyap_hat ? Json(*r.lyap_hat) : Json(nullptr);
  j["verdict"] = to_string(r.verdict);
  j["bound_check"] = r.bound_check ? bound_json(*r.bound_check) : Json(nullptr);
  return j;
}

inline void write_text(const std::filesystem::path& p, const std::string& text, std::vector<std::string>& artifacts) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
  artifacts.push_back(p.string());
}

inline std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

/// Fresh random nonzero integer vectors for sample classes.
inline std::vector<std::vector<std::int64_t>> random_classes(SeededRng& rng, int n, int count, int bound) {
  std::vector<std::vector<std::int64_t>> out;
  while (static_cast<int>(out.size()) < count) {
    std::vector<std::int64_t> v(n);
    bool nonzero = false;
    for (auto& x : v) {
      x = rng.uniform_int(-bound, bound);
      nonzero = nonzero || x != 0;
    }
    if (nonzero) out.push_back(std::move(v));
  }
  return out;
}

/// Per-task option lookups with config-level fallbacks.
struct TaskOptions {
  const Json& j;

  int integer(const char* key, int fallback) const {
    auto it = j.find(key);
    return it != j.end() && it->is_number_integer() ? it->get<int>() : fallback;
  }
  double number(const char* key, double fallback) const {
    auto it = j.find(key);
    return it != j.end() && it->is_number() ? it->get<double>() : fallback;
  }
  bool flag(const char* key, bool fallback) const {
    auto it = j.find(key);
    return it != j.end() && it->is_boolean() ? it->get<bool>() : fallback;
  }
  std::string text(const char* key, const std::string& fallback) const {
    auto it = j.find(key);
    return it != j.end() && it->is_string() ? it->get<std::string>() : fallback;
  }
  const Json* get(const char* key) const {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
  }
};

inline IntMatrix matrix_option(const TaskOptions& o, const char* key, const IntMatrix& fallback) {
  const Json* m = o.get(key);
  if (!m) return fallback;
  Reader r;
  auto mat = r.int_matrix(*m, key);
  if (!mat) throw ConfigErrors(r.errors);
  return *mat;
}

inline std::vector<std::vector<std::int64_t>> classes_option(const TaskOptions& o, SeededRng& rng, int n) {
  if (const Json* s = o.get("samples")) {
    std::vector<std::vector<std::int64_t>> out;
    Reader r;
    if (!s->is_array() || s->empty()) throw ConfigErrors({"samples: expected a nonempty array of integer vectors"});
    for (const auto& v : *s)
      if (auto iv = r.int_vector(v, "samples")) {
        if (static_cast<int>(iv->size()) != n) throw ConfigErrors({"samples: dimension mismatch"});
        out.push_back(*iv);
      }
    if (!r.errors.empty()) throw ConfigErrors(r.errors);
    return out;
  }
  return random_classes(rng, n, o.integer("sample_count", 4), o.integer("sample_bound", 3));
}

inline double flow_residual(const ContactMap& f) {
  bool has_flow = false;
  for (const auto& p : f.primitives()) has_flow = has_flow || std::holds_alternative<primitives::ContactFlow>(p);
  if (!has_flow) return 0.0;
  const ContactForm round = ContactForm::round(f.dim());
  const GridPoints pts(f.dim(), SamplingGrid{4, 8});
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) worst = std::max(worst, contact_residual(f, round, pts[i]));
  return worst;
}

class Runner {
 public:
  Runner(const ExperimentConfig& cfg, const RunOptions& opt)
      : cfg_(cfg), opt_(opt), rng_(cfg.seed) {
    out_dir_ = opt.output_dir.empty() ? std::filesystem::path(cfg.output_dir) : std::filesystem::path(opt.output_dir);
  }

  RunResult run() {
    const auto start = std::chrono::steady_clock::now();
    if (opt_.write_files) std::filesystem::create_directories(out_dir_);
    Json provenance;
    provenance["version"] = kVersion;
    provenance["refine"] = opt_.refine;
    const double residual = flow_residual(cfg_.map);
    provenance["contact_residual"] = residual;
    if (residual >= kFlowResidualLimit)
      throw Error("map '" + cfg_.map.id() + "' fails the contact residual check (" + std::to_string(residual) +
                  " >= 1e-6); increase the flow step count");
    Json tasks = Json::array();
    for (const auto& spec : cfg_.tasks) {
      Json entry;
      entry["id"] = spec.id;
      entry["type"] = spec.type;
      try {
        entry["result"] = dispatch(spec);
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw Error("task '" + spec.id + "': " + e.what());
      }
      tasks.push_back(std::move(entry));
    }
    provenance["refinement_deltas"] = refinement_;
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    Json report;
    report["config"] = cfg_.source;
    report["tasks"] = std::move(tasks);
    report["checks"] = Json{{"pass", result_.failed_checks.empty()}, {"failed", result_.failed_checks}};
    report["provenance"] = std::move(provenance);
    report["timestamp"] = Json{{"utc", utc_now()}, {"elapsed_seconds", elapsed}};
    result_.checks_passed = result_.failed_checks.empty();
    if (opt_.write_files) detail::write_text(out_dir_ / "report.json", report.dump(2) + "\n", result_.artifacts);
    result_.report = std::move(report);
    return std::move(result_);
  }

 private:
  static std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
  }

  std::string file(const std::string& task, const std::string& suffix) { return task + suffix; }

  void emit(const std::string& name, const std::string& text) {
    if (opt_.write_files) write_text(out_dir_ / name, text, result_.artifacts);
  }

  void fail_check(const std::string& what) { result_.failed_checks.push_back(what); }

  SamplingGrid task_grid(const TaskOptions& o) const {
    SamplingGrid g{o.integer("q_resolution", cfg_.params.grid.q_resolution),
                   o.integer("fiber_resolution", cfg_.params.grid.fiber_resolution)};
    return g.refined(opt_.refine);
  }

  using GridKey = std::tuple<int, int, int>;

  /// r-series on a grid, computed once per (K, grid) across tasks.
  const std::vector<double>& cached_r(int steps, const SamplingGrid& g) {
    const GridKey key{steps, g.q_resolution, g.fiber_resolution};
    auto it = r_cache_.find(key);
    if (it == r_cache_.end()) it = r_cache_.emplace(key, r_sequence(cfg_.map, cfg_.form, steps, g)).first;
    return it->second;
  }

  void check_refinement(const std::string& task, int steps, const SamplingGrid& g,
                        const std::vector<double>& r) {
    if (!cfg_.params.refinement_check) return;
    const SamplingGrid fine = g.refined(cfg_.params.refinement_factor);
    const auto& rf = cached_r(steps, fine);
    const double a = r.back(), b = rf.back();
    const double scale = std::max(std::abs(a), 1e-9);
    const double rel = std::abs(b - a) / scale;
    const bool ok = std::abs(b - a) <= 1e-9 || rel < cfg_.params.refinement_limit;
    refinement_.push_back(Json{{"task", task},
                               {"grid", grid_json(g, cfg_.dim)},
                               {"refined_grid", grid_json(fine, cfg_.dim)},
                               {"r_K", a},
                               {"r_K_refined", b},
                               {"relative_change", rel},
                               {"accepted", ok}});
    if (!ok) fail_check(task + ": grid refinement changed r_K by more than 1%");
  }

  DissipationReport dissipation(const TaskSpec& spec, const TaskOptions& o, bool with_bound) {
    const int steps = o.integer("K", cfg_.params.steps);
    const SamplingGrid g = task_grid(o);
    DissipationReport rep;
    rep.map_id = cfg_.map.id();
    rep.lambda_id = cfg_.form.id();
    rep.steps = steps;
    rep.grid = g;
    rep.r_series = cached_r(steps, g);
    rep.chi = chi_estimate(rep.r_series);
    rep.verdict = classify(rep.r_series, rep.chi, cfg_.params.thresholds);
    if (o.flag("lyapunov", false)) rep.lyap_hat = lyapunov_estimate(cfg_.map, std::max(steps, 8), g);
    if (with_bound)
      rep.bound_check = verify_bound(cfg_.map, rep.r_series, cfg_.conservative,
                                     o.number("tolerance", cfg_.params.bound_tolerance), cfg_.params.thresholds);
    check_refinement(spec.id, steps, g, rep.r_series);
    std::ostringstream csv;
    csv << "k,r_k\n";
    for (std::size_t k = 0; k < rep.r_series.size(); ++k) csv << (k + 1) << ',' << csv_number(rep.r_series[k]) << '\n';
    emit(file(spec.id, "_r_series.csv"), csv.str());
    const Json doc = dissipation_json(rep, cfg_.dim);
    emit(file(spec.id, "_dissipation_report.json"), doc.dump(2) + "\n");
    return rep;
  }

  Json dispatch(const TaskSpec& spec) {
    const TaskOptions o{spec.options};
    const int n = cfg_.dim;
    if (spec.type == "r_sequence" || spec.type == "verify_bound") {
      const bool bound = spec.type == "verify_bound";
      const DissipationReport rep = dissipation(spec, o, bound);
      Json j = dissipation_json(rep, n);
      j["relative_residual"] = rep.chi.relative_residual;
      j["series"] = series_json("k", "r_k", index_axis(rep.r_series.size(), 1.0), rep.r_series);
      if (bound) {
        const BoundCheck& b = *rep.bound_check;
        if (!b.pass) fail_check(spec.id + ": chi_hat below s_target - tolerance");
        if (b.conservative_contradiction) fail_check(spec.id + ": conservative map classified Hyperbolic");
      }
      return j;
    }
    if (spec.type == "lyapunov") {
      const int steps = o.integer("K", cfg_.params.steps);
      const SamplingGrid g = task_grid(o);
      return Json{{"map_id", cfg_.map.id()},
                  {"K", steps},
                  {"grid", grid_json(g, n)},
                  {"lyap_hat", lyapunov_estimate(cfg_.map, steps, g)}};
    }
    if (spec.type == "homology") return homology(cfg_.map.homology_action(), n);
    if (spec.type == "shape") return shape(spec, o);
    if (spec.type == "displacement") return displacement(spec, o);
    if (spec.type == "growth") return growth(spec, o);
    if (spec.type == "duality") return duality(spec, o);
    throw Error("unknown task type '" + spec.type + "'");
  }

  static Json spectral(const IntMatrix& m) {
    Json j;
    j["matrix"] = matrix_json(m);
    j["det"] = m.det().str();
    j["eigen_moduli"] = eigen_moduli(m);
    j["s_value"] = s_value(m);
    j["hyperbolic"] = is_hyperbolic(m);
    const Periodicity p = is_periodic(m);
    j["periodic"] = p.periodic;
    j["order"] = p.order ? Json(*p.order) : Json(nullptr);
    return j;
  }

  static Json homology(const IntMatrix& action, int n) {
    Json j = spectral(action);
    if (n == 2) {
      try {
        const ABlock a = a_block(action);
        Json ab = spectral(a.block);
        ab["l"] = a.l;
        ab["m"] = a.m;
        ab["theta_sign"] = a.theta_sign;
        j["a_block"] = ab;
      } catch (const Error& e) {
        j["a_block"] = Json{{"error", e.what()}};
      }
    }
    return j;
  }

  StarDomain form_shape(const TaskOptions& o) const {
    const auto dirs = sphere_grid(cfg_.dim, o.integer("directions", cfg_.params.directions));
    return flat_shape(cfg_.form, dirs, o.integer("q_resolution", cfg_.params.shape_q_resolution));
  }

  Json shape(const TaskSpec& spec, const TaskOptions& o) {
    const StarDomain s = form_shape(o);
    std::ostringstream csv;
    s.write_csv(csv);
    emit(file(spec.id, "_shape.csv"), csv.str());
    const auto& rho = s.radii();
    const StarDomain ball = StarDomain::ball(s.directions());
    return Json{{"lambda_id", cfg_.form.id()},
                {"directions", s.size()},
                {"q_resolution", o.integer("q_resolution", cfg_.params.shape_q_resolution)},
                {"inner_approximation", true},
                {"rho_min", *std::min_element(rho.begin(), rho.end())},
                {"rho_max", *std::max_element(rho.begin(), rho.end())},
                {"delta_to_unit_ball", delta(s, ball)}};
  }

  Json displacement(const TaskSpec& spec, const TaskOptions& o) {
    const IntMatrix m = matrix_option(o, "matrix", bound_matrix(cfg_.map));
    const int k_max = o.integer("k_max", cfg_.params.k_max);
    const auto dirs = sphere_grid(m.size(), o.integer("directions", m.size() == 2 ? 4096 : 1024));
    const std::string domain = o.text("domain", "ball");
    StarDomain a = StarDomain::ball(dirs);
    if (domain == "form") {
      if (m.size() != cfg_.dim) throw ConfigErrors({spec.id + ": domain 'form' needs an n x n matrix"});
      a = flat_shape(cfg_.form, dirs, o.integer("q_resolution", cfg_.params.shape_q_resolution));
    } else if (domain != "ball") {
      throw ConfigErrors({spec.id + ": unknown domain '" + domain + "' (expected ball|form)"});
    }
    const DisplacementEstimate d = displacement_estimate(m, a, k_max);
    std::ostringstream csv;
    csv << "k,delta\n";
    for (std::size_t k = 0; k < d.deltas.size(); ++k) csv << (k + 1) << ',' << csv_number(d.deltas[k]) << '\n';
    emit(file(spec.id, "_displacement.csv"), csv.str());
    return Json{{"matrix", matrix_json(m)},
                {"domain", domain},
                {"k_max", k_max},
                {"rate", d.rate},
                {"s_value", s_value(m)},
                {"series", series_json("k", "delta", index_axis(d.deltas.size(), 1.0), d.deltas)}};
  }

  void write_growth_csv(const std::string& id, const GrowthTable& t) {
    std::ostringstream csv;
    csv << "n,length,log_length\n";
    for (std::size_t i = 0; i < t.step.size(); ++i)
      csv << t.step[i] << ',' << t.length[i] << ',' << csv_number(t.log_length[i]) << '\n';
    emit(file(id, "_growth.csv"), csv.str());
  }

  static Json growth_series(const GrowthTable& t) {
    std::vector<double> xs(t.step.begin(), t.step.end());
    return series_json("n", "log_length", xs, t.log_length);
  }

  Json growth(const TaskSpec& spec, const TaskOptions& o) {
    const int steps = o.integer("N", cfg_.params.growth_steps);
    const std::string mode = o.text("mode", "abelian");
    if (mode == "free") {
      const Json* images = o.get("images");
      if (!images || !images->is_array() || images->empty())
        throw ConfigErrors({spec.id + ": free growth needs 'images' (one word per generator)"});
      FreeAutomorphism sigma;
      for (const auto& w : *images) {
        if (!w.is_string()) throw ConfigErrors({spec.id + ": images must be strings"});
        sigma.images.push_back(GroupWord::parse(w.get<std::string>()));
      }
      const GroupWord w = GroupWord::parse(o.text("word", "a"));
      const auto cap = static_cast<std::size_t>(o.integer("cap", static_cast<int>(cfg_.params.word_cap)));
      const GrowthTable t = free_growth_table(sigma, w, steps, cap);
      write_growth_csv(spec.id, t);
      return Json{{"mode", mode}, {"word", w.str()}, {"N", steps}, {"cap", cap}, {"rate", t.rate},
                  {"series", growth_series(t)}};
    }
    if (mode != "abelian") throw ConfigErrors({spec.id + ": unknown growth mode '" + mode + "'"});
    const IntMatrix m = matrix_option(o, "matrix", bound_matrix(cfg_.map));
    if (!m.is_unimodular()) throw ConfigErrors({spec.id + ": growth matrix must have |det| = 1"});
    const auto samples = classes_option(o, rng_, m.size());
    if (steps < 10) throw ConfigErrors({spec.id + ": abelian growth needs N >= 10"});
    // Keep the table of the class and time direction that realize the max.
    GrowthTable best;
    bool first = true;
    Json per_class = Json::array();
    const IntMatrix inv = m.inverse();
    for (const auto& g : samples) {
      const GrowthTable fwd = abelian_growth_table(m, g, steps), bwd = abelian_growth_table(inv, g, steps);
      per_class.push_back(Json{{"class", g}, {"forward", fwd.rate}, {"backward", bwd.rate}});
      for (const GrowthTable* t : {&fwd, &bwd})
        if (first || t->rate > best.rate) {
          best = *t;
          first = false;
        }
    }
    write_growth_csv(spec.id, best);
    return Json{{"mode", mode},
                {"matrix", matrix_json(m)},
                {"N", steps},
                {"bar_s", best.rate},
                {"s_value", s_value(m)},
                {"classes", per_class},
                {"series", growth_series(best)}};
  }

  Json duality(const TaskSpec& spec, const TaskOptions& o) {
    const Json* mj = o.get("metric");
    if (!mj) throw ConfigErrors({spec.id + ": duality needs 'metric'"});
    Reader r;
    auto g = r.real_matrix(*mj, spec.id + ".metric");
    if (!g) throw ConfigErrors(r.errors);
    const FlatMetric metric(*g);
    const int n = metric.dim();
    const auto classes = classes_option(o, rng_, n);
    const auto dirs = sphere_grid(n, o.integer("directions", n == 2 ? 256 : 1024));
    const DualityReport rep = duality_check(metric, classes, dirs, o.integer("q_resolution", 4));
    const Json doc{{"metric", matrix_json(rep.metric)}, {"worst_margin", rep.worst_margin}, {"pass", rep.pass}};
    emit(file(spec.id, "_duality.json"), doc.dump(2) + "\n");
    if (!rep.pass) fail_check(spec.id + ": duality inequality violated");
    Json j = doc;
    j["classes"] = classes;
    return j;
  }

  const ExperimentConfig& cfg_;
  RunOptions opt_;
  SeededRng rng_;
  std::filesystem::path out_dir_;
  Json refinement_ = Json::array();
  std::map<GridKey, std::vector<double>> r_cache_;
  RunResult result_;
};

}  // namespace detail

/// Executes every task of `cfg` in order. Check failures (bound, duality,
/// refinement) are collected in the result; task errors propagate.
inline RunResult run(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  if (!(opt.refine > 0.0)) throw ConfigErrors({"--refine must be positive"});
  return detail::Runner(cfg, opt).run();
}

/// Writes the series of one task of an aggregate report as a two-column
/// whitespace-separated file and returns its path.
inline std::string emit_plot_data(const Json& report, const std::string& task_id, const std::string& out_dir) {
  const Json* task = nullptr;
  for (const auto& t : report.at("tasks"))
    if (t.at("id") == task_id) task = &t;
  if (!task) throw Error("report has no task '" + task_id + "'");
  const Json& res = task->at("result");
  auto it = res.find("series");
  if (it == res.end()) throw Error("task '" + task_id + "' has no series");
  const Json& s = *it;
  std::ostringstream os;
  os << "# " << s.at("columns")[0].get<std::string>() << ' ' << s.at("columns")[1].get<std::string>() << '\n';
  os << std::setprecision(17);
  for (const auto& row : s.at("rows")) os << row[0].get<double>() << ' ' << row[1].get<double>() << '\n';
  std::filesystem::create_directories(out_dir);
  const auto path = std::filesystem::path(out_dir) / (task_id + ".dat");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << os.str();
  return path.string();
}

inline Json read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open report " + path);
  return Json::parse(in);
}

}  // namespace contactlab
