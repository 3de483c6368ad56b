// Acceptance run: one PASS/FAIL line per criterion, with timings.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <sys/wait.h>

#include "oracles.hpp"

using namespace contactlab;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = CONTACTLAB_CONFIG_DIR;
const IntMatrix kCat(2, {2, 1, 1, 1});

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double x, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << x;
  return os.str();
}

std::shared_ptr<const Hamiltonian> wavy_metric(int n, double amp) {
  auto h = std::make_shared<Hamiltonian>();
  h->n = n;
  h->weight = TrigSeries{1.0, {TrigTerm{amp, {1, 0, 0}, Trig::Cos}, TrigTerm{0.5 * amp, {0, 1, 0}, Trig::Sin}}};
  return h;
}

ContactMap comp(int n, std::vector<Primitive> p, const std::string& id) {
  return ContactMap::make_composite(n, std::move(p), id);
}

ContactForm smooth_form(double a, double b) {
  profiles::TrigPolynomial tp;
  tp.constant = 1.0;
  ProfileTerm t1;
  t1.base = TrigTerm{a, {1, 0, 0}, Trig::Cos};
  ProfileTerm t2;
  t2.base = TrigTerm{b, {0, 0, 0}, Trig::One};
  t2.theta_harmonic = 1;
  t2.theta_kind = Trig::Cos;
  tp.terms = {t1, t2};
  return ContactForm("smooth", 2, tp);
}

Eigen::MatrixXd random_gram(int n, double floor) {
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = oracle::uniform(-1, 1);
  Eigen::MatrixXd g = a * a.transpose() + floor * Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

std::vector<std::vector<std::int64_t>> basis_samples(int n) {
  std::vector<std::vector<std::int64_t>> out;
  for (int i = 0; i < n; ++i) {
    std::vector<std::int64_t> e(n, 0);
    e[i] = 1;
    out.push_back(e);
  }
  out.push_back(std::vector<std::int64_t>(n, 1));
  return out;
}

// 1. Cat-map lift: chi_hat in [0.94, 0.99] at K = 30 on the default grid, bound passes.
Outcome cat_map_bound() {
  const ContactMap f = comp(2, {canonical_lift(kCat)}, "cat");
  const BoundCheck b = verify_bound(f, ContactForm::round(2), 30, SamplingGrid::defaults(2));
  Outcome o;
  o.pass = b.chi_hat >= 0.94 && b.chi_hat <= 0.99 && b.pass && std::abs(b.s_target - oracle::kCatEntropy) < 1e-9;
  o.detail = "chi_hat=" + fmt(b.chi_hat) + " s=" + fmt(b.s_target) + " bound " + (b.pass ? "pass" : "fail");
  return o;
}

// 2. ShearA/ShearB strict on a 32^3 grid; I_f non-periodic, A_I = id.
Outcome shear_sharpness() {
  Outcome o;
  double worst = 0.0;
  for (const Primitive& p : {Primitive{primitives::ShearA{}}, Primitive{primitives::ShearB{}}}) {
    const ContactMap f = comp(2, {p}, kind_name(p));
    for (int i = 0; i < 32; ++i)
      for (int j = 0; j < 32; ++j)
        for (int k = 0; k < 32; ++k)
          worst = std::max(worst,
                           std::abs(conformal_factor(f, ContactForm::round(2), make_point(i / 32.0, j / 32.0, k / 32.0)) - 1.0));
    const IntMatrix h = f.homology_action();
    const ABlock a = a_block(h);
    const bool ok = !is_periodic(h).periodic && a.block.is_identity() && is_periodic(a.block).periodic;
    o.pass = o.pass && ok;
    o.detail += kind_name(p) + ": I periodic=" + (is_periodic(h).periodic ? "yes" : "no") + ", A_I=" +
                a.block.to_string() + "; ";
  }
  o.pass = o.pass && worst < 1e-9;
  o.detail += "max|c-1|=" + fmt(worst, 3);
  return o;
}

// 3. Conservative maps (strict primitives and conjugates by strict maps) are never Hyperbolic.
Outcome conservative_elliptic() {
  using namespace primitives;
  const std::vector<ContactMap> round_strict = {
      ContactMap(2),
      comp(2, {ShearA{}}, "shear_a"),
      comp(2, {ShearB{}}, "shear_b"),
      comp(2, {ShearA{true}}, "shear_a_inverse"),
      comp(2, {ShearB{true}}, "shear_b_inverse"),
      comp(2, {ReebTranslation{0.3}}, "reeb"),
      comp(2, {ReebTranslation{-0.7}}, "reeb_back"),
      comp(2, {ShearA{}, ShearB{}}, "shear_ab"),
      comp(2, {ShearB{true}, ShearA{}, ShearB{}}, "conj_b_a"),
      comp(2, {ReebTranslation{-0.2}, ShearA{}, ReebTranslation{0.2}}, "conj_reeb_a"),
      comp(3, {ReebTranslation{0.45}}, "reeb3"),
  };
  Outcome o;
  int count = 0;
  const SamplingGrid g2{16, 64}, g3{6, 128};
  for (const auto& f : round_strict) {
    const auto r = r_sequence(f, ContactForm::round(f.dim()), 30, f.dim() == 2 ? g2 : g3);
    const Verdict v = classify(r, chi_estimate(r));
    ++count;
    if (v != Verdict::EllipticConsistent) {
      o.pass = false;
      o.detail += f.id() + "=" + to_string(v) + " ";
    }
  }
  // Flows of degree-one Hamiltonians preserve their own level form.
  for (int n : {2, 3}) {
    auto h = wavy_metric(n, 0.3);
    const ContactForm level("level", n, profiles::HamiltonianLevel{h});
    const ContactMap f = comp(n, {contact_flow(h, 0.5)}, "flow");
    const auto r = r_sequence(f, level, 30, n == 2 ? SamplingGrid{8, 32} : SamplingGrid{4, 64});
    const Verdict v = classify(r, chi_estimate(r));
    ++count;
    if (v != Verdict::EllipticConsistent) {
      o.pass = false;
      o.detail += "flow" + std::to_string(n) + "=" + to_string(v) + " ";
    }
  }
  o.detail += std::to_string(count) + " conservative maps checked";
  return o;
}

// 4. bar_s = s for 20 random hyperbolic matrices at N = 40.
Outcome abelian_growth_matches() {
  Outcome o;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int k = t % 2 ? 3 : 2;
    const IntMatrix m = oracle::random_hyperbolic_sl(k, 5);
    worst = std::max(worst, std::abs(abelian_bar_s(m, basis_samples(k), 40) - s_value(m)));
  }
  o.pass = worst <= 1e-2;
  o.detail = "max |bar_s - s| = " + fmt(worst, 3) + " over 20 matrices";
  return o;
}

// 5. Fibonacci substitution grows at log golden ratio; the swap does not grow.
Outcome free_growth_rates() {
  FreeAutomorphism fib{{GroupWord::parse("ab"), GroupWord::parse("a")}};
  FreeAutomorphism swap{{GroupWord::parse("b"), GroupWord::parse("a")}};
  const double r = free_growth(fib, GroupWord::parse("a"), 25);
  const double s = free_growth(swap, GroupWord::parse("ab"), 25);
  Outcome o;
  o.pass = std::abs(r - oracle::kFibRate) <= 1e-3 && std::abs(s) <= 1e-12;
  o.detail = "fibonacci=" + fmt(r) + " (target " + fmt(oracle::kFibRate) + "), swap=" + fmt(s);
  return o;
}

// 6. Shape calculus invariants on 100 randomized instances each.
Outcome shape_calculus() {
  Outcome o;
  int failures = 0;
  const auto dirs = sphere_grid(2, 256);
  for (int t = 0; t < 100; ++t) {
    // monotonicity
    const ContactForm f1 = smooth_form(oracle::uniform(-0.4, 0.4), oracle::uniform(-0.2, 0.2));
    profiles::TrigPolynomial bigger = std::get<profiles::TrigPolynomial>(f1.profile_kind());
    bigger.constant += oracle::uniform(0.0, 0.5);
    const auto r1 = flat_shape(f1, dirs, 8).radii(), r2 = flat_shape(ContactForm("bigger", 2, bigger), dirs, 8).radii();
    for (std::size_t i = 0; i < dirs.size(); ++i) failures += r1[i] > r2[i];
    // scaling
    const double c = oracle::uniform(0.1, 10);
    const auto rs = flat_shape(f1.scaled(c), dirs, 8).radii();
    for (std::size_t i = 0; i < dirs.size(); ++i) failures += std::abs(rs[i] - c * r1[i]) > 4e-16 * rs[i];
    // delta metric axioms
    auto random_domain = [&] {
      std::vector<double> rho;
      for (std::size_t i = 0; i < dirs.size(); ++i) rho.push_back(oracle::uniform(0.2, 5.0));
      return StarDomain(dirs, rho);
    };
    const StarDomain a = random_domain(), b = random_domain(), d = random_domain();
    failures += delta(a, b) != delta(b, a);
    failures += delta(a, a) != 0.0 || !(delta(a, b) > 0.0);
    failures += delta(a, d) > delta(a, b) + delta(b, d) + 1e-12;
  }
  const int axiom_failures = failures;
  // group action law and equivariance
  const auto fine = sphere_grid(2, 16384);
  const auto eq_dirs = sphere_grid(2, 4096);
  double worst_group = 0.0, worst_equiv = 0.0;
  for (int t = 0; t < 100; ++t) {
    const ContactForm form = smooth_form(oracle::uniform(-0.1, 0.1), oracle::uniform(-0.05, 0.05));
    const StarDomain a = flat_shape(form, fine, 4);
    const IntMatrix i = oracle::random_sl(2, 2), j = oracle::random_sl(2, 2);
    worst_group = std::max(worst_group, delta(act(i * j, a), act(i, act(j, a))));

    const IntMatrix m = oracle::random_sl(2, 3);
    const ContactMap g = comp(2, {canonical_lift(m.inverse())}, "g");
    const ContactForm round = ContactForm::round(2);
    const auto qs = torus_grid(2, 4);
    std::vector<double> rho;
    for (const auto& u : eq_dirs) {
      double lo = std::numeric_limits<double>::infinity();
      for (const auto& q : qs) {
        const CEPoint x{u, q};
        lo = std::min(lo, form.profile(g(x)) * conformal_factor(g, round, x));
      }
      rho.push_back(lo);
    }
    const StarDomain pulled(eq_dirs, rho);
    worst_equiv = std::max(worst_equiv, delta(pulled, act(m.inverse().transpose(), flat_shape(form, eq_dirs, 4))));
  }
  o.pass = axiom_failures == 0 && worst_group <= 1e-3 && worst_equiv <= 1e-3;
  o.detail = "monotonicity/scaling/metric violations=" + std::to_string(axiom_failures) +
             ", group-law max delta=" + fmt(worst_group, 3) + ", equivariance max delta=" + fmt(worst_equiv, 3);
  return o;
}

// 7. Displacement of the unit ball grows at rate s.
Outcome displacement_matches() {
  Outcome o;
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const int n = t % 2 ? 3 : 2;
    const IntMatrix m = oracle::random_hyperbolic_sl(n, 5);
    const StarDomain ball = StarDomain::ball(sphere_grid(n, n == 2 ? 256 : 1024));
    worst = std::max(worst, std::abs(displacement_estimate(m, ball, 20).rate - s_value(m)));
  }
  o.pass = worst <= 1e-2;
  o.detail = "max |disp - s| = " + fmt(worst, 3) + " over 10 matrices";
  return o;
}

// 8. Duality inequality for flat metrics.
Outcome duality() {
  Outcome o;
  std::vector<Eigen::MatrixXd> metrics = {Eigen::MatrixXd::Identity(2, 2),
                                          (Eigen::MatrixXd(2, 2) << 4, 0, 0, 1).finished(), random_gram(2, 0.3),
                                          random_gram(3, 0.3)};
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& g : metrics) {
    const int n = static_cast<int>(g.rows());
    std::vector<std::vector<std::int64_t>> classes = basis_samples(n);
    for (int c = 0; c < 8; ++c) {
      std::vector<std::int64_t> v(n);
      for (auto& x : v) x = oracle::uniform_int(-5, 5);
      if (std::any_of(v.begin(), v.end(), [](std::int64_t x) { return x != 0; })) classes.push_back(v);
    }
    const DualityReport rep = duality_check(FlatMetric(g), classes, sphere_grid(n, n == 2 ? 256 : 1024), 4);
    worst = std::min(worst, rep.worst_margin);
    o.pass = o.pass && rep.pass && rep.worst_margin >= 0.0;
  }
  o.detail = "4 metrics, worst margin = " + fmt(worst, 3);
  return o;
}

// 9. AD vs finite differences, cocycle identity, grid refinement.
Outcome numerical_hygiene() {
  using namespace primitives;
  const IntMatrix m3(3, {1, 1, 0, 1, 2, 1, 0, 1, 2});
  std::vector<ContactMap> maps = {
      comp(2, {canonical_lift(kCat)}, "cat"),        comp(2, {canonical_lift(IntMatrix(2, {0, 1, 1, 0}))}, "swap"),
      comp(2, {ShearA{}}, "shear_a"),                 comp(2, {ShearB{}}, "shear_b"),
      comp(2, {ShearA{true}}, "shear_a_inverse"),     comp(2, {ShearB{true}}, "shear_b_inverse"),
      comp(2, {ReebTranslation{0.3}}, "reeb"),        comp(2, {contact_flow(wavy_metric(2, 0.3), 0.4)}, "flow"),
      comp(3, {canonical_lift(m3)}, "lift3"),         comp(3, {ReebTranslation{0.3}}, "reeb3"),
      comp(3, {contact_flow(wavy_metric(3, 0.3), 0.4)}, "flow3"),
  };
  double worst_fd = 0.0;
  for (const auto& f : maps)
    for (int t = 0; t < 50; ++t) {
      const CEPoint x = oracle::random_point(f.dim());
      const Eigen::MatrixXd ad = map_jacobian(f, x).matrix;
      worst_fd = std::max(worst_fd, (ad - map_jacobian_fd(f, x)).norm() / ad.norm());
    }
  double worst_cocycle = 0.0;
  for (int n : {2, 3}) {
    std::vector<const ContactMap*> same;
    for (const auto& f : maps)
      if (f.dim() == n) same.push_back(&f);
    const ContactForm form = oracle::random_trig_form(n, 0.5);
    for (int t = 0; t < 100; ++t) {
      const ContactMap& f = *same[t % same.size()];
      const ContactMap& g = *same[(t / same.size() + t) % same.size()];
      const CEPoint x = oracle::random_point(n);
      const double lhs = conformal_factor(compose(f, g), form, x);
      const double rhs = conformal_factor(f, form, g(x)) * conformal_factor(g, form, x);
      worst_cocycle = std::max(worst_cocycle, std::abs(lhs - rhs) / std::max(1.0, rhs));
    }
  }
  double worst_refine = 0.0;
  const ContactForm wavy = smooth_form(0.3, 0.1);
  struct RefineCase {
    ContactMap f;
    ContactForm form;
    SamplingGrid grid;
  };
  for (const auto& [f, form, g] : {RefineCase{maps[0], ContactForm::round(2), SamplingGrid::defaults(2)},
                                   RefineCase{comp(2, {ShearA{}, canonical_lift(kCat)}, "shear_cat"), wavy, {32, 64}}}) {
    const double coarse = r_sequence(f, form, 30, g).back();
    const double refined = r_sequence(f, form, 30, g.refined(2.0)).back();
    worst_refine = std::max(worst_refine, std::abs(refined - coarse) / std::max(std::abs(coarse), 1e-12));
  }
  Outcome o;
  o.pass = worst_fd <= 1e-5 && worst_cocycle <= 1e-9 && worst_refine < 0.01;
  o.detail = "AD/FD rel err=" + fmt(worst_fd, 3) + ", cocycle residual=" + fmt(worst_cocycle, 3) +
             ", refinement change of r_K=" + fmt(100 * worst_refine, 3) + "%";
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CONTACTLAB_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 10. Repeated runs of every bundled config are byte-identical apart from the timestamp.
Outcome determinism(double elapsed_so_far) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path root = fs::temp_directory_path() / "contactlab_acceptance";
  fs::remove_all(root);
  int configs = 0, files = 0;
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(kConfigs))
    if (e.path().extension() == ".json") paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  for (const auto& cfg : paths) {
    const std::string name = cfg.stem().string();
    const fs::path a = root / (name + "_a"), b = root / (name + "_b");
    const int ea = run_cli("run " + cfg.string() + " --out " + a.string());
    const int eb = run_cli("run " + cfg.string() + " --out " + b.string());
    ++configs;
    if (ea != 0 || eb != 0) {
      o.pass = false;
      o.detail += name + " exit " + std::to_string(ea) + "/" + std::to_string(eb) + "; ";
    }
    for (const auto& f : fs::directory_iterator(a)) {
      const fs::path other = b / f.path().filename();
      ++files;
      bool same = fs::exists(other);
      if (same && f.path().filename() == "report.json") {
        Json ja = read_report(f.path().string()), jb = read_report(other.string());
        same = ja.contains("timestamp") && jb.contains("timestamp");
        ja.erase("timestamp");
        jb.erase("timestamp");
        same = same && ja.dump() == jb.dump();
      } else if (same) {
        same = slurp(f.path()) == slurp(other);
      }
      if (!same) {
        o.pass = false;
        o.detail += name + "/" + f.path().filename().string() + " differs; ";
      }
    }
  }
  const double total = elapsed_so_far + std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.pass = o.pass && total < 300.0;
  o.detail += std::to_string(configs) + " configs x2, " + std::to_string(files) + " artifacts compared; suite total " +
              fmt(total, 4) + " s";
  fs::remove_all(root);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget;
    std::function<Outcome()> check;
  };
  const auto start = std::chrono::steady_clock::now();
  auto since_start = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  const std::vector<Criterion> criteria = {
      {1, "cat-map spectral bound", 30, cat_map_bound},
      {2, "strict shears with nonperiodic action", 10, shear_sharpness},
      {3, "conservative maps are elliptic-consistent", 30, conservative_elliptic},
      {4, "abelian growth equals spectral rate", 10, abelian_growth_matches},
      {5, "free-group growth", 5, free_growth_rates},
      {6, "shape calculus invariants", 30, shape_calculus},
      {7, "displacement equals spectral rate", 10, displacement_matches},
      {8, "duality inequality for flat metrics", 10, duality},
      {9, "numerical hygiene", 60, numerical_hygiene},
      {10, "determinism of bundled runs", 300, [&] { return determinism(since_start()); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s %2d %s: %s [%.2f s, budget %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, c.budget, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
