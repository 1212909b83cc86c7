// Acceptance suite: exactness identities, convergence rates and system-level checks.
// Prints one PASS/FAIL line per criterion; exits non-zero if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "hho/analysis.hpp"
#include "hho/assembly.hpp"
#include "hho/basis.hpp"
#include "hho/problems.hpp"
#include "hho/property_checks.hpp"
#include "hho/quadrature.hpp"

using namespace hho;
using Eigen::Matrix2d;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

int failures = 0;

void line(bool pass, const std::string &name, const std::string &detail) {
  std::printf("%s  %-58s %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void info(const std::string &name, const std::string &detail) {
  std::printf("INFO  %-58s %s\n", name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char *f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char *f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char *f, double a, double b, double c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::string k_tag(int k) { return " k=" + std::to_string(k); }

double worst_mass_residual = 0.0;
bool ndof_matches = true;
std::string ndof_detail;

/// Unknowns after condensation predicted from the mesh: two components per
/// face polynomial on interior faces, one mean pressure per element, plus the
/// normal component on boundary faces when the boundary carries a pressure.
std::size_t predicted_ndof(const Mesh &mesh, const ManufacturedCase &c, int k) {
  std::size_t n = 2 * (k + 1) * mesh.n_interior_faces() + mesh.n_elements();
  if (c.bc == BoundaryKind::pressure) n += (k + 1) * mesh.n_boundary_faces();
  return n;
}

std::vector<ConvergenceRecord> study(const ManufacturedCase &c, int k, int levels = 4) {
  ConvergenceOptions options;
  options.k = k;
  options.levels = levels;
  std::vector<ConvergenceRecord> records = run_convergence(c, options);
  Mesh mesh = base_mesh(c, options);
  for (const ConvergenceRecord &r : records) {
    if (r.level > 0) mesh = refine_uniform(mesh);
    worst_mass_residual = std::max(worst_mass_residual, r.mass_residual);
    const std::size_t expected = predicted_ndof(mesh, c, k);
    if (r.ndof != expected) {
      ndof_matches = false;
      ndof_detail += " " + c.id + k_tag(k) + " level " + std::to_string(r.level) + ": " +
                     std::to_string(r.ndof) + " vs " + std::to_string(expected);
    }
  }
  return records;
}

void window(const std::string &name, const std::optional<double> &value, double lo, double hi) {
  const bool ok = value && *value >= lo && *value <= hi;
  line(ok, name, value ? fmt("EOC %.3f in [%.2f, %.2f]", *value, lo, hi) : "EOC unavailable");
}

std::string eoc_text(const std::optional<double> &x) { return x ? fmt("%.2f", *x) : "--"; }

// ---------------------------------------------------------------------------

void exactness_suite() {
  PropertyCheckOptions options;
  options.k_min = 0;
  options.k_max = 4;
  options.triangles = 25;
  std::map<std::string, CheckResult> by_name;
  for (const CheckResult &r : run_property_checks(options)) by_name[r.name] = r;

  auto report = [&](const std::string &label, const std::string &key, int k, double tol) {
    const auto it = by_name.find(key + "_k" + std::to_string(k));
    if (it == by_name.end()) {
      line(false, label + k_tag(k), "not evaluated");
      return;
    }
    line(it->second.value <= tol, label + k_tag(k), fmt("max defect %.2e <= %.0e", it->second.value, tol));
  };
  for (int k = 1; k <= 4; ++k)
    report("exactness: r_S o I_T = id on P^{k+1}", "stokes_reconstruction_exact_on_Pk+1", k, 1e-10);
  for (int k = 0; k <= 4; ++k)
    report("exactness: r_D o I_T = id on RTN^k", "darcy_reconstruction_exact_on_RTNk", k, 1e-10);
  for (int k = 1; k <= 4; ++k)
    report("exactness: s_S(I_T w, .) = 0 on P^{k+1}", "stokes_stabilization_polynomially_consistent",
           k, 1e-10);
  for (int k = 2; k <= 4; ++k)
    report("exactness: delta_D,T = 0", "darcy_cell_difference_vanishes", k, 1e-12);
}

ManufacturedCase test_field(double mu, double nu) {
  ManufacturedCase c;
  c.id = "zero";
  c.domain = {0.0, 1.0, 0.0, 1.0};
  c.region = [](const Point &) { return 0; };
  c.coefficients.mu = [mu](int) { return mu; };
  c.coefficients.nu = [nu](const Point &, int) { return nu; };
  c.coefficients.mu_min = c.coefficients.mu_max = mu;
  c.coefficients.nu_min = c.coefficients.nu_max = nu;
  c.bc = mu > 0.0 ? BoundaryKind::dirichlet : BoundaryKind::normal_flux;
  c.u = [](const Point &, int) { return Vector2d(0, 0); };
  c.grad_u = [](const Point &, int) { return Matrix2d(Matrix2d::Zero()); };
  c.p = [](const Point &) { return 0.0; };
  c.f = [](const Point &, int) { return Vector2d(0, 0); };
  c.g = [](const Point &, int) { return 0.0; };
  return c;
}

void coupling_identities() {
  const Mesh mesh = refine_uniform(
      build_rect_mesh({0, 1, 0, 1}, 2, [](const Point &) { return 0; }, SplitPattern::criss_cross));
  std::mt19937 rng(97);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int k = 0; k <= 4; ++k) {
    ManufacturedCase c = k == 0 ? test_field(0.0, 1.0) : test_field(1.0, 1.0);
    c.u = [](const Point &x, int) { return Vector2d(x.x() * x.x(), x.x() * x.y()); };
    c.grad_u = [](const Point &x, int) {
      Matrix2d g;
      g << 2 * x.x(), 0, x.y(), x.x();
      return g;
    };
    const BrinkmanSystem system(mesh, c, k);
    const SparseMatrix B = system.coupling_matrix();
    const std::size_t np = system.layout().n_pressure();
    VectorXd q(system.n_pressure()), v(system.n_velocity());
    for (Eigen::Index i = 0; i < q.size(); ++i) q(i) = coef(rng);
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = coef(rng);

    double div_w = 0.0, div_rd = 0.0;
    for (std::size_t t = 0; t < mesh.n_elements(); ++t) {
      const ScalarBasis pb = zero_mean_basis(mesh, t, k);
      const RTNBasis rtn = rtn_basis(mesh, t, k);
      const VectorXd r = system.local(t).darcy_reconstruction * system.gather(v, t);
      const QuadratureRule rule = element_quadrature(mesh, t, 2 * k + 2);
      for (std::size_t i = 0; i < rule.size(); ++i) {
        const double qv = pb.values(rule.points[i]).dot(q.segment(t * np, np));
        div_w += rule.weights[i] * 3.0 * rule.points[i].x() * qv;
        div_rd += rule.weights[i] * rtn.divergences(rule.points[i]).dot(r) * qv;
      }
    }
    const double e1 = std::abs(q.dot(B * system.interpolate_velocity()) + div_w);
    const double e2 = std::abs(q.dot(B * v) + div_rd);
    line(e1 <= 1e-11, "exactness: b_h(I_h w, q) = -(div w, q)" + k_tag(k), fmt("defect %.2e <= 1e-11", e1));
    line(e2 <= 1e-11, "exactness: b_h(v, q) = -(div r_D v, q)" + k_tag(k), fmt("defect %.2e <= 1e-11", e2));
  }
}

void family_suite() {
  struct Regime {
    const char *name;
    double mu, nu;
  };
  for (const Regime &reg : {Regime{"Stokes (1,0)", 1.0, 0.0}, Regime{"Brinkman (1,1)", 1.0, 1.0}}) {
    for (int k = 1; k <= 3; ++k) {
      const auto rec = study(brinkman_family(reg.mu, reg.nu), k);
      const ConvergenceRecord &r = rec.back();
      const std::string base = std::string("convergence: ") + reg.name;
      window(base + " energy" + k_tag(k), r.eoc_energy, k + 0.7, k + 1.3);
      window(base + " velocity L2" + k_tag(k), r.eoc_l2u, k + 1.7, k + 2.3);
      window(base + " pressure L2" + k_tag(k), r.eoc_l2p, k + 0.7, k + 1.3);
    }
  }
  for (int k = 0; k <= 3; ++k) {
    const auto rec = study(brinkman_family(0.0, 1.0), k);
    const ConvergenceRecord &r = rec.back();
    window("convergence: Darcy (0,1) energy" + k_tag(k), r.eoc_energy, k + 0.7, k + 1.3);
    window("convergence: Darcy (0,1) velocity L2 (no superconv.)" + k_tag(k), r.eoc_l2u, k + 0.7,
           k + 1.3);
  }
}

void philips_suite() {
  for (int k = 1; k <= 3; ++k) {
    const auto rec = study(philips_case(), k);
    const auto &e = rec.back().eoc_energy;
    line(e && *e >= k + 0.7, "Philips: energy EOC >= k+0.7" + k_tag(k),
         e ? fmt("EOC %.3f >= %.1f", *e, k + 0.7) : "EOC unavailable");
  }
}

bool strictly_decreasing(const std::vector<ConvergenceRecord> &rec) {
  for (std::size_t i = 1; i < rec.size(); ++i) {
    if (!(rec[i].err_energy < rec[i - 1].err_energy)) return false;
    if (!(rec[i].err_l2u < rec[i - 1].err_l2u)) return false;
    if (!rec[i].err_l2p || !rec[i - 1].err_l2p || !(*rec[i].err_l2p < *rec[i - 1].err_l2p)) return false;
  }
  return true;
}

std::string error_history(const std::vector<ConvergenceRecord> &rec) {
  std::string s = "u:";
  for (const auto &r : rec) s += fmt(" %.3e", r.err_l2u);
  s += " p:";
  for (const auto &r : rec) s += fmt(" %.3e", *r.err_l2p);
  return s;
}

void kellogg_suite() {
  for (int k = 1; k <= 4; ++k) {
    const auto rec = study(kellogg_case(), k);
    line(strictly_decreasing(rec), "Kellogg: all errors strictly decrease" + k_tag(k), error_history(rec));
    window("Kellogg: pressure L2" + k_tag(k), rec.back().eoc_l2p, 0.15, 0.30);
    window("Kellogg: velocity L2" + k_tag(k), rec.back().eoc_l2u, 0.05, 0.15);
  }
  // Lowest order, outside the asymptotic range on these meshes; reported only.
  const auto rec = study(kellogg_case(), 0);
  info("Kellogg k=0 (not a criterion)",
       "decreasing=" + std::string(strictly_decreasing(rec) ? "yes" : "no") + " EOC p " +
           eoc_text(rec.back().eoc_l2p) + " u " + eoc_text(rec.back().eoc_l2u) + "  " +
           error_history(rec));
}

void system_suite() {
  // Condensed versus full saddle-point solve.
  struct Case {
    ManufacturedCase c;
    int k;
  };
  std::vector<Case> cases = {{brinkman_family(1.0, 1.0), 1}, {brinkman_family(1.0, 0.0), 2},
                             {brinkman_family(0.0, 1.0), 0}, {brinkman_family(0.0, 1.0), 3},
                             {philips_case(), 1},            {kellogg_case(), 2}};
  double worst = 0.0;
  std::string worst_case;
  for (const Case &cs : cases) {
    ConvergenceOptions options;
    const Mesh mesh = refine_uniform(base_mesh(cs.c, options));
    const BrinkmanSystem system(mesh, cs.c, cs.k);
    const SolveResult a = system.solve(true), b = system.solve(false);
    worst_mass_residual = std::max({worst_mass_residual, a.report.mass_residual, b.report.mass_residual});
    const double rel = energy_norm(system, a.solution.velocity - b.solution.velocity) /
                       std::max(energy_norm(system, b.solution.velocity), 1e-300);
    if (rel >= worst) {
      worst = rel;
      worst_case = cs.c.id + k_tag(cs.k);
    }
  }
  line(worst <= 1e-10, "system: condensed = uncondensed (energy-relative)",
       fmt("max %.2e <= 1e-10", worst) + " (" + worst_case + ")");

  // Zero data.
  double zero = 0.0;
  const Mesh mesh = build_rect_mesh({0, 1, 0, 1}, 2, [](const Point &) { return 0; });
  for (const auto &[mu, nu, k] : {std::tuple{1.0, 0.0, 1}, std::tuple{1.0, 1.0, 2}, std::tuple{0.0, 1.0, 0}}) {
    const BrinkmanSystem system(mesh, test_field(mu, nu), k);
    for (bool condense : {true, false}) {
      const SolveResult r = system.solve(condense);
      zero = std::max({zero, r.solution.velocity.cwiseAbs().maxCoeff(),
                       r.solution.pressure.cwiseAbs().maxCoeff(), std::abs(r.solution.multiplier)});
    }
  }
  line(zero == 0.0, "system: zero data gives zero solution", fmt("max |x| = %.1e", zero));
}

} // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  exactness_suite();
  coupling_identities();
  family_suite();
  philips_suite();
  kellogg_suite();
  system_suite();
  line(ndof_matches, "system: condensed N_dof = 2(k+1)|F_i| + |T| on every run",
       ndof_matches ? "all runs (pressure boundary adds (k+1)|F_b|)" : ndof_detail);
  line(worst_mass_residual <= 1e-10, "system: discrete mass residual on every run",
       fmt("max %.2e <= 1e-10", worst_mass_residual));
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  line(seconds < 300.0, "runtime: whole suite under 5 minutes", fmt("%.1f s", seconds));
  std::printf("%s: %d failing criteria\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
