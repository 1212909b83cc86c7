// Command-line driver: convergence studies and local operator checks.
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hho/analysis.hpp"
#include "hho/errors.hpp"
#include "hho/problems.hpp"
#include "hho/property_checks.hpp"

namespace {

enum ExitCode { exit_ok = 0, exit_invalid = 1, exit_solver = 2 };

struct RunArgs {
  std::string case_name = "family";
  std::optional<double> mu, nu;
  std::string cf_omega;
  double alpha = hho::philips_default_alpha;
  double ratio = 100.0;
  std::string kellogg_bc = "pressure";
  int k = 1;
  int levels = 4;
  int base_n = -1;
  bool no_condense = false;
  int quad_boost = -1;
  std::string mesh_file;
  std::string split; // empty keeps the case default
  std::string out = "results.csv";
};

double parse_extended_real(const std::string &s) {
  if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception &) {
    throw hho::InvalidInput("not a number: '" + s + "'");
  }
  if (used != s.size()) throw hho::InvalidInput("not a number: '" + s + "'");
  return v;
}

hho::ManufacturedCase make_case(const RunArgs &a) {
  if (a.case_name == "family") {
    std::optional<double> cf;
    if (!a.cf_omega.empty()) cf = parse_extended_real(a.cf_omega);
    return hho::brinkman_family(a.mu.value_or(1.0), a.nu.value_or(1.0), cf);
  }
  if (a.mu || a.nu || !a.cf_omega.empty())
    throw hho::InvalidInput("--mu, --nu and --cf-omega only apply to the family case");
  if (a.case_name == "philips") return hho::philips_case(a.alpha);
  return hho::kellogg_case(a.ratio, a.kellogg_bc == "flux" ? hho::BoundaryKind::normal_flux
                                                            : hho::BoundaryKind::pressure);
}

std::string optional_text(const std::optional<double> &x, const char *fmt) {
  if (!x) return "--";
  char buf[32];
  std::snprintf(buf, sizeof buf, fmt, *x);
  return buf;
}

int run(const RunArgs &a) {
  const hho::ManufacturedCase problem = make_case(a);
  hho::ConvergenceOptions options;
  options.k = a.k;
  options.levels = a.levels;
  options.base_n = a.base_n;
  options.condense = !a.no_condense;
  options.quad_boost = a.quad_boost;
  options.mesh_file = a.mesh_file;
  if (a.split == "diagonal") options.pattern = hho::SplitPattern::diagonal;
  if (a.split == "criss-cross") options.pattern = hho::SplitPattern::criss_cross;
  hho::CsvAppender csv(a.out);
  std::printf("%-22s %2s %5s %9s %9s %10s %6s %10s %6s %10s %6s %9s %9s\n", "case", "k", "level",
              "ndof", "nnz", "err_U", "eoc", "err_L2u", "eoc", "err_L2p", "eoc", "t_asm", "t_sol");
  options.on_level = [&](const hho::ConvergenceRecord &r) {
    csv.append(r);
    std::printf("%-22s %2d %5d %9zu %9zu %10.3e %6s %10.3e %6s %10s %6s %9.2e %9.2e\n",
                r.case_id.c_str(), r.k, r.level, r.ndof, r.nnz, r.err_energy,
                optional_text(r.eoc_energy, "%.2f").c_str(), r.err_l2u,
                optional_text(r.eoc_l2u, "%.2f").c_str(),
                optional_text(r.err_l2p, "%.3e").c_str(),
                optional_text(r.eoc_l2p, "%.2f").c_str(), r.t_asm_s, r.t_sol_s);
    std::fflush(stdout);
  };
  hho::run_convergence(problem, options);
  return exit_ok;
}

int check(const hho::PropertyCheckOptions &options) {
  bool all = true;
  for (const hho::CheckResult &r : hho::run_property_checks(options)) {
    std::printf("%s %-62s %.3e <= %.1e\n", r.passed() ? "PASS" : "FAIL", r.name.c_str(), r.value,
                r.tolerance);
    all = all && r.passed();
  }
  return all ? exit_ok : exit_solver;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Hybrid High-Order solver for the Brinkman problem"};
  app.require_subcommand(1);

  RunArgs args;
  CLI::App *run_cmd = app.add_subcommand("run", "Run a convergence study and append to a CSV file");
  run_cmd->add_option("--case", args.case_name, "Test case")
      ->check(CLI::IsMember({"family", "philips", "kellogg"}))
      ->required();
  run_cmd->add_option("--mu", args.mu, "Viscosity (family case, default 1)");
  run_cmd->add_option("--nu", args.nu, "Inverse permeability (family case, default 1)");
  run_cmd->add_option("--cf-omega", args.cf_omega,
                      "Global friction coefficient of the family case, 'inf' allowed (default nu/mu)");
  run_cmd->add_option("--alpha", args.alpha, "Philips case parameter");
  run_cmd->add_option("--ratio", args.ratio, "Kellogg permeability ratio");
  run_cmd->add_option("--kellogg-bc", args.kellogg_bc, "Kellogg boundary condition")
      ->check(CLI::IsMember({"pressure", "flux"}));
  run_cmd->add_option("--k", args.k, "Face polynomial degree");
  run_cmd->add_option("--levels", args.levels, "Number of meshes (1..6)");
  run_cmd->add_option("--base-n", args.base_n, "Base mesh cells per unit length");
  run_cmd->add_flag("--no-condense", args.no_condense, "Solve the full saddle-point system");
  run_cmd->add_option("--quad-boost", args.quad_boost, "Extra quadrature degree");
  run_cmd->add_option("--mesh-file", args.mesh_file, "ASCII base mesh");
  run_cmd->add_option("--split", args.split, "Structured split pattern")
      ->check(CLI::IsMember({"criss-cross", "diagonal"}));
  run_cmd->add_option("--out", args.out, "CSV output file");

  hho::PropertyCheckOptions check_options;
  CLI::App *check_cmd = app.add_subcommand("check", "Verify local operator invariants");
  check_cmd->add_option("--k-max", check_options.k_max, "Highest degree checked");
  check_cmd->add_option("--triangles", check_options.triangles, "Random triangles per degree");
  check_cmd->add_option("--seed", check_options.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_invalid;
  }

  try {
    if (*run_cmd) return run(args);
    return check(check_options);
  } catch (const hho::InvalidInput &e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return exit_invalid;
  } catch (const hho::CapabilityError &e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return exit_invalid;
  } catch (const hho::SolverError &e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return exit_solver;
  } catch (const hho::DiscretizationError &e) {
    std::cerr << "discretization failure: " << e.what() << '\n';
    return exit_solver;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_solver;
  }
}
