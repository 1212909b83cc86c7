// Errors, EOCs, the refinement driver and CSV serialization.
#include "hho/analysis.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "hho/basis.hpp"
#include "hho/errors.hpp"

namespace hho {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::optional<double> eoc(double e_prev, double e_next) {
  if (!(e_prev > 0.0) || !(e_next > 0.0) || !std::isfinite(e_prev) || !std::isfinite(e_next))
    return std::nullopt;
  return (std::log(e_prev) - std::log(e_next)) / std::log(2.0);
}

double energy_norm(const BrinkmanSystem &system, const VectorXd &velocity) {
  double sum = 0.0;
  for (std::size_t t = 0; t < system.mesh().n_elements(); ++t) {
    const VectorXd v = system.gather(velocity, t);
    sum += v.dot(system.local(t).A * v);
  }
  return std::sqrt(std::max(0.0, sum));
}

ErrorReport measure_errors(const BrinkmanSystem &system, const DiscreteSolution &solution) {
  const Mesh &mesh = system.mesh();
  const DofLayout &layout = system.layout();
  ErrorReport report;
  const VectorXd e = solution.velocity - system.interpolate_velocity();
  report.energy = energy_norm(system, e);

  const std::size_t nc = layout.n_cell_velocity(), np = layout.n_pressure();
  double l2u = 0.0;
  for (std::size_t t = 0; t < mesh.n_elements(); ++t) {
    const MatrixXd M = gram_matrix(mesh, t, element_basis(mesh, t, layout.l));
    const VectorXd d = e.segment(system.cell_offset(t), nc);
    for (Eigen::Index c = 0; c < 2; ++c) {
      const VectorXd dc = Eigen::Map<const VectorXd, 0, Eigen::InnerStride<2>>(d.data() + c,
                                                                                 nc / 2);
      l2u += dc.dot(M * dc);
    }
  }
  report.l2_u = std::sqrt(std::max(0.0, l2u));

  if (system.problem().p) {
    const VectorXd d = solution.pressure - system.project_pressure();
    double l2p = 0.0;
    for (std::size_t t = 0; t < mesh.n_elements(); ++t) {
      const MatrixXd M = gram_matrix(mesh, t, zero_mean_basis(mesh, t, layout.k));
      const VectorXd dt = d.segment(t * np, np);
      l2p += dt.dot(M * dt);
    }
    report.l2_p = std::sqrt(std::max(0.0, l2p));
  }

  report.cf_min = std::numeric_limits<double>::infinity();
  report.cf_max = 0.0;
  for (std::size_t t = 0; t < mesh.n_elements(); ++t) {
    report.cf_min = std::min(report.cf_min, system.local(t).friction);
    report.cf_max = std::max(report.cf_max, system.local(t).friction);
  }
  return report;
}

Mesh base_mesh(const ManufacturedCase &problem, const ConvergenceOptions &options) {
  if (!options.mesh_file.empty()) {
    const Mesh file_mesh = load_mesh(options.mesh_file);
    std::vector<std::array<std::size_t, 3>> elements;
    std::vector<int> regions;
    for (std::size_t t = 0; t < file_mesh.n_elements(); ++t) {
      elements.push_back(file_mesh.element(t));
      regions.push_back(problem.region(file_mesh.centroid(t)));
    }
    return Mesh(file_mesh.vertices(), std::move(elements), std::move(regions));
  }
  const SplitPattern pattern = options.pattern.value_or(problem.base_pattern);
  if (options.base_n > 0)
    return build_rect_mesh(problem.domain, options.base_n, problem.region, pattern);
  return build_rect_mesh(problem.domain, problem.base_nx, problem.base_ny, problem.region,
                         pattern);
}

std::vector<ConvergenceRecord> run_convergence(const ManufacturedCase &problem,
                                               const ConvergenceOptions &options) {
  if (options.levels < 1 || options.levels > 6)
    throw InvalidInput("number of levels must lie in 1..6");
  std::vector<ConvergenceRecord> records;
  Mesh mesh = base_mesh(problem, options);
  for (int level = 0; level < options.levels; ++level) {
    if (level > 0) mesh = refine_uniform(mesh);
    const BrinkmanSystem system(mesh, problem, options.k, options.quad_boost);
    const SolveResult result = system.solve(options.condense);
    const ErrorReport err = measure_errors(system, result.solution);

    ConvergenceRecord r;
    r.case_id = problem.id;
    r.k = options.k;
    r.level = level;
    r.h = mesh.h();
    r.ndof = result.report.ndof;
    r.nnz = result.report.nnz;
    r.err_energy = err.energy;
    r.err_l2u = err.l2_u;
    r.err_l2p = err.l2_p;
    r.t_asm_s = result.report.t_assembly;
    r.t_sol_s = result.report.t_solve;
    r.n_elements = mesh.n_elements();
    r.residual = result.report.residual;
    r.mass_residual = result.report.mass_residual;
    r.cf_min = err.cf_min;
    r.cf_max = err.cf_max;
    if (!records.empty()) {
      const ConvergenceRecord &prev = records.back();
      r.eoc_energy = eoc(prev.err_energy, r.err_energy);
      r.eoc_l2u = eoc(prev.err_l2u, r.err_l2u);
      if (prev.err_l2p && r.err_l2p) r.eoc_l2p = eoc(*prev.err_l2p, *r.err_l2p);
    }
    records.push_back(r);
    if (options.on_level) options.on_level(r);
  }
  return records;
}

namespace {

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_optional(const std::optional<double> &x) {
  return x ? format_real(*x) : std::string();
}

double parse_real(const std::string &s) {
  if (s.empty()) throw InvalidInput("CSV: empty numeric field");
  char *end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE)
    throw InvalidInput("CSV: bad number '" + s + "'");
  return v;
}

std::optional<double> parse_optional(const std::string &s) {
  if (s.empty()) return std::nullopt;
  return parse_real(s);
}

std::size_t parse_count(const std::string &s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw InvalidInput("CSV: bad integer '" + s + "'");
  return std::stoull(s);
}

} // namespace

std::string format_csv_row(const ConvergenceRecord &r) {
  if (r.case_id.find_first_of(",\n\"") != std::string::npos)
    throw InvalidInput("case id must not contain commas, quotes or newlines");
  std::ostringstream out;
  out << r.case_id << ',' << r.k << ',' << r.level << ',' << format_real(r.h) << ',' << r.ndof
      << ',' << r.nnz << ',' << format_real(r.err_energy) << ',' << format_optional(r.eoc_energy)
      << ',' << format_real(r.err_l2u) << ',' << format_optional(r.eoc_l2u) << ','
      << format_optional(r.err_l2p) << ',' << format_optional(r.eoc_l2p) << ','
      << format_real(r.t_asm_s) << ',' << format_real(r.t_sol_s);
  return out.str();
}

ConvergenceRecord parse_csv_row(const std::string &line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  if (fields.size() != 14)
    throw InvalidInput("CSV: expected 14 fields, got " + std::to_string(fields.size()));
  ConvergenceRecord r;
  r.case_id = fields[0];
  r.k = static_cast<int>(parse_count(fields[1]));
  r.level = static_cast<int>(parse_count(fields[2]));
  r.h = parse_real(fields[3]);
  r.ndof = parse_count(fields[4]);
  r.nnz = parse_count(fields[5]);
  r.err_energy = parse_real(fields[6]);
  r.eoc_energy = parse_optional(fields[7]);
  r.err_l2u = parse_real(fields[8]);
  r.eoc_l2u = parse_optional(fields[9]);
  r.err_l2p = parse_optional(fields[10]);
  r.eoc_l2p = parse_optional(fields[11]);
  r.t_asm_s = parse_real(fields[12]);
  r.t_sol_s = parse_real(fields[13]);
  return r;
}

CsvAppender::CsvAppender(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_);
  std::string first;
  if (in && std::getline(in, first)) {
    if (!first.empty() && first.back() == '\r') first.pop_back();
    if (first != csv_header)
      throw InvalidInput("existing file " + path_ + " has a different CSV header");
    return;
  }
  in.close();
  std::ofstream out(path_, std::ios::app);
  if (!out) throw InvalidInput("cannot open " + path_ + " for writing");
  out << csv_header << '\n';
  out.flush();
}

void CsvAppender::append(const ConvergenceRecord &record) {
  std::ofstream out(path_, std::ios::app);
  if (!out) throw InvalidInput("cannot open " + path_ + " for writing");
  out << format_csv_row(record) << '\n';
  out.flush();
}

} // namespace hho
