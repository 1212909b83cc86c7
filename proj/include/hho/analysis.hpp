// Error measurement, convergence studies and CSV reporting.
#ifndef HHO_ANALYSIS_HPP
#define HHO_ANALYSIS_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hho/assembly.hpp"
#include "hho/mesh.hpp"
#include "hho/problems.hpp"

namespace hho {

/// (log e_prev - log e_next) / log 2; empty unless both errors are positive and finite.
std::optional<double> eoc(double e_prev, double e_next);

struct ErrorReport {
  double energy = 0.0;          ///< ||u_h - I_h u||_{U,h}
  double l2_u = 0.0;            ///< ||u_T - pi^l u|| over all elements
  std::optional<double> l2_p;   ///< ||p_h - pi^k p||, absent if p is unknown
  double cf_min = 0.0, cf_max = 0.0;
};

ErrorReport measure_errors(const BrinkmanSystem &system, const DiscreteSolution &solution);

/// Energy norm sqrt(sum_T v_T^T A_T v_T) of a global velocity vector.
double energy_norm(const BrinkmanSystem &system, const Eigen::VectorXd &velocity);

struct ConvergenceRecord {
  std::string case_id;
  int k = 0;
  int level = 0;
  double h = 0.0;
  std::size_t ndof = 0;
  std::size_t nnz = 0;
  double err_energy = 0.0;
  std::optional<double> eoc_energy;
  double err_l2u = 0.0;
  std::optional<double> eoc_l2u;
  std::optional<double> err_l2p;
  std::optional<double> eoc_l2p;
  double t_asm_s = 0.0;
  double t_sol_s = 0.0;

  // Diagnostics, not serialized.
  std::size_t n_elements = 0;
  double residual = 0.0;
  double mass_residual = 0.0;
  double cf_min = 0.0, cf_max = 0.0;
};

struct ConvergenceOptions {
  int k = 1;
  int levels = 4;
  int base_n = -1;            ///< cells per unit length; < 0 selects the case default grid
  bool condense = true;
  int quad_boost = -1;        ///< < 0 keeps the case default
  std::string mesh_file;      ///< replaces the generated base mesh when non-empty
  std::optional<SplitPattern> pattern; ///< empty keeps the case default
  std::function<void(const ConvergenceRecord &)> on_level; ///< called after every level
};

/// Base mesh of a study: a mesh file re-tagged with the case regions, or the
/// structured grid.
Mesh base_mesh(const ManufacturedCase &problem, const ConvergenceOptions &options);

/// Solves on the base mesh and on levels-1 successive uniform refinements.
std::vector<ConvergenceRecord> run_convergence(const ManufacturedCase &problem,
                                               const ConvergenceOptions &options);

inline constexpr const char *csv_header =
    "case,k,level,h,ndof,nnz,err_energy,eoc_energy,err_l2u,eoc_l2u,err_l2p,eoc_l2p,t_asm_s,t_sol_s";

std::string format_csv_row(const ConvergenceRecord &record);
/// Inverse of format_csv_row; throws InvalidInput on malformed rows.
ConvergenceRecord parse_csv_row(const std::string &line);

/// Appends rows to a CSV file, writing the header if the file is empty and
/// rejecting files whose header differs. Every row is flushed.
class CsvAppender {
public:
  explicit CsvAppender(std::string path);
  void append(const ConvergenceRecord &record);
  const std::string &path() const { return path_; }

private:
  std::string path_;
};

} // namespace hho

#endif
