// Global HHO system for the Brinkman problem: assembly, boundary conditions,
// zero-mean pressure constraint, static condensation and sparse direct solve.
//
// Global velocity vector: element blocks (element t at t * n_cell_velocity)
// followed by face blocks (face f at n_elements * n_cell_velocity +
// f * n_face_velocity), face blocks in the canonical face frame. Global
// pressure vector: element t at t * n_pressure, coefficients in
// zero_mean_basis(mesh, t, k).
#ifndef HHO_ASSEMBLY_HPP
#define HHO_ASSEMBLY_HPP

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "hho/local_operators.hpp"
#include "hho/mesh.hpp"
#include "hho/problems.hpp"

namespace hho {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// State of a global velocity dof.
enum class DofStatus : unsigned char {
  free,    ///< unknown
  fixed,   ///< prescribed by boundary data
  removed  ///< discarded (tangential boundary component in Darcy-only mode), value 0
};

struct SparseSolve {
  Eigen::VectorXd x;
  double residual = 0.0; ///< ||K x - b|| / ||b||
  std::size_t nnz = 0;
};

/// Sparse LU solve of K x = b (COLAMD ordering). Throws SolverError on failure.
SparseSolve sparse_solve(SparseMatrix &K, const Eigen::VectorXd &b);

struct DiscreteSolution {
  Eigen::VectorXd velocity;
  Eigen::VectorXd pressure;
  double multiplier = 0.0; ///< Lagrange multiplier of the zero-mean pressure constraint
};

struct SolveReport {
  std::size_t ndof = 0;        ///< globally coupled unknowns, multiplier excluded
  std::size_t nnz = 0;         ///< nonzeros of the factorized matrix
  double residual = 0.0;       ///< ||K x - b|| / ||b|| of the factorized system
  double mass_residual = 0.0;  ///< max_q |b_h(u_h, q) + (g, q)|, relative
  double t_assembly = 0.0;     ///< seconds, includes local operators and condensation
  double t_solve = 0.0;        ///< seconds, factorization, solve and recovery
  bool condensed = true;
};

struct SolveResult {
  DiscreteSolution solution;
  SolveReport report;
};

class BrinkmanSystem {
public:
  /// Builds all local operators and data. `quad_boost` < 0 keeps the case default.
  BrinkmanSystem(const Mesh &mesh, const ManufacturedCase &problem, int k, int quad_boost = -1);

  const Mesh &mesh() const { return mesh_; }
  const ManufacturedCase &problem() const { return problem_; }
  const DofLayout &layout() const { return layout_; }
  const LocalOperators &local(std::size_t t) const { return ops_[t]; }

  std::size_t n_velocity() const;
  std::size_t n_pressure() const { return mesh_.n_elements() * layout_.n_pressure(); }
  std::size_t cell_offset(std::size_t t) const { return t * layout_.n_cell_velocity(); }
  std::size_t face_offset(std::size_t f) const;
  const std::vector<DofStatus> &status() const { return status_; }

  /// Local dof vector of element t extracted from a global velocity vector.
  Eigen::VectorXd gather(const Eigen::VectorXd &velocity, std::size_t t) const;

  /// Global interpolate I_h u of the case's exact velocity. Interior faces on a
  /// coefficient interface take the mean of both one-sided traces.
  Eigen::VectorXd interpolate_velocity() const;

  /// Coefficients of pi^k p, shifted so that the discrete mean vanishes.
  /// Requires problem().p.
  Eigen::VectorXd project_pressure() const;

  /// Assembled velocity matrix on all velocity dofs (no boundary conditions).
  SparseMatrix velocity_matrix() const;
  /// B(q, v) = b_h(v, q) on all dofs.
  SparseMatrix coupling_matrix() const;
  /// Load (f, r_D v) on all velocity dofs and (g, q) on pressure dofs.
  Eigen::VectorXd velocity_load() const;
  Eigen::VectorXd pressure_load() const { return pressure_load_; }
  /// Boundary values (zero on free dofs).
  const Eigen::VectorXd &boundary_values() const { return boundary_values_; }
  /// Net shift of boundary normal fluxes applied for discrete compatibility.
  double compatibility_shift() const { return compatibility_shift_; }
  /// True if the pressure is fixed by the zero-mean constraint (not by the boundary).
  bool has_mean_constraint() const { return mean_constraint_; }

  /// Globally coupled unknowns after condensation: free face dofs + one mean
  /// pressure per element (the multiplier is not counted).
  std::size_t condensed_ndof() const;

  SolveResult solve(bool condense = true) const;

  /// Setup time (local operators, data) in seconds.
  double setup_seconds() const { return setup_seconds_; }

private:
  void build_boundary_values();
  int data_degree(std::size_t t) const;

  const Mesh &mesh_;
  ManufacturedCase problem_;
  DofLayout layout_;
  int quad_boost_;
  std::vector<LocalOperators> ops_;
  std::vector<Eigen::VectorXd> loads_;
  Eigen::VectorXd pressure_load_;
  std::vector<DofStatus> status_;
  Eigen::VectorXd boundary_values_;
  double compatibility_shift_ = 0.0;
  bool mean_constraint_ = true; ///< false when the boundary fixes the pressure level
  double setup_seconds_ = 0.0;
};

/// True if element t has the point as a vertex or contains it.
bool element_touches(const Mesh &mesh, std::size_t t, const Point &x);

} // namespace hho

#endif
