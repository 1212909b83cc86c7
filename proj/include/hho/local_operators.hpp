// Element-level HHO machinery for the Brinkman problem: degrees of freedom,
// interpolation, Stokes and Darcy velocity reconstructions, stabilisations,
// velocity-pressure coupling and local norms.
//
// Local velocity dof ordering (fixed):
//   [ element block | face 0 | face 1 | face 2 ]
// The element block holds P^l(T)^2 coefficients, x then y for each scalar basis
// function. Face block i holds P^k(F)^2 coefficients for local face i, normal
// then tangential component (canonical face frame, see Mesh) for each face
// basis function. Pressure dofs use zero_mean_basis(mesh, t, k).
#ifndef HHO_LOCAL_OPERATORS_HPP
#define HHO_LOCAL_OPERATORS_HPP

#include <array>
#include <cstddef>
#include <functional>

#include <Eigen/Dense>

#include "hho/basis.hpp"
#include "hho/mesh.hpp"

namespace hho {

struct DofLayout {
  int k = 1;               ///< face degree
  int l = 1;               ///< element degree
  bool darcy_only = false; ///< mu == 0 everywhere: no Stokes operators

  /// l = max(k-1, 1), except k = l = 0 which is accepted in Darcy-only mode.
  static DofLayout make(int k, bool darcy_only);

  std::size_t n_cell_velocity() const { return 2 * dim_poly_2d(l); }
  std::size_t n_face_velocity() const { return 2 * dim_poly_1d(k); }
  std::size_t n_local_velocity() const { return n_cell_velocity() + 3 * n_face_velocity(); }
  std::size_t n_pressure() const { return dim_poly_2d(k); }
  std::size_t face_offset(int i) const { return n_cell_velocity() + i * n_face_velocity(); }
  /// Element/face degree of the Stokes reconstruction.
  int reconstruction_degree() const { return k + 1; }
};

/// Coefficients seen by a single element.
struct ElementCoefficients {
  double mu = 0.0;
  /// nu as a function of position; empty means nu == 0.
  std::function<double(const Point &)> nu;
  /// True if nu is not constant on the element; enables quad_boost on nu-weighted terms.
  bool nu_varies = false;
  /// Extra quadrature degree for integrals involving nu or problem data.
  int quad_boost = 0;
};

struct LocalVelocity {
  Eigen::VectorXd dofs;

  Eigen::VectorXd cell(const DofLayout &layout) const {
    return dofs.head(layout.n_cell_velocity());
  }
  Eigen::VectorXd face(const DofLayout &layout, int i) const {
    return dofs.segment(layout.face_offset(i), layout.n_face_velocity());
  }
};

/// Per-element dense matrices. Matrix columns follow the local dof ordering.
struct LocalOperators {
  Eigen::MatrixXd stokes_reconstruction; ///< dofs -> P^{k+1}(T)^2 (empty in Darcy-only mode)
  Eigen::MatrixXd strain_gram;           ///< (grad_s R_S u, grad_s R_S v)_T
  Eigen::MatrixXd stokes_stabilization;  ///< s_S,T, includes the 2 mu_T factor
  Eigen::MatrixXd darcy_reconstruction;  ///< dofs -> RTN^k(T)
  Eigen::MatrixXd darcy_gram;            ///< (nu R_D u, R_D v)_T
  Eigen::MatrixXd darcy_stabilization;   ///< s_D,T, nu-weighted
  Eigen::MatrixXd strain_seminorm;       ///< ||.||_{eps,T}^2
  Eigen::MatrixXd boundary_seminorm;     ///< |.|_{1,dT}^2
  Eigen::MatrixXd stokes;                ///< 2 mu_T strain_gram + stokes_stabilization
  Eigen::MatrixXd darcy;                 ///< darcy_gram + darcy_stabilization
  Eigen::MatrixXd A;                     ///< stokes + darcy
  Eigen::MatrixXd stokes_factor;         ///< F with F^T F = stokes
  Eigen::MatrixXd darcy_factor;          ///< F with F^T F = darcy
  Eigen::MatrixXd B;                     ///< velocity dofs x pressure dofs
  double mu = 0.0;
  double friction = 0.0;                 ///< Cf_T, +inf when mu_T = 0
};

/// I_T v: element part pi^l_T v, face parts pi^k_F v in the face frame.
/// `quad_degree` < 0 selects 2(k+1) + 4.
LocalVelocity interpolate_local(const Mesh &mesh, std::size_t t, const DofLayout &layout,
                                const VectorFunction &v, int quad_degree = -1);

/// Matrix of r_S: local dofs -> coefficients in the interleaved vector basis of
/// element_basis(mesh, t, k+1).
Eigen::MatrixXd stokes_reconstruction(const Mesh &mesh, std::size_t t, const DofLayout &layout);

Eigen::MatrixXd stokes_stabilization(const Mesh &mesh, std::size_t t, const DofLayout &layout,
                                     const Eigen::MatrixXd &reconstruction, double mu);

/// Matrix of r_D: local dofs -> coefficients in rtn_basis(mesh, t, k).
Eigen::MatrixXd darcy_reconstruction(const Mesh &mesh, std::size_t t, const DofLayout &layout);

/// Difference operators delta_D,T (-> P^l(T)^2 interleaved) and delta_D,TF
/// (-> P^k(F)^2 in the face frame) as matrices acting on local dofs.
struct DarcyDifferences {
  Eigen::MatrixXd cell;
  std::array<Eigen::MatrixXd, 3> faces;
};
DarcyDifferences darcy_differences(const Mesh &mesh, std::size_t t, const DofLayout &layout,
                                   const Eigen::MatrixXd &reconstruction);

Eigen::MatrixXd darcy_stabilization(const Mesh &mesh, std::size_t t, const DofLayout &layout,
                                    const Eigen::MatrixXd &reconstruction,
                                    const ElementCoefficients &coeffs);

/// B_T(i, j) = b_T(velocity dof i, pressure basis function j).
Eigen::MatrixXd local_coupling(const Mesh &mesh, std::size_t t, const DofLayout &layout);

/// nu h_T^2 / (2 mu); 0 if nu = 0, +inf if mu = 0 < nu. Throws for mu = nu = 0.
double friction_coefficient(double h_T, double mu, double nu);

/// All operators of element t.
LocalOperators build_local_operators(const Mesh &mesh, std::size_t t, const DofLayout &layout,
                                     const ElementCoefficients &coeffs);

struct LocalNorms {
  double stokes = 0.0;   ///< ||v||_{S,T}
  double darcy = 0.0;    ///< ||v||_{D,T}
  double energy = 0.0;   ///< ||v||_{U,T}
  double boundary = 0.0; ///< |v|_{1,dT}
  double strain = 0.0;   ///< ||v||_{eps,T}
};
LocalNorms local_norms(const Eigen::VectorXd &dofs, const LocalOperators &ops);

/// (f, r_D v)_T for every local velocity dof.
Eigen::VectorXd darcy_load(const Mesh &mesh, std::size_t t, const DofLayout &layout,
                           const Eigen::MatrixXd &reconstruction, const VectorFunction &f,
                           int quad_degree);

/// Evaluates r = sum_m c_m rho_m of the RTN basis at x.
Eigen::Vector2d evaluate_rtn(const RTNBasis &basis, const Eigen::VectorXd &coeffs, const Point &x);

} // namespace hho

#endif
