// Scaled monomial bases on elements and faces, the local Raviart-Thomas-Nedelec
// space, and L2-orthogonal projectors built on them.
#ifndef HHO_BASIS_HPP
#define HHO_BASIS_HPP

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hho/mesh.hpp"
#include "hho/quadrature.hpp"

namespace hho {

/// Values of a family of vector-valued functions at a point, one row per function.
using VectorValues = Eigen::Matrix<double, Eigen::Dynamic, 2>;

inline constexpr std::size_t dim_poly_2d(int degree) {
  return degree < 0 ? 0 : static_cast<std::size_t>((degree + 1) * (degree + 2) / 2);
}
inline constexpr std::size_t dim_poly_1d(int degree) {
  return degree < 0 ? 0 : static_cast<std::size_t>(degree + 1);
}
inline constexpr std::size_t dim_rtn(int degree) {
  return static_cast<std::size_t>((degree + 1) * (degree + 3));
}

/// Polynomial basis of P^degree on an element: monomials x_hat^a y_hat^b
/// (a + b <= degree, ordered by total degree then by increasing power of
/// y_hat) of the local coordinates x_hat = map (x - center), optionally
/// recombined by a lower-triangular transform T (values = T * monomials).
class ScalarBasis {
public:
  /// Isotropic coordinates x_hat = (x - center) / scale.
  ScalarBasis(Point center, double scale, int degree);
  ScalarBasis(Point center, const Eigen::Matrix2d &map, int degree);

  int degree() const { return degree_; }
  std::size_t size() const { return powers_.size(); }
  const Point &center() const { return center_; }
  const Eigen::Matrix2d &map() const { return map_; }
  const std::vector<std::pair<int, int>> &powers() const { return powers_; }

  Eigen::VectorXd values(const Point &x) const;
  /// Row i holds the gradient of function i.
  VectorValues gradients(const Point &x) const;

  /// Values of the untransformed monomials.
  Eigen::VectorXd monomials(const Point &x) const;
  VectorValues monomial_gradients(const Point &x) const;

  void set_transform(Eigen::MatrixXd transform) { transform_ = std::move(transform); }
  const Eigen::MatrixXd &transform() const { return transform_; }

private:
  Point center_;
  Eigen::Matrix2d map_;
  int degree_;
  std::vector<std::pair<int, int>> powers_;
  Eigen::MatrixXd transform_; ///< empty means identity
};

/// Monomials (s/h_F)^j, j <= degree, in the arclength coordinate s measured from
/// the face midpoint along the canonical tangent.
class FaceBasis {
public:
  FaceBasis(Point midpoint, Eigen::Vector2d tangent, double scale, int degree);

  int degree() const { return degree_; }
  std::size_t size() const { return static_cast<std::size_t>(degree_ + 1); }
  const Eigen::Vector2d &tangent() const { return tangent_; }

  Eigen::VectorXd values(const Point &x) const;
  /// Values as a function of the scaled coordinate s/h_F.
  Eigen::VectorXd values_scaled(double s) const;

private:
  Point midpoint_;
  Eigen::Vector2d tangent_;
  double scale_;
  int degree_;
};

/// RTN^k(T) = P^k(T)^2 + x P^k(T). Raw functions: the vector monomials of
/// P^k(T)^2 (scalar monomial i times e_x, then times e_y) followed by
/// ((x - c)/h) m_j for the homogeneous degree-k monomials m_j; optionally
/// recombined by a transform T (values = T * raw).
class RTNBasis {
public:
  RTNBasis(Point center, double scale, int degree);
  RTNBasis(Point center, double scale, const Eigen::Matrix2d &map, int degree);

  int degree() const { return degree_; }
  std::size_t size() const { return dim_rtn(degree_); }

  VectorValues values(const Point &x) const;
  Eigen::VectorXd divergences(const Point &x) const;

  VectorValues raw_values(const Point &x) const;
  Eigen::VectorXd raw_divergences(const Point &x) const;

  void set_transform(Eigen::MatrixXd transform) { transform_ = std::move(transform); }

private:
  ScalarBasis scalar_;
  double scale_;
  int degree_;
  Eigen::MatrixXd transform_;
};

/// Principal-axis coordinates of element t: x_hat = map (x - centroid) has
/// isotropic second moments and equals (x - c)/h_T on equilateral triangles.
Eigen::Matrix2d element_map(const Mesh &mesh, std::size_t t);

/// Basis of P^degree on element t, L2(T)-orthogonal with (phi_i, phi_j)_T =
/// |T| delta_ij. Function 0 is the constant 1, so all others have zero mean.
ScalarBasis element_basis(const Mesh &mesh, std::size_t t, int degree);

/// Basis of P^degree on element t whose non-constant functions have zero mean
/// (the same functions as element_basis).
ScalarBasis zero_mean_basis(const Mesh &mesh, std::size_t t, int degree);

FaceBasis face_basis(const Mesh &mesh, std::size_t f, int degree);
/// RTN^k(T) basis, L2(T)-orthogonal with (rho_i, rho_j)_T = |T| delta_ij.
RTNBasis rtn_basis(const Mesh &mesh, std::size_t t, int degree);

/// Gram matrix of an element basis (quadrature of degree 2*degree).
Eigen::MatrixXd gram_matrix(const Mesh &mesh, std::size_t t, const ScalarBasis &basis);
Eigen::MatrixXd gram_matrix(const Mesh &mesh, std::size_t f, const FaceBasis &basis);

using ScalarFunction = std::function<double(const Point &)>;
using VectorFunction = std::function<Eigen::Vector2d(const Point &)>;

/// Coefficients of the L2 projection of f onto P^degree(T) in element_basis.
/// `quad_degree` < 0 selects 2*degree + 4.
Eigen::VectorXd l2_project_element(const Mesh &mesh, std::size_t t, const ScalarFunction &f,
                                   int degree, int quad_degree = -1);

/// Component-wise projection; coefficients interleaved (x then y per basis function).
Eigen::VectorXd l2_project_element(const Mesh &mesh, std::size_t t, const VectorFunction &f,
                                   int degree, int quad_degree = -1);

/// Coefficients of the L2 projection of f onto P^degree(F) in face_basis.
Eigen::VectorXd l2_project_face(const Mesh &mesh, std::size_t f, const ScalarFunction &fn,
                                int degree, int quad_degree = -1);

/// Evaluates sum_i c_i phi_i at x.
double evaluate(const ScalarBasis &basis, const Eigen::VectorXd &coeffs, const Point &x);
Eigen::Vector2d evaluate_vector(const ScalarBasis &basis, const Eigen::VectorXd &coeffs,
                                const Point &x);

} // namespace hho

#endif
