// Polynomial bases and L2 projectors.
#include "hho/basis.hpp"

#include <cmath>

#include "hho/errors.hpp"

namespace hho {

ScalarBasis::ScalarBasis(Point center, double scale, int degree)
    : ScalarBasis(std::move(center), Eigen::Matrix2d::Identity() / scale, degree) {}

ScalarBasis::ScalarBasis(Point center, const Eigen::Matrix2d &map, int degree)
    : center_(std::move(center)), map_(map), degree_(degree) {
  if (degree < 0) throw InvalidInput("ScalarBasis: negative degree");
  for (int d = 0; d <= degree; ++d)
    for (int j = 0; j <= d; ++j) powers_.emplace_back(d - j, j);
}

Eigen::VectorXd ScalarBasis::monomials(const Point &x) const {
  const Eigen::Vector2d xh = map_ * (x - center_);
  // Powers up to degree in each variable.
  Eigen::VectorXd pu(degree_ + 1), pv(degree_ + 1);
  pu(0) = pv(0) = 1.0;
  for (int i = 1; i <= degree_; ++i) {
    pu(i) = pu(i - 1) * xh.x();
    pv(i) = pv(i - 1) * xh.y();
  }
  Eigen::VectorXd out(powers_.size());
  for (std::size_t i = 0; i < powers_.size(); ++i)
    out(i) = pu(powers_[i].first) * pv(powers_[i].second);
  return out;
}

VectorValues ScalarBasis::monomial_gradients(const Point &x) const {
  const Eigen::Vector2d xh = map_ * (x - center_);
  Eigen::VectorXd pu(degree_ + 1), pv(degree_ + 1);
  pu(0) = pv(0) = 1.0;
  for (int i = 1; i <= degree_; ++i) {
    pu(i) = pu(i - 1) * xh.x();
    pv(i) = pv(i - 1) * xh.y();
  }
  VectorValues local(powers_.size(), 2);
  for (std::size_t i = 0; i < powers_.size(); ++i) {
    const auto [a, b] = powers_[i];
    local(i, 0) = a > 0 ? a * pu(a - 1) * pv(b) : 0.0;
    local(i, 1) = b > 0 ? b * pu(a) * pv(b - 1) : 0.0;
  }
  // Chain rule: grad_x = map^T grad_xhat.
  return local * map_;
}

Eigen::VectorXd ScalarBasis::values(const Point &x) const {
  if (transform_.size() == 0) return monomials(x);
  return transform_ * monomials(x);
}

VectorValues ScalarBasis::gradients(const Point &x) const {
  if (transform_.size() == 0) return monomial_gradients(x);
  return transform_ * monomial_gradients(x);
}

FaceBasis::FaceBasis(Point midpoint, Eigen::Vector2d tangent, double scale, int degree)
    : midpoint_(std::move(midpoint)), tangent_(std::move(tangent)), scale_(scale),
      degree_(degree) {
  if (degree < 0) throw InvalidInput("FaceBasis: negative degree");
}

Eigen::VectorXd FaceBasis::values_scaled(double s) const {
  Eigen::VectorXd out(degree_ + 1);
  out(0) = 1.0;
  for (int j = 1; j <= degree_; ++j) out(j) = out(j - 1) * s;
  return out;
}

Eigen::VectorXd FaceBasis::values(const Point &x) const {
  return values_scaled((x - midpoint_).dot(tangent_) / scale_);
}

RTNBasis::RTNBasis(Point center, double scale, int degree)
    : RTNBasis(std::move(center), scale, Eigen::Matrix2d::Identity() / scale, degree) {}

RTNBasis::RTNBasis(Point center, double scale, const Eigen::Matrix2d &map, int degree)
    : scalar_(std::move(center), map, degree), scale_(scale), degree_(degree) {
  if (degree < 0) throw InvalidInput("RTNBasis: negative degree");
}

VectorValues RTNBasis::raw_values(const Point &x) const {
  const Eigen::VectorXd phi = scalar_.monomials(x);
  const std::size_t n = scalar_.size();
  const std::size_t first_hom = dim_poly_2d(degree_ - 1);
  const Eigen::Vector2d xt = (x - scalar_.center()) / scale_;
  VectorValues out = VectorValues::Zero(size(), 2);
  for (std::size_t i = 0; i < n; ++i) {
    out(2 * i, 0) = phi(i);
    out(2 * i + 1, 1) = phi(i);
  }
  for (std::size_t j = first_hom; j < n; ++j) {
    const std::size_t row = 2 * n + (j - first_hom);
    out(row, 0) = xt.x() * phi(j);
    out(row, 1) = xt.y() * phi(j);
  }
  return out;
}

Eigen::VectorXd RTNBasis::raw_divergences(const Point &x) const {
  const Eigen::VectorXd phi = scalar_.monomials(x);
  const VectorValues grad = scalar_.monomial_gradients(x);
  const std::size_t n = scalar_.size();
  const std::size_t first_hom = dim_poly_2d(degree_ - 1);
  const Eigen::Vector2d xt = (x - scalar_.center()) / scale_;
  Eigen::VectorXd out(size());
  for (std::size_t i = 0; i < n; ++i) {
    out(2 * i) = grad(i, 0);
    out(2 * i + 1) = grad(i, 1);
  }
  for (std::size_t j = first_hom; j < n; ++j)
    out(2 * n + (j - first_hom)) =
        2.0 * phi(j) / scale_ + xt.x() * grad(j, 0) + xt.y() * grad(j, 1);
  return out;
}

VectorValues RTNBasis::values(const Point &x) const {
  if (transform_.size() == 0) return raw_values(x);
  return transform_ * raw_values(x);
}

Eigen::VectorXd RTNBasis::divergences(const Point &x) const {
  if (transform_.size() == 0) return raw_divergences(x);
  return transform_ * raw_divergences(x);
}

namespace {

/// T such that the functions T * raw have Gram matrix area * I, given the raw
/// Gram matrix. Two Cholesky passes restore orthogonality lost to round-off.
Eigen::MatrixXd orthonormalizing_transform(const Eigen::MatrixXd &gram, double area) {
  const auto n = gram.rows();
  Eigen::MatrixXd T = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd G = gram / area;
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (G + G.transpose()));
    if (llt.info() != Eigen::Success) throw InternalError("basis functions are linearly dependent");
    const Eigen::MatrixXd Linv =
        llt.matrixL().solve(Eigen::MatrixXd::Identity(n, n));
    T = Linv * T;
    G = T * (gram / area) * T.transpose();
  }
  return T;
}

} // namespace

Eigen::Matrix2d element_map(const Mesh &mesh, std::size_t t) {
  const Point c = mesh.centroid(t);
  const auto rule = element_quadrature(mesh, t, 2);
  Eigen::Matrix2d second = Eigen::Matrix2d::Zero();
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Eigen::Vector2d d = rule.points[q] - c;
    second += rule.weights[q] * d * d.transpose();
  }
  second /= mesh.area(t);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(second);
  const Eigen::Vector2d inv_len = (24.0 * eig.eigenvalues()).cwiseSqrt().cwiseInverse();
  return inv_len.asDiagonal() * eig.eigenvectors().transpose();
}

ScalarBasis element_basis(const Mesh &mesh, std::size_t t, int degree) {
  ScalarBasis basis(mesh.centroid(t), element_map(mesh, t), degree);
  const auto rule = element_quadrature(mesh, t, 2 * degree);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Eigen::VectorXd phi = basis.monomials(rule.points[q]);
    gram.noalias() += rule.weights[q] * phi * phi.transpose();
  }
  basis.set_transform(orthonormalizing_transform(gram, mesh.area(t)));
  return basis;
}

ScalarBasis zero_mean_basis(const Mesh &mesh, std::size_t t, int degree) {
  return element_basis(mesh, t, degree);
}

FaceBasis face_basis(const Mesh &mesh, std::size_t f, int degree) {
  return FaceBasis(mesh.face_midpoint(f), mesh.face_tangent(f), mesh.h_face(f), degree);
}

RTNBasis rtn_basis(const Mesh &mesh, std::size_t t, int degree) {
  if (degree < 0) throw InvalidInput("rtn_basis: negative degree");
  RTNBasis basis(mesh.centroid(t), mesh.h_element(t), element_map(mesh, t), degree);
  const auto rule = element_quadrature(mesh, t, 2 * degree + 2);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const VectorValues r = basis.raw_values(rule.points[q]);
    gram.noalias() += rule.weights[q] * r * r.transpose();
  }
  basis.set_transform(orthonormalizing_transform(gram, mesh.area(t)));
  return basis;
}

Eigen::MatrixXd gram_matrix(const Mesh &mesh, std::size_t t, const ScalarBasis &basis) {
  const auto rule = element_quadrature(mesh, t, 2 * basis.degree());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Eigen::VectorXd phi = basis.values(rule.points[q]);
    gram.noalias() += rule.weights[q] * phi * phi.transpose();
  }
  return gram;
}

Eigen::MatrixXd gram_matrix(const Mesh &mesh, std::size_t f, const FaceBasis &basis) {
  const auto rule = face_quadrature(mesh, f, 2 * basis.degree());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Eigen::VectorXd psi = basis.values(rule.points[q]);
    gram.noalias() += rule.weights[q] * psi * psi.transpose();
  }
  return gram;
}

namespace {

Eigen::MatrixXd solve_gram(const Eigen::MatrixXd &gram, const Eigen::MatrixXd &rhs) {
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw InternalError("singular Gram matrix in L2 projection");
  return llt.solve(rhs);
}

} // namespace

Eigen::VectorXd l2_project_element(const Mesh &mesh, std::size_t t, const ScalarFunction &f,
                                   int degree, int quad_degree) {
  const auto basis = element_basis(mesh, t, degree);
  const auto rule = element_quadrature(mesh, t, quad_degree < 0 ? 2 * degree + 4 : quad_degree);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(basis.size());
  for (std::size_t q = 0; q < rule.size(); ++q)
    rhs += rule.weights[q] * f(rule.points[q]) * basis.values(rule.points[q]);
  return solve_gram(gram_matrix(mesh, t, basis), rhs);
}

Eigen::VectorXd l2_project_element(const Mesh &mesh, std::size_t t, const VectorFunction &f,
                                   int degree, int quad_degree) {
  const auto basis = element_basis(mesh, t, degree);
  const auto rule = element_quadrature(mesh, t, quad_degree < 0 ? 2 * degree + 4 : quad_degree);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(basis.size(), 2);
  for (std::size_t q = 0; q < rule.size(); ++q)
    rhs += rule.weights[q] * basis.values(rule.points[q]) * f(rule.points[q]).transpose();
  const Eigen::MatrixXd c = solve_gram(gram_matrix(mesh, t, basis), rhs);
  Eigen::VectorXd out(2 * basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    out(2 * i) = c(i, 0);
    out(2 * i + 1) = c(i, 1);
  }
  return out;
}

Eigen::VectorXd l2_project_face(const Mesh &mesh, std::size_t f, const ScalarFunction &fn,
                                int degree, int quad_degree) {
  const auto basis = face_basis(mesh, f, degree);
  const auto rule = face_quadrature(mesh, f, quad_degree < 0 ? 2 * degree + 4 : quad_degree);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(basis.size());
  for (std::size_t q = 0; q < rule.size(); ++q)
    rhs += rule.weights[q] * fn(rule.points[q]) * basis.values(rule.points[q]);
  return solve_gram(gram_matrix(mesh, f, basis), rhs);
}

double evaluate(const ScalarBasis &basis, const Eigen::VectorXd &coeffs, const Point &x) {
  return basis.values(x).dot(coeffs);
}

Eigen::Vector2d evaluate_vector(const ScalarBasis &basis, const Eigen::VectorXd &coeffs,
                                const Point &x) {
  const Eigen::VectorXd phi = basis.values(x);
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < basis.size(); ++i) {
    out.x() += coeffs(2 * i) * phi(i);
    out.y() += coeffs(2 * i + 1) * phi(i);
  }
  return out;
}

} // namespace hho
