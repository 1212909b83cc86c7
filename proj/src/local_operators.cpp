// Element-level HHO operators.
#include "hho/local_operators.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "hho/errors.hpp"
#include "hho/quadrature.hpp"

namespace hho {

DofLayout DofLayout::make(int k, bool darcy_only) {
  if (k < 0) throw InvalidInput("face degree k must be >= 0");
  if (k == 0 && !darcy_only)
    throw InvalidInput("k = 0 is only available in Darcy-only mode (mu = 0)");
  DofLayout layout;
  layout.k = k;
  layout.l = (k == 0) ? 0 : std::max(k - 1, 1);
  layout.darcy_only = darcy_only;
  return layout;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Tab {
  MatrixXd v, dx, dy; // quadrature points x basis functions
};

Tab tabulate(const ScalarBasis &basis, const QuadratureRule &rule, bool grads) {
  Tab tab;
  const auto nq = static_cast<Eigen::Index>(rule.size());
  const auto n = static_cast<Eigen::Index>(basis.size());
  tab.v.resize(nq, n);
  if (grads) {
    tab.dx.resize(nq, n);
    tab.dy.resize(nq, n);
  }
  for (Eigen::Index q = 0; q < nq; ++q) {
    tab.v.row(q) = basis.values(rule.points[q]).transpose();
    if (grads) {
      const VectorValues g = basis.gradients(rule.points[q]);
      tab.dx.row(q) = g.col(0).transpose();
      tab.dy.row(q) = g.col(1).transpose();
    }
  }
  return tab;
}

MatrixXd tabulate(const FaceBasis &basis, const QuadratureRule &rule) {
  MatrixXd v(rule.size(), basis.size());
  for (std::size_t q = 0; q < rule.size(); ++q) v.row(q) = basis.values(rule.points[q]).transpose();
  return v;
}

struct RtnTab {
  MatrixXd x, y;
};

RtnTab tabulate(const RTNBasis &basis, const QuadratureRule &rule) {
  RtnTab tab;
  tab.x.resize(rule.size(), basis.size());
  tab.y.resize(rule.size(), basis.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const VectorValues r = basis.values(rule.points[q]);
    tab.x.row(q) = r.col(0).transpose();
    tab.y.row(q) = r.col(1).transpose();
  }
  return tab;
}

VectorXd weights_of(const QuadratureRule &rule) {
  return Eigen::Map<const VectorXd>(rule.weights.data(), rule.weights.size());
}

/// A^T diag(w) B
MatrixXd cross(const MatrixXd &a, const VectorXd &w, const MatrixXd &b) {
  return a.transpose() * w.asDiagonal() * b;
}

/// Scalar matrix -> matrix on interleaved two-component bases.
MatrixXd interleave(const MatrixXd &s) {
  MatrixXd out = MatrixXd::Zero(2 * s.rows(), 2 * s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      out(2 * i, 2 * j) = s(i, j);
      out(2 * i + 1, 2 * j + 1) = s(i, j);
    }
  return out;
}

/// Component matrices of an interleaved vector basis built from scalar values.
void vector_components(const MatrixXd &scalar, MatrixXd &x, MatrixXd &y) {
  x = MatrixXd::Zero(scalar.rows(), 2 * scalar.cols());
  y = MatrixXd::Zero(scalar.rows(), 2 * scalar.cols());
  for (Eigen::Index i = 0; i < scalar.cols(); ++i) {
    x.col(2 * i) = scalar.col(i);
    y.col(2 * i + 1) = scalar.col(i);
  }
}

/// Symmetric-gradient components of an interleaved vector basis.
struct Strain {
  MatrixXd xx, xy, yy;
};

Strain strain_of(const Tab &tab) {
  const auto nq = tab.v.rows(), n = tab.v.cols();
  Strain s{MatrixXd::Zero(nq, 2 * n), MatrixXd::Zero(nq, 2 * n), MatrixXd::Zero(nq, 2 * n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    s.xx.col(2 * i) = tab.dx.col(i);
    s.xy.col(2 * i) = 0.5 * tab.dy.col(i);
    s.xy.col(2 * i + 1) = 0.5 * tab.dx.col(i);
    s.yy.col(2 * i + 1) = tab.dy.col(i);
  }
  return s;
}

MatrixXd strain_product(const Strain &a, const VectorXd &w, const Strain &b) {
  return cross(a.xx, w, b.xx) + 2.0 * cross(a.xy, w, b.xy) + cross(a.yy, w, b.yy);
}

MatrixXd spd_inverse_apply(const MatrixXd &gram, const MatrixXd &rhs) {
  Eigen::LLT<MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw InternalError("singular local Gram matrix");
  return llt.solve(rhs);
}

/// F with F^T F = G for a symmetric positive semidefinite G.
MatrixXd gram_factor(const MatrixXd &gram) {
  Eigen::LLT<MatrixXd> llt(gram);
  if (llt.info() == Eigen::Success) return llt.matrixU();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
  const VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return root.asDiagonal() * eig.eigenvectors().transpose();
}

MatrixXd stack(const std::vector<MatrixXd> &blocks, Eigen::Index cols) {
  Eigen::Index rows = 0;
  for (const MatrixXd &b : blocks) rows += b.rows();
  MatrixXd out(rows, cols);
  Eigen::Index r = 0;
  for (const MatrixXd &b : blocks) {
    out.middleRows(r, b.rows()) = b;
    r += b.rows();
  }
  return out;
}

double evaluate_nu(const ElementCoefficients &coeffs, const Point &x) {
  return coeffs.nu ? coeffs.nu(x) : 0.0;
}

struct FaceData {
  std::size_t id = 0;
  Eigen::Vector2d n_TF, frame[2]; // frame[0] = canonical normal, frame[1] = canonical tangent
  int orientation = 1;
  double h = 0.0;
  bool boundary = false;
  QuadratureRule rule;
  VectorXd w;
  MatrixXd psi; // face basis values
  MatrixXd gram;
};

/// Quadrature and basis tabulations shared by the operators of one element.
class ElementContext {
public:
  ElementContext(const Mesh &mesh, std::size_t t, const DofLayout &layout)
      : mesh_(mesh), t_(t), layout_(layout), degree_(2 * (layout.k + 1)) {
    cell_rule_ = element_quadrature(mesh, t, degree_);
    w_ = weights_of(cell_rule_);
    cell_basis_ = std::make_unique<ScalarBasis>(element_basis(mesh, t, layout.l));
    cell_ = tabulate(*cell_basis_, cell_rule_, true);
    cell_gram_ = cross(cell_.v, w_, cell_.v);
    for (int j = 0; j < 3; ++j) {
      const ElementFace &ef = mesh.element_faces(t)[j];
      FaceData &fd = faces_[j];
      fd.id = ef.face;
      fd.n_TF = ef.normal;
      fd.frame[0] = mesh.face_normal(ef.face);
      fd.frame[1] = mesh.face_tangent(ef.face);
      fd.orientation = ef.orientation;
      fd.h = mesh.h_face(ef.face);
      fd.boundary = mesh.is_boundary(ef.face);
      fd.rule = face_quadrature(mesh, ef.face, degree_);
      fd.w = weights_of(fd.rule);
      fd.psi = tabulate(face_basis(mesh, ef.face, layout.k), fd.rule);
      fd.gram = cross(fd.psi, fd.w, fd.psi);
    }
  }

  const Mesh &mesh() const { return mesh_; }
  std::size_t element() const { return t_; }
  const DofLayout &layout() const { return layout_; }
  int degree() const { return degree_; }
  double area() const { return mesh_.area(t_); }
  const QuadratureRule &cell_rule() const { return cell_rule_; }
  const VectorXd &w() const { return w_; }
  const Tab &cell() const { return cell_; }
  const ScalarBasis &cell_basis() const { return *cell_basis_; }
  const MatrixXd &cell_gram() const { return cell_gram_; }
  const FaceData &face(int j) const { return faces_[j]; }

  /// Selector of the element block of the local dofs.
  MatrixXd cell_selector() const {
    MatrixXd s = MatrixXd::Zero(layout_.n_cell_velocity(), layout_.n_local_velocity());
    s.leftCols(layout_.n_cell_velocity()).setIdentity();
    return s;
  }
  MatrixXd face_selector(int j) const {
    MatrixXd s = MatrixXd::Zero(layout_.n_face_velocity(), layout_.n_local_velocity());
    s.block(0, layout_.face_offset(j), layout_.n_face_velocity(), layout_.n_face_velocity())
        .setIdentity();
    return s;
  }

  /// (psi_i e^a, phi_j e_c)_F for an interleaved element vector basis tabulated on face j.
  MatrixXd face_vector_cross(int j, const MatrixXd &scalar_on_face) const {
    const FaceData &fd = faces_[j];
    const MatrixXd s = cross(fd.psi, fd.w, scalar_on_face);
    MatrixXd out(2 * s.rows(), 2 * s.cols());
    for (Eigen::Index i = 0; i < s.rows(); ++i)
      for (Eigen::Index m = 0; m < s.cols(); ++m)
        for (int a = 0; a < 2; ++a)
          for (int c = 0; c < 2; ++c) out(2 * i + a, 2 * m + c) = s(i, m) * fd.frame[a](c);
    return out;
  }

  /// (psi_i e^a, rho_m)_F for vector fields tabulated on face j by components.
  MatrixXd face_field_cross(int j, const MatrixXd &fx, const MatrixXd &fy) const {
    const FaceData &fd = faces_[j];
    MatrixXd out(2 * fd.psi.cols(), fx.cols());
    for (int a = 0; a < 2; ++a) {
      const MatrixXd s = cross(fd.psi, fd.w, fd.frame[a](0) * fx + fd.frame[a](1) * fy);
      for (Eigen::Index i = 0; i < s.rows(); ++i) out.row(2 * i + a) = s.row(i);
    }
    return out;
  }

  /// Rule for nu-weighted integrals.
  QuadratureRule nu_cell_rule(const ElementCoefficients &coeffs) const {
    return coeffs.nu_varies ? element_quadrature(mesh_, t_, degree_ + coeffs.quad_boost)
                            : cell_rule_;
  }
  QuadratureRule nu_face_rule(int j, const ElementCoefficients &coeffs) const {
    return coeffs.nu_varies ? face_quadrature(mesh_, faces_[j].id, degree_ + coeffs.quad_boost)
                            : faces_[j].rule;
  }

private:
  const Mesh &mesh_;
  std::size_t t_;
  DofLayout layout_;
  int degree_;
  QuadratureRule cell_rule_;
  VectorXd w_;
  std::unique_ptr<ScalarBasis> cell_basis_;
  Tab cell_;
  MatrixXd cell_gram_;
  std::array<FaceData, 3> faces_;
};

// ---------------------------------------------------------------------------
// Stokes

struct StokesParts {
  MatrixXd reconstruction; // R_S
  MatrixXd strain_rows;    // S with S^T S = strain Gram of P^{k+1}(T)^2
};

StokesParts stokes_reconstruction_impl(const ElementContext &ctx) {
  const DofLayout &L = ctx.layout();
  if (L.k < 1) throw InvalidInput("Stokes reconstruction requires k >= 1");
  const Mesh &mesh = ctx.mesh();
  const std::size_t t = ctx.element();
  const ScalarBasis high = element_basis(mesh, t, L.k + 1);
  const Tab H = tabulate(high, ctx.cell_rule(), true);
  const Strain SH = strain_of(H), SL = strain_of(ctx.cell());
  const VectorXd &w = ctx.w();
  const Eigen::Index N = 2 * static_cast<Eigen::Index>(high.size());
  const Eigen::Index n_local = static_cast<Eigen::Index>(L.n_local_velocity());
  const Eigen::Index n_cell = static_cast<Eigen::Index>(L.n_cell_velocity());
  const double area = ctx.area();

  const MatrixXd K = strain_product(SH, w, SH);
  MatrixXd rhs = MatrixXd::Zero(N, n_local);
  rhs.leftCols(n_cell) = strain_product(SH, w, SL);

  MatrixXd C = MatrixXd::Zero(3, N), C_rhs = MatrixXd::Zero(3, n_local);
  {
    MatrixXd HX, HY, LX, LY;
    vector_components(H.v, HX, HY);
    vector_components(ctx.cell().v, LX, LY);
    C.row(0) = w.transpose() * HX / area;
    C.row(1) = w.transpose() * HY / area;
    // Skew part of the gradient: 0.5 (d_y r_x - d_x r_y).
    for (Eigen::Index i = 0; i < H.v.cols(); ++i) {
      C(2, 2 * i) = 0.5 * w.dot(H.dy.col(i)) / area;
      C(2, 2 * i + 1) = -0.5 * w.dot(H.dx.col(i)) / area;
    }
    C_rhs.block(0, 0, 1, n_cell) = w.transpose() * LX / area;
    C_rhs.block(1, 0, 1, n_cell) = w.transpose() * LY / area;
  }

  for (int j = 0; j < 3; ++j) {
    const FaceData &fd = ctx.face(j);
    const Tab Hf = tabulate(high, fd.rule, true);
    const Strain Sf = strain_of(Hf);
    const Eigen::Vector2d n = fd.n_TF;
    const MatrixXd tx = Sf.xx * n.x() + Sf.xy * n.y();
    const MatrixXd ty = Sf.xy * n.x() + Sf.yy * n.y();
    MatrixXd LX, LY;
    vector_components(tabulate(ctx.cell_basis(), fd.rule, false).v, LX, LY);
    rhs.leftCols(n_cell) -= cross(tx, fd.w, LX) + cross(ty, fd.w, LY);
    const Eigen::Index off = static_cast<Eigen::Index>(L.face_offset(j));
    for (Eigen::Index i = 0; i < fd.psi.cols(); ++i)
      for (int a = 0; a < 2; ++a) {
        const VectorXd wpsi = fd.w.cwiseProduct(fd.psi.col(i));
        rhs.col(off + 2 * i + a) +=
            tx.transpose() * wpsi * fd.frame[a].x() + ty.transpose() * wpsi * fd.frame[a].y();
        C_rhs(2, off + 2 * i + a) +=
            0.5 * wpsi.sum() * (fd.frame[a].x() * n.y() - n.x() * fd.frame[a].y()) / area;
      }
  }

  MatrixXd aug = MatrixXd::Zero(N + 3, N + 3);
  aug.topLeftCorner(N, N) = K;
  aug.bottomLeftCorner(3, N) = C;
  aug.topRightCorner(N, 3) = C.transpose();
  MatrixXd aug_rhs(N + 3, n_local);
  aug_rhs << rhs, C_rhs;
  Eigen::PartialPivLU<MatrixXd> lu(aug);
  if (!(lu.rcond() > 1e-14))
    throw InternalError("singular Stokes reconstruction system on element " + std::to_string(t));
  StokesParts parts;
  parts.reconstruction = lu.solve(aug_rhs).topRows(N);
  const VectorXd rw = w.cwiseSqrt();
  parts.strain_rows = MatrixXd(3 * w.size(), N);
  parts.strain_rows << rw.asDiagonal() * SH.xx, std::sqrt(2.0) * (rw.asDiagonal() * SH.xy),
      rw.asDiagonal() * SH.yy;
  return parts;
}

/// Factor F of the Stokes stabilization, S_S = F^T F.
MatrixXd stokes_stabilization_factor(const ElementContext &ctx, const MatrixXd &RS, double mu) {
  const DofLayout &L = ctx.layout();
  const ScalarBasis high = element_basis(ctx.mesh(), ctx.element(), L.k + 1);
  const Tab H = tabulate(high, ctx.cell_rule(), false);
  // delta_T = pi^l_T (R_S v) - v_T
  const MatrixXd proj_cell = interleave(
      spd_inverse_apply(ctx.cell_gram(), cross(ctx.cell().v, ctx.w(), H.v)));
  const MatrixXd delta_cell = proj_cell * RS - ctx.cell_selector();

  const auto n_local = static_cast<Eigen::Index>(L.n_local_velocity());
  std::vector<MatrixXd> blocks;
  for (int j = 0; j < 3; ++j) {
    const FaceData &fd = ctx.face(j);
    const MatrixXd face_gram = interleave(fd.gram);
    const MatrixXd proj_high =
        spd_inverse_apply(face_gram, ctx.face_vector_cross(j, tabulate(high, fd.rule, false).v));
    const MatrixXd trace_cell = spd_inverse_apply(
        face_gram, ctx.face_vector_cross(j, tabulate(ctx.cell_basis(), fd.rule, false).v));
    const MatrixXd delta_face = proj_high * RS - ctx.face_selector(j);
    const MatrixXd diff = delta_face - trace_cell * delta_cell;
    blocks.push_back(std::sqrt(2.0 * mu / fd.h) * gram_factor(face_gram) * diff);
  }
  return stack(blocks, n_local);
}

// ---------------------------------------------------------------------------
// Darcy

MatrixXd darcy_reconstruction_impl(const ElementContext &ctx) {
  const DofLayout &L = ctx.layout();
  const RTNBasis rtn = rtn_basis(ctx.mesh(), ctx.element(), L.k);
  const RtnTab R = tabulate(rtn, ctx.cell_rule());
  const auto nr = static_cast<Eigen::Index>(rtn.size());
  const auto n_local = static_cast<Eigen::Index>(L.n_local_velocity());
  const auto n_cell = static_cast<Eigen::Index>(L.n_cell_velocity());
  const double area = ctx.area();

  MatrixXd M = MatrixXd::Zero(nr, nr), rhs = MatrixXd::Zero(nr, n_local);
  Eigen::Index row = 0;
  if (L.k >= 1) {
    const Tab low = tabulate(element_basis(ctx.mesh(), ctx.element(), L.k - 1), ctx.cell_rule(), false);
    MatrixXd LX, LY;
    vector_components(ctx.cell().v, LX, LY);
    for (Eigen::Index i = 0; i < low.v.cols(); ++i) {
      const VectorXd wq = ctx.w().cwiseProduct(low.v.col(i)) / area;
      M.row(row) = wq.transpose() * R.x;
      rhs.block(row, 0, 1, n_cell) = wq.transpose() * LX;
      ++row;
      M.row(row) = wq.transpose() * R.y;
      rhs.block(row, 0, 1, n_cell) = wq.transpose() * LY;
      ++row;
    }
  }
  for (int j = 0; j < 3; ++j) {
    const FaceData &fd = ctx.face(j);
    const RtnTab Rf = tabulate(rtn, fd.rule);
    const MatrixXd normal_flux = fd.n_TF.x() * Rf.x + fd.n_TF.y() * Rf.y;
    const MatrixXd moments = cross(fd.psi, fd.w, normal_flux) / fd.h;
    const auto off = static_cast<Eigen::Index>(L.face_offset(j));
    for (Eigen::Index i = 0; i < fd.psi.cols(); ++i) {
      M.row(row) = moments.row(i);
      for (Eigen::Index m = 0; m < fd.psi.cols(); ++m)
        rhs(row, off + 2 * m) = fd.orientation * fd.gram(i, m) / fd.h;
      ++row;
    }
  }
  Eigen::PartialPivLU<MatrixXd> lu(M);
  if (!(lu.rcond() > 1e-14))
    throw InternalError("singular Darcy reconstruction system on element " +
                        std::to_string(ctx.element()));
  return lu.solve(rhs);
}

DarcyDifferences darcy_differences_impl(const ElementContext &ctx, const MatrixXd &RD) {
  const DofLayout &L = ctx.layout();
  const RTNBasis rtn = rtn_basis(ctx.mesh(), ctx.element(), L.k);
  const RtnTab R = tabulate(rtn, ctx.cell_rule());
  DarcyDifferences d;
  {
    // (phi_i e_c, rho_m)_T
    MatrixXd cross_cell(2 * ctx.cell().v.cols(), R.x.cols());
    for (Eigen::Index i = 0; i < ctx.cell().v.cols(); ++i) {
      const VectorXd wq = ctx.w().cwiseProduct(ctx.cell().v.col(i));
      cross_cell.row(2 * i) = wq.transpose() * R.x;
      cross_cell.row(2 * i + 1) = wq.transpose() * R.y;
    }
    d.cell = spd_inverse_apply(interleave(ctx.cell_gram()), cross_cell) * RD - ctx.cell_selector();
  }
  for (int j = 0; j < 3; ++j) {
    const FaceData &fd = ctx.face(j);
    const RtnTab Rf = tabulate(rtn, fd.rule);
    d.faces[j] = spd_inverse_apply(interleave(fd.gram), ctx.face_field_cross(j, Rf.x, Rf.y)) * RD -
                 ctx.face_selector(j);
  }
  return d;
}

/// Factor F of the Darcy stabilization, S_D = F^T F.
MatrixXd darcy_stabilization_factor(const ElementContext &ctx, const MatrixXd &RD,
                                    const ElementCoefficients &coeffs) {
  const DofLayout &L = ctx.layout();
  const auto n_local = static_cast<Eigen::Index>(L.n_local_velocity());
  if (!coeffs.nu) return MatrixXd::Zero(0, n_local);
  std::vector<MatrixXd> blocks;
  const DarcyDifferences d = darcy_differences_impl(ctx, RD);

  const QuadratureRule cell_rule = ctx.nu_cell_rule(coeffs);
  {
    const Tab c = tabulate(ctx.cell_basis(), cell_rule, false);
    VectorXd wnu(cell_rule.size());
    for (std::size_t q = 0; q < cell_rule.size(); ++q)
      wnu(q) = cell_rule.weights[q] * evaluate_nu(coeffs, cell_rule.points[q]);
    const MatrixXd gram_nu = interleave(cross(c.v, wnu, c.v));
    blocks.push_back(gram_factor(gram_nu) * d.cell);
  }
  for (int j = 0; j < 3; ++j) {
    const FaceData &fd = ctx.face(j);
    if (fd.boundary) continue;
    const QuadratureRule rule = ctx.nu_face_rule(j, coeffs);
    const MatrixXd psi = tabulate(face_basis(ctx.mesh(), fd.id, L.k), rule);
    VectorXd wnu(rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q)
      wnu(q) = rule.weights[q] * evaluate_nu(coeffs, rule.points[q]);
    const MatrixXd gram_nu = interleave(cross(psi, wnu, psi));
    blocks.push_back(std::sqrt(fd.h) * gram_factor(gram_nu) * d.faces[j]);
  }
  return stack(blocks, n_local);
}

/// Factor F of (nu r_D u, r_D v)_T = F^T F.
MatrixXd darcy_gram_factor(const ElementContext &ctx, const MatrixXd &RD,
                           const ElementCoefficients &coeffs) {
  const auto n_local = static_cast<Eigen::Index>(ctx.layout().n_local_velocity());
  if (!coeffs.nu) return MatrixXd::Zero(0, n_local);
  const QuadratureRule rule = ctx.nu_cell_rule(coeffs);
  const RtnTab R = tabulate(rtn_basis(ctx.mesh(), ctx.element(), ctx.layout().k), rule);
  VectorXd wnu(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q)
    wnu(q) = rule.weights[q] * evaluate_nu(coeffs, rule.points[q]);
  const MatrixXd gram = cross(R.x, wnu, R.x) + cross(R.y, wnu, R.y);
  return gram_factor(gram) * RD;
}

// ---------------------------------------------------------------------------
// Coupling and seminorms

MatrixXd local_coupling_impl(const ElementContext &ctx) {
  const DofLayout &L = ctx.layout();
  const ScalarBasis pressure = zero_mean_basis(ctx.mesh(), ctx.element(), L.k);
  const Tab P = tabulate(pressure, ctx.cell_rule(), true);
  const auto np = static_cast<Eigen::Index>(pressure.size());
  MatrixXd B = MatrixXd::Zero(L.n_local_velocity(), np);
  for (Eigen::Index i = 0; i < ctx.cell().v.cols(); ++i) {
    const VectorXd wq = ctx.w().cwiseProduct(ctx.cell().v.col(i));
    B.row(2 * i) = wq.transpose() * P.dx;
    B.row(2 * i + 1) = wq.transpose() * P.dy;
  }
  for (int j = 0; j < 3; ++j) {
    const FaceData &fd = ctx.face(j);
    const Tab Pf = tabulate(pressure, fd.rule, false);
    const MatrixXd m = cross(fd.psi, fd.w, Pf.v);
    const auto off = static_cast<Eigen::Index>(L.face_offset(j));
    for (Eigen::Index i = 0; i < fd.psi.cols(); ++i)
      B.row(off + 2 * i) = -fd.orientation * m.row(i);
  }
  return B;
}

struct Seminorms {
  MatrixXd strain, boundary;
};

Seminorms seminorms_impl(const ElementContext &ctx) {
  const DofLayout &L = ctx.layout();
  const auto n_local = static_cast<Eigen::Index>(L.n_local_velocity());
  const auto n_cell = static_cast<Eigen::Index>(L.n_cell_velocity());
  Seminorms s{MatrixXd::Zero(n_local, n_local), MatrixXd::Zero(n_local, n_local)};
  const Strain SL = strain_of(ctx.cell());
  s.strain.topLeftCorner(n_cell, n_cell) = strain_product(SL, ctx.w(), SL);
  for (int j = 0; j < 3; ++j) {
    const FaceData &fd = ctx.face(j);
    MatrixXd dx = MatrixXd::Zero(fd.rule.size(), n_local), dy = dx;
    MatrixXd LX, LY;
    vector_components(tabulate(ctx.cell_basis(), fd.rule, false).v, LX, LY);
    dx.leftCols(n_cell) = -LX;
    dy.leftCols(n_cell) = -LY;
    const auto off = static_cast<Eigen::Index>(L.face_offset(j));
    for (Eigen::Index i = 0; i < fd.psi.cols(); ++i)
      for (int a = 0; a < 2; ++a) {
        dx.col(off + 2 * i + a) = fd.psi.col(i) * fd.frame[a].x();
        dy.col(off + 2 * i + a) = fd.psi.col(i) * fd.frame[a].y();
      }
    s.boundary += (cross(dx, fd.w, dx) + cross(dy, fd.w, dy)) / fd.h;
  }
  s.strain += s.boundary;
  return s;
}

double mean_nu(const ElementContext &ctx, const ElementCoefficients &coeffs) {
  if (!coeffs.nu) return 0.0;
  const QuadratureRule rule = ctx.nu_cell_rule(coeffs);
  double s = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q)
    s += rule.weights[q] * evaluate_nu(coeffs, rule.points[q]);
  return s / ctx.area();
}

} // namespace

LocalVelocity interpolate_local(const Mesh &mesh, std::size_t t, const DofLayout &layout,
                                const VectorFunction &v, int quad_degree) {
  const int qd = quad_degree < 0 ? 2 * (layout.k + 1) + 4 : quad_degree;
  LocalVelocity out;
  out.dofs.resize(layout.n_local_velocity());
  out.dofs.head(layout.n_cell_velocity()) = l2_project_element(mesh, t, v, layout.l, qd);
  for (int j = 0; j < 3; ++j) {
    const std::size_t f = mesh.element_faces(t)[j].face;
    const Eigen::Vector2d n = mesh.face_normal(f), tau = mesh.face_tangent(f);
    const VectorXd a = l2_project_face(mesh, f, [&](const Point &x) { return v(x).dot(n); },
                                       layout.k, qd);
    const VectorXd b = l2_project_face(mesh, f, [&](const Point &x) { return v(x).dot(tau); },
                                       layout.k, qd);
    const std::size_t off = layout.face_offset(j);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      out.dofs(off + 2 * i) = a(i);
      out.dofs(off + 2 * i + 1) = b(i);
    }
  }
  return out;
}

MatrixXd stokes_reconstruction(const Mesh &mesh, std::size_t t, const DofLayout &layout) {
  const ElementContext ctx(mesh, t, layout);
  return stokes_reconstruction_impl(ctx).reconstruction;
}

MatrixXd stokes_stabilization(const Mesh &mesh, std::size_t t, const DofLayout &layout,
                              const MatrixXd &reconstruction, double mu) {
  const ElementContext ctx(mesh, t, layout);
  const MatrixXd F = stokes_stabilization_factor(ctx, reconstruction, mu);
  return F.transpose() * F;
}

MatrixXd darcy_reconstruction(const Mesh &mesh, std::size_t t, const DofLayout &layout) {
  const ElementContext ctx(mesh, t, layout);
  return darcy_reconstruction_impl(ctx);
}

DarcyDifferences darcy_differences(const Mesh &mesh, std::size_t t, const DofLayout &layout,
                                   const MatrixXd &reconstruction) {
  const ElementContext ctx(mesh, t, layout);
  return darcy_differences_impl(ctx, reconstruction);
}

MatrixXd darcy_stabilization(const Mesh &mesh, std::size_t t, const DofLayout &layout,
                             const MatrixXd &reconstruction, const ElementCoefficients &coeffs) {
  const ElementContext ctx(mesh, t, layout);
  const MatrixXd F = darcy_stabilization_factor(ctx, reconstruction, coeffs);
  return F.transpose() * F;
}

MatrixXd local_coupling(const Mesh &mesh, std::size_t t, const DofLayout &layout) {
  const ElementContext ctx(mesh, t, layout);
  return local_coupling_impl(ctx);
}

double friction_coefficient(double h_T, double mu, double nu) {
  if (mu < 0.0 || nu < 0.0) throw InvalidInput("friction_coefficient: negative coefficient");
  if (mu == 0.0 && nu == 0.0)
    throw InvalidInput("friction_coefficient: mu and nu cannot both vanish");
  if (nu == 0.0) return 0.0;
  if (mu == 0.0) return std::numeric_limits<double>::infinity();
  return nu * h_T * h_T / (2.0 * mu);
}

LocalOperators build_local_operators(const Mesh &mesh, std::size_t t, const DofLayout &layout,
                                     const ElementCoefficients &coeffs) {
  if (coeffs.mu < 0.0) throw InvalidInput("negative viscosity");
  if (layout.darcy_only && coeffs.mu != 0.0)
    throw InvalidInput("Darcy-only layout used with mu != 0");
  if (!layout.darcy_only && !(coeffs.mu > 0.0))
    throw InvalidInput("mu must be positive on every element outside Darcy-only mode");

  const ElementContext ctx(mesh, t, layout);
  LocalOperators ops;
  ops.mu = coeffs.mu;
  const auto n_local = static_cast<Eigen::Index>(layout.n_local_velocity());
  if (!layout.darcy_only) {
    StokesParts parts = stokes_reconstruction_impl(ctx);
    ops.stokes_reconstruction = std::move(parts.reconstruction);
    const MatrixXd strain = parts.strain_rows * ops.stokes_reconstruction;
    ops.strain_gram = strain.transpose() * strain;
    const MatrixXd stab = stokes_stabilization_factor(ctx, ops.stokes_reconstruction, coeffs.mu);
    ops.stokes_stabilization = stab.transpose() * stab;
    ops.stokes_factor = stack({std::sqrt(2.0 * coeffs.mu) * strain, stab}, n_local);
    ops.stokes = ops.stokes_factor.transpose() * ops.stokes_factor;
  } else {
    ops.strain_gram = MatrixXd::Zero(n_local, n_local);
    ops.stokes_stabilization = MatrixXd::Zero(n_local, n_local);
    ops.stokes_factor = MatrixXd::Zero(0, n_local);
    ops.stokes = MatrixXd::Zero(n_local, n_local);
  }
  ops.darcy_reconstruction = darcy_reconstruction_impl(ctx);
  const MatrixXd dgram = darcy_gram_factor(ctx, ops.darcy_reconstruction, coeffs);
  const MatrixXd dstab = darcy_stabilization_factor(ctx, ops.darcy_reconstruction, coeffs);
  ops.darcy_gram = dgram.transpose() * dgram;
  ops.darcy_stabilization = dstab.transpose() * dstab;
  ops.darcy_factor = stack({dgram, dstab}, n_local);
  ops.darcy = ops.darcy_factor.transpose() * ops.darcy_factor;
  ops.A = ops.stokes + ops.darcy;
  ops.B = local_coupling_impl(ctx);
  Seminorms s = seminorms_impl(ctx);
  ops.strain_seminorm = std::move(s.strain);
  ops.boundary_seminorm = std::move(s.boundary);
  ops.friction = friction_coefficient(mesh.h_element(t), coeffs.mu, mean_nu(ctx, coeffs));
  return ops;
}

LocalNorms local_norms(const VectorXd &dofs, const LocalOperators &ops) {
  auto quad = [&dofs](const MatrixXd &m) {
    return m.size() == 0 ? 0.0 : std::sqrt(std::max(0.0, dofs.dot(m * dofs)));
  };
  auto factored = [&dofs](const MatrixXd &f) { return f.rows() == 0 ? 0.0 : (f * dofs).norm(); };
  LocalNorms n;
  n.stokes = factored(ops.stokes_factor);
  n.darcy = factored(ops.darcy_factor);
  n.energy = std::hypot(n.stokes, n.darcy);
  n.boundary = quad(ops.boundary_seminorm);
  n.strain = quad(ops.strain_seminorm);
  return n;
}

VectorXd darcy_load(const Mesh &mesh, std::size_t t, const DofLayout &layout,
                    const MatrixXd &reconstruction, const VectorFunction &f, int quad_degree) {
  const RTNBasis rtn = rtn_basis(mesh, t, layout.k);
  const QuadratureRule rule = element_quadrature(mesh, t, quad_degree);
  VectorXd moments = VectorXd::Zero(rtn.size());
  for (std::size_t q = 0; q < rule.size(); ++q)
    moments += rule.weights[q] * rtn.values(rule.points[q]) * f(rule.points[q]);
  return reconstruction.transpose() * moments;
}

Eigen::Vector2d evaluate_rtn(const RTNBasis &basis, const VectorXd &coeffs, const Point &x) {
  return basis.values(x).transpose() * coeffs;
}

} // namespace hho
