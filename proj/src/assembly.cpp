// Global assembly, static condensation and solve.
#include "hho/assembly.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include <Eigen/SparseLU>

#include "hho/errors.hpp"
#include "hho/quadrature.hpp"

namespace hho {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr std::ptrdiff_t not_free = -1;

using SparseFactorization = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;
std::string solver_message(SparseFactorization &lu) { return lu.lastErrorMessage(); }

} // namespace

SparseSolve sparse_solve(SparseMatrix &K, const VectorXd &b) {
  K.makeCompressed();
  SparseFactorization lu;
  lu.analyzePattern(K);
  lu.factorize(K);
  if (lu.info() != Eigen::Success)
    throw SolverError("sparse LU factorization failed (" + std::to_string(K.rows()) + " unknowns, " +
                      std::to_string(K.nonZeros()) + " nonzeros): " + solver_message(lu));
  SparseSolve out;
  out.x = lu.solve(b);
  if (lu.info() != Eigen::Success || !out.x.allFinite())
    throw SolverError("sparse LU solve failed: " + solver_message(lu));
  const double nb = b.norm();
  const double nr = (K * out.x - b).norm();
  out.residual = nb > 0.0 ? nr / nb : nr;
  out.nnz = static_cast<std::size_t>(K.nonZeros());
  return out;
}

bool element_touches(const Mesh &mesh, std::size_t t, const Point &x) {
  const auto v = mesh.element_vertices(t);
  const double tol = 1e-12 * mesh.h_element(t);
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector2d e = v[(i + 1) % 3] - v[i], d = x - v[i];
    // Inside or on the boundary of a counter-clockwise triangle.
    if (e.x() * d.y() - e.y() * d.x() < -tol * e.norm()) return false;
  }
  return true;
}

BrinkmanSystem::BrinkmanSystem(const Mesh &mesh, const ManufacturedCase &problem, int k,
                               int quad_boost)
    : mesh_(mesh), problem_(problem) {
  const auto start = Clock::now();
  const CoefficientField &coeffs = problem_.coefficients;
  coeffs.validate();
  if (!problem_.u || !problem_.f || !problem_.g || !problem_.region)
    throw InvalidInput("test case is missing data");
  layout_ = DofLayout::make(k, coeffs.darcy_only());
  if (problem_.bc == BoundaryKind::pressure) {
    if (!coeffs.darcy_only())
      throw InvalidInput("pressure boundary condition requires mu = 0 (Darcy regime)");
    if (!problem_.p) throw InvalidInput("pressure boundary condition requires an exact pressure");
    mean_constraint_ = false;
  }
  quad_boost_ = quad_boost < 0 ? problem_.quad_boost : quad_boost;

  const std::size_t nt = mesh_.n_elements();
  ops_.resize(nt);
  loads_.resize(nt);
  pressure_load_ = VectorXd::Zero(n_pressure());
  for (std::size_t t = 0; t < nt; ++t) {
    const int region = mesh_.region(t);
    ElementCoefficients ec;
    ec.mu = coeffs.mu(region);
    if (!(ec.mu >= coeffs.mu_min && ec.mu <= coeffs.mu_max))
      throw InvalidInput("viscosity of region " + std::to_string(region) +
                         " outside the declared bounds");
    if (coeffs.nu_max > 0.0) {
      const auto &nu = coeffs.nu;
      ec.nu = [nu, region](const Point &x) { return nu(x, region); };
      const double nu_c = ec.nu(mesh_.centroid(t));
      if (!(nu_c >= coeffs.nu_min * (1 - 1e-12) && nu_c <= coeffs.nu_max * (1 + 1e-12)))
        throw InvalidInput("nu of region " + std::to_string(region) + " outside the declared bounds");
    }
    ec.nu_varies = coeffs.nu_smooth;
    ec.quad_boost = quad_boost_;
    ops_[t] = build_local_operators(mesh_, t, layout_, ec);

    const int deg = data_degree(t);
    const auto &f = problem_.f;
    loads_[t] = darcy_load(mesh_, t, layout_, ops_[t].darcy_reconstruction,
                           [&f, region](const Point &x) { return f(x, region); }, deg);
    const ScalarBasis q = zero_mean_basis(mesh_, t, layout_.k);
    const QuadratureRule rule = element_quadrature(mesh_, t, deg);
    VectorXd g_moments = VectorXd::Zero(q.size());
    for (std::size_t i = 0; i < rule.size(); ++i)
      g_moments += rule.weights[i] * problem_.g(rule.points[i], region) * q.values(rule.points[i]);
    pressure_load_.segment(t * layout_.n_pressure(), layout_.n_pressure()) = g_moments;
  }
  build_boundary_values();
  setup_seconds_ = seconds_since(start);
}

std::size_t BrinkmanSystem::n_velocity() const {
  return mesh_.n_elements() * layout_.n_cell_velocity() +
         mesh_.n_faces() * layout_.n_face_velocity();
}

std::size_t BrinkmanSystem::face_offset(std::size_t f) const {
  return mesh_.n_elements() * layout_.n_cell_velocity() + f * layout_.n_face_velocity();
}

int BrinkmanSystem::data_degree(std::size_t t) const {
  int deg = 2 * (layout_.k + 1) + 4 + quad_boost_;
  if (problem_.singular_point && element_touches(mesh_, t, *problem_.singular_point))
    deg += problem_.singular_boost;
  return std::min(deg, max_quadrature_degree);
}

void BrinkmanSystem::build_boundary_values() {
  const std::size_t nfv = layout_.n_face_velocity();
  status_.assign(n_velocity(), DofStatus::free);
  boundary_values_ = VectorXd::Zero(n_velocity());
  double flux = 0.0;
  for (std::size_t f = 0; f < mesh_.n_faces(); ++f) {
    if (!mesh_.is_boundary(f)) continue;
    const std::size_t t = mesh_.face_elements(f)[0];
    const int region = mesh_.region(t);
    const auto &u = problem_.u;
    const Eigen::Vector2d n = mesh_.face_normal(f), tau = mesh_.face_tangent(f);
    const int deg = data_degree(t);
    const std::size_t off = face_offset(f);
    if (problem_.bc == BoundaryKind::pressure) {
      // Natural condition: -(p, v.n_TF)_F on the load of the owning element.
      for (std::size_t i = 0; i < nfv / 2; ++i) status_[off + 2 * i + 1] = DofStatus::removed;
      const auto &faces = mesh_.element_faces(t);
      for (int j = 0; j < 3; ++j) {
        if (faces[j].face != f) continue;
        const FaceBasis psi = face_basis(mesh_, f, layout_.k);
        const QuadratureRule rule = face_quadrature(mesh_, f, deg);
        VectorXd pm = VectorXd::Zero(layout_.k + 1);
        for (std::size_t q = 0; q < rule.size(); ++q)
          pm += rule.weights[q] * problem_.p(rule.points[q]) * psi.values(rule.points[q]);
        for (int i = 0; i <= layout_.k; ++i)
          loads_[t](layout_.face_offset(j) + 2 * i) -= faces[j].orientation * pm(i);
      }
      continue;
    }
    const VectorXd a = l2_project_face(
        mesh_, f, [&](const Point &x) { return u(x, region).dot(n); }, layout_.k, deg);
    for (std::size_t i = 0; i < nfv / 2; ++i) {
      status_[off + 2 * i] = DofStatus::fixed;
      boundary_values_(off + 2 * i) = a(i);
    }
    if (problem_.bc == BoundaryKind::dirichlet) {
      const VectorXd b = l2_project_face(
          mesh_, f, [&](const Point &x) { return u(x, region).dot(tau); }, layout_.k, deg);
      for (std::size_t i = 0; i < nfv / 2; ++i) {
        status_[off + 2 * i + 1] = DofStatus::fixed;
        boundary_values_(off + 2 * i + 1) = b(i);
      }
    } else if (layout_.darcy_only) {
      for (std::size_t i = 0; i < nfv / 2; ++i) status_[off + 2 * i + 1] = DofStatus::removed;
    }
    // Outward flux of the prescribed normal component.
    int orientation = 1;
    for (const ElementFace &ef : mesh_.element_faces(t))
      if (ef.face == f) orientation = ef.orientation;
    const QuadratureRule rule = face_quadrature(mesh_, f, layout_.k);
    const FaceBasis psi = face_basis(mesh_, f, layout_.k);
    for (std::size_t q = 0; q < rule.size(); ++q)
      flux += orientation * rule.weights[q] * psi.values(rule.points[q]).dot(a);
  }

  if (!mean_constraint_) return;
  // The mass equation tested with q = 1 requires the discrete boundary flux to
  // equal sum_T (g, 1)_T; remove the quadrature mismatch uniformly.
  double source = 0.0;
  for (std::size_t t = 0; t < mesh_.n_elements(); ++t)
    source += pressure_load_(t * layout_.n_pressure());
  double perimeter = 0.0;
  for (std::size_t f = 0; f < mesh_.n_faces(); ++f)
    if (mesh_.is_boundary(f)) perimeter += mesh_.h_face(f);
  compatibility_shift_ = (flux - source) / perimeter;
  for (std::size_t f = 0; f < mesh_.n_faces(); ++f) {
    if (!mesh_.is_boundary(f)) continue;
    const std::size_t t = mesh_.face_elements(f)[0];
    for (const ElementFace &ef : mesh_.element_faces(t))
      if (ef.face == f) boundary_values_(face_offset(f)) -= ef.orientation * compatibility_shift_;
  }
}

VectorXd BrinkmanSystem::gather(const VectorXd &velocity, std::size_t t) const {
  VectorXd local(layout_.n_local_velocity());
  local.head(layout_.n_cell_velocity()) =
      velocity.segment(cell_offset(t), layout_.n_cell_velocity());
  for (int j = 0; j < 3; ++j)
    local.segment(layout_.face_offset(j), layout_.n_face_velocity()) = velocity.segment(
        face_offset(mesh_.element_faces(t)[j].face), layout_.n_face_velocity());
  return local;
}

VectorXd BrinkmanSystem::interpolate_velocity() const {
  VectorXd out = VectorXd::Zero(n_velocity());
  const auto &u = problem_.u;
  for (std::size_t t = 0; t < mesh_.n_elements(); ++t) {
    const int region = mesh_.region(t);
    out.segment(cell_offset(t), layout_.n_cell_velocity()) = l2_project_element(
        mesh_, t, [&](const Point &x) { return u(x, region); }, layout_.l, data_degree(t));
  }
  for (std::size_t f = 0; f < mesh_.n_faces(); ++f) {
    const Eigen::Vector2d n = mesh_.face_normal(f), tau = mesh_.face_tangent(f);
    const auto &owners = mesh_.face_elements(f);
    const int n_owners = mesh_.is_boundary(f) ? 1 : 2;
    VectorXd a = VectorXd::Zero(layout_.k + 1), b = a;
    for (int s = 0; s < n_owners; ++s) {
      const int region = mesh_.region(owners[s]);
      const int deg = data_degree(owners[s]);
      a += l2_project_face(mesh_, f, [&](const Point &x) { return u(x, region).dot(n); },
                           layout_.k, deg);
      b += l2_project_face(mesh_, f, [&](const Point &x) { return u(x, region).dot(tau); },
                           layout_.k, deg);
    }
    const std::size_t off = face_offset(f);
    for (int i = 0; i <= layout_.k; ++i) {
      out(off + 2 * i) = a(i) / n_owners;
      out(off + 2 * i + 1) = b(i) / n_owners;
    }
  }
  return out;
}

VectorXd BrinkmanSystem::project_pressure() const {
  if (!problem_.p) throw InvalidInput("exact pressure not available for case " + problem_.id);
  const std::size_t np = layout_.n_pressure();
  VectorXd out(n_pressure());
  double integral = 0.0, area = 0.0;
  for (std::size_t t = 0; t < mesh_.n_elements(); ++t) {
    const ScalarBasis q = zero_mean_basis(mesh_, t, layout_.k);
    const QuadratureRule rule = element_quadrature(mesh_, t, data_degree(t));
    MatrixXd gram = MatrixXd::Zero(np, np);
    VectorXd rhs = VectorXd::Zero(np);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const VectorXd phi = q.values(rule.points[i]);
      gram.noalias() += rule.weights[i] * phi * phi.transpose();
      rhs += rule.weights[i] * problem_.p(rule.points[i]) * phi;
    }
    out.segment(t * np, np) = gram.llt().solve(rhs);
    integral += out(t * np) * mesh_.area(t);
    area += mesh_.area(t);
  }
  if (!mean_constraint_) return out;
  const double mean = integral / area;
  for (std::size_t t = 0; t < mesh_.n_elements(); ++t) out(t * np) -= mean;
  return out;
}

SparseMatrix BrinkmanSystem::velocity_matrix() const {
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<std::size_t> map;
  for (std::size_t t = 0; t < mesh_.n_elements(); ++t) {
    map.clear();
    for (std::size_t i = 0; i < layout_.n_cell_velocity(); ++i) map.push_back(cell_offset(t) + i);
    for (int j = 0; j < 3; ++j)
      for (std::size_t i = 0; i < layout_.n_face_velocity(); ++i)
        map.push_back(face_offset(mesh_.element_faces(t)[j].face) + i);
    const MatrixXd &A = ops_[t].A;
    for (std::size_t r = 0; r < map.size(); ++r)
      for (std::size_t c = 0; c < map.size(); ++c)
        if (A(r, c) != 0.0) triplets.emplace_back(map[r], map[c], A(r, c));
  }
  SparseMatrix M(n_velocity(), n_velocity());
  M.setFromTriplets(triplets.begin(), triplets.end());
  return M;
}

SparseMatrix BrinkmanSystem::coupling_matrix() const {
  std::vector<Eigen::Triplet<double>> triplets;
  const std::size_t np = layout_.n_pressure();
  for (std::size_t t = 0; t < mesh_.n_elements(); ++t) {
    const MatrixXd &B = ops_[t].B;
    for (Eigen::Index r = 0; r < B.rows(); ++r) {
      std::size_t v;
      if (r < static_cast<Eigen::Index>(layout_.n_cell_velocity())) {
        v = cell_offset(t) + r;
      } else {
        const std::size_t rr = r - layout_.n_cell_velocity();
        const std::size_t j = rr / layout_.n_face_velocity();
        v = face_offset(mesh_.element_faces(t)[j].face) + rr % layout_.n_face_velocity();
      }
      for (std::size_t c = 0; c < np; ++c)
        if (B(r, c) != 0.0) triplets.emplace_back(t * np + c, v, B(r, c));
    }
  }
  SparseMatrix M(n_pressure(), n_velocity());
  M.setFromTriplets(triplets.begin(), triplets.end());
  return M;
}

VectorXd BrinkmanSystem::velocity_load() const {
  VectorXd F = VectorXd::Zero(n_velocity());
  for (std::size_t t = 0; t < mesh_.n_elements(); ++t) {
    F.segment(cell_offset(t), layout_.n_cell_velocity()) +=
        loads_[t].head(layout_.n_cell_velocity());
    for (int j = 0; j < 3; ++j)
      F.segment(face_offset(mesh_.element_faces(t)[j].face), layout_.n_face_velocity()) +=
          loads_[t].segment(layout_.face_offset(j), layout_.n_face_velocity());
  }
  return F;
}

std::size_t BrinkmanSystem::condensed_ndof() const {
  std::size_t n = mesh_.n_elements();
  for (std::size_t f = 0; f < mesh_.n_faces(); ++f)
    for (std::size_t i = 0; i < layout_.n_face_velocity(); ++i)
      if (status_[face_offset(f) + i] == DofStatus::free) ++n;
  return n;
}

SolveResult BrinkmanSystem::solve(bool condense) const {
  const auto start = Clock::now();
  const std::size_t nt = mesh_.n_elements();
  const std::size_t nc = layout_.n_cell_velocity(), nfv = layout_.n_face_velocity();
  const std::size_t nl = layout_.n_local_velocity(), np = layout_.n_pressure();
  SolveResult result;
  result.report.condensed = condense;
  DiscreteSolution &sol = result.solution;
  sol.velocity = boundary_values_;
  sol.pressure = VectorXd::Zero(n_pressure());
  const std::size_t gauge = mean_constraint_ ? 1 : 0;

  // Compact numbering of free velocity dofs (all of them, or faces only).
  std::vector<std::ptrdiff_t> index(n_velocity(), not_free);
  std::ptrdiff_t n_free = 0;
  for (std::size_t i = condense ? face_offset(0) : 0; i < n_velocity(); ++i)
    if (status_[i] == DofStatus::free) index[i] = n_free++;

  auto local_map = [&](std::size_t t) {
    std::vector<std::size_t> map;
    map.reserve(nl);
    for (std::size_t i = 0; i < nc; ++i) map.push_back(cell_offset(t) + i);
    for (int j = 0; j < 3; ++j)
      for (std::size_t i = 0; i < nfv; ++i)
        map.push_back(face_offset(mesh_.element_faces(t)[j].face) + i);
    return map;
  };

  std::vector<Eigen::Triplet<double>> triplets;
  VectorXd rhs;

  if (!condense) {
    const std::size_t n = static_cast<std::size_t>(n_free) + n_pressure() + gauge;
    rhs = VectorXd::Zero(n);
    const std::size_t p0 = n_free, lambda = n - 1;
    for (std::size_t t = 0; t < nt; ++t) {
      const auto map = local_map(t);
      const MatrixXd &A = ops_[t].A, &B = ops_[t].B;
      for (std::size_t r = 0; r < nl; ++r) {
        const std::ptrdiff_t gr = index[map[r]];
        if (gr == not_free) continue;
        rhs(gr) += loads_[t](r);
        for (std::size_t c = 0; c < nl; ++c) {
          const std::ptrdiff_t gc = index[map[c]];
          if (gc != not_free) {
            if (A(r, c) != 0.0) triplets.emplace_back(gr, gc, A(r, c));
          } else {
            rhs(gr) -= A(r, c) * boundary_values_(map[c]);
          }
        }
      }
      for (std::size_t q = 0; q < np; ++q) {
        const std::size_t gq = p0 + t * np + q;
        rhs(gq) -= pressure_load_(t * np + q);
        for (std::size_t v = 0; v < nl; ++v) {
          if (B(v, q) == 0.0) continue;
          const std::ptrdiff_t gv = index[map[v]];
          if (gv != not_free) {
            triplets.emplace_back(gq, gv, B(v, q));
            triplets.emplace_back(gv, gq, B(v, q));
          } else {
            rhs(gq) -= B(v, q) * boundary_values_(map[v]);
          }
        }
      }
      if (gauge) {
        triplets.emplace_back(p0 + t * np, lambda, mesh_.area(t));
        triplets.emplace_back(lambda, p0 + t * np, mesh_.area(t));
      }
    }
    SparseMatrix K(n, n);
    K.setFromTriplets(triplets.begin(), triplets.end());
    result.report.t_assembly = setup_seconds_ + seconds_since(start);
    const auto solve_start = Clock::now();
    const SparseSolve fz = sparse_solve(K, rhs);
    for (std::size_t i = 0; i < n_velocity(); ++i)
      if (index[i] != not_free) sol.velocity(i) = fz.x(index[i]);
    sol.pressure = fz.x.segment(p0, n_pressure());
    sol.multiplier = gauge ? fz.x(lambda) : 0.0;
    result.report.t_solve = seconds_since(solve_start);
    result.report.residual = fz.residual;
    result.report.nnz = fz.nnz;
    result.report.ndof = n - gauge;
  } else {
    // Per element: interior = [cell velocity, non-constant pressure modes],
    // boundary = [face velocities, mean pressure].
    const std::size_t nb = 3 * nfv + 1;
    const std::size_t n = static_cast<std::size_t>(n_free) + nt + gauge;
    const std::size_t p0 = n_free, lambda = n - 1;
    rhs = VectorXd::Zero(n);
    std::vector<MatrixXd> recover_matrix(nt);
    std::vector<VectorXd> recover_vector(nt);
    for (std::size_t t = 0; t < nt; ++t) {
      const MatrixXd &A = ops_[t].A, &B = ops_[t].B;
      MatrixXd K = MatrixXd::Zero(nl + np, nl + np);
      K.topLeftCorner(nl, nl) = A;
      K.topRightCorner(nl, np) = B;
      K.bottomLeftCorner(np, nl) = B.transpose();
      VectorXd r(nl + np);
      r << loads_[t], -pressure_load_.segment(t * np, np);

      std::vector<Eigen::Index> I, Bd;
      for (std::size_t i = 0; i < nc; ++i) I.push_back(i);
      for (std::size_t q = 1; q < np; ++q) I.push_back(nl + q);
      for (std::size_t i = nc; i < nl; ++i) Bd.push_back(i);
      Bd.push_back(nl);
      const MatrixXd KII = K(I, I), KIB = K(I, Bd), KBI = K(Bd, I), KBB = K(Bd, Bd);
      Eigen::PartialPivLU<MatrixXd> lu(KII);
      if (!(lu.rcond() > 1e-13))
        throw DiscretizationError("singular element block in static condensation (element " +
                                  std::to_string(t) + ")");
      recover_matrix[t] = lu.solve(KIB);
      recover_vector[t] = lu.solve(r(I));
      const MatrixXd S = KBB - KBI * recover_matrix[t];
      const VectorXd rs = r(Bd) - KBI * recover_vector[t];

      const auto map = local_map(t);
      std::vector<std::ptrdiff_t> gidx(nb);
      std::vector<double> fixed_value(nb, 0.0);
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        const std::size_t v = map[nc + b];
        gidx[b] = index[v];
        fixed_value[b] = boundary_values_(v);
      }
      gidx[nb - 1] = p0 + t;
      for (std::size_t a = 0; a < nb; ++a) {
        if (gidx[a] == not_free) continue;
        rhs(gidx[a]) += rs(a);
        for (std::size_t b = 0; b < nb; ++b) {
          if (gidx[b] != not_free) {
            if (S(a, b) != 0.0) triplets.emplace_back(gidx[a], gidx[b], S(a, b));
          } else {
            rhs(gidx[a]) -= S(a, b) * fixed_value[b];
          }
        }
      }
      if (gauge) {
        triplets.emplace_back(p0 + t, lambda, mesh_.area(t));
        triplets.emplace_back(lambda, p0 + t, mesh_.area(t));
      }
    }
    SparseMatrix K(n, n);
    K.setFromTriplets(triplets.begin(), triplets.end());
    result.report.t_assembly = setup_seconds_ + seconds_since(start);
    const auto solve_start = Clock::now();
    const SparseSolve fz = sparse_solve(K, rhs);
    for (std::size_t i = 0; i < n_velocity(); ++i)
      if (index[i] != not_free) sol.velocity(i) = fz.x(index[i]);
    sol.multiplier = gauge ? fz.x(lambda) : 0.0;
    for (std::size_t t = 0; t < nt; ++t) {
      const auto map = local_map(t);
      VectorXd xb(nb);
      for (std::size_t b = 0; b + 1 < nb; ++b) xb(b) = sol.velocity(map[nc + b]);
      xb(nb - 1) = fz.x(p0 + t);
      const VectorXd xi = recover_vector[t] - recover_matrix[t] * xb;
      sol.velocity.segment(cell_offset(t), nc) = xi.head(nc);
      sol.pressure(t * np) = xb(nb - 1);
      sol.pressure.segment(t * np + 1, np - 1) = xi.tail(np - 1);
    }
    result.report.t_solve = seconds_since(solve_start);
    result.report.residual = fz.residual;
    result.report.nnz = fz.nnz;
    result.report.ndof = n - gauge;
  }

  // Discrete mass equation: b_h(u_h, q) + (g, q) = 0 for every pressure basis function.
  const SparseMatrix Bq = coupling_matrix();
  const VectorXd mass = Bq * sol.velocity + pressure_load_;
  const VectorXd scale = Bq.cwiseAbs() * sol.velocity.cwiseAbs() + pressure_load_.cwiseAbs();
  const double denom = scale.size() ? scale.maxCoeff() : 0.0;
  result.report.mass_residual =
      denom > 0.0 ? mass.cwiseAbs().maxCoeff() / denom : mass.cwiseAbs().maxCoeff();
  return result;
}

} // namespace hho
