// Local operator invariants on random triangles.
#include "hho/property_checks.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hho/basis.hpp"
#include "hho/local_operators.hpp"
#include "hho/quadrature.hpp"

namespace hho {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Mesh random_triangle(std::mt19937 &rng, double max_ratio) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    std::vector<Point> v = {Point(unit(rng), unit(rng)), Point(unit(rng), unit(rng)),
                            Point(unit(rng), unit(rng))};
    const double area = 0.5 * std::abs((v[1] - v[0]).x() * (v[2] - v[0]).y() -
                                       (v[1] - v[0]).y() * (v[2] - v[0]).x());
    if (area < 1e-3) continue;
    Mesh mesh(std::move(v), {{0, 1, 2}}, {0});
    if (regularity_ratio(mesh) <= max_ratio) return mesh;
  }
}

namespace {

double min_eig_defect(const MatrixXd &m) {
  if (m.size() == 0) return 0.0;
  const double scale = std::max(m.norm(), 1e-300);
  const double lmin = Eigen::SelfAdjointEigenSolver<MatrixXd>(m).eigenvalues().minCoeff();
  return std::max(0.0, -lmin / scale);
}

class Tracker {
public:
  void update(const std::string &name, double value, double tolerance) {
    for (auto &r : results_)
      if (r.name == name) {
        r.value = std::max(r.value, value);
        return;
      }
    results_.push_back({name, value, tolerance});
  }
  std::vector<CheckResult> results() const { return results_; }

private:
  std::vector<CheckResult> results_;
};

} // namespace

std::vector<CheckResult> run_property_checks(const PropertyCheckOptions &options) {
  std::mt19937 rng(options.seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  Tracker track;
  for (int tri = 0; tri < options.triangles; ++tri) {
    const Mesh mesh = random_triangle(rng);
    for (int k = options.k_min; k <= options.k_max; ++k) {
      const bool darcy_only = (k == 0);
      const std::string tag = "_k" + std::to_string(k);
      const DofLayout layout = DofLayout::make(k, darcy_only);
      ElementCoefficients ec;
      ec.mu = darcy_only ? 0.0 : 1.0;
      ec.nu = [](const Point &x) { return 1.0 + 0.5 * std::sin(3.0 * x.x()) * x.y(); };
      ec.nu_varies = true;
      ec.quad_boost = 4;
      const LocalOperators ops = build_local_operators(mesh, 0, layout, ec);

      if (!darcy_only) {
        const ScalarBasis high = element_basis(mesh, 0, k + 1);
        double rs = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < 2 * high.size(); ++i) {
          VectorXd e = VectorXd::Zero(2 * high.size());
          e(i) = 1.0;
          const LocalVelocity I = interpolate_local(
              mesh, 0, layout, [&](const Point &x) { return evaluate_vector(high, e, x); });
          rs = std::max(rs, (ops.stokes_reconstruction * I.dofs - e).cwiseAbs().maxCoeff());
          ss = std::max(ss, (ops.stokes_stabilization * I.dofs).cwiseAbs().maxCoeff());
        }
        track.update("stokes_reconstruction_exact_on_Pk+1" + tag, rs, 1e-10);
        track.update("stokes_stabilization_polynomially_consistent" + tag, ss, 1e-10);

        const double a = coef(rng), b = coef(rng), c = coef(rng);
        const LocalVelocity rigid = interpolate_local(mesh, 0, layout, [&](const Point &x) {
          return Eigen::Vector2d(a - c * x.y(), b + c * x.x());
        });
        ElementCoefficients stokes_only = ec;
        stokes_only.nu = nullptr;
        const LocalOperators sops = build_local_operators(mesh, 0, layout, stokes_only);
        track.update("rigid_motion_has_zero_stokes_norm" + tag,
                     local_norms(rigid.dofs, sops).stokes, 1e-12);
        track.update("stokes_stabilization_symmetric" + tag,
                     (ops.stokes_stabilization - ops.stokes_stabilization.transpose()).norm(),
                     1e-13);
        track.update("stokes_stabilization_psd" + tag, min_eig_defect(ops.stokes_stabilization),
                     1e-10);
      }

      const RTNBasis rtn = rtn_basis(mesh, 0, k);
      double rd = 0.0;
      for (std::size_t i = 0; i < rtn.size(); ++i) {
        VectorXd e = VectorXd::Zero(rtn.size());
        e(i) = 1.0;
        const LocalVelocity I = interpolate_local(
            mesh, 0, layout, [&](const Point &x) { return evaluate_rtn(rtn, e, x); });
        rd = std::max(rd, (ops.darcy_reconstruction * I.dofs - e).cwiseAbs().maxCoeff());
      }
      track.update("darcy_reconstruction_exact_on_RTNk" + tag, rd, 1e-10);

      // Random local dofs for the remaining identities.
      VectorXd v(layout.n_local_velocity());
      for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = coef(rng);
      const VectorXd r = ops.darcy_reconstruction * v;
      double trace = 0.0;
      for (int j = 0; j < 3; ++j) {
        const ElementFace &ef = mesh.element_faces(0)[j];
        const FaceBasis psi = face_basis(mesh, ef.face, k);
        const QuadratureRule rule = face_quadrature(mesh, ef.face, 2 * k + 2);
        const VectorXd vf = v.segment(layout.face_offset(j), layout.n_face_velocity());
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const VectorXd p = psi.values(rule.points[q]);
          double vn = 0.0;
          for (int i = 0; i <= k; ++i) vn += vf(2 * i) * p(i);
          vn *= ef.orientation;
          trace = std::max(trace,
                           std::abs(evaluate_rtn(rtn, r, rule.points[q]).dot(ef.normal) - vn));
        }
      }
      track.update("darcy_normal_trace_matches_face_unknowns" + tag, trace, 1e-12);

      if (k >= 2) {
        const DarcyDifferences d = darcy_differences(mesh, 0, layout, ops.darcy_reconstruction);
        track.update("darcy_cell_difference_vanishes" + tag, d.cell.cwiseAbs().maxCoeff(), 1e-12);
      }

      // b_T(v, q) = -(div r_D v, q)_T
      const ScalarBasis pb = zero_mean_basis(mesh, 0, k);
      VectorXd qc(pb.size());
      for (Eigen::Index i = 0; i < qc.size(); ++i) qc(i) = coef(rng);
      const QuadratureRule rule = element_quadrature(mesh, 0, 2 * k + 2);
      double div_q = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q)
        div_q += rule.weights[q] * rtn.divergences(rule.points[q]).dot(r) *
                 pb.values(rule.points[q]).dot(qc);
      track.update("coupling_equals_minus_divergence_of_darcy_reconstruction" + tag,
                   std::abs(v.dot(ops.B * qc) + div_q), 1e-11);

      track.update("darcy_stabilization_psd" + tag, min_eig_defect(ops.darcy_stabilization), 1e-10);
      track.update("local_matrix_symmetric" + tag,
                   (ops.A - ops.A.transpose()).norm() / std::max(ops.A.norm(), 1e-300), 1e-13);
      track.update("local_matrix_psd" + tag, min_eig_defect(ops.A), 1e-10);
    }
  }
  return track.results();
}

} // namespace hho
