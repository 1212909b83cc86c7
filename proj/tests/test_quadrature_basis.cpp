// Quadrature rules, element/face/RTN bases and L2 projections.
#include <doctest.h>

#include <cmath>
#include <random>

#include "hho/basis.hpp"
#include "hho/errors.hpp"
#include "hho/property_checks.hpp"
#include "hho/quadrature.hpp"

using namespace hho;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

double integrate(const QuadratureRule &rule, const ScalarFunction &f) {
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) sum += rule.weights[q] * f(rule.points[q]);
  return sum;
}

Mesh unit_triangle() { return Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {0}); }

} // namespace

TEST_CASE("reference rules") {
  const QuadratureRule t2 = triangle_quadrature(2);
  CHECK(integrate(t2, [](const Point &) { return 1.0; }) == doctest::Approx(0.5));
  const QuadratureRule t3 = triangle_quadrature(3);
  CHECK(integrate(t3, [](const Point &x) { return x.x() * x.x() * x.y(); }) ==
        doctest::Approx(1.0 / 60.0).epsilon(1e-14));
  const QuadratureRule e3 = edge_quadrature(3);
  CHECK(integrate(e3, [](const Point &x) { return std::pow(x.x(), 3); }) ==
        doctest::Approx(0.25).epsilon(1e-14));
  for (const double w : triangle_quadrature(12).weights) CHECK(w > 0.0);
}

TEST_CASE("triangle rules are exact up to their degree") {
  for (int degree : {0, 1, 4, 9, 17, 30}) {
    const QuadratureRule rule = triangle_quadrature(degree);
    CHECK(rule.degree >= degree);
    for (int a = 0; a <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b) {
        const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
        const double got = integrate(rule, [&](const Point &x) {
          return std::pow(x.x(), a) * std::pow(x.y(), b);
        });
        CHECK(got == doctest::Approx(exact).epsilon(1e-12));
      }
  }
}

TEST_CASE("edge rules are exact up to their degree") {
  for (int degree : {0, 3, 10, 25}) {
    const QuadratureRule rule = edge_quadrature(degree);
    for (int a = 0; a <= degree; ++a)
      CHECK(integrate(rule, [&](const Point &x) { return std::pow(x.x(), a); }) ==
            doctest::Approx(1.0 / (a + 1)).epsilon(1e-13));
  }
}

TEST_CASE("physical rules") {
  const Mesh mesh({{0.2, 0.1}, {1.7, 0.4}, {0.5, 1.3}}, {{0, 1, 2}}, {0});
  const QuadratureRule rule = element_quadrature(mesh, 0, 6);
  CHECK(integrate(rule, [](const Point &) { return 1.0; }) == doctest::Approx(mesh.area(0)));
  const Point c = mesh.centroid(0);
  CHECK(integrate(rule, [&](const Point &x) { return x.x() - c.x(); }) ==
        doctest::Approx(0.0).epsilon(1e-14).scale(1.0));
  for (std::size_t f = 0; f < mesh.n_faces(); ++f) {
    const QuadratureRule fr = face_quadrature(mesh, f, 4);
    CHECK(integrate(fr, [](const Point &) { return 1.0; }) == doctest::Approx(mesh.h_face(f)));
  }
}

TEST_CASE("unsupported quadrature degree") {
  CHECK_THROWS_AS(triangle_quadrature(max_quadrature_degree + 1), CapabilityError);
  CHECK_THROWS_AS(edge_quadrature(max_quadrature_degree + 1), CapabilityError);
}

TEST_CASE("element basis is orthonormal up to the area") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const Mesh mesh = random_triangle(rng, 30.0);
    for (int degree = 0; degree <= 5; ++degree) {
      const ScalarBasis basis = element_basis(mesh, 0, degree);
      CHECK(basis.size() == dim_poly_2d(degree));
      const MatrixXd G = gram_matrix(mesh, 0, basis) / mesh.area(0);
      CHECK((G - MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() < 1e-11);
      CHECK(basis.values(mesh.centroid(0))(0) == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("element basis gradients match finite differences") {
  const Mesh mesh({{0.1, 0.0}, {1.3, 0.2}, {0.4, 0.9}}, {{0, 1, 2}}, {0});
  const ScalarBasis basis = element_basis(mesh, 0, 3);
  const Point x(0.55, 0.35);
  const double eps = 1e-6;
  const VectorValues g = basis.gradients(x);
  const VectorXd dx = (basis.values(x + Point(eps, 0)) - basis.values(x - Point(eps, 0))) / (2 * eps);
  const VectorXd dy = (basis.values(x + Point(0, eps)) - basis.values(x - Point(0, eps))) / (2 * eps);
  CHECK((g.col(0) - dx).cwiseAbs().maxCoeff() < 1e-7);
  CHECK((g.col(1) - dy).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("element projection") {
  const Mesh mesh = unit_triangle();
  const VectorXd c = l2_project_element(mesh, 0, [](const Point &x) { return x.x(); }, 0);
  REQUIRE(c.size() == 1);
  CHECK(c(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  // Idempotent on P^l.
  const ScalarFunction cubic = [](const Point &x) {
    return 1.0 - 2.0 * x.x() + x.x() * x.y() * x.y() + 0.5 * std::pow(x.y(), 3);
  };
  const VectorXd pc = l2_project_element(mesh, 0, cubic, 3);
  const ScalarBasis basis = element_basis(mesh, 0, 3);
  for (const Point &x : {Point(0.1, 0.2), Point(0.6, 0.3), Point(0.0, 1.0)})
    CHECK(evaluate(basis, pc, x) == doctest::Approx(cubic(x)).epsilon(1e-12));
}

TEST_CASE("element projection does not increase the L2 norm") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const Mesh mesh({{0.2, 0.1}, {1.7, 0.4}, {0.5, 1.3}}, {{0, 1, 2}}, {0});
  for (int trial = 0; trial < 20; ++trial) {
    const ScalarBasis high = element_basis(mesh, 0, 5);
    VectorXd a(high.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = coef(rng);
    const ScalarFunction f = [&](const Point &x) { return evaluate(high, a, x); };
    for (int degree = 0; degree <= 4; ++degree) {
      const VectorXd c = l2_project_element(mesh, 0, f, degree);
      const double proj_norm2 = mesh.area(0) * c.squaredNorm();
      const double norm2 = mesh.area(0) * a.squaredNorm();
      CHECK(proj_norm2 <= norm2 * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("face projection") {
  const Mesh mesh({{0.0, 0.0}, {2.0, 1.0}, {0.3, 1.5}}, {{0, 1, 2}}, {0});
  for (std::size_t f = 0; f < mesh.n_faces(); ++f) {
    const double L = mesh.h_face(f);
    const Point m = mesh.face_midpoint(f);
    const Eigen::Vector2d tau = mesh.face_tangent(f);
    auto s = [&](const Point &x) { return (x - m).dot(tau); };

    const VectorXd c0 = l2_project_face(mesh, f, [](const Point &) { return 4.5; }, 2);
    CHECK(c0(0) == doctest::Approx(4.5));
    CHECK(std::abs(c0(1)) < 1e-13);
    CHECK(std::abs(c0(2)) < 1e-13);

    // Best linear fit of s^2 on a symmetric interval is the constant L^2/12.
    const ScalarFunction sq = [&](const Point &x) { return s(x) * s(x); };
    const VectorXd c1 = l2_project_face(mesh, f, sq, 1);
    CHECK(c1(0) == doctest::Approx(L * L / 12.0).epsilon(1e-13));
    CHECK(std::abs(c1(1)) < 1e-13);
    const FaceBasis psi = face_basis(mesh, f, 1);
    const QuadratureRule rule = face_quadrature(mesh, f, 6);
    double r0 = 0.0, r1 = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point &x = rule.points[q];
      const double r = sq(x) - psi.values(x).dot(c1);
      r0 += rule.weights[q] * r;
      r1 += rule.weights[q] * r * s(x);
    }
    CHECK(std::abs(r0) < 1e-12);
    CHECK(std::abs(r1) < 1e-12);

    const ScalarFunction cubic = [&](const Point &x) {
      return 1.0 - s(x) + 3.0 * std::pow(s(x), 3);
    };
    const VectorXd c3 = l2_project_face(mesh, f, cubic, 3);
    const FaceBasis psi3 = face_basis(mesh, f, 3);
    CHECK(psi3.values(mesh.vertex(mesh.face(f)[0])).dot(c3) ==
          doctest::Approx(cubic(mesh.vertex(mesh.face(f)[0]))).epsilon(1e-12));
  }
}

TEST_CASE("RTN space") {
  CHECK(dim_rtn(0) == 3);
  CHECK(dim_rtn(1) == 8);
  const Mesh mesh({{0.2, 0.1}, {1.7, 0.4}, {0.5, 1.3}}, {{0, 1, 2}}, {0});
  for (int k = 0; k <= 4; ++k) {
    const RTNBasis rtn = rtn_basis(mesh, 0, k);
    CHECK(rtn.size() == dim_rtn(k));

    const QuadratureRule rule = element_quadrature(mesh, 0, 2 * k + 2);
    MatrixXd G = MatrixXd::Zero(rtn.size(), rtn.size());
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const VectorValues v = rtn.values(rule.points[q]);
      G += rule.weights[q] * v * v.transpose();
    }
    G /= mesh.area(0);
    CHECK((G - MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() < 1e-11);

    // Divergences lie in P^k.
    const ScalarBasis pk = element_basis(mesh, 0, k);
    for (std::size_t i = 0; i < rtn.size(); ++i) {
      const ScalarFunction div = [&](const Point &x) { return rtn.divergences(x)(i); };
      const VectorXd c = l2_project_element(mesh, 0, div, k);
      double worst = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q)
        worst = std::max(worst, std::abs(evaluate(pk, c, rule.points[q]) - div(rule.points[q])));
      CHECK(worst < 1e-12);
    }
  }
}

TEST_CASE("RTN divergence matches finite differences") {
  const Mesh mesh({{0.2, 0.1}, {1.7, 0.4}, {0.5, 1.3}}, {{0, 1, 2}}, {0});
  const RTNBasis rtn = rtn_basis(mesh, 0, 2);
  const Point x(0.8, 0.6);
  const double eps = 1e-6;
  const VectorValues px = rtn.values(x + Point(eps, 0)), mx = rtn.values(x - Point(eps, 0));
  const VectorValues py = rtn.values(x + Point(0, eps)), my = rtn.values(x - Point(0, eps));
  const VectorXd fd = (px.col(0) - mx.col(0) + py.col(1) - my.col(1)) / (2 * eps);
  CHECK((rtn.divergences(x) - fd).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("negative degrees are rejected") {
  const Mesh mesh = unit_triangle();
  CHECK_THROWS_AS(element_basis(mesh, 0, -1), InvalidInput);
  CHECK_THROWS_AS(rtn_basis(mesh, 0, -1), InvalidInput);
}
