// Gauss-Legendre and collapsed (Duffy) triangle rules.
#include "hho/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "hho/errors.hpp"

namespace hho {

namespace {

constexpr int max_points = max_quadrature_degree / 2 + 2;

QuadratureRule compute_gauss_legendre(int n) {
  QuadratureRule rule;
  rule.degree = 2 * n - 1;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      const double pn = (n == 1) ? x : p1;
      const double pnm1 = (n == 1) ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Map from [-1,1] to [0,1].
    rule.points[i] = Point(0.5 * (1.0 - x), 0.0);
    rule.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

const std::vector<QuadratureRule> &gauss_table() {
  static const std::vector<QuadratureRule> table = [] {
    std::vector<QuadratureRule> t(max_points + 1);
    for (int n = 1; n <= max_points; ++n) t[n] = compute_gauss_legendre(n);
    return t;
  }();
  return table;
}

void check_degree(int degree) {
  if (degree < 0 || degree > max_quadrature_degree)
    throw CapabilityError("quadrature degree " + std::to_string(degree) +
                          " not supported (0.." + std::to_string(max_quadrature_degree) + ")");
}

} // namespace

QuadratureRule gauss_legendre(int n) {
  if (n < 1 || n > max_points)
    throw CapabilityError("Gauss-Legendre rule with " + std::to_string(n) + " points not available");
  return gauss_table()[n];
}

QuadratureRule edge_quadrature(int degree) {
  check_degree(degree);
  QuadratureRule rule = gauss_legendre(degree / 2 + 1);
  rule.degree = degree;
  return rule;
}

QuadratureRule triangle_quadrature(int degree) {
  check_degree(degree);
  // x = xi (1 - eta), y = eta, Jacobian (1 - eta): degree+1 in eta.
  const auto &gx = gauss_legendre(degree / 2 + 1);
  const auto &gy = gauss_legendre((degree + 1) / 2 + 1);
  QuadratureRule rule;
  rule.degree = degree;
  rule.points.reserve(gx.size() * gy.size());
  rule.weights.reserve(gx.size() * gy.size());
  for (std::size_t j = 0; j < gy.size(); ++j) {
    const double eta = gy.points[j].x();
    for (std::size_t i = 0; i < gx.size(); ++i) {
      const double xi = gx.points[i].x();
      rule.points.emplace_back(xi * (1.0 - eta), eta);
      rule.weights.push_back(gx.weights[i] * gy.weights[j] * (1.0 - eta));
    }
  }
  return rule;
}

QuadratureRule element_quadrature(const Mesh &mesh, std::size_t t, int degree) {
  const auto ref = triangle_quadrature(degree);
  const auto v = mesh.element_vertices(t);
  const Eigen::Vector2d e1 = v[1] - v[0], e2 = v[2] - v[0];
  const double jac = 2.0 * mesh.area(t);
  QuadratureRule rule;
  rule.degree = degree;
  rule.points.reserve(ref.size());
  rule.weights.reserve(ref.size());
  for (std::size_t q = 0; q < ref.size(); ++q) {
    rule.points.push_back(v[0] + ref.points[q].x() * e1 + ref.points[q].y() * e2);
    rule.weights.push_back(ref.weights[q] * jac);
  }
  return rule;
}

QuadratureRule face_quadrature(const Mesh &mesh, std::size_t f, int degree) {
  const auto ref = edge_quadrature(degree);
  const Point &a = mesh.vertex(mesh.face(f)[0]);
  const Point &b = mesh.vertex(mesh.face(f)[1]);
  const double len = mesh.h_face(f);
  QuadratureRule rule;
  rule.degree = degree;
  rule.points.reserve(ref.size());
  rule.weights.reserve(ref.size());
  for (std::size_t q = 0; q < ref.size(); ++q) {
    rule.points.push_back(a + ref.points[q].x() * (b - a));
    rule.weights.push_back(ref.weights[q] * len);
  }
  return rule;
}

} // namespace hho
