// Quadrature rules on the reference triangle and the unit interval, and their
// affine images on mesh elements and faces.
#ifndef HHO_QUADRATURE_HPP
#define HHO_QUADRATURE_HPP

#include <cstddef>
#include <vector>

#include "hho/mesh.hpp"

namespace hho {

/// Points and positive weights. On the reference triangle (0,0),(1,0),(0,1)
/// the weights sum to 1/2; on the reference edge [0,1] (stored as (s,0))
/// they sum to 1. Physical rules carry physical points and weights.
struct QuadratureRule {
  std::vector<Point> points;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

/// Highest polynomial degree for which rules are available.
inline constexpr int max_quadrature_degree = 60;

/// Gauss-Legendre rule with n points on [0,1].
QuadratureRule gauss_legendre(int n);

/// Rule on the reference triangle exact for total degree <= degree
/// (collapsed Gauss-Legendre product rule).
QuadratureRule triangle_quadrature(int degree);

/// Rule on [0,1] exact for degree <= degree.
QuadratureRule edge_quadrature(int degree);

/// Reference triangle rule mapped onto element t.
QuadratureRule element_quadrature(const Mesh &mesh, std::size_t t, int degree);

/// Reference edge rule mapped onto face f, parametrised from its first to its
/// second vertex.
QuadratureRule face_quadrature(const Mesh &mesh, std::size_t f, int degree);

} // namespace hho

#endif
