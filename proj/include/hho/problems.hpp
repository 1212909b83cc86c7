// Coefficient fields and manufactured test cases for the Brinkman problem
//   -div(2 mu grad_s u) + nu u + grad p = f,   div u = g.
#ifndef HHO_PROBLEMS_HPP
#define HHO_PROBLEMS_HPP

#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "hho/mesh.hpp"

namespace hho {

/// mu is constant per region; nu is a function of position and region.
struct CoefficientField {
  std::function<double(int region)> mu;
  std::function<double(const Point &, int region)> nu;
  bool nu_smooth = false; ///< nu varies inside elements
  double mu_min = 0.0, mu_max = 0.0, nu_min = 0.0, nu_max = 0.0;

  /// Throws InvalidInput unless either mu_min > 0, or mu == 0 and nu_min > 0.
  void validate() const;
  bool darcy_only() const { return mu_max == 0.0; }
};

enum class BoundaryKind {
  dirichlet,   ///< full velocity trace prescribed
  normal_flux, ///< only u.n prescribed
  pressure     ///< p prescribed as a natural condition (Darcy regime only)
};

struct ManufacturedCase {
  std::string id;
  Rectangle domain;
  RegionFunction region;
  int base_nx = 1, base_ny = 1; ///< default base grid
  SplitPattern base_pattern = SplitPattern::diagonal;
  CoefficientField coefficients;
  BoundaryKind bc = BoundaryKind::dirichlet;

  std::function<Eigen::Vector2d(const Point &, int region)> u;
  std::function<Eigen::Matrix2d(const Point &, int region)> grad_u; ///< row i = grad u_i
  std::function<double(const Point &)> p;                          ///< empty if unknown
  std::function<Eigen::Vector2d(const Point &, int region)> f;
  std::function<double(const Point &, int region)> g;

  int quad_boost = 0;                  ///< extra degree for nu-weighted and data integrals
  std::optional<Point> singular_point; ///< elements touching it get singular_boost more
  int singular_boost = 0;
};

/// Solution family on (0,2)x(-1,1) blending a Stokes and a Darcy solution with
/// weight exp(-cf_omega). cf_omega defaults to nu/mu (+inf when mu = 0).
ManufacturedCase brinkman_family(double mu, double nu, std::optional<double> cf_omega = {});

inline constexpr double philips_default_alpha = 0.96837722339831622; // 1 - 10^(-3/2)

/// Darcy flow with smooth, strongly varying nu on (0,3pi)x(0,2pi); pressure unknown.
ManufacturedCase philips_case(double alpha = philips_default_alpha, int quad_boost = 4);

struct KelloggParameters {
  double gamma, rho, sigma;
};

/// Parameters of the four-quadrant singular solution for a permeability ratio
/// (quadrants 1,3 over quadrants 2,4) > 1, with rho = pi/4.
KelloggParameters kellogg_parameters(double ratio);

/// Darcy flow with quadrant-wise constant nu on (-1,1)^2 and a singular pressure
/// r^gamma s(theta). Regions are quadrants 0..3 counter-clockwise from x>0,y>0.
/// The exact pressure is imposed on the boundary unless `bc` says otherwise.
ManufacturedCase kellogg_case(double ratio = 100.0, BoundaryKind bc = BoundaryKind::pressure);

/// Region index of the quadrant containing x (ties go to the larger-x, larger-y side).
int quadrant(const Point &x);

} // namespace hho

#endif
