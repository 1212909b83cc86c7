// Manufactured solutions: Brinkman family, Philips and Kellogg Darcy cases.
#include "hho/problems.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>

#include "hho/errors.hpp"

namespace hho {

using Eigen::Matrix2d;
using Eigen::Vector2d;
using std::cos;
using std::sin;

namespace {

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

int zero_region(const Point &) { return 0; }

} // namespace

void CoefficientField::validate() const {
  if (!mu || !nu) throw InvalidInput("coefficient field is incomplete");
  if (mu_min < 0.0 || nu_min < 0.0 || mu_max < mu_min || nu_max < nu_min)
    throw InvalidInput("coefficient bounds must satisfy 0 <= min <= max");
  if (!std::isfinite(mu_max) || !std::isfinite(nu_max))
    throw InvalidInput("coefficients must be finite");
  if (mu_min > 0.0) return;
  if (mu_max == 0.0 && nu_min > 0.0) return;
  throw InvalidInput("need mu > 0 everywhere, or mu = 0 everywhere with nu > 0");
}

int quadrant(const Point &x) {
  if (x.y() >= 0.0) return x.x() >= 0.0 ? 0 : 1;
  return x.x() < 0.0 ? 2 : 3;
}

ManufacturedCase brinkman_family(double mu, double nu, std::optional<double> cf_omega) {
  if (!(mu >= 0.0) || !(nu >= 0.0) || !std::isfinite(mu) || !std::isfinite(nu))
    throw InvalidInput("family case: mu and nu must be finite and nonnegative");
  if (mu == 0.0 && nu == 0.0) throw InvalidInput("family case: mu and nu cannot both vanish");
  const double cf = cf_omega ? *cf_omega
                             : (mu == 0.0 ? std::numeric_limits<double>::infinity() : nu / mu);
  if (std::isnan(cf) || cf < 0.0) throw InvalidInput("family case: Cf_Omega must be in [0, inf]");
  if (mu == 0.0 && std::isfinite(cf))
    throw InvalidInput("family case: mu = 0 requires Cf_Omega = inf");
  if (nu == 0.0 && cf != 0.0) throw InvalidInput("family case: nu = 0 requires Cf_Omega = 0");
  const double chi = std::isinf(cf) ? 0.0 : std::exp(-cf);
  const double dw = nu > 0.0 ? (1.0 - chi) / nu : 0.0; // weight of the Darcy part

  ManufacturedCase c;
  c.id = "family_mu" + format_number(mu) + "_nu" + format_number(nu);
  if (cf_omega) c.id += "_cf" + format_number(cf);
  c.domain = {0.0, 2.0, -1.0, 1.0};
  c.region = zero_region;
  c.base_nx = 4;
  c.base_ny = 4;
  c.coefficients.mu = [mu](int) { return mu; };
  c.coefficients.nu = [nu](const Point &, int) { return nu; };
  c.coefficients.mu_min = c.coefficients.mu_max = mu;
  c.coefficients.nu_min = c.coefficients.nu_max = nu;
  c.coefficients.validate();
  c.bc = mu > 0.0 ? BoundaryKind::dirichlet : BoundaryKind::normal_flux;

  // u = chi u_S + (1 - chi) u_D with u_S = (s1 s2, c1 c2), u_D = -grad p / nu.
  c.u = [chi, dw](const Point &x, int) {
    const double s1 = sin(x.x()), c1 = cos(x.x()), s2 = sin(x.y()), c2 = cos(x.y());
    return Vector2d(chi * s1 * s2 + dw * s1 * s2, chi * c1 * c2 - dw * c1 * c2);
  };
  c.grad_u = [chi, dw](const Point &x, int) {
    const double s1 = sin(x.x()), c1 = cos(x.x()), s2 = sin(x.y()), c2 = cos(x.y());
    Matrix2d gs, gd;
    gs << c1 * s2, s1 * c2, -s1 * c2, -c1 * s2;
    gd << c1 * s2, s1 * c2, s1 * c2, c1 * s2;
    return Matrix2d(chi * gs + dw * gd);
  };
  c.p = [](const Point &x) { return cos(x.x()) * sin(x.y()); };
  c.f = [mu, nu, chi, dw](const Point &x, int) {
    const double s1 = sin(x.x()), c1 = cos(x.x()), s2 = sin(x.y()), c2 = cos(x.y());
    const Vector2d us(s1 * s2, c1 * c2);
    const Vector2d ud_scaled(s1 * s2, -c1 * c2); // nu u_D
    const Vector2d grad_p(-s1 * s2, c1 * c2);
    return Vector2d(chi * (2.0 * mu + nu) * us + dw * (4.0 * mu + nu) * ud_scaled + grad_p);
  };
  c.g = [dw](const Point &x, int) { return dw * 2.0 * cos(x.x()) * sin(x.y()); };
  return c;
}

ManufacturedCase philips_case(double alpha, int quad_boost) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("Philips case: alpha must lie in (0,1)");
  if (quad_boost < 0) throw InvalidInput("quadrature boost must be nonnegative");
  ManufacturedCase c;
  c.id = "philips";
  if (alpha != philips_default_alpha) c.id += "_alpha" + format_number(alpha);
  const double pi = std::numbers::pi;
  c.domain = {0.0, 3.0 * pi, 0.0, 2.0 * pi};
  c.region = zero_region;
  c.base_nx = 6;
  c.base_ny = 4;
  c.coefficients.mu = [](int) { return 0.0; };
  c.coefficients.nu = [alpha](const Point &x, int) {
    const double c2 = cos(x.y());
    return 1.0 / (1.0 + 2.0 * alpha * sin(x.x()) * c2 + alpha * alpha * c2 * c2);
  };
  c.coefficients.nu_smooth = true;
  c.coefficients.nu_min = 1.0 / ((1.0 + alpha) * (1.0 + alpha));
  c.coefficients.nu_max = 1.0 / ((1.0 - alpha) * (1.0 - alpha));
  c.coefficients.validate();
  c.bc = BoundaryKind::normal_flux;
  c.u = [alpha](const Point &x, int) {
    return Vector2d(-1.0 - alpha * sin(x.x()) * cos(x.y()), alpha * cos(x.x()) * sin(x.y()));
  };
  c.grad_u = [alpha](const Point &x, int) {
    const double s1 = sin(x.x()), c1 = cos(x.x()), s2 = sin(x.y()), c2 = cos(x.y());
    Matrix2d g;
    g << -alpha * c1 * c2, alpha * s1 * s2, -alpha * s1 * s2, alpha * c1 * c2;
    return g;
  };
  c.f = [](const Point &, int) { return Vector2d(0.0, 0.0); };
  c.g = [](const Point &, int) { return 0.0; };
  c.quad_boost = quad_boost;
  return c;
}

KelloggParameters kellogg_parameters(double ratio) {
  if (!(ratio > 1.0) || !std::isfinite(ratio))
    throw InvalidInput("Kellogg case: permeability ratio must be finite and > 1");
  const double pi = std::numbers::pi, rho = pi / 4.0;
  // Residuals of the transmission conditions with rho = pi/4.
  auto residual = [&](double R, double g, double s) {
    const double t = std::tan(rho * g);
    return Vector2d(std::tan((pi / 2.0 - s) * g) + R * t, std::tan(s * g) + R * t);
  };
  auto newton = [&](double R, double &g, double &s) {
    for (int it = 0; it < 100; ++it) {
      const Vector2d F = residual(R, g, s);
      if (F.norm() < 1e-14 * R) return true;
      Matrix2d J;
      const double eps = 1e-7;
      J.col(0) = (residual(R, g * (1 + eps), s) - residual(R, g * (1 - eps), s)) / (2 * eps * g);
      J.col(1) = (residual(R, g, s * (1 + eps)) - residual(R, g, s * (1 - eps))) / (2 * eps * s);
      Vector2d step = J.fullPivLu().solve(F);
      // Damping keeps the iterate inside the branch of the tangent functions.
      double lambda = 1.0;
      while (lambda > 1e-6 && residual(R, g - lambda * step(0), s - lambda * step(1)).norm() >=
                                  F.norm())
        lambda *= 0.5;
      g -= lambda * step(0);
      s -= lambda * step(1);
      if (!(g > 0.0 && g < 1.0)) return false;
    }
    return residual(R, g, s).norm() < 1e-10 * R;
  };
  double gamma = 0.1269020697222, sigma = -11.5926215980874;
  const double r0 = 100.0;
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(std::log(ratio / r0)) / 0.05)));
  for (int i = 1; i <= steps; ++i) {
    const double R = r0 * std::exp(std::log(ratio / r0) * i / steps);
    if (!newton(R, gamma, sigma))
      throw CapabilityError("Kellogg parameters: Newton iteration failed for ratio " +
                            format_number(ratio));
  }
  return {gamma, rho, sigma};
}

ManufacturedCase kellogg_case(double ratio, BoundaryKind bc) {
  const KelloggParameters kp = kellogg_parameters(ratio);
  const double pi = std::numbers::pi;
  const double gamma = kp.gamma, rho = kp.rho, sigma = kp.sigma;
  // Branch q: s(theta) = A_q cos((theta - beta_q) gamma) on [q pi/2, (q+1) pi/2].
  const std::array<double, 4> amp = {cos((pi / 2 - sigma) * gamma), cos(rho * gamma),
                                     cos(sigma * gamma), cos((pi / 2 - rho) * gamma)};
  const std::array<double, 4> shift = {pi / 2 - rho, pi - sigma, pi + rho, 3 * pi / 2 + sigma};
  auto angle = [pi](const Point &x, int q) {
    const double centre = (q + 0.5) * pi / 2;
    return centre + std::remainder(std::atan2(x.y(), x.x()) - centre, 2 * pi);
  };
  // nu is the inverse permeability: permeability is `ratio` times larger in quadrants 1,3.
  auto nu_of = [ratio](int q) { return (q % 2 == 0) ? 1.0 : ratio; };

  ManufacturedCase c;
  c.id = "kellogg";
  if (ratio != 100.0) c.id += "_ratio" + format_number(ratio);
  if (bc == BoundaryKind::normal_flux) c.id += "_flux";
  if (bc == BoundaryKind::dirichlet) c.id += "_dirichlet";
  c.domain = {-1.0, 1.0, -1.0, 1.0};
  c.region = quadrant;
  c.base_nx = 4;
  c.base_ny = 4;
  c.coefficients.mu = [](int) { return 0.0; };
  c.coefficients.nu = [nu_of](const Point &, int q) { return nu_of(q); };
  c.coefficients.nu_min = 1.0;
  c.coefficients.nu_max = ratio;
  c.coefficients.validate();
  c.bc = bc;

  // On quadrant q, p = Re(A_q e^{-i gamma beta_q} z^gamma) is harmonic, so
  // p_x - i p_y = A_q gamma e^{-i gamma beta_q} z^(gamma-1).
  auto power = [=](const Point &x, int q, double exponent) {
    const double r = x.norm();
    if (r < 1e-14) throw InvalidInput("Kellogg case: derivatives undefined at the origin");
    return std::polar(std::pow(r, exponent), exponent * angle(x, q)) *
           std::polar(amp[q], -gamma * shift[q]);
  };
  c.p = [=](const Point &x) {
    const double r = x.norm();
    if (r == 0.0) return 0.0;
    const int q = quadrant(x);
    return std::pow(r, gamma) * amp[q] * cos((angle(x, q) - shift[q]) * gamma);
  };
  c.u = [=](const Point &x, int q) {
    const std::complex<double> dp = gamma * power(x, q, gamma - 1.0);
    return Vector2d(-dp.real() / nu_of(q), dp.imag() / nu_of(q));
  };
  c.grad_u = [=](const Point &x, int q) {
    const std::complex<double> d2 = gamma * (gamma - 1.0) * power(x, q, gamma - 2.0) / nu_of(q);
    Matrix2d g;
    g << -d2.real(), d2.imag(), d2.imag(), d2.real();
    return g;
  };
  c.f = [](const Point &, int) { return Vector2d(0.0, 0.0); };
  c.g = [](const Point &, int) { return 0.0; };
  c.singular_point = Point(0.0, 0.0);
  c.singular_boost = 6;
  return c;
}

} // namespace hho
