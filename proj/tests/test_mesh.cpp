// Mesh construction, refinement, regularity and file input.
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hho/errors.hpp"
#include "hho/mesh.hpp"
#include "hho/problems.hpp"

using namespace hho;

namespace {

int single_region(const Point &) { return 0; }

Mesh one_triangle(Point a, Point b, Point c) { return Mesh({a, b, c}, {{0, 1, 2}}, {0}); }

} // namespace

TEST_CASE("unit square with one diagonal cell") {
  const Mesh m = build_rect_mesh({0, 1, 0, 1}, 1, single_region, SplitPattern::diagonal);
  CHECK(m.n_elements() == 2);
  CHECK(m.n_faces() == 5);
  CHECK(m.n_interior_faces() == 1);
  CHECK(m.n_boundary_faces() == 4);
  CHECK(m.area(0) + m.area(1) == doctest::Approx(1.0));
}

TEST_CASE("coarsest family mesh has 32 elements and 40 interior faces") {
  const Mesh m = build_rect_mesh({0, 2, -1, 1}, 4, 4, single_region, SplitPattern::diagonal);
  CHECK(m.n_elements() == 32);
  CHECK(m.n_interior_faces() == 40);
  CHECK(m.h() == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("criss-cross split counts") {
  const Mesh m = build_rect_mesh({0, 1, 0, 1}, 2, single_region, SplitPattern::criss_cross);
  CHECK(m.n_elements() == 16);
  CHECK(m.n_vertices() == 13);
  CHECK(m.n_faces() == m.n_vertices() + m.n_elements() - 1);
}

TEST_CASE("quadrant regions align with elements") {
  const Mesh m = refine_uniform(build_rect_mesh({-1, 1, -1, 1}, 4, 4, quadrant));
  for (std::size_t t = 0; t < m.n_elements(); ++t) {
    const int q = m.region(t);
    CHECK(q == quadrant(m.centroid(t)));
    for (const Point &v : m.element_vertices(t)) {
      const double sx = (q == 0 || q == 3) ? 1.0 : -1.0;
      const double sy = (q == 0 || q == 1) ? 1.0 : -1.0;
      CHECK(sx * v.x() >= -1e-14);
      CHECK(sy * v.y() >= -1e-14);
    }
  }
}

TEST_CASE("element orientation and face normals") {
  const Mesh m = refine_uniform(build_rect_mesh({0, 2, -1, 1}, 3, 2, single_region));
  for (std::size_t t = 0; t < m.n_elements(); ++t) {
    CHECK(m.area(t) > 0.0);
    Eigen::Vector2d closure = Eigen::Vector2d::Zero();
    for (const ElementFace &ef : m.element_faces(t)) {
      CHECK(ef.normal.norm() == doctest::Approx(1.0));
      CHECK((ef.normal - ef.orientation * m.face_normal(ef.face)).norm() < 1e-14);
      CHECK((m.face_midpoint(ef.face) - m.centroid(t)).dot(ef.normal) > 0.0);
      closure += m.h_face(ef.face) * ef.normal;
    }
    CHECK(closure.norm() < 1e-14);
  }
  for (std::size_t f = 0; f < m.n_faces(); ++f) {
    if (m.is_boundary(f)) continue;
    const auto [t0, t1] = m.face_elements(f);
    int o0 = 0, o1 = 0;
    for (const ElementFace &ef : m.element_faces(t0))
      if (ef.face == f) o0 = ef.orientation;
    for (const ElementFace &ef : m.element_faces(t1))
      if (ef.face == f) o1 = ef.orientation;
    CHECK(o0 * o1 == -1);
  }
}

TEST_CASE("uniform refinement") {
  const Mesh coarse = build_rect_mesh({0, 0.3, 0, 0.4}, 1, 1, single_region, SplitPattern::diagonal);
  CHECK(coarse.h() == doctest::Approx(0.5));
  const Mesh fine = refine_uniform(coarse);
  CHECK(fine.n_elements() == 8);
  CHECK(fine.h() == doctest::Approx(0.25));
  CHECK(regularity_ratio(fine) == doctest::Approx(regularity_ratio(coarse)).epsilon(1e-12));

  const Mesh cc = build_rect_mesh({0, 2, -1, 1}, 2, single_region, SplitPattern::criss_cross);
  const Mesh cc2 = refine_uniform(cc);
  CHECK(cc2.n_elements() == 4 * cc.n_elements());
  CHECK(regularity_ratio(cc2) == doctest::Approx(regularity_ratio(cc)).epsilon(1e-12));
  double area = 0.0;
  for (std::size_t t = 0; t < cc2.n_elements(); ++t) area += cc2.area(t);
  CHECK(area == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("regularity ratio") {
  const Mesh eq = one_triangle({0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2});
  CHECK(regularity_ratio(eq) == doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-12));

  const Mesh right = one_triangle({0, 0}, {1, 0}, {0, 1});
  CHECK(right.h_element(0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(right.inradius(0) == doctest::Approx((2.0 - std::sqrt(2.0)) / 2.0));
  CHECK(regularity_ratio(right) == doctest::Approx(4.8284271247).epsilon(1e-9));

  const Mesh scaled = one_triangle({0, 0}, {7.5, 0}, {0, 7.5});
  CHECK(regularity_ratio(scaled) == doctest::Approx(regularity_ratio(right)).epsilon(1e-12));
}

TEST_CASE("ASCII mesh input") {
  std::istringstream good("4 2\n0 0\n1 0\n1 1\n0 1\n0 1 2 0\n0 2 3 1\n");
  const Mesh m = read_mesh(good);
  CHECK(m.n_elements() == 2);
  CHECK(m.n_interior_faces() == 1);
  CHECK(m.region(1) == 1);

  std::istringstream clockwise("3 1\n0 0\n0 1\n1 0\n0 1 2 0\n");
  CHECK(read_mesh(clockwise).area(0) == doctest::Approx(0.5));

  std::istringstream truncated("4 2\n0 0\n1 0\n1 1\n");
  CHECK_THROWS_AS(read_mesh(truncated), InvalidInput);
  std::istringstream bad_index("3 1\n0 0\n1 0\n0 1\n0 1 5 0\n");
  CHECK_THROWS_AS(read_mesh(bad_index), InvalidInput);
  std::istringstream degenerate("3 1\n0 0\n1 0\n2 0\n0 1 2 0\n");
  CHECK_THROWS_AS(read_mesh(degenerate), InvalidInput);
  CHECK_THROWS_AS(load_mesh("/nonexistent/mesh.txt"), InvalidInput);
}

TEST_CASE("degenerate rectangles are rejected") {
  CHECK_THROWS_AS(build_rect_mesh({0, 0, 0, 1}, 2, single_region), InvalidInput);
  CHECK_THROWS_AS(build_rect_mesh({0, 1, 0, 1}, 0, 2, single_region), InvalidInput);
}
