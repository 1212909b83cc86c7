// Conforming triangular meshes of rectangles: construction, uniform refinement,
// geometric queries and a small ASCII reader.
#ifndef HHO_MESH_HPP
#define HHO_MESH_HPP

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hho {

using Point = Eigen::Vector2d;

struct Rectangle {
  double x_min, x_max, y_min, y_max;

  double area() const { return (x_max - x_min) * (y_max - y_min); }
  double perimeter() const { return 2.0 * ((x_max - x_min) + (y_max - y_min)); }
};

/// How each grid cell of a rectangle is cut into triangles.
enum class SplitPattern {
  diagonal,    ///< two triangles per cell, along the (x_min,y_min)-(x_max,y_max) diagonal
  criss_cross  ///< four triangles per cell, meeting at the cell centre
};

using RegionFunction = std::function<int(const Point &)>;

/// One face (edge) of an element, seen from that element.
struct ElementFace {
  std::size_t face;       ///< global face index
  Eigen::Vector2d normal; ///< outward unit normal n_TF
  int orientation;        ///< +1 if n_TF equals the face's canonical normal, -1 otherwise
};

/// Immutable conforming triangulation.
///
/// Elements are stored counter-clockwise. Local face i of an element joins its
/// vertices i and (i+1)%3. Faces are stored once with the lower vertex index
/// first; the canonical tangent goes from the first to the second vertex and the
/// canonical normal is the tangent rotated clockwise.
class Mesh {
public:
  Mesh(std::vector<Point> vertices, std::vector<std::array<std::size_t, 3>> elements,
       std::vector<int> regions);

  std::size_t n_vertices() const { return vertices_.size(); }
  std::size_t n_elements() const { return elements_.size(); }
  std::size_t n_faces() const { return faces_.size(); }
  std::size_t n_interior_faces() const { return n_interior_faces_; }
  std::size_t n_boundary_faces() const { return faces_.size() - n_interior_faces_; }

  const Point &vertex(std::size_t i) const { return vertices_[i]; }
  const std::vector<Point> &vertices() const { return vertices_; }
  const std::array<std::size_t, 3> &element(std::size_t t) const { return elements_[t]; }
  const std::array<std::size_t, 2> &face(std::size_t f) const { return faces_[f]; }
  const std::array<ElementFace, 3> &element_faces(std::size_t t) const { return elem_faces_[t]; }

  /// Elements sharing face f; the second entry is npos on the boundary.
  const std::array<std::size_t, 2> &face_elements(std::size_t f) const { return face_elems_[f]; }
  bool is_boundary(std::size_t f) const { return face_elems_[f][1] == npos; }

  int region(std::size_t t) const { return regions_[t]; }
  double h_element(std::size_t t) const { return h_elem_[t]; }
  double h_face(std::size_t f) const { return h_face_[f]; }
  double area(std::size_t t) const { return area_[t]; }
  double h() const { return h_max_; }

  Point centroid(std::size_t t) const;
  Point face_midpoint(std::size_t f) const;
  Eigen::Vector2d face_tangent(std::size_t f) const;
  Eigen::Vector2d face_normal(std::size_t f) const;
  double inradius(std::size_t t) const;
  std::array<Point, 3> element_vertices(std::size_t t) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
  std::vector<Point> vertices_;
  std::vector<std::array<std::size_t, 3>> elements_;
  std::vector<int> regions_;
  std::vector<std::array<std::size_t, 2>> faces_;
  std::vector<std::array<std::size_t, 2>> face_elems_;
  std::vector<std::array<ElementFace, 3>> elem_faces_;
  std::vector<double> h_elem_, h_face_, area_;
  std::size_t n_interior_faces_ = 0;
  double h_max_ = 0.0;
};

/// Structured triangulation of `domain` with nx-by-ny cells.
Mesh build_rect_mesh(const Rectangle &domain, int nx, int ny, const RegionFunction &region_fn,
                     SplitPattern pattern = SplitPattern::criss_cross);

/// Structured triangulation with n cells per unit length in each direction
/// (at least one cell per direction).
Mesh build_rect_mesh(const Rectangle &domain, int n, const RegionFunction &region_fn,
                     SplitPattern pattern = SplitPattern::criss_cross);

/// Red refinement: every triangle is cut into four congruent children through the
/// edge midpoints. Regions are inherited.
Mesh refine_uniform(const Mesh &mesh);

/// max over elements of h_T / r_T.
double regularity_ratio(const Mesh &mesh);

/// Reads the ASCII format: "nv ne", nv lines "x y", ne lines "i j k region" (0-based).
Mesh read_mesh(std::istream &in);
Mesh load_mesh(const std::string &path);

} // namespace hho

#endif
