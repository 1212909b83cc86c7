// Mesh construction and queries.
#include "hho/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <utility>

#include "hho/errors.hpp"

namespace hho {

namespace {

double signed_area(const Point &a, const Point &b, const Point &c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

} // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::array<std::size_t, 3>> elements,
           std::vector<int> regions)
    : vertices_(std::move(vertices)), elements_(std::move(elements)),
      regions_(std::move(regions)) {
  if (elements_.empty()) throw InvalidInput("mesh has no elements");
  if (regions_.size() != elements_.size())
    throw InvalidInput("mesh: one region id per element is required");

  const std::size_t ne = elements_.size();
  area_.resize(ne);
  h_elem_.resize(ne);
  for (std::size_t t = 0; t < ne; ++t) {
    auto &el = elements_[t];
    for (auto v : el)
      if (v >= vertices_.size()) throw InvalidInput("mesh: vertex index out of range");
    if (el[0] == el[1] || el[1] == el[2] || el[0] == el[2])
      throw InvalidInput("mesh: element with repeated vertex");
    double a = signed_area(vertices_[el[0]], vertices_[el[1]], vertices_[el[2]]);
    if (a < 0.0) {
      std::swap(el[1], el[2]);
      a = -a;
    }
    if (!(a > 0.0)) throw InvalidInput("mesh: degenerate element " + std::to_string(t));
    area_[t] = a;
  }

  std::map<std::pair<std::size_t, std::size_t>, std::size_t> face_ids;
  elem_faces_.resize(ne);
  for (std::size_t t = 0; t < ne; ++t) {
    const auto &el = elements_[t];
    double h = 0.0;
    for (int i = 0; i < 3; ++i) {
      const std::size_t a = el[i], b = el[(i + 1) % 3];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = face_ids.try_emplace({key.first, key.second}, faces_.size());
      if (inserted) {
        faces_.push_back({key.first, key.second});
        face_elems_.push_back({t, npos});
      } else {
        auto &owners = face_elems_[it->second];
        if (owners[1] != npos)
          throw InvalidInput("mesh: face shared by more than two elements (non-conforming)");
        owners[1] = t;
      }
      const Eigen::Vector2d e = vertices_[b] - vertices_[a];
      const double len = e.norm();
      h = std::max(h, len);
      ElementFace ef;
      ef.face = it->second;
      ef.normal = Eigen::Vector2d(e.y(), -e.x()) / len;
      ef.orientation = (a == key.first) ? 1 : -1;
      elem_faces_[t][i] = ef;
    }
    h_elem_[t] = h;
    h_max_ = std::max(h_max_, h);
  }

  h_face_.resize(faces_.size());
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    h_face_[f] = (vertices_[faces_[f][1]] - vertices_[faces_[f][0]]).norm();
    if (face_elems_[f][1] != npos) ++n_interior_faces_;
  }
}

Point Mesh::centroid(std::size_t t) const {
  const auto &el = elements_[t];
  return (vertices_[el[0]] + vertices_[el[1]] + vertices_[el[2]]) / 3.0;
}

Point Mesh::face_midpoint(std::size_t f) const {
  return 0.5 * (vertices_[faces_[f][0]] + vertices_[faces_[f][1]]);
}

Eigen::Vector2d Mesh::face_tangent(std::size_t f) const {
  return (vertices_[faces_[f][1]] - vertices_[faces_[f][0]]) / h_face_[f];
}

Eigen::Vector2d Mesh::face_normal(std::size_t f) const {
  const Eigen::Vector2d t = face_tangent(f);
  return {t.y(), -t.x()};
}

double Mesh::inradius(std::size_t t) const {
  double perimeter = 0.0;
  for (const auto &ef : elem_faces_[t]) perimeter += h_face_[ef.face];
  return 2.0 * area_[t] / perimeter;
}

std::array<Point, 3> Mesh::element_vertices(std::size_t t) const {
  const auto &el = elements_[t];
  return {vertices_[el[0]], vertices_[el[1]], vertices_[el[2]]};
}

Mesh build_rect_mesh(const Rectangle &domain, int nx, int ny, const RegionFunction &region_fn,
                     SplitPattern pattern) {
  if (!(domain.x_max > domain.x_min) || !(domain.y_max > domain.y_min) ||
      !std::isfinite(domain.area()))
    throw InvalidInput("build_rect_mesh: degenerate domain");
  if (nx < 1 || ny < 1) throw InvalidInput("build_rect_mesh: need at least one cell per direction");

  const double dx = (domain.x_max - domain.x_min) / nx;
  const double dy = (domain.y_max - domain.y_min) / ny;
  std::vector<Point> vertices;
  vertices.reserve((nx + 1) * (ny + 1) + (pattern == SplitPattern::criss_cross ? nx * ny : 0));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      // Snap the last row/column onto the domain boundary exactly.
      const double x = (i == nx) ? domain.x_max : domain.x_min + i * dx;
      const double y = (j == ny) ? domain.y_max : domain.y_min + j * dy;
      vertices.emplace_back(x, y);
    }
  auto node = [nx](int i, int j) { return static_cast<std::size_t>(j * (nx + 1) + i); };

  std::vector<std::array<std::size_t, 3>> elements;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const std::size_t a = node(i, j), b = node(i + 1, j), c = node(i + 1, j + 1),
                        d = node(i, j + 1);
      if (pattern == SplitPattern::diagonal) {
        elements.push_back({a, b, c});
        elements.push_back({a, c, d});
      } else {
        const std::size_t m = vertices.size();
        vertices.push_back(0.25 * (vertices[a] + vertices[b] + vertices[c] + vertices[d]));
        elements.push_back({a, b, m});
        elements.push_back({b, c, m});
        elements.push_back({c, d, m});
        elements.push_back({d, a, m});
      }
    }

  std::vector<int> regions(elements.size(), 0);
  if (region_fn) {
    for (std::size_t t = 0; t < elements.size(); ++t) {
      const auto &el = elements[t];
      regions[t] = region_fn((vertices[el[0]] + vertices[el[1]] + vertices[el[2]]) / 3.0);
    }
  }
  return Mesh(std::move(vertices), std::move(elements), std::move(regions));
}

Mesh build_rect_mesh(const Rectangle &domain, int n, const RegionFunction &region_fn,
                     SplitPattern pattern) {
  if (n < 1) throw InvalidInput("build_rect_mesh: n must be >= 1");
  const double lx = domain.x_max - domain.x_min, ly = domain.y_max - domain.y_min;
  if (!(lx > 0.0) || !(ly > 0.0)) throw InvalidInput("build_rect_mesh: degenerate domain");
  const int nx = std::max(1, static_cast<int>(std::lround(n * lx)));
  const int ny = std::max(1, static_cast<int>(std::lround(n * ly)));
  return build_rect_mesh(domain, nx, ny, region_fn, pattern);
}

Mesh refine_uniform(const Mesh &mesh) {
  std::vector<Point> vertices = mesh.vertices();
  std::vector<std::size_t> midpoint(mesh.n_faces());
  for (std::size_t f = 0; f < mesh.n_faces(); ++f) {
    midpoint[f] = vertices.size();
    vertices.push_back(mesh.face_midpoint(f));
  }
  std::vector<std::array<std::size_t, 3>> elements;
  std::vector<int> regions;
  elements.reserve(4 * mesh.n_elements());
  regions.reserve(4 * mesh.n_elements());
  for (std::size_t t = 0; t < mesh.n_elements(); ++t) {
    const auto &el = mesh.element(t);
    const auto &fs = mesh.element_faces(t);
    // Local face i joins vertices i and i+1, so m[i] sits between them.
    const std::size_t m0 = midpoint[fs[0].face], m1 = midpoint[fs[1].face],
                      m2 = midpoint[fs[2].face];
    elements.push_back({el[0], m0, m2});
    elements.push_back({m0, el[1], m1});
    elements.push_back({m2, m1, el[2]});
    elements.push_back({m0, m1, m2});
    for (int c = 0; c < 4; ++c) regions.push_back(mesh.region(t));
  }
  return Mesh(std::move(vertices), std::move(elements), std::move(regions));
}

double regularity_ratio(const Mesh &mesh) {
  double ratio = 0.0;
  for (std::size_t t = 0; t < mesh.n_elements(); ++t)
    ratio = std::max(ratio, mesh.h_element(t) / mesh.inradius(t));
  return ratio;
}

Mesh read_mesh(std::istream &in) {
  auto next_line = [&in](std::istringstream &ls) {
    std::string line;
    while (std::getline(in, line)) {
      const auto pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos || line[pos] == '#') continue;
      ls.clear();
      ls.str(line);
      return true;
    }
    return false;
  };

  std::istringstream ls;
  long nv = -1, ne = -1;
  if (!next_line(ls) || !(ls >> nv >> ne) || nv < 3 || ne < 1)
    throw InvalidInput("mesh file: bad header, expected \"nv ne\"");
  std::vector<Point> vertices(nv);
  for (long i = 0; i < nv; ++i) {
    double x, y;
    if (!next_line(ls) || !(ls >> x >> y))
      throw InvalidInput("mesh file: bad vertex line " + std::to_string(i));
    vertices[i] = Point(x, y);
  }
  std::vector<std::array<std::size_t, 3>> elements(ne);
  std::vector<int> regions(ne);
  for (long t = 0; t < ne; ++t) {
    long a, b, c;
    int r;
    if (!next_line(ls) || !(ls >> a >> b >> c >> r))
      throw InvalidInput("mesh file: bad element line " + std::to_string(t));
    if (a < 0 || b < 0 || c < 0 || a >= nv || b >= nv || c >= nv)
      throw InvalidInput("mesh file: vertex index out of range in element " + std::to_string(t));
    elements[t] = {static_cast<std::size_t>(a), static_cast<std::size_t>(b),
                   static_cast<std::size_t>(c)};
    regions[t] = r;
  }
  return Mesh(std::move(vertices), std::move(elements), std::move(regions));
}

Mesh load_mesh(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open mesh file: " + path);
  return read_mesh(in);
}

} // namespace hho
