#include "mixdg/subcell.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mixdg {

namespace {

constexpr double kPlaneTol = 1e-12;

using Face = std::vector<int>;

/// Local faces of a cell, listed so that 2D edges run counter-clockwise.
std::vector<Face> local_faces(const Subcell& c) {
  const auto& n = c.nodes;
  switch (c.kind) {
    case CellKind::Quad:
      return {{n[0], n[1]}, {n[1], n[2]}, {n[2], n[3]}, {n[3], n[0]}};
    case CellKind::Triangle:
      return {{n[0], n[1]}, {n[1], n[2]}, {n[2], n[0]}};
    case CellKind::Hexahedron:
      return {{n[0], n[2], n[6], n[4]}, {n[1], n[3], n[7], n[5]}, {n[0], n[1], n[5], n[4]},
              {n[2], n[3], n[7], n[6]}, {n[0], n[1], n[3], n[2]}, {n[4], n[5], n[7], n[6]}};
    case CellKind::Prism:
      return {{n[0], n[1], n[2]},
              {n[3], n[4], n[5]},
              {n[0], n[1], n[4], n[3]},
              {n[1], n[2], n[5], n[4]},
              {n[2], n[0], n[3], n[5]}};
    case CellKind::Pyramid:
      return {{n[0], n[1], n[2], n[3]}, {n[0], n[1], n[4]}, {n[1], n[2], n[4]},
              {n[2], n[3], n[4]}, {n[3], n[0], n[4]}};
    case CellKind::Tetrahedron:
      return {{n[0], n[1], n[2]}, {n[0], n[1], n[3]}, {n[1], n[2], n[3]}, {n[0], n[2], n[3]}};
  }
  return {};
}

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

/// Evaluated in extended precision so that sums over thousands of subcells
/// stay at round-off level.
long double tet_signed(const std::vector<Vec3>& x, int a, int b, int c, int d) {
  long double e[3][3];
  for (int r = 0; r < 3; ++r) {
    e[0][r] = static_cast<long double>(x[b][r]) - x[a][r];
    e[1][r] = static_cast<long double>(x[c][r]) - x[a][r];
    e[2][r] = static_cast<long double>(x[d][r]) - x[a][r];
  }
  return (e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1]) -
          e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0]) +
          e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0])) /
         6.0L;
}

/// Tetrahedral splittings of the 3D cell kinds (convex cells only).
std::vector<std::array<int, 4>> cell_tets(const Subcell& c) {
  const auto& n = c.nodes;
  switch (c.kind) {
    case CellKind::Hexahedron:
      return {{n[0], n[1], n[3], n[7]}, {n[0], n[3], n[2], n[7]}, {n[0], n[2], n[6], n[7]},
              {n[0], n[6], n[4], n[7]}, {n[0], n[4], n[5], n[7]}, {n[0], n[5], n[1], n[7]}};
    case CellKind::Prism:
      return {{n[0], n[1], n[2], n[3]}, {n[1], n[2], n[3], n[4]}, {n[2], n[3], n[4], n[5]}};
    case CellKind::Pyramid:
      return {{n[0], n[1], n[2], n[4]}, {n[0], n[2], n[3], n[4]}};
    case CellKind::Tetrahedron:
      return {{n[0], n[1], n[2], n[3]}};
    default:
      return {};
  }
}

double cell_signed_volume(const Subcell& c, const std::vector<Vec3>& x) {
  if (c.kind == CellKind::Quad || c.kind == CellKind::Triangle) {
    long double a = 0.0L;
    const auto& n = c.nodes;
    for (std::size_t i = 0; i < n.size(); ++i) {
      const auto& p = x[n[i]];
      const auto& q = x[n[(i + 1) % n.size()]];
      a += static_cast<long double>(p[0]) * q[1] - static_cast<long double>(q[0]) * p[1];
    }
    return static_cast<double>(0.5L * a);
  }
  long double v = 0.0L;
  for (const auto& t : cell_tets(c)) v += tet_signed(x, t[0], t[1], t[2], t[3]);
  return static_cast<double>(v);
}

double face_measure(const Face& f, const std::vector<Vec3>& x) {
  if (f.size() == 2) {
    const auto d = sub(x[f[1]], x[f[0]]);
    return std::sqrt(dot(d, d));
  }
  Vec3 s{0.0, 0.0, 0.0};
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    const auto c = cross(sub(x[f[i]], x[f[0]]), sub(x[f[i + 1]], x[f[0]]));
    for (int d = 0; d < 3; ++d) s[d] += c[d];
  }
  return 0.5 * std::sqrt(dot(s, s));
}

/// Parent facets as planes n.x = c, indexed by hypercube face id.
struct Plane {
  int face;
  Vec3 n;
  double c;
};

std::vector<Plane> parent_planes(ElementType ty) {
  switch (ty) {
    case ElementType::Quad:
      return {{0, {0, 1, 0}, -1}, {1, {1, 0, 0}, 1}, {2, {0, 1, 0}, 1}, {3, {1, 0, 0}, -1}};
    case ElementType::Triangle:
      return {{0, {0, 1, 0}, -1}, {1, {1, 1, 0}, 0}, {3, {1, 0, 0}, -1}};
    case ElementType::Hexahedron:
      return {{0, {1, 0, 0}, -1}, {1, {1, 0, 0}, 1},  {2, {0, 1, 0}, -1},
              {3, {0, 1, 0}, 1},  {4, {0, 0, 1}, -1}, {5, {0, 0, 1}, 1}};
    case ElementType::Prism:
      return {{0, {1, 0, 0}, -1}, {1, {1, 1, 0}, 0}, {2, {0, 1, 0}, -1},
              {4, {0, 0, 1}, -1}, {5, {0, 0, 1}, 1}};
    case ElementType::Pyramid:
      return {{0, {-2, 0, 1}, 1}, {1, {2, 0, 1}, 1}, {2, {0, -2, 1}, 1},
              {3, {0, 2, 1}, 1},  {4, {0, 0, 1}, -1}};
    case ElementType::Tetrahedron:
      return {{0, {1, 0, 0}, -1}, {1, {1, 1, 1}, -1}, {2, {0, 1, 0}, -1}, {4, {0, 0, 1}, -1}};
  }
  return {};
}

std::vector<int> facets_containing(ElementType ty, const Face& f, const std::vector<Vec3>& x) {
  std::vector<int> out;
  for (const auto& p : parent_planes(ty)) {
    bool on = true;
    for (int id : f)
      if (std::abs(dot(p.n, x[id]) - p.c) > kPlaneTol) on = false;
    if (on) out.push_back(p.face);
  }
  return out;
}

/// Face parameter s of a 2D reference point on a hypercube face.
double face_parameter_2d(int face, const Vec3& xi) {
  return (face == 0 || face == 2) ? xi[0] : xi[1];
}

void build_2d(SubcellDecomposition& d) {
  const int m = d.fv_n;
  auto grid = [m](int i) { return -1.0 + 2.0 * i / m; };
  if (d.type == ElementType::Quad) {
    for (int j = 0; j <= m; ++j)
      for (int i = 0; i <= m; ++i) d.nodes.push_back({grid(i), grid(j), 0.0});
    auto id = [m](int i, int j) { return i + (m + 1) * j; };
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i)
        d.cells.push_back({CellKind::Quad, {id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)}});
    return;
  }
  std::map<std::pair<int, int>, int> ids;
  for (int j = 0; j <= m; ++j)
    for (int i = 0; i + j <= m; ++i) {
      ids[{i, j}] = static_cast<int>(d.nodes.size());
      d.nodes.push_back({grid(i), grid(j), 0.0});
    }
  auto id = [&ids](int i, int j) { return ids.at({i, j}); };
  for (int j = 0; j < m; ++j)
    for (int i = 0; i + j < m; ++i) {
      d.cells.push_back({CellKind::Triangle, {id(i, j), id(i + 1, j), id(i, j + 1)}});
      if (i + j + 2 <= m)
        d.cells.push_back({CellKind::Triangle, {id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)}});
    }
}

void build_3d(SubcellDecomposition& d) {
  const int m = d.fv_n;
  auto grid = [m](int i) { return -1.0 + 2.0 * i / m; };
  std::map<std::array<int, 3>, int> ids;
  auto add = [&](int i, int j, int k, Vec3 x) {
    ids[{i, j, k}] = static_cast<int>(d.nodes.size());
    d.nodes.push_back(x);
  };
  auto has = [&ids](int i, int j, int k) { return ids.count({i, j, k}) > 0; };
  auto id = [&ids](int i, int j, int k) { return ids.at({i, j, k}); };

  switch (d.type) {
    case ElementType::Hexahedron:
      for (int k = 0; k <= m; ++k)
        for (int j = 0; j <= m; ++j)
          for (int i = 0; i <= m; ++i) add(i, j, k, {grid(i), grid(j), grid(k)});
      for (int k = 0; k < m; ++k)
        for (int j = 0; j < m; ++j)
          for (int i = 0; i < m; ++i)
            d.cells.push_back({CellKind::Hexahedron,
                               {id(i, j, k), id(i + 1, j, k), id(i, j + 1, k), id(i + 1, j + 1, k),
                                id(i, j, k + 1), id(i + 1, j, k + 1), id(i, j + 1, k + 1),
                                id(i + 1, j + 1, k + 1)}});
      break;
    case ElementType::Prism:
      for (int k = 0; k <= m; ++k)
        for (int j = 0; j <= m; ++j)
          for (int i = 0; i + j <= m; ++i) add(i, j, k, {grid(i), grid(j), grid(k)});
      for (int k = 0; k < m; ++k)
        for (int j = 0; j < m; ++j)
          for (int i = 0; i + j < m; ++i) {
            d.cells.push_back({CellKind::Prism,
                               {id(i, j, k), id(i + 1, j, k), id(i, j + 1, k), id(i, j, k + 1),
                                id(i + 1, j, k + 1), id(i, j + 1, k + 1)}});
            if (i + j + 2 <= m)
              d.cells.push_back({CellKind::Prism,
                                 {id(i + 1, j, k), id(i + 1, j + 1, k), id(i, j + 1, k),
                                  id(i + 1, j, k + 1), id(i + 1, j + 1, k + 1), id(i, j + 1, k + 1)}});
          }
      break;
    case ElementType::Pyramid: {
      // Layer k holds an (m-k+1)^2 grid shrinking towards the apex; each node of
      // layer k+1 sits above the centre of a cell of layer k.
      for (int k = 0; k <= m; ++k)
        for (int j = 0; j <= m - k; ++j)
          for (int i = 0; i <= m - k; ++i)
            add(i, j, k,
                {-static_cast<double>(m - k) / m + 2.0 * i / m,
                 -static_cast<double>(m - k) / m + 2.0 * j / m, grid(k)});
      for (int k = 0; k < m; ++k)
        for (int j = 0; j <= m - k; ++j)
          for (int i = 0; i <= m - k; ++i) {
            // Upright sub-pyramid.
            if (has(i + 1, j + 1, k) && has(i, j, k + 1))
              d.cells.push_back({CellKind::Pyramid,
                                 {id(i, j, k), id(i + 1, j, k), id(i + 1, j + 1, k), id(i, j + 1, k),
                                  id(i, j, k + 1)}});
            // Inverted sub-pyramid with its apex on layer k.
            if (has(i + 1, j + 1, k + 1))
              d.cells.push_back({CellKind::Pyramid,
                                 {id(i, j, k + 1), id(i + 1, j, k + 1), id(i + 1, j + 1, k + 1),
                                  id(i, j + 1, k + 1), id(i + 1, j + 1, k)}});
            // Tetrahedra filling the gaps between neighbouring upright pyramids.
            if (has(i, j + 1, k + 1) && has(i + 1, j + 1, k) && has(i, j, k + 1))
              d.cells.push_back({CellKind::Tetrahedron,
                                 {id(i, j + 1, k), id(i, j + 1, k + 1), id(i, j, k + 1),
                                  id(i + 1, j + 1, k)}});
            if (has(i + 1, j, k + 1) && has(i + 1, j + 1, k) && has(i, j, k + 1))
              d.cells.push_back({CellKind::Tetrahedron,
                                 {id(i + 1, j, k), id(i + 1, j, k + 1), id(i, j, k + 1),
                                  id(i + 1, j + 1, k)}});
          }
      break;
    }
    case ElementType::Tetrahedron:
      for (int k = 0; k <= m; ++k)
        for (int j = 0; j + k <= m; ++j)
          for (int i = 0; i + j + k <= m; ++i) add(i, j, k, {grid(i), grid(j), grid(k)});
      for (int k = 0; k < m; ++k)
        for (int j = 0; j + k < m; ++j)
          for (int i = 0; i + j + k < m; ++i) {
            d.cells.push_back({CellKind::Tetrahedron,
                               {id(i, j, k), id(i + 1, j, k), id(i, j + 1, k), id(i, j, k + 1)}});
            if (i + j + k + 2 <= m) {
              // Octahedron split into four tetrahedra around one diagonal.
              const int a = id(i + 1, j, k), b = id(i, j + 1, k + 1);
              const int ring[4] = {id(i, j + 1, k), id(i + 1, j + 1, k), id(i + 1, j, k + 1),
                                   id(i, j, k + 1)};
              for (int r = 0; r < 4; ++r)
                d.cells.push_back({CellKind::Tetrahedron, {a, b, ring[r], ring[(r + 1) % 4]}});
            }
            if (i + j + k + 3 <= m)
              d.cells.push_back({CellKind::Tetrahedron,
                                 {id(i + 1, j + 1, k), id(i + 1, j, k + 1), id(i, j + 1, k + 1),
                                  id(i + 1, j + 1, k + 1)}});
          }
      break;
    default:
      break;
  }
  // Orient every cell positively.
  for (auto& c : d.cells) {
    if (cell_signed_volume(c, d.nodes) >= 0.0) continue;
    auto& n = c.nodes;
    switch (c.kind) {
      case CellKind::Tetrahedron: std::swap(n[0], n[1]); break;
      case CellKind::Pyramid: std::swap(n[1], n[3]); break;
      case CellKind::Prism:
        std::swap(n[1], n[2]);
        std::swap(n[4], n[5]);
        break;
      default: break;
    }
  }
}

}  // namespace

int expected_subcell_count(ElementType ty, int m) {
  if (m < 1) throw std::invalid_argument("subcell count: fv_n must be >= 1");
  switch (ty) {
    case ElementType::Quad:
    case ElementType::Triangle: return m * m;
    case ElementType::Hexahedron:
    case ElementType::Prism:
    case ElementType::Tetrahedron: return m * m * m;
    case ElementType::Pyramid: return m * (4 * m * m - 1) / 3;
  }
  return 0;
}

SubcellDecomposition subdivide(ElementType ty, int fv_n) {
  if (fv_n < 1) throw std::invalid_argument("subdivide: fv_n must be >= 1");
  SubcellDecomposition d;
  d.type = ty;
  d.fv_n = fv_n;
  if (dimension_of(ty) == 2)
    build_2d(d);
  else
    build_3d(d);

  d.volumes.reserve(d.cells.size());
  for (const auto& c : d.cells) d.volumes.push_back(std::abs(cell_signed_volume(c, d.nodes)));

  // Faces: a sorted node key shared by two cells is interior, otherwise the
  // face must sit on a parent facet.
  std::map<std::vector<int>, int> seen;
  std::vector<SubcellFace> all;
  for (int c = 0; c < d.n_cells(); ++c) {
    for (auto& f : local_faces(d.cells[c])) {
      auto key = f;
      std::sort(key.begin(), key.end());
      auto it = seen.find(key);
      if (it == seen.end()) {
        seen.emplace(key, static_cast<int>(all.size()));
        all.push_back({f, c, -1, -1, -1});
      } else {
        auto& face = all[it->second];
        if (face.right != -1)
          throw std::logic_error("subdivide: face shared by more than two subcells");
        face.right = c;
      }
    }
  }
  const bool two_d = dimension_of(ty) == 2;
  for (auto& f : all) {
    if (f.right != -1) {
      d.inner.push_back(f);
      continue;
    }
    const auto facets = facets_containing(ty, f.nodes, d.nodes);
    if (facets.size() == 1) {
      f.parent_face = facets[0];
      if (two_d) {
        const auto& a = d.nodes[f.nodes[0]];
        const auto& b = d.nodes[f.nodes[1]];
        const Vec3 mid{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.0};
        const double s = face_parameter_2d(f.parent_face, mid);
        f.sub_index = std::clamp(static_cast<int>(std::floor(0.5 * (s + 1.0) * fv_n)), 0, fv_n - 1);
      }
    }
    d.outer.push_back(f);
  }
  return d;
}

DecompositionAudit audit_decomposition(const SubcellDecomposition& d) {
  DecompositionAudit r;
  std::ostringstream msg;
  r.min_volume = d.volumes.empty() ? 0.0 : d.volumes.front();
  long double total = 0.0L;
  for (double v : d.volumes) {
    total += v;
    r.min_volume = std::min(r.min_volume, v);
  }
  r.volume_sum = static_cast<double>(total);
  const double ref = reference_measure(d.type);
  if (std::abs(r.volume_sum - ref) > 1e-13 * std::max(1.0, ref)) {
    r.ok = false;
    msg << "volume sum " << r.volume_sum << " != " << ref << "; ";
  }
  if (!(r.min_volume > 0.0)) {
    r.ok = false;
    msg << "non-positive subcell volume; ";
  }
  for (std::size_t c = 0; c < d.cells.size(); ++c)
    if (std::abs(cell_signed_volume(d.cells[c], d.nodes) - d.volumes[c]) > 1e-14) {
      r.ok = false;
      msg << "cell " << c << " negatively oriented; ";
      break;
    }
  if (d.n_cells() != expected_subcell_count(d.type, d.fv_n)) {
    r.ok = false;
    msg << "subcell count " << d.n_cells() << "; ";
  }
  // Every inner face is owned twice; every outer face lies on one parent facet.
  std::map<std::vector<int>, int> owners;
  for (const auto& c : d.cells)
    for (auto f : local_faces(c)) {
      std::sort(f.begin(), f.end());
      ++owners[f];
    }
  for (const auto& f : d.inner) {
    auto key = f.nodes;
    std::sort(key.begin(), key.end());
    if (owners[key] != 2) {
      r.ok = false;
      msg << "inner face not owned twice; ";
      break;
    }
  }
  std::map<int, double> facet_area;
  for (const auto& f : d.outer) {
    auto key = f.nodes;
    std::sort(key.begin(), key.end());
    if (owners[key] != 1 || facets_containing(d.type, f.nodes, d.nodes).size() != 1) {
      r.ok = false;
      msg << "outer face off the parent boundary; ";
      break;
    }
    facet_area[f.parent_face] += face_measure(f.nodes, d.nodes);
  }
  // Sub-facets tile each parent facet (no hanging nodes on the boundary).
  for (const auto& p : parent_planes(d.type)) {
    double expect = 0.0;
    const auto& a = facet_area[p.face];
    switch (d.type) {
      case ElementType::Quad:
      case ElementType::Hexahedron: expect = dimension_of(d.type) == 2 ? 2.0 : 4.0; break;
      case ElementType::Triangle: expect = p.face == 1 ? 2.0 * std::numbers::sqrt2 : 2.0; break;
      case ElementType::Prism:
        expect = (p.face >= 4) ? 2.0 : (p.face == 1 ? 4.0 * std::numbers::sqrt2 : 4.0);
        break;
      case ElementType::Pyramid:
        // Lateral triangles: base 2, slant height sqrt(5).
        expect = (p.face == 4) ? 4.0 : std::sqrt(5.0);
        break;
      case ElementType::Tetrahedron: expect = p.face == 1 ? 2.0 * std::sqrt(3.0) : 2.0; break;
    }
    if (std::abs(a - expect) > 1e-12) {
      r.ok = false;
      msg << "parent facet " << p.face << " covered area " << a << " != " << expect << "; ";
    }
  }
  std::vector<int> used(d.nodes.size(), 0);
  for (const auto& c : d.cells)
    for (int id : c.nodes) used[id] = 1;
  if (std::find(used.begin(), used.end(), 0) != used.end()) {
    r.ok = false;
    msg << "unused node; ";
  }
  r.message = msg.str();
  return r;
}

void write_decomposition_vtk(std::ostream& os, const SubcellDecomposition& d) {
  os << "# vtk DataFile Version 3.0\nsubcells " << element_tag(d.type) << " fv_n=" << d.fv_n
     << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << d.nodes.size() << " double\n";
  os.precision(17);
  for (const auto& x : d.nodes) os << x[0] << ' ' << x[1] << ' ' << x[2] << '\n';
  std::size_t total = 0;
  for (const auto& c : d.cells) total += c.nodes.size() + 1;
  os << "CELLS " << d.cells.size() << ' ' << total << '\n';
  for (const auto& c : d.cells) {
    auto n = c.nodes;
    if (c.kind == CellKind::Hexahedron) n = {n[0], n[1], n[3], n[2], n[4], n[5], n[7], n[6]};
    os << n.size();
    for (int id : n) os << ' ' << id;
    os << '\n';
  }
  os << "CELL_TYPES " << d.cells.size() << '\n';
  for (const auto& c : d.cells) {
    int t = 0;
    switch (c.kind) {
      case CellKind::Triangle: t = 5; break;
      case CellKind::Quad: t = 9; break;
      case CellKind::Tetrahedron: t = 10; break;
      case CellKind::Hexahedron: t = 12; break;
      case CellKind::Prism: t = 13; break;
      case CellKind::Pyramid: t = 14; break;
    }
    os << t << '\n';
  }
  os << "CELL_DATA " << d.cells.size() << "\nSCALARS volume double 1\nLOOKUP_TABLE default\n";
  for (double v : d.volumes) os << v << '\n';
}

// ---------------------------------------------------------------------------
// Transfer operators

Eigen::MatrixXd constrained_reconstruction(const Eigen::MatrixXd& A, const Eigen::VectorXd& sizes) {
  // Mode 0 is the constant 1/sqrt(|E|) and all other modes have zero mean,
  // so conservation fixes c0 and the rest is an ordinary least-squares fit of
  // the fluctuations about the mean.
  const Eigen::Index nk = A.rows(), np = A.cols();
  const double total = sizes.sum();
  const double s0 = std::sqrt(total);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(np, nk);
  C.row(0) = sizes.transpose() / s0;
  if (np > 1) {
    const Eigen::MatrixXd Arest = A.rightCols(np - 1);
    const Eigen::MatrixXd fluct =
        Eigen::MatrixXd::Identity(nk, nk) - Eigen::VectorXd::Ones(nk) * sizes.transpose() / total;
    const Eigen::MatrixXd N = Arest.transpose() * Arest;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(N);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
      throw std::runtime_error("constrained reconstruction: rank-deficient subcell fit");
    C.bottomRows(np - 1) = ldlt.solve(Arest.transpose() * fluct);
  }
  return C;
}

namespace {

/// Integrals of every modal function over one 2D subcell.
Eigen::RowVectorXd subcell_moments(ElementType ty, int N, const SubcellDecomposition& d,
                                   const Subcell& c, const Quadrature1D& q) {
  Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(modal_count(ty, N));
  const auto& x = d.nodes;
  if (c.kind == CellKind::Quad) {
    const auto& lo = x[c.nodes[0]];
    const auto& hi = x[c.nodes[2]];
    const double hx = 0.5 * (hi[0] - lo[0]), hy = 0.5 * (hi[1] - lo[1]);
    for (int j = 0; j < q.size(); ++j)
      for (int i = 0; i < q.size(); ++i) {
        const Vec2 p{lo[0] + hx * (1.0 + q.nodes[i]), lo[1] + hy * (1.0 + q.nodes[j])};
        s += q.weights[i] * q.weights[j] * hx * hy * modal_row(ty, N, p);
      }
    return s;
  }
  // Collapsed rule on the reference triangle mapped affinely to the subcell.
  const auto& p0 = x[c.nodes[0]];
  const auto& p1 = x[c.nodes[1]];
  const auto& p2 = x[c.nodes[2]];
  const double det = std::abs((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
  for (int j = 0; j < q.size(); ++j)
    for (int i = 0; i < q.size(); ++i) {
      const double cube[2] = {q.nodes[i], q.nodes[j]};
      const auto cp = collapse_map(ElementType::Triangle, cube);
      const double l1 = 0.5 * (1.0 + cp.xi[0]), l2 = 0.5 * (1.0 + cp.xi[1]);
      const Vec2 p{p0[0] + l1 * (p1[0] - p0[0]) + l2 * (p2[0] - p0[0]),
                   p0[1] + l1 * (p1[1] - p0[1]) + l2 * (p2[1] - p0[1])};
      // Reference triangle measure is 2 and the affine map scales it by det/4.
      s += q.weights[i] * q.weights[j] * cp.jdet * 0.25 * det * modal_row(ty, N, p);
    }
  return s;
}

}  // namespace

VolumeTransfer build_volume_transfer(ElementType ty, int N, int fv_n, const SubcellDecomposition& d) {
  if (dimension_of(ty) != 2 || d.type != ty || d.fv_n != fv_n)
    throw std::invalid_argument("build_volume_transfer: 2D decomposition of the same type required");
  VolumeTransfer t;
  t.type = ty;
  t.N = N;
  t.fv_n = fv_n;
  const auto q = gauss_legendre(N + 1);
  const auto mb = modal_vandermonde(ty, N, q);
  t.V = mb.V;
  t.wjhat = mb.wjhat;
  const int nk = d.n_cells();
  t.sub_volume = Eigen::Map<const Eigen::VectorXd>(d.volumes.data(), nk);
  const auto qs = gauss_legendre(N + 2);
  t.modal_means.resize(nk, mb.n_modes);
  for (int k = 0; k < nk; ++k)
    t.modal_means.row(k) = subcell_moments(ty, N, d, d.cells[k], qs) / d.volumes[k];
  // Projection onto the modal space with the weighted mass matrix, then exact
  // subcell averages of the modal polynomial.
  Eigen::LDLT<Eigen::MatrixXd> mass(mb.mass);
  const Eigen::MatrixXd modal = mass.solve(mb.V.transpose() * mb.wjhat.asDiagonal());
  t.P = t.modal_means * modal;
  t.R = mb.V * constrained_reconstruction(t.modal_means, t.sub_volume);
  return t;
}

SurfaceTransfer build_surface_transfer(int N, int fv_n) {
  if (fv_n < 1) throw std::invalid_argument("build_surface_transfer: fv_n must be >= 1");
  SurfaceTransfer t;
  t.N = N;
  t.fv_n = fv_n;
  t.sub_length = 2.0 / fv_n;
  const int n = N + 1;
  const auto q = gauss_legendre(n);
  t.weights = Eigen::Map<const Eigen::VectorXd>(q.weights.data(), n);
  const auto qs = gauss_legendre(N + 2);
  Eigen::MatrixXd V(n, n);
  for (int i = 0; i < n; ++i)
    for (int p = 0; p < n; ++p) V(i, p) = jacobi_normalized(p, 0.0, 0.0, q.nodes[i]);
  t.P.setZero(fv_n, n);
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(fv_n, n);
  for (int k = 0; k < fv_n; ++k) {
    const double lo = -1.0 + k * t.sub_length;
    for (int r = 0; r < qs.size(); ++r) {
      const double s = lo + 0.5 * t.sub_length * (1.0 + qs.nodes[r]);
      const double w = 0.5 * qs.weights[r];  // mean: (h/2) w / h
      const auto l = lagrange_values(q.nodes, s);
      for (int i = 0; i < n; ++i) t.P(k, i) += w * l[i];
      for (int p = 0; p < n; ++p) means(k, p) += w * jacobi_normalized(p, 0.0, 0.0, s);
    }
  }
  const Eigen::VectorXd sizes = Eigen::VectorXd::Constant(fv_n, t.sub_length);
  t.R = V * constrained_reconstruction(means, sizes);
  return t;
}

SubcellGeometry build_subcell_geometry(const SubcellDecomposition& d, const VolumeTransfer& vt,
                                       const ElementGeometry& g) {
  if (d.type != g.type || vt.type != g.type)
    throw std::invalid_argument("build_subcell_geometry: element type mismatch");
  const int nk = d.n_cells();
  const int nq = static_cast<int>(g.jm.size());
  if (vt.P.cols() != nq) throw std::invalid_argument("build_subcell_geometry: node count mismatch");
  SubcellGeometry s;
  Eigen::VectorXd J(nq), Jx(nq), Jy(nq);
  for (int i = 0; i < nq; ++i) {
    J[i] = g.jm[i];
    Jx[i] = g.jm[i] * g.x[i][0];
    Jy[i] = g.jm[i] * g.x[i][1];
  }
  const Eigen::VectorXd pj = vt.P * J, px = vt.P * Jx, py = vt.P * Jy;
  s.jfv.resize(nk);
  s.area.resize(nk);
  s.xc.resize(nk);
  s.h.resize(nk);
  for (int k = 0; k < nk; ++k) {
    if (!(pj[k] > 0.0)) throw MeshError("non-positive projected subcell Jacobian");
    s.jfv[k] = pj[k];
    s.area[k] = pj[k] * d.volumes[k];
    s.xc[k] = {px[k] / pj[k], py[k] / pj[k]};
    s.h[k] = std::sqrt(s.area[k]);
  }
  auto phys = [&](int node) { return g.map.eval_poly({d.nodes[node][0], d.nodes[node][1]}); };
  auto mid = [&](const std::vector<int>& f) {
    const auto& a = d.nodes[f[0]];
    const auto& b = d.nodes[f[1]];
    return g.map.eval_poly({0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])});
  };
  // The chord of the mapped face equals the integral of the Nanson metric
  // along it, so subcells are closed exactly.
  auto chord_normal = [&](const std::vector<int>& f) {
    const auto A = phys(f[0]), B = phys(f[1]);
    return Vec2{B[1] - A[1], -(B[0] - A[0])};
  };
  s.cell_inner.assign(nk, {});
  s.cell_outer.assign(nk, {});
  for (const auto& f : d.inner) {
    const int idx = static_cast<int>(s.inner.size());
    s.inner.push_back({f.left, f.right, chord_normal(f.nodes), mid(f.nodes)});
    s.cell_inner[f.left].push_back({idx, 1});
    s.cell_inner[f.right].push_back({idx, -1});
  }
  for (int pf = 0; pf < 4; ++pf) {
    if (g.collapsed[pf]) continue;
    s.outer_cell[pf].assign(d.fv_n, -1);
    s.outer_area[pf].assign(d.fv_n, Vec2{0.0, 0.0});
    s.outer_xf[pf].assign(d.fv_n, Vec2{0.0, 0.0});
  }
  for (const auto& f : d.outer) {
    if (f.parent_face < 0 || f.sub_index < 0) throw std::logic_error("subcell outer face unclassified");
    s.outer_cell[f.parent_face][f.sub_index] = f.left;
    s.outer_area[f.parent_face][f.sub_index] = chord_normal(f.nodes);
    s.outer_xf[f.parent_face][f.sub_index] = mid(f.nodes);
    s.cell_outer[f.left].push_back({f.parent_face, f.sub_index});
  }
  return s;
}

}  // namespace mixdg
