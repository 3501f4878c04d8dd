#include "mixdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <tuple>

namespace mixdg {

namespace {

using Key = std::array<long long, 3>;

const char* const kBcNames[6] = {"xmin", "xmax", "ymin", "ymax", "zmin", "zmax"};

/// Quantization denominators of the logical grid (large enough to resolve
/// every geometry node of every template).
std::array<long long, 3> quantum(const std::array<int, 3>& n, int ngeo) {
  std::array<long long, 3> k{};
  for (int d = 0; d < 3; ++d) k[d] = 4LL * n[d] * ngeo * ngeo;
  return k;
}

class NodeTable {
 public:
  NodeTable(Mesh& mesh, std::array<long long, 3> q) : mesh_(mesh), q_(q) {}

  int id(const Vec3& logical) {
    Key k{};
    for (int d = 0; d < 3; ++d) k[d] = std::llround(logical[d] * static_cast<double>(q_[d]));
    auto [it, inserted] = ids_.try_emplace(k, static_cast<int>(mesh_.logical.size()));
    if (inserted) {
      mesh_.logical.push_back(logical);
      mesh_.nodes.push_back(logical);
    }
    return it->second;
  }

 private:
  Mesh& mesh_;
  std::array<long long, 3> q_;
  std::map<Key, int> ids_;
};


void map_to_box(Mesh& mesh, const std::vector<Vec3>& unit) {
  mesh.nodes.resize(unit.size());
  for (std::size_t i = 0; i < unit.size(); ++i) {
    for (int d = 0; d < 3; ++d) {
      mesh.nodes[i][d] = (d < mesh.dim)
                             ? mesh.box.lo[d] + unit[i][d] * (mesh.box.hi[d] - mesh.box.lo[d])
                             : 0.0;
    }
  }
}

/// Corner positions (a,b[,c] in {-1,+1}) of a hypercube face as tensor indices
/// of the (ngeo+1)^d node array.
std::vector<int> face_corner_tensor_indices(int dim, int ngeo, int f) {
  const int m = ngeo + 1;
  std::vector<int> idx;
  if (dim == 2) {
    auto at = [&](int i, int j) { return i + m * j; };
    switch (f) {
      case 0: idx = {at(0, 0), at(ngeo, 0)}; break;
      case 1: idx = {at(ngeo, 0), at(ngeo, ngeo)}; break;
      case 2: idx = {at(0, ngeo), at(ngeo, ngeo)}; break;
      case 3: idx = {at(0, 0), at(0, ngeo)}; break;
      default: break;
    }
    return idx;
  }
  auto at = [&](int i, int j, int k) { return i + m * (j + m * k); };
  const int axis = f / 2;
  const int side = (f % 2) ? ngeo : 0;
  for (int t2 = 0; t2 < 2; ++t2)
    for (int t1 = 0; t1 < 2; ++t1) {
      std::array<int, 3> ijk{};
      int u = 0;
      for (int d = 0; d < 3; ++d) {
        if (d == axis) {
          ijk[d] = side;
        } else {
          ijk[d] = (u == 0 ? t1 : t2) * ngeo;
          ++u;
        }
      }
      idx.push_back(at(ijk[0], ijk[1], ijk[2]));
    }
  return idx;
}

struct FaceKey {
  std::vector<Key> corners;  // sorted canonical corner keys
  Key centroid{};            // distinguishes faces with equal periodic corner images
  bool operator<(const FaceKey& o) const {
    return corners != o.corners ? corners < o.corners : centroid < o.centroid;
  }
};

Key canonical_key(const Mesh& mesh, int node, const std::array<long long, 3>& q) {
  Key k{};
  for (int d = 0; d < 3; ++d) {
    k[d] = std::llround(mesh.logical[node][d] * static_cast<double>(q[d]));
    if (d < mesh.dim && mesh.periodic[d] && k[d] == q[d]) k[d] = 0;
  }
  return k;
}

std::array<int, 3> structured_counts(const Mesh& mesh) {
  std::array<int, 3> n{1, 1, 1};
  for (const auto& el : mesh.elements)
    for (int d = 0; d < 3; ++d) n[d] = std::max(n[d], el.cell[d] + 1);
  return n;
}

int boundary_tag(const Mesh& mesh, const std::vector<int>& corners) {
  for (int d = 0; d < mesh.dim; ++d) {
    for (int side = 0; side < 2; ++side) {
      const double target = side ? 1.0 : 0.0;
      bool all = true;
      for (int c : corners) all = all && std::abs(mesh.logical[c][d] - target) < 1e-12;
      if (all) return 2 * d + side;
    }
  }
  return -1;
}

/// Matches element faces into interior/boundary face records.
void build_faces(Mesh& mesh) {
  const auto q = quantum(structured_counts(mesh), mesh.ngeo);
  std::map<FaceKey, std::vector<std::pair<int, int>>> groups;
  const int nf = mesh.dim == 2 ? 4 : 6;
  for (int e = 0; e < mesh.n_elements(); ++e) {
    for (int f = 0; f < nf; ++f) {
      const auto corners = face_corner_nodes(mesh, e, f);
      if (corners.empty()) continue;
      FaceKey key;
      for (int c : corners) key.corners.push_back(canonical_key(mesh, c, q));
      std::sort(key.corners.begin(), key.corners.end());
      for (int d = 0; d < 3; ++d) {
        double c = 0.0;
        for (int id : corners) c += mesh.logical[id][d];
        const long long M = 12LL * q[d];
        long long k = std::llround(c / static_cast<double>(corners.size()) * static_cast<double>(M));
        if (d < mesh.dim && mesh.periodic[d]) k = ((k % M) + M) % M;
        key.centroid[d] = k;
      }
      groups[key].emplace_back(e, f);
    }
  }
  mesh.faces.clear();
  mesh.bc_names.assign(kBcNames, kBcNames + 2 * mesh.dim);
  // Deterministic order: by (element, local face) of the first owner.
  std::vector<std::vector<std::pair<int, int>>> ordered;
  ordered.reserve(groups.size());
  for (auto& [k, v] : groups) ordered.push_back(v);
  std::sort(ordered.begin(), ordered.end());
  for (const auto& owners : ordered) {
    MeshFace face;
    face.elem_l = owners[0].first;
    face.face_l = owners[0].second;
    if (owners.size() > 2) throw MeshError("face shared by more than two elements");
    if (owners.size() == 1) {
      face.bc = boundary_tag(mesh, face_corner_nodes(mesh, face.elem_l, face.face_l));
      if (face.bc < 0) throw MeshError("non-conforming mesh: unmatched interior face");
    } else {
      face.elem_r = owners[1].first;
      face.face_r = owners[1].second;
      if (mesh.dim == 2) {
        const auto gl = face_geometry_nodes_2d(mesh, face.elem_l, face.face_l);
        const auto gr = face_geometry_nodes_2d(mesh, face.elem_r, face.face_r);
        const Key l0 = canonical_key(mesh, gl.front(), q);
        const Key r0 = canonical_key(mesh, gr.front(), q);
        face.flip = (l0 == r0) ? 0 : 1;
        const int rmatch = face.flip ? gr.back() : gr.front();
        for (int d = 0; d < mesh.dim; ++d) {
          const double dl = mesh.logical[gl.front()][d] - mesh.logical[rmatch][d];
          face.shift[d] = std::round(dl) * (mesh.box.hi[d] - mesh.box.lo[d]);
        }
      }
    }
    mesh.faces.push_back(face);
  }
  mesh.rebuild_element_faces();
}

// ---- 3D templates -----------------------------------------------------------

enum class HexKind { Hex, Prism, Pyramid, Tet };

double det3(const Vec3& a, const Vec3& b, const Vec3& c) {
  return a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
         a[2] * (b[0] * c[1] - b[1] * c[0]);
}

Vec3 sub3(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

Mesh generate_3d(const StructuredSpec& spec) {
  if (spec.ngeo != 1) throw ConfigError("3D meshes are generated with ngeo = 1 only");
  for (bool p : spec.periodic)
    if (p) throw ConfigError("periodic boundaries are supported in 2D only");
  Mesh mesh;
  mesh.dim = 3;
  mesh.ngeo = 1;
  mesh.box = spec.box;
  const auto n = spec.n;
  const long nh = static_cast<long>(n[0]) * n[1] * n[2];
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<HexKind> kind(nh, HexKind::Hex);
  std::vector<std::array<bool, 6>> pyr_split(nh, {false, false, false, false, false, false});
  auto hid = [&](int i, int j, int k) { return static_cast<long>(i) + n[0] * (j + static_cast<long>(n[1]) * k); };
  for (long h = 0; h < nh; ++h) {
    const double r = uni(rng);
    switch (spec.split) {
      case SplitMode::None: break;
      case SplitMode::Prism: kind[h] = r < spec.split_fraction ? HexKind::Prism : HexKind::Hex; break;
      case SplitMode::Pyramid: kind[h] = r < spec.split_fraction ? HexKind::Pyramid : HexKind::Hex; break;
      case SplitMode::Tet: kind[h] = r < spec.split_fraction ? HexKind::Tet : HexKind::Hex; break;
      case SplitMode::Mixed: kind[h] = static_cast<HexKind>(std::min(3, static_cast<int>(4.0 * r))); break;
      case SplitMode::Tri: throw ConfigError("split=tri is a 2D mode");
    }
  }
  auto triangulated = [&](long h, int fd) {
    switch (kind[h]) {
      case HexKind::Tet: return true;
      case HexKind::Prism: return fd >= 4;
      case HexKind::Pyramid: return pyr_split[h][fd];
      case HexKind::Hex: return false;
    }
    return false;
  };
  auto make_triangulated = [&](long h, int fd) {
    switch (kind[h]) {
      case HexKind::Hex:
        kind[h] = HexKind::Pyramid;
        pyr_split[h][fd] = true;
        break;
      case HexKind::Prism: kind[h] = HexKind::Tet; break;
      case HexKind::Pyramid: pyr_split[h][fd] = true; break;
      case HexKind::Tet: break;
    }
  };
  // Propagate triangulated faces until every shared face agrees.
  for (bool changed = true; changed;) {
    changed = false;
    for (int k = 0; k < n[2]; ++k)
      for (int j = 0; j < n[1]; ++j)
        for (int i = 0; i < n[0]; ++i) {
          const long h = hid(i, j, k);
          for (int fd = 0; fd < 6; ++fd) {
            std::array<int, 3> c{i, j, k};
            c[fd / 2] += (fd % 2) ? 1 : -1;
            if (c[fd / 2] < 0 || c[fd / 2] >= n[fd / 2]) continue;
            const long g = hid(c[0], c[1], c[2]);
            if (triangulated(h, fd) && !triangulated(g, fd ^ 1)) {
              make_triangulated(g, fd ^ 1);
              changed = true;
            }
          }
        }
  }

  NodeTable table(mesh, {2LL * n[0], 2LL * n[1], 2LL * n[2]});
  auto corner_logical = [&](int i, int j, int k) {
    return Vec3{static_cast<double>(i) / n[0], static_cast<double>(j) / n[1], static_cast<double>(k) / n[2]};
  };
  auto add = [&](ElementType ty, std::array<int, 8> ids, std::array<int, 3> cell, int sub) {
    MeshElement el;
    el.type = ty;
    el.nodes.assign(ids.begin(), ids.end());
    el.cell = cell;
    el.sub = sub;
    mesh.elements.push_back(std::move(el));
  };
  auto add_tet = [&](int v0, int v1, int v2, int v3, std::array<int, 3> cell, int sub) {
    const auto& P = mesh.logical;
    if (det3(sub3(P[v1], P[v0]), sub3(P[v2], P[v0]), sub3(P[v3], P[v0])) < 0) std::swap(v1, v2);
    add(ElementType::Tetrahedron, {v0, v1, v2, v2, v3, v3, v3, v3}, cell, sub);
  };

  for (int k = 0; k < n[2]; ++k)
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) {
        const long h = hid(i, j, k);
        const std::array<int, 3> cell{i, j, k};
        int c[2][2][2];
        for (int dk = 0; dk < 2; ++dk)
          for (int dj = 0; dj < 2; ++dj)
            for (int di = 0; di < 2; ++di) c[di][dj][dk] = table.id(corner_logical(i + di, j + dj, k + dk));
        int sub = 0;
        switch (kind[h]) {
          case HexKind::Hex:
            add(ElementType::Hexahedron,
                {c[0][0][0], c[1][0][0], c[0][1][0], c[1][1][0], c[0][0][1], c[1][0][1], c[0][1][1], c[1][1][1]},
                cell, 0);
            break;
          case HexKind::Prism: {
            // Triangles (00,10,11) and (00,11,01) extruded in z.
            const int tri[2][3][2] = {{{0, 0}, {1, 0}, {1, 1}}, {{0, 0}, {1, 1}, {0, 1}}};
            for (const auto& t : tri) {
              std::array<int, 8> ids{};
              for (int kk = 0; kk < 2; ++kk) {
                ids[0 + 4 * kk] = c[t[0][0]][t[0][1]][kk];
                ids[1 + 4 * kk] = c[t[1][0]][t[1][1]][kk];
                ids[2 + 4 * kk] = c[t[2][0]][t[2][1]][kk];
                ids[3 + 4 * kk] = c[t[2][0]][t[2][1]][kk];
              }
              add(ElementType::Prism, ids, cell, sub++);
            }
            break;
          }
          case HexKind::Tet: {
            const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
            for (const auto& p : perms) {
              std::array<int, 3> a{0, 0, 0};
              int v[4];
              v[0] = c[0][0][0];
              for (int s = 0; s < 3; ++s) {
                a[p[s]] = 1;
                v[s + 1] = c[a[0]][a[1]][a[2]];
              }
              add_tet(v[0], v[1], v[2], v[3], cell, sub++);
            }
            break;
          }
          case HexKind::Pyramid: {
            const int apex = table.id({(i + 0.5) / n[0], (j + 0.5) / n[1], (k + 0.5) / n[2]});
            for (int fd = 0; fd < 6; ++fd) {
              const int axis = fd / 2, side = fd % 2;
              int t1 = (axis + 1) % 3, t2 = (axis + 2) % 3;
              if (t1 > t2) std::swap(t1, t2);
              int q[2][2];
              for (int b = 0; b < 2; ++b)
                for (int a = 0; a < 2; ++a) {
                  std::array<int, 3> s{};
                  s[axis] = side;
                  s[t1] = a;
                  s[t2] = b;
                  q[a][b] = c[s[0]][s[1]][s[2]];
                }
              if (pyr_split[h][fd]) {
                add_tet(q[0][0], q[1][0], q[1][1], apex, cell, sub++);
                add_tet(q[0][0], q[1][1], q[0][1], apex, cell, sub++);
                continue;
              }
              const auto& P = mesh.logical;
              int q00 = q[0][0], q10 = q[1][0], q01 = q[0][1], q11 = q[1][1];
              if (det3(sub3(P[q10], P[q00]), sub3(P[q01], P[q00]), sub3(P[apex], P[q00])) < 0) {
                std::swap(q10, q01);
              }
              add(ElementType::Pyramid, {q00, q10, q01, q11, apex, apex, apex, apex}, cell, sub++);
            }
            break;
          }
        }
      }
  std::vector<Vec3> unit = mesh.logical;
  map_to_box(mesh, unit);
  build_faces(mesh);
  return mesh;
}

Mesh generate_2d(const StructuredSpec& spec) {
  if (spec.ngeo < 1) throw ConfigError("ngeo must be >= 1");
  if (spec.split != SplitMode::None && spec.split != SplitMode::Tri)
    throw ConfigError("2D meshes support split = none | tri");
  for (int d = 0; d < 2; ++d)
    if (spec.periodic[d] && spec.n[d] < 2) throw ConfigError("periodic directions need at least 2 cells");
  Mesh mesh;
  mesh.dim = 2;
  mesh.ngeo = spec.ngeo;
  mesh.box = spec.box;
  mesh.periodic = {spec.periodic[0], spec.periodic[1], false};
  const int nx = spec.n[0], ny = spec.n[1], g = spec.ngeo;
  NodeTable table(mesh, quantum({nx, ny, 1}, g));
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double r_split = uni(rng);
      const double r_diag = uni(rng);
      const double r_rot = uni(rng);
      const bool split = spec.split == SplitMode::Tri && r_split < spec.split_fraction;
      auto corner = [&](int di, int dj) {
        return Vec3{static_cast<double>(i + di) / nx, static_cast<double>(j + dj) / ny, 0.0};
      };
      if (!split) {
        MeshElement el;
        el.type = ElementType::Quad;
        el.cell = {i, j, 0};
        for (int q = 0; q <= g; ++q)
          for (int p = 0; p <= g; ++p) {
            el.nodes.push_back(table.id({(i + static_cast<double>(p) / g) / nx,
                                         (j + static_cast<double>(q) / g) / ny, 0.0}));
          }
        mesh.elements.push_back(std::move(el));
        continue;
      }
      std::array<std::array<Vec3, 3>, 2> tris;
      if (r_diag < 0.5) {
        tris = {{{corner(0, 0), corner(1, 0), corner(1, 1)}, {corner(0, 0), corner(1, 1), corner(0, 1)}}};
      } else {
        tris = {{{corner(0, 0), corner(1, 0), corner(0, 1)}, {corner(1, 0), corner(1, 1), corner(0, 1)}}};
      }
      const int rot = std::min(2, static_cast<int>(3.0 * r_rot));
      for (int t = 0; t < 2; ++t) {
        std::array<Vec3, 3> v;
        for (int c = 0; c < 3; ++c) v[c] = tris[t][(c + rot) % 3];
        MeshElement el;
        el.type = ElementType::Triangle;
        el.cell = {i, j, 0};
        el.sub = t;
        for (int q = 0; q <= g; ++q)
          for (int p = 0; p <= g; ++p) {
            const double c[2] = {-1.0 + 2.0 * p / g, -1.0 + 2.0 * q / g};
            const auto cp = collapse_map(ElementType::Triangle, c);
            const double s1 = 0.5 * (cp.xi[0] + 1.0), s2 = 0.5 * (cp.xi[1] + 1.0);
            Vec3 x{};
            for (int d = 0; d < 3; ++d) x[d] = v[0][d] + s1 * (v[1][d] - v[0][d]) + s2 * (v[2][d] - v[0][d]);
            el.nodes.push_back(table.id(x));
          }
        mesh.elements.push_back(std::move(el));
      }
    }
  }
  std::vector<Vec3> unit = mesh.logical;
  map_to_box(mesh, unit);
  build_faces(mesh);
  return mesh;
}

}  // namespace

SplitMode split_mode_from_string(const std::string& s) {
  if (s == "none") return SplitMode::None;
  if (s == "tri") return SplitMode::Tri;
  if (s == "prism") return SplitMode::Prism;
  if (s == "pyramid") return SplitMode::Pyramid;
  if (s == "tet") return SplitMode::Tet;
  if (s == "mixed") return SplitMode::Mixed;
  throw ConfigError("unknown split mode '" + s + "'");
}

std::string to_string(SplitMode m) {
  switch (m) {
    case SplitMode::None: return "none";
    case SplitMode::Tri: return "tri";
    case SplitMode::Prism: return "prism";
    case SplitMode::Pyramid: return "pyramid";
    case SplitMode::Tet: return "tet";
    case SplitMode::Mixed: return "mixed";
  }
  return "none";
}

int Mesh::count(ElementType ty) const noexcept {
  return static_cast<int>(std::count_if(elements.begin(), elements.end(),
                                        [ty](const MeshElement& e) { return e.type == ty; }));
}

void Mesh::rebuild_element_faces() {
  elem_faces.assign(elements.size(), {-1, -1, -1, -1, -1, -1});
  for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
    elem_faces[faces[f].elem_l][faces[f].face_l] = f;
    if (!faces[f].boundary()) elem_faces[faces[f].elem_r][faces[f].face_r] = f;
  }
}

Mesh generate_structured(const StructuredSpec& spec) {
  if (spec.dim != 2 && spec.dim != 3) throw ConfigError("mesh dimension must be 2 or 3");
  for (int d = 0; d < spec.dim; ++d) {
    if (spec.n[d] < 1) throw ConfigError("cell counts must be >= 1");
    if (!(spec.box.hi[d] > spec.box.lo[d])) throw ConfigError("degenerate mesh box");
  }
  return spec.dim == 2 ? generate_2d(spec) : generate_3d(spec);
}

Vec3 deform_point(const Vec3& x, const DeformationSpec& spec) {
  const double pi = std::numbers::pi, L = spec.L, e = spec.eps * spec.L;
  const double a = x[0] - 0.5, b = x[1] - 0.5, c = x[2] - 0.5;
  if (spec.dim == 2) {
    return {x[0] + e * std::cos(pi / (2 * L) * a) * std::cos(3 * pi / (2 * L) * b),
            x[1] + e * std::sin(2 * pi / L * a) * std::cos(pi / (2 * L) * b), x[2]};
  }
  return {x[0] + e * std::cos(pi / (2 * L) * a) * std::sin(2 * pi / L * b) * std::cos(pi / (2 * L) * c),
          x[1] + e * std::cos(3 * pi / (2 * L) * a) * std::cos(pi / (2 * L) * b) * std::cos(pi / (2 * L) * c),
          x[2] + e * std::cos(pi / (2 * L) * a) * std::cos(pi / L * b) * std::cos(pi / (2 * L) * c)};
}

void deform_sinusoidal(Mesh& mesh, const DeformationSpec& spec) {
  if (spec.dim != mesh.dim) throw ConfigError("deformation dimension does not match the mesh");
  std::vector<Vec3> unit(mesh.logical.size());
  for (std::size_t i = 0; i < unit.size(); ++i) unit[i] = deform_point(mesh.logical[i], spec);
  map_to_box(mesh, unit);
}

bool face_collapsed(ElementType ty, int f) noexcept {
  return ty == ElementType::Triangle && f == 2;
}

int faces_per_element(ElementType ty) noexcept {
  switch (ty) {
    case ElementType::Quad: return 4;
    case ElementType::Triangle: return 3;
    case ElementType::Hexahedron: return 6;
    case ElementType::Prism: return 5;
    case ElementType::Pyramid: return 5;
    case ElementType::Tetrahedron: return 4;
  }
  return 0;
}

std::vector<int> face_corner_nodes(const Mesh& mesh, int elem, int f) {
  const auto& el = mesh.elements[elem];
  std::vector<int> out;
  for (int t : face_corner_tensor_indices(mesh.dim, mesh.ngeo, f)) {
    const int id = el.nodes[t];
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  }
  if (static_cast<int>(out.size()) < mesh.dim) out.clear();
  return out;
}

std::vector<int> face_geometry_nodes_2d(const Mesh& mesh, int elem, int f) {
  const auto& el = mesh.elements[elem];
  const int g = mesh.ngeo, m = g + 1;
  std::vector<int> ids(m);
  for (int t = 0; t <= g; ++t) {
    int i = 0, j = 0;
    switch (f) {
      case 0: i = t; j = 0; break;
      case 1: i = g; j = t; break;
      case 2: i = t; j = g; break;
      case 3: i = 0; j = t; break;
      default: break;
    }
    ids[t] = el.nodes[i + m * j];
  }
  return ids;
}

ConformityReport check_conformity(const Mesh& mesh) {
  ConformityReport rep;
  const auto q = quantum(structured_counts(mesh), mesh.ngeo);
  std::map<FaceKey, int> seen;
  const int nf = mesh.dim == 2 ? 4 : 6;
  for (int e = 0; e < mesh.n_elements(); ++e)
    for (int f = 0; f < nf; ++f) {
      const auto corners = face_corner_nodes(mesh, e, f);
      if (corners.empty()) continue;
      FaceKey key;
      for (int c : corners) key.corners.push_back(canonical_key(mesh, c, q));
      std::sort(key.corners.begin(), key.corners.end());
      for (int d = 0; d < 3; ++d) {
        double c = 0.0;
        for (int id : corners) c += mesh.logical[id][d];
        const long long M = 12LL * q[d];
        long long k = std::llround(c / static_cast<double>(corners.size()) * static_cast<double>(M));
        if (d < mesh.dim && mesh.periodic[d]) k = ((k % M) + M) % M;
        key.centroid[d] = k;
      }
      ++seen[key];
    }
  for (const auto& [key, cnt] : seen) {
    if (cnt == 2) {
      ++rep.interior;
      continue;
    }
    if (cnt > 2) {
      rep.ok = false;
      rep.message = "face owned more than twice";
      continue;
    }
    // Single owner: must lie on one box plane.
    bool on_plane = false;
    for (int d = 0; d < mesh.dim && !on_plane; ++d) {
      const bool lo = std::all_of(key.corners.begin(), key.corners.end(), [&](const Key& k) { return k[d] == 0; });
      const bool hi = std::all_of(key.corners.begin(), key.corners.end(), [&](const Key& k) { return k[d] == q[d]; });
      on_plane = (lo || hi) && !mesh.periodic[d];
    }
    if (on_plane) {
      ++rep.boundary;
    } else {
      rep.ok = false;
      rep.message = "unmatched interior face (hanging or mixed triangle/quad interface)";
    }
  }
  return rep;
}

// ---- I/O --------------------------------------------------------------------

namespace {
std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
}  // namespace

void write_mesh(std::ostream& os, const Mesh& m) {
  os << "mixdg-mesh 1\n";
  os << "dim " << m.dim << " ngeo " << m.ngeo << "\n";
  os << "box";
  for (int d = 0; d < 3; ++d) os << ' ' << fmt17(m.box.lo[d]);
  for (int d = 0; d < 3; ++d) os << ' ' << fmt17(m.box.hi[d]);
  os << "\nperiodic " << m.periodic[0] << ' ' << m.periodic[1] << ' ' << m.periodic[2] << "\n";
  os << "nodes " << m.nodes.size() << "\n";
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    os << i;
    for (int d = 0; d < 3; ++d) os << ' ' << fmt17(m.nodes[i][d]);
    for (int d = 0; d < 3; ++d) os << ' ' << fmt17(m.logical[i][d]);
    os << "\n";
  }
  os << "elements " << m.elements.size() << "\n";
  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    const auto& el = m.elements[e];
    os << e << ' ' << element_tag(el.type) << ' ' << el.cell[0] << ' ' << el.cell[1] << ' ' << el.cell[2]
       << ' ' << el.sub;
    for (int id : el.nodes) os << ' ' << id;
    os << "\n";
  }
  os << "faces " << m.faces.size() << "\n";
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    const auto& fc = m.faces[f];
    os << f << ' ' << fc.elem_l << ' ' << fc.face_l << ' ' << fc.elem_r << ' ' << fc.face_r << ' ' << fc.flip
       << ' ' << fc.bc;
    for (int d = 0; d < 3; ++d) os << ' ' << fmt17(fc.shift[d]);
    os << "\n";
  }
  os << "bctags " << m.bc_names.size() << "\n";
  for (std::size_t b = 0; b < m.bc_names.size(); ++b) os << b << ' ' << m.bc_names[b] << "\n";
}

Mesh read_mesh(std::istream& is) {
  auto expect = [&](const std::string& word) {
    std::string w;
    if (!(is >> w) || w != word) throw MeshError("mesh file: expected '" + word + "', got '" + w + "'");
  };
  Mesh m;
  int version = 0;
  expect("mixdg-mesh");
  is >> version;
  if (version != 1) throw MeshError("mesh file: unsupported version");
  expect("dim");
  is >> m.dim;
  expect("ngeo");
  is >> m.ngeo;
  if ((m.dim != 2 && m.dim != 3) || m.ngeo < 1) throw MeshError("mesh file: bad header");
  expect("box");
  for (int d = 0; d < 3; ++d) is >> m.box.lo[d];
  for (int d = 0; d < 3; ++d) is >> m.box.hi[d];
  expect("periodic");
  for (int d = 0; d < 3; ++d) is >> m.periodic[d];
  std::size_t n = 0;
  expect("nodes");
  is >> n;
  m.nodes.resize(n);
  m.logical.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t id = 0;
    is >> id;
    if (id != i) throw MeshError("mesh file: node ids must be consecutive");
    for (int d = 0; d < 3; ++d) is >> m.nodes[i][d];
    for (int d = 0; d < 3; ++d) is >> m.logical[i][d];
  }
  expect("elements");
  is >> n;
  const int per = m.dim == 2 ? (m.ngeo + 1) * (m.ngeo + 1) : (m.ngeo + 1) * (m.ngeo + 1) * (m.ngeo + 1);
  m.elements.resize(n);
  for (std::size_t e = 0; e < n; ++e) {
    std::size_t id = 0;
    std::string tag;
    auto& el = m.elements[e];
    is >> id >> tag >> el.cell[0] >> el.cell[1] >> el.cell[2] >> el.sub;
    el.type = element_type_from_tag(tag);
    if (dimension_of(el.type) != m.dim) throw MeshError("mesh file: element dimension mismatch");
    el.nodes.resize(per);
    for (auto& v : el.nodes) {
      is >> v;
      if (v < 0 || static_cast<std::size_t>(v) >= m.nodes.size()) throw MeshError("mesh file: bad node id");
    }
  }
  expect("faces");
  is >> n;
  m.faces.resize(n);
  for (std::size_t f = 0; f < n; ++f) {
    std::size_t id = 0;
    auto& fc = m.faces[f];
    is >> id >> fc.elem_l >> fc.face_l >> fc.elem_r >> fc.face_r >> fc.flip >> fc.bc;
    for (int d = 0; d < 3; ++d) is >> fc.shift[d];
  }
  expect("bctags");
  is >> n;
  m.bc_names.resize(n);
  for (std::size_t b = 0; b < n; ++b) {
    std::size_t id = 0;
    is >> id >> m.bc_names[b];
  }
  if (!is) throw MeshError("mesh file: truncated input");
  m.rebuild_element_faces();
  return m;
}

// ---- geometry -----------------------------------------------------------------

GeometryMap2D::GeometryMap2D(ElementType ty, int ngeo, std::vector<Vec2> coeffs)
    : type_(ty), ngeo_(ngeo), coeffs_(std::move(coeffs)) {
  gnodes_.resize(ngeo + 1);
  for (int i = 0; i <= ngeo; ++i) gnodes_[i] = -1.0 + 2.0 * i / ngeo;
  if (static_cast<int>(coeffs_.size()) != (ngeo + 1) * (ngeo + 1))
    throw MeshError("geometry map: coefficient count mismatch");
}

Vec2 GeometryMap2D::eval(double a, double b) const {
  const auto la = lagrange_values(gnodes_, a), lb = lagrange_values(gnodes_, b);
  Vec2 x{0.0, 0.0};
  const int m = ngeo_ + 1;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const double w = la[i] * lb[j];
      x[0] += w * coeffs_[i + m * j][0];
      x[1] += w * coeffs_[i + m * j][1];
    }
  return x;
}

Eigen::Matrix2d GeometryMap2D::jacobian(double a, double b) const {
  const auto la = lagrange_values(gnodes_, a), lb = lagrange_values(gnodes_, b);
  const auto da = lagrange_derivatives(gnodes_, a), db = lagrange_derivatives(gnodes_, b);
  Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
  const int m = ngeo_ + 1;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const auto& c = coeffs_[i + m * j];
      for (int r = 0; r < 2; ++r) {
        J(r, 0) += da[i] * lb[j] * c[r];
        J(r, 1) += la[i] * db[j] * c[r];
      }
    }
  return J;
}

Vec2 GeometryMap2D::eval_poly(const Vec2& xi) const {
  const auto ab = uncollapse_2d(type_, xi);
  return eval(ab[0], ab[1]);
}

Vec2 face_point_2d(int f, double s) noexcept {
  switch (f) {
    case 0: return {s, -1.0};
    case 1: return {1.0, s};
    case 2: return {s, 1.0};
    default: return {-1.0, s};
  }
}

std::vector<ElementGeometry> build_geometry(const Mesh& mesh, int N, const Quadrature1D& q) {
  if (mesh.dim != 2) throw MeshError("build_geometry: only 2D meshes carry solver geometry");
  const int n = N + 1;
  if (q.size() != n) throw MeshError("build_geometry: quadrature size mismatch");
  std::vector<ElementGeometry> out(mesh.elements.size());
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto& el = mesh.elements[e];
    auto& g = out[e];
    g.type = el.type;
    g.n = n;
    std::vector<Vec2> coeffs;
    coeffs.reserve(el.nodes.size());
    for (int id : el.nodes) coeffs.push_back({mesh.nodes[id][0], mesh.nodes[id][1]});
    g.map = GeometryMap2D(el.type, mesh.ngeo, std::move(coeffs));
    g.x.resize(n * n);
    g.detj.resize(n * n);
    g.jm.resize(n * n);
    g.ja.resize(n * n);
    g.volume = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int k = i + n * j;
        const double a = q.nodes[i], b = q.nodes[j];
        g.x[k] = g.map.eval(a, b);
        const auto J = g.map.jacobian(a, b);
        g.detj[k] = J.determinant();
        const double c[2] = {a, b};
        const double jhat = collapse_map(el.type, c).jdet;
        g.jm[k] = g.detj[k] / jhat;
        g.ja[k] = {J(1, 1), -J(0, 1), -J(1, 0), J(0, 0)};
        if (!(g.detj[k] > 0.0))
          throw MeshError("invalid deformation: non-positive Jacobian in element " + std::to_string(e));
        g.volume += q.weights[i] * q.weights[j] * g.detj[k];
      }
    for (int f = 0; f < 4; ++f) {
      g.collapsed[f] = face_collapsed(el.type, f);
      if (g.collapsed[f]) continue;
      g.fx[f].resize(n);
      g.fnormal[f].resize(n);
      g.fsurf[f].resize(n);
      g.fmetric[f].resize(n);
      for (int t = 0; t < n; ++t) {
        const auto ab = face_point_2d(f, q.nodes[t]);
        g.fx[f][t] = g.map.eval(ab[0], ab[1]);
        const auto J = g.map.jacobian(ab[0], ab[1]);
        Vec2 m{};
        switch (f) {
          case 0: m = {J(1, 0), -J(0, 0)}; break;   // -Ja^2
          case 1: m = {J(1, 1), -J(0, 1)}; break;   // +Ja^1
          case 2: m = {-J(1, 0), J(0, 0)}; break;   // +Ja^2
          default: m = {-J(1, 1), J(0, 1)}; break;  // -Ja^1
        }
        const double len = std::hypot(m[0], m[1]);
        if (!(len > 0.0)) throw MeshError("degenerate face metric in element " + std::to_string(e));
        g.fmetric[f][t] = m;
        g.fsurf[f][t] = len;
        g.fnormal[f][t] = {m[0] / len, m[1] / len};
      }
    }
  }
  return out;
}

PointLocation locate_point(const std::vector<ElementGeometry>& geo, const Vec2& p) {
  for (int e = 0; e < static_cast<int>(geo.size()); ++e) {
    const auto& g = geo[e];
    double lo[2] = {1e300, 1e300}, hi[2] = {-1e300, -1e300};
    for (const auto& c : g.map.coeffs())
      for (int d = 0; d < 2; ++d) {
        lo[d] = std::min(lo[d], c[d]);
        hi[d] = std::max(hi[d], c[d]);
      }
    const double pad = 0.25 * std::max(hi[0] - lo[0], hi[1] - lo[1]);
    if (p[0] < lo[0] - pad || p[0] > hi[0] + pad || p[1] < lo[1] - pad || p[1] > hi[1] + pad) continue;
    Vec2 ab{0.0, -0.3};
    bool ok = false;
    for (int it = 0; it < 50; ++it) {
      const auto x = g.map.eval(ab[0], ab[1]);
      const Eigen::Vector2d r(x[0] - p[0], x[1] - p[1]);
      if (r.norm() < 1e-13) {
        ok = true;
        break;
      }
      const auto J = g.map.jacobian(ab[0], ab[1]);
      if (std::abs(J.determinant()) < 1e-300) break;
      const Eigen::Vector2d d = J.partialPivLu().solve(r);
      ab[0] -= d[0];
      ab[1] -= d[1];
      ab[0] = std::clamp(ab[0], -1.5, 1.5);
      ab[1] = std::clamp(ab[1], -1.5, 0.999999);
    }
    if (!ok) {
      const auto x = g.map.eval(ab[0], ab[1]);
      ok = std::hypot(x[0] - p[0], x[1] - p[1]) < 1e-10;
    }
    if (ok && std::abs(ab[0]) <= 1.0 + 1e-9 && std::abs(ab[1]) <= 1.0 + 1e-9) {
      return {e, {std::clamp(ab[0], -1.0, 1.0), std::clamp(ab[1], -1.0, 1.0)}};
    }
  }
  return {};
}

}  // namespace mixdg
