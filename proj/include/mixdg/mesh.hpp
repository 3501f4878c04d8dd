#pragma once

// Structured hybrid mesh generation, sinusoidal curving, text mesh I/O and the
// per-element metric terms used by the 2D operators.
//
// Every element is stored through the geometry nodes of its hypercube
// parametrization: (Ngeo+1)^d node ids in lexicographic order (first index
// fastest). Collapsed corners simply repeat a node id (triangle apex, pyramid
// apex, ...). Local faces follow the hypercube numbering
//   2D: 0: b=-1, 1: a=+1, 2: b=+1, 3: a=-1
//   3D: 0: a=-1, 1: a=+1, 2: b=-1, 3: b=+1, 4: c=-1, 5: c=+1
// and a face whose corners collapse to fewer than d distinct points does not
// exist (triangle face 2, for instance).

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mixdg/basis.hpp"
#include "mixdg/common.hpp"

namespace mixdg {

enum class SplitMode { None, Tri, Prism, Pyramid, Tet, Mixed };

[[nodiscard]] SplitMode split_mode_from_string(const std::string& s);
[[nodiscard]] std::string to_string(SplitMode m);

struct Box {
  Vec3 lo{0.0, 0.0, 0.0};
  Vec3 hi{1.0, 1.0, 1.0};
};

struct StructuredSpec {
  int dim = 2;
  std::array<int, 3> n{1, 1, 1};
  Box box;
  SplitMode split = SplitMode::None;
  /// Probability that a cell is split (2D Tri) or of each 3D template (Mixed).
  double split_fraction = 0.5;
  std::uint64_t seed = 1;
  int ngeo = 1;
  std::array<bool, 3> periodic{false, false, false};
};

struct MeshElement {
  ElementType type = ElementType::Quad;
  std::vector<int> nodes;             ///< (ngeo+1)^d ids, lexicographic
  std::array<int, 3> cell{0, 0, 0};   ///< structured parent cell
  int sub = 0;                        ///< index within the parent cell
};

inline constexpr int kNoElement = -1;

struct MeshFace {
  int elem_l = kNoElement;
  int face_l = -1;
  int elem_r = kNoElement;  ///< kNoElement on the boundary
  int face_r = -1;
  int flip = 0;             ///< 1 if the face parameters run opposite
  int bc = -1;              ///< boundary tag index (boundary faces only)
  Vec3 shift{0.0, 0.0, 0.0};  ///< x_l = x_r + shift on periodic faces
  [[nodiscard]] bool boundary() const noexcept { return elem_r == kNoElement; }
};

struct Mesh {
  int dim = 2;
  int ngeo = 1;
  Box box;
  std::array<bool, 3> periodic{false, false, false};
  std::vector<Vec3> nodes;    ///< physical coordinates
  std::vector<Vec3> logical;  ///< unit-cube coordinates before curving
  std::vector<MeshElement> elements;
  std::vector<MeshFace> faces;
  std::vector<std::string> bc_names;
  /// (element, local face) -> face index; -1 for collapsed faces.
  std::vector<std::array<int, 6>> elem_faces;

  [[nodiscard]] int n_elements() const noexcept { return static_cast<int>(elements.size()); }
  [[nodiscard]] int count(ElementType ty) const noexcept;
  void rebuild_element_faces();
};

[[nodiscard]] Mesh generate_structured(const StructuredSpec& spec);

struct DeformationSpec {
  double eps = 0.15;
  double L = 1.0;
  int dim = 2;
};

/// Displacement formula evaluated in the unit-cube formula coordinates.
[[nodiscard]] Vec3 deform_point(const Vec3& x, const DeformationSpec& spec);

/// Replaces node positions by the curved ones: the formula acts on the logical
/// coordinates and the result is mapped affinely onto the mesh box.
void deform_sinusoidal(Mesh& mesh, const DeformationSpec& spec);

/// Distinct corner node ids of a local face (empty if collapsed).
[[nodiscard]] std::vector<int> face_corner_nodes(const Mesh& mesh, int elem, int local_face);

/// Geometry node ids along a 2D local face, ordered by increasing face parameter.
[[nodiscard]] std::vector<int> face_geometry_nodes_2d(const Mesh& mesh, int elem, int local_face);

[[nodiscard]] bool face_collapsed(ElementType ty, int local_face) noexcept;
[[nodiscard]] int faces_per_element(ElementType ty) noexcept;

/// Conformity audit: every face with at least d distinct corners is either
/// shared by exactly two elements (same corner set) or lies on the box boundary.
struct ConformityReport {
  bool ok = true;
  long interior = 0;
  long boundary = 0;
  std::string message;
};
[[nodiscard]] ConformityReport check_conformity(const Mesh& mesh);

void write_mesh(std::ostream& os, const Mesh& mesh);
[[nodiscard]] Mesh read_mesh(std::istream& is);

// ---------------------------------------------------------------------------
// 2D geometry

/// Polynomial map x(a,b) of one element on the hypercube.
class GeometryMap2D {
 public:
  GeometryMap2D() = default;
  GeometryMap2D(ElementType ty, int ngeo, std::vector<Vec2> coeffs);

  [[nodiscard]] Vec2 eval(double a, double b) const;
  /// Jacobian d(x,y)/d(a,b): columns are x_a and x_b.
  [[nodiscard]] Eigen::Matrix2d jacobian(double a, double b) const;
  /// Map a point of the reference polytope (triangle handled via the collapse).
  [[nodiscard]] Vec2 eval_poly(const Vec2& xi) const;

  [[nodiscard]] ElementType type() const noexcept { return type_; }
  [[nodiscard]] int ngeo() const noexcept { return ngeo_; }
  [[nodiscard]] const std::vector<Vec2>& coeffs() const noexcept { return coeffs_; }

 private:
  ElementType type_ = ElementType::Quad;
  int ngeo_ = 1;
  std::vector<double> gnodes_;
  std::vector<Vec2> coeffs_;
};

/// Metric terms at the collocated Gauss nodes and at the face nodes.
struct ElementGeometry {
  ElementType type = ElementType::Quad;
  int n = 0;  ///< nodes per direction (N+1)
  GeometryMap2D map;
  std::vector<Vec2> x;                   ///< node positions
  std::vector<double> detj;              ///< det of d x / d(a,b) = Jhat * J
  std::vector<double> jm;                ///< J = detj / Jhat
  std::vector<std::array<double, 4>> ja; ///< Ja^1 = (y_b, -x_b), Ja^2 = (-y_a, x_a)
  std::array<bool, 4> collapsed{false, false, false, false};
  std::array<std::vector<Vec2>, 4> fx;       ///< face node positions
  std::array<std::vector<Vec2>, 4> fnormal;  ///< unit outward normals
  std::array<std::vector<double>, 4> fsurf;  ///< |adj(J)^T n_cube| (hypercube surface element)
  std::array<std::vector<Vec2>, 4> fmetric;  ///< adj(J)^T n_cube, outward
  double volume = 0.0;
};

/// Builds geometry for every element of a 2D mesh with `N+1` Gauss nodes per
/// direction. Throws MeshError on a non-positive Jacobian.
[[nodiscard]] std::vector<ElementGeometry> build_geometry(const Mesh& mesh, int N,
                                                          const Quadrature1D& q);

/// Hypercube coordinates of the point of a 2D face with face parameter s.
[[nodiscard]] Vec2 face_point_2d(int local_face, double s) noexcept;

/// Finds the element containing p and its hypercube coordinates (Newton).
struct PointLocation {
  int elem = -1;
  Vec2 ab{0.0, 0.0};
};
[[nodiscard]] PointLocation locate_point(const std::vector<ElementGeometry>& geo, const Vec2& p);

}  // namespace mixdg
