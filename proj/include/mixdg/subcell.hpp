#pragma once

// Finite-volume subcell decompositions of the reference elements, the
// conservative DG<->FV transfer operators (2D) and the physical subcell
// geometry of curved 2D elements.

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <vector>

#include "mixdg/basis.hpp"
#include "mixdg/common.hpp"
#include "mixdg/mesh.hpp"

namespace mixdg {

enum class CellKind { Quad, Triangle, Hexahedron, Prism, Pyramid, Tetrahedron };

struct Subcell {
  CellKind kind = CellKind::Quad;
  /// Node ids. 2D cells are counter-clockwise; hexahedra use tensor order;
  /// prisms list bottom then top triangle; pyramids list the base cyclically
  /// followed by the apex.
  std::vector<int> nodes;
};

struct SubcellFace {
  std::vector<int> nodes;  ///< 2D: (A,B) with the left cell on the left of A->B
  int left = -1;
  int right = -1;          ///< -1 for faces on the parent boundary
  int parent_face = -1;    ///< hypercube face id of the parent (outer faces)
  int sub_index = -1;      ///< 2D: position along the parent face parameter
};

struct SubcellDecomposition {
  ElementType type = ElementType::Quad;
  int fv_n = 1;
  std::vector<Vec3> nodes;  ///< equidistant grid in the reference polytope
  std::vector<Subcell> cells;
  std::vector<double> volumes;  ///< reference measures |E_k|
  std::vector<SubcellFace> inner;
  std::vector<SubcellFace> outer;

  [[nodiscard]] int n_cells() const noexcept { return static_cast<int>(cells.size()); }
};

/// Closed-form number of subcells per element type.
[[nodiscard]] int expected_subcell_count(ElementType ty, int fv_n);

[[nodiscard]] SubcellDecomposition subdivide(ElementType ty, int fv_n);

/// Geometric audit of a decomposition: measures, double ownership of inner
/// faces, outer faces on parent facets, positive volumes.
struct DecompositionAudit {
  bool ok = true;
  double volume_sum = 0.0;
  double min_volume = 0.0;
  std::string message;
};
[[nodiscard]] DecompositionAudit audit_decomposition(const SubcellDecomposition& d);

/// Legacy-ASCII unstructured grid of the reference decomposition.
void write_decomposition_vtk(std::ostream& os, const SubcellDecomposition& d);

// ---------------------------------------------------------------------------
// 2D transfer operators

/// Volume transfer between nodal DG data (on the (N+1)^2 collapsed Gauss
/// nodes) and subcell means. Both operators act on J-weighted quantities:
/// means of (J u) are P * (J u)_nodal and (J u)_nodal = R * means.
struct VolumeTransfer {
  ElementType type = ElementType::Quad;
  int N = 0;
  int fv_n = 1;
  Eigen::MatrixXd P;          ///< n_sub x n_q
  Eigen::MatrixXd R;          ///< n_q x n_sub
  Eigen::VectorXd sub_volume; ///< |E_k|
  Eigen::VectorXd wjhat;      ///< quadrature weight times collapse determinant
  Eigen::MatrixXd V;          ///< modal Vandermonde at the nodes
  Eigen::MatrixXd modal_means;///< means of each mode over each subcell
};

[[nodiscard]] VolumeTransfer build_volume_transfer(ElementType ty, int N, int fv_n,
                                                   const SubcellDecomposition& d);

/// Transfer along one element face between the N+1 Gauss face nodes and fv_n
/// equal sub-intervals of the face parameter.
struct SurfaceTransfer {
  int N = 0;
  int fv_n = 1;
  Eigen::MatrixXd P;  ///< fv_n x (N+1): sub-interval means of the nodal trace
  Eigen::MatrixXd R;  ///< (N+1) x fv_n: constrained least-squares reconstruction
  Eigen::VectorXd weights;  ///< Gauss weights of the face nodes
  double sub_length = 0.0;  ///< 2 / fv_n
};

[[nodiscard]] SurfaceTransfer build_surface_transfer(int N, int fv_n);

/// Reconstruction operator shared by volume and surface: given the mean of
/// every mode over every piece (rows) and the piece sizes, returns the modal
/// coefficients as a linear map of the piece means. The total integral is
/// reproduced exactly and the remaining modes are fitted in least squares.
[[nodiscard]] Eigen::MatrixXd constrained_reconstruction(const Eigen::MatrixXd& modal_means,
                                                         const Eigen::VectorXd& sizes);

/// Physical geometry of the subcells of one curved 2D element.
struct SubcellGeometry {
  std::vector<double> jfv;   ///< projected Jacobian P_k J
  std::vector<double> area;  ///< jfv * |E_k|
  std::vector<Vec2> xc;      ///< barycenters P_k(J x) / P_k(J)
  struct Face {
    int left = -1;
    int right = -1;
    Vec2 n_area{};  ///< outward (w.r.t. left) normal times length
    Vec2 xf{};      ///< face midpoint
  };
  std::vector<Face> inner;
  std::array<std::vector<int>, 4> outer_cell;
  std::array<std::vector<Vec2>, 4> outer_area;  ///< outward normal times length
  std::array<std::vector<Vec2>, 4> outer_xf;
  /// Per cell: list of (inner face index, sign) and (outer parent face, sub).
  std::vector<std::vector<std::pair<int, int>>> cell_inner;
  std::vector<std::vector<std::pair<int, int>>> cell_outer;
  std::vector<double> h;  ///< sqrt(area), a length scale per subcell
};

[[nodiscard]] SubcellGeometry build_subcell_geometry(const SubcellDecomposition& d,
                                                     const VolumeTransfer& vt,
                                                     const ElementGeometry& g);

}  // namespace mixdg
