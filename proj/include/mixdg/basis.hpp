#pragma once

// One-dimensional Gauss rules, Lagrange operators, collapsed-coordinate maps
// and orthonormal modal bases on the 2D reference elements.

#include <Eigen/Dense>
#include <array>
#include <span>
#include <vector>

#include "mixdg/common.hpp"

namespace mixdg {

struct Quadrature1D {
  std::vector<double> nodes;
  std::vector<double> weights;
  [[nodiscard]] int size() const noexcept { return static_cast<int>(nodes.size()); }
};

/// n-point Gauss-Legendre rule on [-1,1], exact to degree 2n-1.
[[nodiscard]] Quadrature1D gauss_legendre(int n);

/// Barycentric weights of the Lagrange basis through `nodes`.
[[nodiscard]] std::vector<double> barycentric_weights(std::span<const double> nodes);

/// Values l_j(x) of all Lagrange polynomials through `nodes` at x.
[[nodiscard]] std::vector<double> lagrange_values(std::span<const double> nodes, double x);

/// Derivatives l_j'(x) of all Lagrange polynomials through `nodes` at x.
[[nodiscard]] std::vector<double> lagrange_derivatives(std::span<const double> nodes, double x);

struct LagrangeOps {
  std::vector<double> nodes;
  Eigen::MatrixXd D;  ///< D(i,j) = l_j'(x_i)

  /// Row of interpolation weights for evaluating the nodal polynomial at x.
  [[nodiscard]] Eigen::RowVectorXd eval_row(double x) const;
};

[[nodiscard]] LagrangeOps lagrange_derivative_matrix(const Quadrature1D& q);
[[nodiscard]] LagrangeOps lagrange_derivative_matrix(std::span<const double> nodes);

/// Image of a hypercube point in the reference polytope and the determinant of
/// the collapse Jacobian.
struct CollapsePoint {
  Vec3 xi{};
  double jdet = 1.0;
};

/// Collapse map from [-1,1]^d onto the reference polytope. Reference
/// polytopes: quad/hex are the bi-unit cubes; triangle (-1,-1),(1,-1),(-1,1);
/// prism = triangle x [-1,1]; pyramid base (+-1,+-1,-1) apex (0,0,1);
/// tetrahedron (-1,-1,-1),(1,-1,-1),(-1,1,-1),(-1,-1,1).
[[nodiscard]] CollapsePoint collapse_map(ElementType ty, std::span<const double> cube);

/// Jacobian d(xi_poly)/d(xi_cube) of the 2D collapse maps (row = poly coord).
[[nodiscard]] Eigen::Matrix2d collapse_jacobian_2d(ElementType ty, double a, double b);

/// Inverse of the 2D collapse map (the collapsed vertex maps to a = -1).
[[nodiscard]] Vec2 uncollapse_2d(ElementType ty, const Vec2& xi);

/// Orthonormal Jacobi polynomial P_n^{(alpha,beta)} (unit L2 norm under the
/// Jacobi weight on [-1,1]).
[[nodiscard]] double jacobi_normalized(int n, double alpha, double beta, double x);

[[nodiscard]] int modal_count(ElementType ty, int N);

/// Values of all modal basis functions at a point of the reference polytope.
/// Quad: tensor Legendre; triangle: Proriol-Koornwinder-Dubiner. Both are
/// orthonormal over their reference element; mode 0 is constant.
[[nodiscard]] Eigen::RowVectorXd modal_row(ElementType ty, int N, const Vec2& xi);

/// Total polynomial degree of each mode (for exactness tests).
[[nodiscard]] std::vector<int> modal_degrees(ElementType ty, int N);

struct ModalBasis {
  ElementType type = ElementType::Quad;
  int N = 0;
  int n_modes = 0;
  Eigen::MatrixXd V;        ///< n_q x n_modes at the collapsed tensor Gauss nodes
  Eigen::VectorXd wjhat;    ///< tensor weight times collapse determinant per node
  Eigen::MatrixXd mass;     ///< V^T diag(wjhat) V
};

/// Modal Vandermonde at the tensor nodes of `q` (lexicographic, first index
/// fastest) mapped through the collapse map.
[[nodiscard]] ModalBasis modal_vandermonde(ElementType ty, int N, const Quadrature1D& q);

}  // namespace mixdg
