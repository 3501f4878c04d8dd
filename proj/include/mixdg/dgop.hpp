#pragma once

// Tensor-product DGSEM kernels on the (N+1)^2 Gauss nodes of the hypercube.
// Collapsed elements use the same kernels through the composed geometry map,
// so only metric terms differ between quadrilaterals and triangles.
//
// Data layout: nodal arrays are node-major, node = i + n*j, with `nv`
// contiguous values per node. Face traces are ordered by increasing face
// parameter s (face 0: b=-1, 1: a=+1, 2: b=+1, 3: a=-1).

#include <Eigen/Dense>
#include <vector>

#include "mixdg/basis.hpp"

namespace mixdg {

struct DGReference {
  int N = 0;
  int n = 1;
  Quadrature1D q;
  Eigen::MatrixXd D;     ///< D(i,k) = l_k'(x_i)
  Eigen::MatrixXd Dhat;  ///< weak-form derivative: Dhat(i,k) = w_k D(k,i) / w_i
  std::vector<double> lm;  ///< l_j(-1)
  std::vector<double> lp;  ///< l_j(+1)
};

[[nodiscard]] DGReference make_dg_reference(int N);

/// Adds sum_k Dhat(i,k) F1(k,j) + sum_l Dhat(j,l) F2(i,l) to r, with F1/F2 the
/// contravariant fluxes in the a and b directions.
void dg_volume(const DGReference& ref, int nv, const double* F1, const double* F2, double* r);

/// Interpolates the nodal field to the nodes of one face.
void dg_face_trace(const DGReference& ref, int nv, int face, const double* u, double* trace);

/// Subtracts the lifted surface term l(+-1)/w * fhat from r, where fhat holds the
/// outward numerical flux times the hypercube surface element at each face node.
void dg_surface(const DGReference& ref, int nv, int face, const double* fhat, double* r);

}  // namespace mixdg
