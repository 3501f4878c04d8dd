#pragma once

// Building blocks of the second-order finite-volume subcell operator:
// least-squares gradients of primitive variables, the generalized minmod
// slope limiter, and viscous face gradients.

#include <array>
#include <span>
#include <stdexcept>

#include "mixdg/eqstate.hpp"

namespace mixdg {

/// Reconstruction variables: (rho, u, v, p, T).
inline constexpr int kNumPrim = 5;
using Prim = std::array<double, kNumPrim>;
using PrimGrad = std::array<Vec2, kNumPrim>;

[[nodiscard]] Prim to_prim(const State<2>& s, const GasModel& gas);
[[nodiscard]] State<2> from_prim(const Prim& w, const GasModel& gas);

/// Value of a neighbour used by the gradient and limiter stencils.
struct StencilPoint {
  Vec2 x{};   ///< position of the neighbour value (barycenter, face point, mirror)
  Prim w{};   ///< primitive values there
  Vec2 xf{};  ///< midpoint of the shared face
};

class DegenerateStencil : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Minimizes sum_j (w_j - w_k - g.(x_j - x_k))^2 for every primitive.
[[nodiscard]] PrimGrad least_squares_gradient(const Vec2& xk, const Prim& wk,
                                              std::span<const StencilPoint> nb);

/// minmod of three arguments: the smallest magnitude if all share a sign, else 0.
[[nodiscard]] double minmod(double a, double b, double c) noexcept;

/// Generalized minmod factor of one face for slope ratio r.
[[nodiscard]] double limiter_factor(double r, double beta) noexcept;

/// Denominators of the slope ratio below this value leave the face unconstrained.
inline constexpr double kSlopeRatioGuard = 1e-12;
/// A face whose direction is nearly orthogonal to the gradient
/// (|g.d| < kSlopeDirectionGuard |g| |d|) is also left unconstrained: there the
/// ratio divides by a slope dominated by the gradient's own error.
inline constexpr double kSlopeDirectionGuard = 0.1;

/// phi for one variable: min over faces of limiter_factor(r_f) with
/// r_f = [(w_j - w_k)/|x_j - x_k|] / [g.(x_j - x_k)/|x_j - x_k|], i.e. the
/// mean-value slope over the gradient's slope in the same direction, so that
/// linear data gives r_f = 1 on any stencil.
[[nodiscard]] double limit_scalar(double wk, const Vec2& g, const Vec2& xk,
                                  std::span<const StencilPoint> nb, int var, double beta) noexcept;

/// Face gradient from an averaged cell gradient, with its component along the
/// line between the two values replaced by the direct difference quotient.
[[nodiscard]] Vec2 corrected_face_gradient(const Vec2& gbar, double wl, double wr, const Vec2& xl,
                                           const Vec2& xr) noexcept;

/// Green-Gauss cell gradient sum_f w_f A_f / area for one scalar.
[[nodiscard]] Vec2 green_gauss_gradient(std::span<const double> wf, std::span<const Vec2> area_vec,
                                        double area) noexcept;

}  // namespace mixdg
