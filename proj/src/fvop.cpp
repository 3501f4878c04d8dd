#include "mixdg/fvop.hpp"


#include <algorithm>
#include <cmath>

namespace mixdg {

Prim to_prim(const State<2>& s, const GasModel& gas) {
  const double p = pressure(s, gas);
  return {s.rho(), s.mom(0) / s.rho(), s.mom(1) / s.rho(), p, p / (s.rho() * gas.R)};
}

State<2> from_prim(const Prim& w, const GasModel& gas) {
  return from_primitive<2>(w[0], {w[1], w[2]}, w[3], gas);
}

PrimGrad least_squares_gradient(const Vec2& xk, const Prim& wk, std::span<const StencilPoint> nb) {
  double a11 = 0.0, a12 = 0.0, a22 = 0.0, scale = 0.0;
  for (const auto& p : nb) {
    const double dx = p.x[0] - xk[0], dy = p.x[1] - xk[1];
    a11 += dx * dx;
    a12 += dx * dy;
    a22 += dy * dy;
    scale = std::max(scale, dx * dx + dy * dy);
  }
  const double det = a11 * a22 - a12 * a12;
  if (!(det > 1e-12 * scale * scale)) throw DegenerateStencil("least-squares gradient: collinear stencil");
  PrimGrad g{};
  for (int v = 0; v < kNumPrim; ++v) {
    double b1 = 0.0, b2 = 0.0;
    for (const auto& p : nb) {
      const double dw = p.w[v] - wk[v];
      b1 += (p.x[0] - xk[0]) * dw;
      b2 += (p.x[1] - xk[1]) * dw;
    }
    g[v] = {(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det};
  }
  return g;
}

double minmod(double a, double b, double c) noexcept {
  if (a > 0.0 && b > 0.0 && c > 0.0) return std::min({a, b, c});
  if (a < 0.0 && b < 0.0 && c < 0.0) return std::max({a, b, c});
  return 0.0;
}

double limiter_factor(double r, double beta) noexcept { return minmod(beta * r, 0.5 * (1.0 + r), beta); }

double limit_scalar(double wk, const Vec2& g, const Vec2& xk, std::span<const StencilPoint> nb, int var,
                    double beta) noexcept {
  double phi = beta;
  const double gn = std::hypot(g[0], g[1]);
  const double guard = std::max(kSlopeRatioGuard, kSlopeDirectionGuard * gn);
  for (const auto& p : nb) {
    const double dx = p.x[0] - xk[0], dy = p.x[1] - xk[1];
    const double lj = std::hypot(dx, dy);
    const double den = (g[0] * dx + g[1] * dy) / lj;
    if (!(std::abs(den) >= guard)) continue;  // flat slope along this direction: face contributes beta
    const double r = ((p.w[var] - wk) / lj) / den;
    phi = std::min(phi, limiter_factor(r, beta));
  }
  return phi;
}

Vec2 corrected_face_gradient(const Vec2& gbar, double wl, double wr, const Vec2& xl, const Vec2& xr) noexcept {
  const double dx = xr[0] - xl[0], dy = xr[1] - xl[1];
  const double len = std::hypot(dx, dy);
  const Vec2 e{dx / len, dy / len};
  const double corr = gbar[0] * e[0] + gbar[1] * e[1] - (wr - wl) / len;
  return {gbar[0] - corr * e[0], gbar[1] - corr * e[1]};
}

Vec2 green_gauss_gradient(std::span<const double> wf, std::span<const Vec2> area_vec, double area) noexcept {
  Vec2 g{0.0, 0.0};
  for (std::size_t f = 0; f < wf.size(); ++f) {
    g[0] += wf[f] * area_vec[f][0];
    g[1] += wf[f] * area_vec[f][1];
  }
  return {g[0] / area, g[1] / area};
}

}  // namespace mixdg
