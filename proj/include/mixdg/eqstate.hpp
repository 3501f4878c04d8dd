#pragma once

// Perfect-gas state algebra and the physical fluxes of the compressible
// Navier-Stokes-Fourier system. Everything here is a pure value-level
// function and may be called concurrently.

#include <array>
#include <cmath>
#include <string>
#include <type_traits>

#include "mixdg/common.hpp"

namespace mixdg {

template <int Dim>
inline constexpr int kNumVars = Dim + 2;

template <int Dim>
using Cons = std::array<double, Dim + 2>;

template <int Dim>
using Vec = std::array<double, Dim>;

/// Conservative state (rho, rho*u, rho*e).
template <int Dim>
struct State {
  static_assert(Dim == 2 || Dim == 3);
  Cons<Dim> u{};

  State() = default;
  explicit State(const Cons<Dim>& c) : u(c) {}

  [[nodiscard]] double rho() const noexcept { return u[0]; }
  [[nodiscard]] double mom(int i) const noexcept { return u[1 + i]; }
  [[nodiscard]] double rhoe() const noexcept { return u[Dim + 1]; }

  [[nodiscard]] double mom_sq() const noexcept {
    double s = 0.0;
    for (int i = 0; i < Dim; ++i) s += u[1 + i] * u[1 + i];
    return s;
  }
};

/// Perfect gas with constant viscosity. The specific gas constant is an
/// independent input so that T = p / (rho R) is well defined; cp follows.
struct GasModel {
  double gamma = 1.4;
  double mu = 0.0;
  double Pr = 0.72;
  double R = 1.0;

  [[nodiscard]] double cp() const noexcept { return gamma * R / (gamma - 1.0); }
  [[nodiscard]] double conductivity() const noexcept { return cp() * mu / Pr; }

  void validate() const {
    if (!(gamma > 1.0)) throw ConfigError("gas: gamma must exceed 1");
    if (!(mu >= 0.0)) throw ConfigError("gas: mu must be non-negative");
    if (!(Pr > 0.0)) throw ConfigError("gas: Pr must be positive");
    if (!(R > 0.0)) throw ConfigError("gas: R must be positive");
  }
};

/// Spatial derivatives of the gradient primitives (u_1..u_d, T):
/// d[i][v] = d(prim_v)/dx_i.
template <int Dim>
struct GradientState {
  std::array<std::array<double, Dim + 1>, Dim> d{};
};

template <int Dim>
using Flux = std::array<Cons<Dim>, Dim>;  // one flux vector per direction

template <int Dim>
[[nodiscard]] inline double pressure(const State<Dim>& s, const GasModel& gas) {
  if (!(s.rho() > 0.0)) {
    throw AdmissibilityError("non-positive density " + std::to_string(s.rho()));
  }
  return (gas.gamma - 1.0) * (s.rhoe() - 0.5 * s.mom_sq() / s.rho());
}

template <int Dim>
[[nodiscard]] inline bool is_admissible(const State<Dim>& s, const GasModel& gas) noexcept {
  if (!(s.rho() > kAdmissibleEps)) return false;
  const double p = (gas.gamma - 1.0) * (s.rhoe() - 0.5 * s.mom_sq() / s.rho());
  return p > kAdmissibleEps;
}

template <int Dim>
[[nodiscard]] inline Vec<Dim> velocity(const State<Dim>& s) noexcept {
  Vec<Dim> v{};
  for (int i = 0; i < Dim; ++i) v[i] = s.mom(i) / s.rho();
  return v;
}

template <int Dim>
[[nodiscard]] inline double temperature(const State<Dim>& s, const GasModel& gas) {
  return pressure(s, gas) / (s.rho() * gas.R);
}

template <int Dim>
[[nodiscard]] inline double sound_speed(const State<Dim>& s, const GasModel& gas) {
  const double p = pressure(s, gas);
  if (!(p > 0.0)) throw AdmissibilityError("non-positive pressure " + std::to_string(p));
  return std::sqrt(gas.gamma * p / s.rho());
}

template <int Dim>
[[nodiscard]] inline State<Dim> from_primitive(double rho, const std::type_identity_t<Vec<Dim>>& vel, double p,
                                               const GasModel& gas) noexcept {
  State<Dim> s;
  s.u[0] = rho;
  double ke = 0.0;
  for (int i = 0; i < Dim; ++i) {
    s.u[1 + i] = rho * vel[i];
    ke += vel[i] * vel[i];
  }
  s.u[Dim + 1] = p / (gas.gamma - 1.0) + 0.5 * rho * ke;
  return s;
}

/// Gradient primitives (u_1..u_d, T).
template <int Dim>
[[nodiscard]] inline std::array<double, Dim + 1> gradient_primitives(const State<Dim>& s,
                                                                     const GasModel& gas) {
  std::array<double, Dim + 1> w{};
  for (int i = 0; i < Dim; ++i) w[i] = s.mom(i) / s.rho();
  w[Dim] = temperature(s, gas);
  return w;
}

template <int Dim>
[[nodiscard]] inline Flux<Dim> convective_flux(const State<Dim>& s, const GasModel& gas) {
  const double p = pressure(s, gas);
  const auto v = velocity(s);
  Flux<Dim> f{};
  for (int i = 0; i < Dim; ++i) {
    f[i][0] = s.mom(i);
    for (int j = 0; j < Dim; ++j) f[i][1 + j] = s.mom(j) * v[i];
    f[i][1 + i] += p;
    f[i][Dim + 1] = (s.rhoe() + p) * v[i];
  }
  return f;
}

/// Convective flux contracted with a (not necessarily unit) vector n.
template <int Dim>
[[nodiscard]] inline Cons<Dim> normal_flux(const State<Dim>& s, const std::type_identity_t<Vec<Dim>>& n,
                                           const GasModel& gas) {
  const double p = pressure(s, gas);
  double un = 0.0;
  for (int i = 0; i < Dim; ++i) un += s.mom(i) * n[i];
  un /= s.rho();
  Cons<Dim> f{};
  f[0] = s.rho() * un;
  for (int j = 0; j < Dim; ++j) f[1 + j] = s.mom(j) * un + p * n[j];
  f[Dim + 1] = (s.rhoe() + p) * un;
  return f;
}

/// Viscous stress under Stokes' hypothesis from the velocity gradient.
template <int Dim>
[[nodiscard]] inline std::array<std::array<double, Dim>, Dim> viscous_stress(
    const GradientState<Dim>& g, double mu) noexcept {
  double div = 0.0;
  for (int i = 0; i < Dim; ++i) div += g.d[i][i];
  std::array<std::array<double, Dim>, Dim> sigma{};
  for (int i = 0; i < Dim; ++i) {
    for (int j = 0; j < Dim; ++j) {
      // d[j][i] = du_i/dx_j
      sigma[i][j] = mu * (g.d[j][i] + g.d[i][j]);
    }
    sigma[i][i] -= mu * (2.0 / 3.0) * div;
  }
  return sigma;
}

/// Rows [0, sigma, sigma.u + lambda grad T] per spatial direction.
template <int Dim>
[[nodiscard]] inline Flux<Dim> viscous_flux(const State<Dim>& s, const GradientState<Dim>& g,
                                            const GasModel& gas) {
  if (!(s.rho() > 0.0)) {
    throw AdmissibilityError("non-positive density " + std::to_string(s.rho()));
  }
  const auto sigma = viscous_stress(g, gas.mu);
  const auto v = velocity(s);
  const double lambda = gas.conductivity();
  Flux<Dim> f{};
  for (int i = 0; i < Dim; ++i) {
    f[i][0] = 0.0;
    double work = 0.0;
    for (int j = 0; j < Dim; ++j) {
      f[i][1 + j] = sigma[i][j];
      work += sigma[i][j] * v[j];
    }
    f[i][Dim + 1] = work + lambda * g.d[i][Dim];
  }
  return f;
}

}  // namespace mixdg
