#pragma once

// Interface fluxes: Rusanov, Roe with Harten's entropy fix, and the BR1
// arithmetic-average viscous flux. All convective fluxes take a unit normal
// pointing from the left to the right state.

#include <cmath>
#include <stdexcept>
#include <string>

#include "mixdg/eqstate.hpp"

namespace mixdg {

enum class RiemannKind { Rusanov, Roe };

[[nodiscard]] inline RiemannKind riemann_from_string(const std::string& s) {
  if (s == "rusanov") return RiemannKind::Rusanov;
  if (s == "roe") return RiemannKind::Roe;
  throw ConfigError("unknown riemann solver '" + s + "' (expected rusanov or roe)");
}

[[nodiscard]] inline std::string to_string(RiemannKind k) {
  return k == RiemannKind::Roe ? "roe" : "rusanov";
}

/// Signals a non-physical Roe average; callers fall back to Rusanov.
class RoeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest signal speed |u.n| + c of a state.
template <int Dim>
[[nodiscard]] inline double max_wave_speed(const State<Dim>& s, const std::type_identity_t<Vec<Dim>>& n,
                                           const GasModel& gas) {
  double un = 0.0;
  for (int i = 0; i < Dim; ++i) un += s.mom(i) * n[i];
  return std::abs(un / s.rho()) + sound_speed(s, gas);
}

template <int Dim>
[[nodiscard]] inline Cons<Dim> rusanov(const State<Dim>& l, const State<Dim>& r,
                                       const std::type_identity_t<Vec<Dim>>& n, const GasModel& gas) {
  const auto fl = normal_flux<Dim>(l, n, gas);
  const auto fr = normal_flux<Dim>(r, n, gas);
  const double lam = std::max(max_wave_speed<Dim>(l, n, gas), max_wave_speed<Dim>(r, n, gas));
  Cons<Dim> f{};
  for (int v = 0; v < kNumVars<Dim>; ++v) f[v] = 0.5 * (fl[v] + fr[v]) - 0.5 * lam * (r.u[v] - l.u[v]);
  return f;
}

/// Harten's smoothed absolute value: |x| for |x| >= delta, else (x^2+delta^2)/(2 delta).
[[nodiscard]] inline double harten_abs(double x, double delta) noexcept {
  const double a = std::abs(x);
  if (a >= delta || delta <= 0.0) return a;
  return (x * x + delta * delta) / (2.0 * delta);
}

/// Relative width of the entropy fix: delta = fraction * (|u_n| + c) of the Roe state.
inline constexpr double kHartenFraction = 0.05;

/// Roe flux written in the face-normal frame: the wave strengths of the two
/// acoustic waves, the entropy wave and the shear waves (the tangential
/// velocity jump). Harten's fix smooths the acoustic eigenvalues, which are
/// the ones that cross zero in transonic rarefactions.
template <int Dim>
[[nodiscard]] inline Cons<Dim> roe(const State<Dim>& l, const State<Dim>& r,
                                   const std::type_identity_t<Vec<Dim>>& n, const GasModel& gas,
                                   double harten_fraction = kHartenFraction) {
  const double pl = pressure(l, gas), pr = pressure(r, gas);
  if (!(pl > 0.0) || !(pr > 0.0)) throw AdmissibilityError("roe: non-positive pressure");
  const auto vl = velocity(l), vr = velocity(r);
  const double sl = std::sqrt(l.rho()), sr = std::sqrt(r.rho());
  const double hl = (l.rhoe() + pl) / l.rho(), hr = (r.rhoe() + pr) / r.rho();
  Vec<Dim> ut{};
  double q2 = 0.0, un = 0.0, dun = 0.0;
  for (int i = 0; i < Dim; ++i) {
    ut[i] = (sl * vl[i] + sr * vr[i]) / (sl + sr);
    q2 += ut[i] * ut[i];
    un += ut[i] * n[i];
    dun += (vr[i] - vl[i]) * n[i];
  }
  const double H = (sl * hl + sr * hr) / (sl + sr);
  const double c2 = (gas.gamma - 1.0) * (H - 0.5 * q2);
  if (!(c2 > 0.0)) throw RoeFailure("roe: non-physical averaged enthalpy");
  const double c = std::sqrt(c2);
  const double rho = sl * sr;
  const double dp = pr - pl, drho = r.rho() - l.rho();

  const double delta = harten_fraction * (std::abs(un) + c);
  const double lam1 = harten_abs(un - c, delta);
  const double lam2 = std::abs(un);
  const double lam3 = harten_abs(un + c, delta);
  const double a1 = (dp - rho * c * dun) / (2.0 * c2);
  const double a2 = drho - dp / c2;
  const double a3 = (dp + rho * c * dun) / (2.0 * c2);

  Cons<Dim> diss{};
  // Acoustic waves.
  diss[0] = lam1 * a1 + lam3 * a3;
  for (int i = 0; i < Dim; ++i) diss[1 + i] = lam1 * a1 * (ut[i] - c * n[i]) + lam3 * a3 * (ut[i] + c * n[i]);
  diss[Dim + 1] = lam1 * a1 * (H - un * c) + lam3 * a3 * (H + un * c);
  // Entropy wave.
  diss[0] += lam2 * a2;
  for (int i = 0; i < Dim; ++i) diss[1 + i] += lam2 * a2 * ut[i];
  diss[Dim + 1] += lam2 * a2 * 0.5 * q2;
  // Shear waves.
  double ut_dvt = 0.0;
  for (int i = 0; i < Dim; ++i) {
    const double dvt = (vr[i] - vl[i]) - dun * n[i];
    diss[1 + i] += lam2 * rho * dvt;
    ut_dvt += ut[i] * dvt;
  }
  diss[Dim + 1] += lam2 * rho * ut_dvt;

  const auto fl = normal_flux<Dim>(l, n, gas);
  const auto fr = normal_flux<Dim>(r, n, gas);
  Cons<Dim> f{};
  for (int v = 0; v < kNumVars<Dim>; ++v) f[v] = 0.5 * (fl[v] + fr[v]) - 0.5 * diss[v];
  return f;
}

/// Convective interface flux of the selected kind; a failed Roe average falls
/// back to Rusanov.
template <int Dim>
[[nodiscard]] inline Cons<Dim> numerical_flux(RiemannKind kind, const State<Dim>& l, const State<Dim>& r,
                                              const std::type_identity_t<Vec<Dim>>& n,
                                              const GasModel& gas) {
  if (kind == RiemannKind::Roe) {
    try {
      return roe<Dim>(l, r, n, gas);
    } catch (const RoeFailure&) {
    }
  }
  return rusanov<Dim>(l, r, n, gas);
}

/// BR1 viscous interface flux: the arithmetic mean contracted with n.
template <int Dim>
[[nodiscard]] inline Cons<Dim> br1_viscous_interface(const Flux<Dim>& fl, const Flux<Dim>& fr,
                                                     const std::type_identity_t<Vec<Dim>>& n) noexcept {
  Cons<Dim> f{};
  for (int i = 0; i < Dim; ++i)
    for (int v = 0; v < kNumVars<Dim>; ++v) f[v] += 0.5 * (fl[i][v] + fr[i][v]) * n[i];
  return f;
}

}  // namespace mixdg
