#pragma once

// Troubled-cell detection: positivity sanity check, Jameson-type jump
// indicator on the nodal DG data plus face values, hysteresis switching and a
// checkerboard assignment for mixed-operator convergence studies.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mixdg/eqstate.hpp"
#include "mixdg/mesh.hpp"

namespace mixdg {

enum class Regime : std::uint8_t { DG = 0, FV = 1 };

enum class IndicatorKind { Jump, Checkerboard, ForceDG, ForceFV };
[[nodiscard]] IndicatorKind indicator_from_string(const std::string& s);
[[nodiscard]] std::string to_string(IndicatorKind k);

enum class IndicatorVar { Density, Pressure, Entropy };
[[nodiscard]] IndicatorVar indicator_var_from_string(const std::string& s);
[[nodiscard]] std::string to_string(IndicatorVar v);

struct IndicatorConfig {
  IndicatorKind kind = IndicatorKind::Jump;
  double lower = 0.025;
  double upper = 0.030;
  double big = 100.0;  ///< value C reported on a failed sanity check
  double eps = kAdmissibleEps;
  std::vector<IndicatorVar> vars{IndicatorVar::Density, IndicatorVar::Pressure};

  void validate() const;
};

[[nodiscard]] double indicator_value(IndicatorVar var, const State<2>& s, const GasModel& gas);

/// 1 iff rho > eps and p > eps at every supplied state (NaN fails).
[[nodiscard]] bool sanity_check(std::span<const State<2>> states, const GasModel& gas, double eps = kAdmissibleEps);

/// Jump indicator of one scalar variable on an n x n tensor node set.
/// `face[f]` holds the n face values chosen for face f (empty: no face values,
/// e.g. the collapsed edge of a triangle); `wj` is quadrature weight times
/// Jacobian per node. Each node's stencil is itself, its coordinate-line
/// neighbours and, for nodes next to a face, the face value on the same line.
[[nodiscard]] double jump_indicator(int n, std::span<const double> v, const std::array<std::vector<double>, 4>& face,
                                    std::span<const double> wj, double eps = kAdmissibleEps);

/// Face value by the distance-to-mean rule: the trace farther from the element mean.
[[nodiscard]] inline double distance_to_mean(double vl, double vr, double mean) noexcept {
  return std::abs(vl - mean) > std::abs(vr - mean) ? vl : vr;
}

/// Hysteresis: I >= upper -> FV, I < lower -> DG, otherwise unchanged.
[[nodiscard]] Regime update_regime(Regime prev, double indicator, const IndicatorConfig& cfg) noexcept;

/// Alternating assignment by structured cell parity and sub-element index.
[[nodiscard]] Regime checkerboard(const MeshElement& el) noexcept;

}  // namespace mixdg
