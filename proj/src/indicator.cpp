#include "mixdg/indicator.hpp"

#include <algorithm>
#include <cmath>

namespace mixdg {

IndicatorKind indicator_from_string(const std::string& s) {
  if (s == "jump") return IndicatorKind::Jump;
  if (s == "checkerboard") return IndicatorKind::Checkerboard;
  if (s == "force_dg") return IndicatorKind::ForceDG;
  if (s == "force_fv") return IndicatorKind::ForceFV;
  throw ConfigError("unknown indicator '" + s + "' (expected jump, checkerboard, force_dg or force_fv)");
}

std::string to_string(IndicatorKind k) {
  switch (k) {
    case IndicatorKind::Jump: return "jump";
    case IndicatorKind::Checkerboard: return "checkerboard";
    case IndicatorKind::ForceDG: return "force_dg";
    case IndicatorKind::ForceFV: return "force_fv";
  }
  return "jump";
}

IndicatorVar indicator_var_from_string(const std::string& s) {
  if (s == "density" || s == "rho") return IndicatorVar::Density;
  if (s == "pressure" || s == "p") return IndicatorVar::Pressure;
  if (s == "entropy" || s == "s") return IndicatorVar::Entropy;
  throw ConfigError("unknown indicator variable '" + s + "'");
}

std::string to_string(IndicatorVar v) {
  switch (v) {
    case IndicatorVar::Density: return "density";
    case IndicatorVar::Pressure: return "pressure";
    case IndicatorVar::Entropy: return "entropy";
  }
  return "density";
}

void IndicatorConfig::validate() const {
  if (!(lower <= upper)) throw ConfigError("indicator: ind_lower must not exceed ind_upper");
  if (!(big >= upper)) throw ConfigError("indicator: sanity constant must be >= ind_upper");
  if (vars.empty()) throw ConfigError("indicator: at least one indicator variable required");
}

double indicator_value(IndicatorVar var, const State<2>& s, const GasModel& gas) {
  switch (var) {
    case IndicatorVar::Density: return s.rho();
    case IndicatorVar::Pressure: return (gas.gamma - 1.0) * (s.rhoe() - 0.5 * s.mom_sq() / s.rho());
    case IndicatorVar::Entropy: {
      const double p = (gas.gamma - 1.0) * (s.rhoe() - 0.5 * s.mom_sq() / s.rho());
      return p / std::pow(s.rho(), gas.gamma);
    }
  }
  return 0.0;
}

bool sanity_check(std::span<const State<2>> states, const GasModel& gas, double eps) {
  for (const auto& s : states) {
    if (!(s.rho() > eps)) return false;
    const double p = (gas.gamma - 1.0) * (s.rhoe() - 0.5 * s.mom_sq() / s.rho());
    if (!(p > eps)) return false;
  }
  return true;
}

double jump_indicator(int n, std::span<const double> v, const std::array<std::vector<double>, 4>& face,
                      std::span<const double> wj, double eps) {
  double num = 0.0, vol = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int q = i + n * j;
      double lo = v[q], hi = v[q];
      auto take = [&](double x) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      };
      if (i > 0) take(v[q - 1]);
      if (i + 1 < n) take(v[q + 1]);
      if (j > 0) take(v[q - n]);
      if (j + 1 < n) take(v[q + n]);
      if (j == 0 && !face[0].empty()) take(face[0][i]);
      if (i + 1 == n && !face[1].empty()) take(face[1][j]);
      if (j + 1 == n && !face[2].empty()) take(face[2][i]);
      if (i == 0 && !face[3].empty()) take(face[3][j]);
      num += std::abs(lo - 2.0 * v[q] + hi) / (std::abs(lo + 2.0 * v[q] + hi) + eps) * wj[q];
      vol += wj[q];
    }
  return num / vol;
}

Regime update_regime(Regime prev, double indicator, const IndicatorConfig& cfg) noexcept {
  if (!(indicator < cfg.upper)) return Regime::FV;  // includes NaN
  if (indicator < cfg.lower) return Regime::DG;
  return prev;
}

Regime checkerboard(const MeshElement& el) noexcept {
  return ((el.cell[0] + el.cell[1] + el.cell[2] + el.sub) % 2 == 0) ? Regime::DG : Regime::FV;
}

}  // namespace mixdg
