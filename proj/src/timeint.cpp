#include "mixdg/timeint.hpp"

#include "mixdg/common.hpp"

namespace mixdg {

RKScheme ls_rk3_3() {
  return {"ls_rk3_3", {0.0, -5.0 / 9.0, -153.0 / 128.0}, {1.0 / 3.0, 15.0 / 16.0, 8.0 / 15.0},
          {0.0, 1.0 / 3.0, 3.0 / 4.0}, 3};
}

RKScheme ls_rk4_5() {
  return {"ls_rk4_5",
          {0.0, -567301805773.0 / 1357537059087.0, -2404267990393.0 / 2016746695238.0,
           -3550918686646.0 / 2091501179385.0, -1275806237668.0 / 842570457699.0},
          {1432997174477.0 / 9575080441755.0, 5161836677717.0 / 13612068292357.0,
           1720146321549.0 / 2090206949498.0, 3134564353537.0 / 4481467310338.0,
           2277821191437.0 / 14882151754819.0},
          {0.0, 1432997174477.0 / 9575080441755.0, 2526269341429.0 / 6820363962896.0,
           2006345519317.0 / 3224310063776.0, 2802321613138.0 / 2924317926251.0},
          4};
}

RKScheme rk_scheme_from_string(const std::string& name) {
  if (name == "ls_rk3_3" || name == "rk3") return ls_rk3_3();
  if (name == "ls_rk4_5" || name == "rk4") return ls_rk4_5();
  throw ConfigError("unknown rk_scheme '" + name + "' (expected ls_rk3_3 or ls_rk4_5)");
}

void low_storage_step(const RKScheme& s, std::vector<double>& u, double t, double dt, const Residual& rhs,
                      std::vector<double>& k, std::vector<double>& r) {
  k.assign(u.size(), 0.0);
  r.resize(u.size());
  for (int st = 0; st < s.stages(); ++st) {
    rhs(u, t + s.c[st] * dt, r);
    const double a = s.A[st], b = s.B[st];
    for (std::size_t i = 0; i < u.size(); ++i) {
      k[i] = a * k[i] + dt * r[i];
      u[i] += b * k[i];
    }
  }
}

}  // namespace mixdg
