#pragma once

// Two-register low-storage explicit Runge-Kutta schemes (Williamson form):
//   k <- A_s k + dt R(u, t + c_s dt);  u <- u + B_s k.

#include <functional>
#include <string>
#include <vector>

namespace mixdg {

struct RKScheme {
  std::string name;
  std::vector<double> A;
  std::vector<double> B;
  std::vector<double> c;
  int order = 0;
  [[nodiscard]] int stages() const noexcept { return static_cast<int>(A.size()); }
};

/// Williamson's three-stage third-order scheme.
[[nodiscard]] RKScheme ls_rk3_3();
/// Carpenter-Kennedy five-stage fourth-order scheme.
[[nodiscard]] RKScheme ls_rk4_5();
[[nodiscard]] RKScheme rk_scheme_from_string(const std::string& name);

using Residual = std::function<void(const std::vector<double>& u, double t, std::vector<double>& dudt)>;

/// Advances u by one step of size dt. `k` and `r` are caller-owned scratch
/// registers (resized as needed).
void low_storage_step(const RKScheme& s, std::vector<double>& u, double t, double dt, const Residual& rhs,
                      std::vector<double>& k, std::vector<double>& r);

}  // namespace mixdg
