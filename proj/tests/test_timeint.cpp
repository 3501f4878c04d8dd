#include <doctest.h>

#include <cmath>

#include "mixdg/timeint.hpp"

using namespace mixdg;

namespace {

/// y' = cos(t) y, y(0) = 1, exact exp(sin t); integrated to t = 2.
double ode_error(const RKScheme& s, int steps) {
  std::vector<double> y{1.0}, k, r;
  const double T = 2.0, dt = T / steps;
  const Residual rhs = [](const std::vector<double>& u, double t, std::vector<double>& d) {
    d.resize(1);
    d[0] = std::cos(t) * u[0];
  };
  for (int i = 0; i < steps; ++i) low_storage_step(s, y, i * dt, dt, rhs, k, r);
  return std::abs(y[0] - std::exp(std::sin(T)));
}

}  // namespace

TEST_CASE("low-storage schemes reach their design order") {
  for (const auto& s : {ls_rk3_3(), ls_rk4_5()}) {
    const double e1 = ode_error(s, 40), e2 = ode_error(s, 80);
    const double order = std::log2(e1 / e2);
    CAPTURE(s.name);
    CHECK(order == doctest::Approx(s.order).epsilon(0.1 / s.order));
  }
}

TEST_CASE("stage times are consistent with the update coefficients") {
  // For y' = 1 the stage solution must equal c_s dt at every stage.
  for (const auto& s : {ls_rk3_3(), ls_rk4_5()}) {
    double k = 0.0, y = 0.0;
    for (int st = 0; st < s.stages(); ++st) {
      CHECK(y == doctest::Approx(s.c[st]).epsilon(1e-12));
      k = s.A[st] * k + 1.0;
      y += s.B[st] * k;
    }
    CHECK(y == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("scheme lookup") {
  CHECK(rk_scheme_from_string("rk3").name == "ls_rk3_3");
  CHECK(rk_scheme_from_string("ls_rk4_5").stages() == 5);
  CHECK_THROWS((void)rk_scheme_from_string("euler"));
}
