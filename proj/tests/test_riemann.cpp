#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "mixdg/riemann.hpp"

using namespace mixdg;

namespace {

GasModel gas;

template <typename A, typename B>
double max_diff(const A& a, const B& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("rusanov on the Sod states") {
  // Oracle: direct scalar evaluation of the formula in a separate script.
  const auto l = from_primitive<2>(1.0, {0.0, 0.0}, 1.0, gas);
  const auto r = from_primitive<2>(0.125, {0.0, 0.0}, 0.1, gas);
  const auto f = rusanov<2>(l, r, {1.0, 0.0}, gas);
  CHECK(f[0] == doctest::Approx(0.51765698102121638).epsilon(1e-14));
  CHECK(f[1] == doctest::Approx(0.55).epsilon(1e-14));
  CHECK(std::abs(f[2]) < 1e-15);
  CHECK(f[3] == doctest::Approx(1.3311179511974138).epsilon(1e-14));
}

TEST_CASE("convective fluxes are consistent and mirror symmetric") {
  testing::Gen gen(42);
  for (int t = 0; t < 100; ++t) {
    const auto a = gen.state2(gas);
    const auto b = gen.state2(gas);
    const auto n = gen.unit2();
    const Vec<2> mn{-n[0], -n[1]};
    const auto phys = normal_flux<2>(a, n, gas);
    for (auto kind : {RiemannKind::Rusanov, RiemannKind::Roe}) {
      CAPTURE(to_string(kind));
      CHECK(max_diff(numerical_flux<2>(kind, a, a, n, gas), phys) < 1e-13);
      const auto f1 = numerical_flux<2>(kind, a, b, n, gas);
      const auto f2 = numerical_flux<2>(kind, b, a, mn, gas);
      for (int v = 0; v < 4; ++v) CHECK(std::abs(f1[v] + f2[v]) < 1e-12);
    }
  }
}

TEST_CASE("roe flux preserves a stationary contact") {
  const auto l = from_primitive<2>(1.0, {0.0, 0.3}, 1.0, gas);
  const auto r = from_primitive<2>(0.2, {0.0, 0.3}, 1.0, gas);
  const auto f = roe<2>(l, r, {1.0, 0.0}, gas);
  CHECK(std::abs(f[0]) < 1e-15);
  CHECK(f[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(f[3]) < 1e-15);
}

TEST_CASE("roe flux upwinds supersonic pairs exactly") {
  // All eigenvalues positive: the Roe matrix property gives flux = F_L.
  testing::Gen gen(3);
  for (int t = 0; t < 100; ++t) {
    const auto n = gen.unit2();
    const double rl = gen.uniform(0.5, 2.0), rr = gen.uniform(0.5, 2.0);
    const double pl = gen.uniform(0.5, 2.0), pr = gen.uniform(0.5, 2.0);
    const double un = 4.0 + gen.uniform(0.0, 1.0);
    const double ut = gen.uniform(-1.0, 1.0);
    const Vec<2> t_dir{-n[1], n[0]};
    const auto l = from_primitive<2>(rl, {un * n[0] + ut * t_dir[0], un * n[1] + ut * t_dir[1]}, pl, gas);
    const auto r = from_primitive<2>(rr, {(un + 0.3) * n[0], (un + 0.3) * n[1]}, pr, gas);
    CHECK(max_diff(roe<2>(l, r, n, gas), normal_flux<2>(l, n, gas)) < 1e-12);
  }
}

TEST_CASE("roe flux resolves a stationary normal shock") {
  // Mach 2 Rankine-Hugoniot states (independent formula evaluation).
  const auto l = from_primitive<2>(1.0, {2.3664319132398464, 0.0}, 1.0, gas);
  const auto r = from_primitive<2>(2.666666666666667, {0.88741196746494233, 0.0}, 4.5, gas);
  const auto fl = normal_flux<2>(l, {1.0, 0.0}, gas);
  CHECK(max_diff(normal_flux<2>(r, {1.0, 0.0}, gas), fl) < 1e-12);
  CHECK(max_diff(roe<2>(l, r, {1.0, 0.0}, gas, 0.0), fl) < 1e-12);
}

TEST_CASE("entropy fix changes transonic rarefaction fluxes continuously") {
  // Left subsonic-left-moving / right supersonic: u - c crosses zero.
  const auto l = from_primitive<2>(1.0, {0.8, 0.0}, 1.0, gas);
  const auto r = from_primitive<2>(0.6, {1.4, 0.0}, 0.5, gas);
  const auto fixed = roe<2>(l, r, {1.0, 0.0}, gas, 0.2);
  const auto plain = roe<2>(l, r, {1.0, 0.0}, gas, 0.0);
  CHECK(max_diff(fixed, plain) > 1e-6);
  // Harten's smoothing is continuous at its activation threshold.
  for (double delta : {0.01, 0.3, 1.0}) {
    CHECK(harten_abs(delta * (1 - 1e-12), delta) == doctest::Approx(delta).epsilon(1e-10));
    CHECK(harten_abs(-delta * (1 + 1e-12), delta) == doctest::Approx(delta).epsilon(1e-10));
    CHECK(harten_abs(0.0, delta) == doctest::Approx(0.5 * delta));
  }
}

TEST_CASE("roe flux rejects inadmissible states") {
  // The Roe-averaged sound speed of two admissible perfect-gas states is always
  // real, so only inadmissible input can stop the solver.
  State<2> l, r;
  l.u = {1.0, 0.0, 30.0, 450.0 + 1e-3};
  r.u = {1.0, 0.0, -30.0, 400.0};
  CHECK(is_admissible(l, gas));
  CHECK_FALSE(is_admissible(r, gas));
  CHECK_THROWS_AS((void)roe<2>(l, r, {1.0, 0.0}, gas), AdmissibilityError);
  const auto f = roe<2>(l, l, {1.0, 0.0}, gas);
  CHECK(max_diff(f, normal_flux<2>(l, {1.0, 0.0}, gas)) < 1e-12);
}

TEST_CASE("br1 interface average") {
  testing::Gen gen(9);
  Flux<2> a{}, b{};
  for (int i = 0; i < 2; ++i)
    for (int v = 0; v < 4; ++v) {
      a[i][v] = gen.uniform(-1, 1);
      b[i][v] = -a[i][v];
    }
  const Vec<2> n{0.6, 0.8};
  const auto same = br1_viscous_interface<2>(a, a, n);
  const auto zero = br1_viscous_interface<2>(a, b, n);
  for (int v = 0; v < 4; ++v) {
    CHECK(same[v] == doctest::Approx(a[0][v] * 0.6 + a[1][v] * 0.8));
    CHECK(std::abs(zero[v]) < 1e-15);
  }
  for (int i = 0; i < 2; ++i)
    for (int v = 0; v < 4; ++v) b[i][v] = gen.uniform(-1, 1);
  const auto mixed = br1_viscous_interface<2>(a, b, n);
  for (int v = 0; v < 4; ++v)
    CHECK(mixed[v] == doctest::Approx(0.5 * ((a[0][v] + b[0][v]) * 0.6 + (a[1][v] + b[1][v]) * 0.8)));
}

TEST_CASE("riemann selection parses config names") {
  CHECK(riemann_from_string("roe") == RiemannKind::Roe);
  CHECK(riemann_from_string("rusanov") == RiemannKind::Rusanov);
  CHECK_THROWS_AS((void)riemann_from_string("hllc"), ConfigError);
}
