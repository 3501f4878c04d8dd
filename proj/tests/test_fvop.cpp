#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "mixdg/fvop.hpp"

using namespace mixdg;

TEST_CASE("generalized minmod factors") {
  CHECK(limiter_factor(1.0, 1.0) == 1.0);
  CHECK(limiter_factor(1.0, 2.0) == 1.0);
  CHECK(limiter_factor(-0.3, 2.0) == 0.0);
  CHECK(limiter_factor(0.0, 1.5) == 0.0);
  CHECK(limiter_factor(3.0, 2.0) == 2.0);   // min(6, 2, 2)
  CHECK(limiter_factor(0.5, 2.0) == 0.75);  // min(1, 0.75, 2)
  CHECK(limiter_factor(0.5, 1.0) == 0.5);   // min(0.5, 0.75, 1)
  CHECK(minmod(-1.0, -2.0, -0.5) == -0.5);
  CHECK(minmod(1.0, -2.0, 0.5) == 0.0);
}

TEST_CASE("limit_scalar takes the minimum over faces and ignores flat directions") {
  const Vec2 xk{0.0, 0.0};
  const Vec2 g{1.0, 0.0};
  // Face on +x: neighbour difference 3 over distance 1, predicted slope 1 -> r = 3.
  // Face on -x: neighbour difference -0.5 over 1, predicted -1 -> r = 0.5.
  // Face on +y: predicted slope 0 -> contributes beta.
  std::vector<StencilPoint> nb(3);
  nb[0].x = {1.0, 0.0};
  nb[0].xf = {0.5, 0.0};
  nb[0].w[0] = 3.0;
  nb[1].x = {-1.0, 0.0};
  nb[1].xf = {-0.5, 0.0};
  nb[1].w[0] = -0.5;
  nb[2].x = {0.0, 1.0};
  nb[2].xf = {0.0, 0.5};
  nb[2].w[0] = 100.0;
  CHECK(limit_scalar(0.0, g, xk, nb, 0, 2.0) == doctest::Approx(0.75));
  CHECK(limit_scalar(0.0, g, xk, nb, 0, 1.0) == doctest::Approx(0.5));
  nb[1].w[0] = 0.5;  // local extremum -> first order
  CHECK(limit_scalar(0.0, g, xk, nb, 0, 2.0) == 0.0);
}

TEST_CASE("limit_scalar skips directions nearly orthogonal to the gradient") {
  const Vec2 xk{0.0, 0.0};
  const Vec2 g{1.0, 0.0};
  // Direction (0.05, 1)/|.|: predicted slope 0.05/1.00125 ~ 0.0499 < 0.1 |g| -> ignored,
  // although its mean-value slope (-1) would give r < 0.
  std::vector<StencilPoint> nb(2);
  nb[0].x = {0.05, 1.0};
  nb[0].w[0] = -1.0;
  nb[1].x = {1.0, 0.0};
  nb[1].w[0] = 0.8;  // r = 0.8
  CHECK(limit_scalar(0.0, g, xk, nb, 0, 1.0) == doctest::Approx(0.8));
  CHECK(limit_scalar(0.0, g, xk, nb, 0, 2.0) == doctest::Approx(0.9));
  // Direction (0.2, 1): predicted slope ~ 0.196 >= 0.1 -> constrains (r < 0 -> phi = 0).
  nb[0].x = {0.2, 1.0};
  CHECK(limit_scalar(0.0, g, xk, nb, 0, 1.0) == 0.0);
}

TEST_CASE("property: least-squares gradients reproduce linear fields") {
  testing::Gen gen(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec2 xk{gen.uniform(-1, 1), gen.uniform(-1, 1)};
    Prim w0{};
    PrimGrad g{};
    for (int v = 0; v < kNumPrim; ++v) {
      w0[v] = gen.uniform(-2, 2);
      g[v] = {gen.uniform(-3, 3), gen.uniform(-3, 3)};
    }
    const int np = gen.integer(3, 6);
    std::vector<StencilPoint> nb(np);
    for (int p = 0; p < np; ++p) {
      const double th = 2.0 * M_PI * (p + gen.uniform(0.0, 0.5)) / np;
      const double r = gen.uniform(0.1, 1.0);
      nb[p].x = {xk[0] + r * std::cos(th), xk[1] + r * std::sin(th)};
      for (int v = 0; v < kNumPrim; ++v)
        nb[p].w[v] = w0[v] + g[v][0] * (nb[p].x[0] - xk[0]) + g[v][1] * (nb[p].x[1] - xk[1]);
    }
    const auto ls = least_squares_gradient(xk, w0, nb);
    for (int v = 0; v < kNumPrim; ++v) {
      CHECK(ls[v][0] == doctest::Approx(g[v][0]).epsilon(1e-9));
      CHECK(ls[v][1] == doctest::Approx(g[v][1]).epsilon(1e-9));
    }
    // Linear data gives r = 1 on every face, whatever the face points, so the
    // slope is never limited.
    for (auto& p : nb) p.xf = {xk[0] + gen.uniform(-0.5, 0.5), xk[1] + gen.uniform(-0.5, 0.5)};
    for (int v = 0; v < 4; ++v)
      for (double beta : {1.0, 1.5, 2.0}) CHECK(limit_scalar(w0[v], ls[v], xk, nb, v, beta) == doctest::Approx(1.0));
  }
}

TEST_CASE("least-squares normal equations oracle") {
  // Stencil {(1,0),(0,2),(-1,-1)} with values {1,2,0}, center value 0:
  // A = [[2,1],[1,5]], b = [1-0+0, 4+0] = [1, 4] -> g = (1/9)(5-4, 8-1) = (1/9, 7/9).
  std::vector<StencilPoint> nb(3);
  nb[0].x = {1.0, 0.0};
  nb[0].w[0] = 1.0;
  nb[1].x = {0.0, 2.0};
  nb[1].w[0] = 2.0;
  nb[2].x = {-1.0, -1.0};
  nb[2].w[0] = 0.0;
  const auto g = least_squares_gradient({0.0, 0.0}, Prim{}, nb);
  CHECK(g[0][0] == doctest::Approx(1.0 / 9.0));
  CHECK(g[0][1] == doctest::Approx(7.0 / 9.0));
  std::vector<StencilPoint> line(2);
  line[0].x = {1.0, 1.0};
  line[1].x = {2.0, 2.0};
  CHECK_THROWS_AS((void)least_squares_gradient({0.0, 0.0}, Prim{}, line), DegenerateStencil);
}

TEST_CASE("face gradient correction and Green-Gauss") {
  const Vec2 gbar{1.0, 2.0};
  const auto g = corrected_face_gradient(gbar, 0.0, 5.0, {0.0, 0.0}, {1.0, 0.0});
  CHECK(g[0] == doctest::Approx(5.0));
  CHECK(g[1] == doctest::Approx(2.0));
  // Green-Gauss of w = 2x - y on the unit square with exact face midpoint values.
  const std::vector<double> wf{2.0 * 0.5 - 0.0, 2.0 * 1.0 - 0.5, 2.0 * 0.5 - 1.0, 2.0 * 0.0 - 0.5};
  const std::vector<Vec2> A{{0.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}};
  const auto gg = green_gauss_gradient(wf, A, 1.0);
  CHECK(gg[0] == doctest::Approx(2.0));
  CHECK(gg[1] == doctest::Approx(-1.0));
}

TEST_CASE("primitive round trip") {
  testing::Gen gen(9);
  GasModel gas;
  for (int i = 0; i < 50; ++i) {
    const auto s = gen.state2(gas);
    const auto b = from_prim(to_prim(s, gas), gas);
    for (int v = 0; v < 4; ++v) CHECK(b.u[v] == doctest::Approx(s.u[v]).epsilon(1e-13));
    const auto w = to_prim(s, gas);
    CHECK(w[4] == doctest::Approx(w[3] / (w[0] * gas.R)));
  }
}
