#include <cmath>

#include "doctest.h"
#include "gen.hpp"
#include "mixdg/basis.hpp"

using namespace mixdg;
using doctest::Approx;

TEST_CASE("gauss_legendre small rules") {
  CHECK_THROWS_AS(gauss_legendre(0), std::invalid_argument);
  const auto q1 = gauss_legendre(1);
  CHECK(q1.nodes[0] == Approx(0.0));
  CHECK(q1.weights[0] == Approx(2.0));
  const auto q2 = gauss_legendre(2);
  CHECK(q2.nodes[0] == Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(q2.nodes[1] == Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(q2.weights[0] == Approx(1.0));
  CHECK(q2.weights[1] == Approx(1.0));
}

TEST_CASE("gauss_legendre integrates x^8 with five points") {
  const auto q = gauss_legendre(5);
  double s = 0.0;
  for (int i = 0; i < 5; ++i) s += q.weights[i] * std::pow(q.nodes[i], 8);
  CHECK(std::abs(s - 2.0 / 9.0) < 1e-14);
}

TEST_CASE("gauss_legendre invariants") {
  for (int n = 1; n <= 12; ++n) {
    const auto q = gauss_legendre(n);
    double ws = 0.0;
    for (int i = 0; i < n; ++i) {
      ws += q.weights[i];
      CHECK(q.weights[i] > 0.0);
      if (i > 0) CHECK(q.nodes[i] > q.nodes[i - 1]);
      CHECK(std::abs(q.nodes[i]) < 1.0);  // endpoints excluded
    }
    CHECK(ws == Approx(2.0).epsilon(1e-14));
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += q.weights[i] * std::pow(q.nodes[i], p);
      const double exact = (p % 2 == 1) ? 0.0 : 2.0 / (p + 1);
      CHECK(std::abs(s - exact) < 1e-13);
    }
  }
}

TEST_CASE("derivative matrix") {
  const auto q = gauss_legendre(3);
  const auto ops = lagrange_derivative_matrix(q);
  Eigen::VectorXd one = Eigen::VectorXd::Ones(3), x2(3), dx(3);
  for (int i = 0; i < 3; ++i) {
    x2[i] = q.nodes[i] * q.nodes[i];
    dx[i] = 2.0 * q.nodes[i];
  }
  CHECK((ops.D * one).norm() < 1e-14);
  CHECK((ops.D * x2 - dx).norm() < 1e-14);
}

TEST_CASE("derivative matrix summation by parts and nilpotency") {
  testing::Gen g(3);
  for (int N = 1; N <= 6; ++N) {
    const auto q = gauss_legendre(N + 1);
    const auto ops = lagrange_derivative_matrix(q);
    const auto lm = ops.eval_row(-1.0), lp = ops.eval_row(1.0);
    // Random degree <= N polynomials sampled at the nodes.
    Eigen::VectorXd f(N + 1), h(N + 1);
    std::vector<double> cf(N + 1), ch(N + 1);
    for (int k = 0; k <= N; ++k) {
      cf[k] = g.uniform(-1, 1);
      ch[k] = g.uniform(-1, 1);
    }
    for (int i = 0; i <= N; ++i) {
      f[i] = 0.0;
      h[i] = 0.0;
      for (int k = 0; k <= N; ++k) {
        f[i] += cf[k] * std::pow(q.nodes[i], k);
        h[i] += ch[k] * std::pow(q.nodes[i], k);
      }
    }
    const Eigen::VectorXd df = ops.D * f, dh = ops.D * h;
    double lhs = 0.0;
    for (int i = 0; i <= N; ++i) lhs += q.weights[i] * (df[i] * h[i] + f[i] * dh[i]);
    const double rhs = lp.dot(f) * lp.dot(h) - lm.dot(f) * lm.dot(h);
    CHECK(lhs == Approx(rhs).epsilon(1e-12).scale(1.0));
    Eigen::VectorXd r = f;
    for (int k = 0; k <= N; ++k) r = ops.D * r;
    CHECK(r.norm() <= 1e-10 * std::max(1.0, f.norm()));
  }
}

TEST_CASE("collapse maps") {
  const double c[3] = {0.3, -0.4, 0.2};
  const auto pq = collapse_map(ElementType::Quad, c);
  CHECK(pq.xi[0] == 0.3);
  CHECK(pq.xi[1] == -0.4);
  CHECK(pq.jdet == 1.0);
  const double e[2] = {0.0, -1.0};
  const auto pt = collapse_map(ElementType::Triangle, e);
  CHECK(pt.jdet == Approx(1.0));
  CHECK(pt.xi[0] == Approx(0.0));
  CHECK(pt.xi[1] == Approx(-1.0));
  CHECK_THROWS_AS((void)collapse_map(ElementType::Hexahedron, std::span<const double>(e, 2)),
                  std::invalid_argument);
}

TEST_CASE("collapsed tensor quadrature reproduces reference measures") {
  const auto q = gauss_legendre(5);
  for (auto ty : {ElementType::Quad, ElementType::Triangle, ElementType::Hexahedron,
                  ElementType::Prism, ElementType::Pyramid, ElementType::Tetrahedron}) {
    const int d = dimension_of(ty);
    double s = 0.0;
    for (int k = 0; k < (d == 3 ? 5 : 1); ++k)
      for (int j = 0; j < 5; ++j)
        for (int i = 0; i < 5; ++i) {
          const double c[3] = {q.nodes[i], q.nodes[j], q.nodes[k]};
          const auto p = collapse_map(ty, std::span<const double>(c, d));
          CHECK(p.jdet > 0.0);
          s += q.weights[i] * q.weights[j] * (d == 3 ? q.weights[k] : 1.0) * p.jdet;
        }
    CHECK(s == Approx(reference_measure(ty)).epsilon(1e-14));
  }
}

TEST_CASE("collapse jacobian matches finite differences") {
  const double a = 0.3, b = -0.2, h = 1e-6;
  const auto J = collapse_jacobian_2d(ElementType::Triangle, a, b);
  auto f = [](double aa, double bb) {
    const double c[2] = {aa, bb};
    return collapse_map(ElementType::Triangle, c).xi;
  };
  const auto pa = f(a + h, b), ma = f(a - h, b), pb = f(a, b + h), mb = f(a, b - h);
  for (int r = 0; r < 2; ++r) {
    CHECK(J(r, 0) == Approx((pa[r] - ma[r]) / (2 * h)).epsilon(1e-8));
    CHECK(J(r, 1) == Approx((pb[r] - mb[r]) / (2 * h)).epsilon(1e-8));
  }
  CHECK(J.determinant() == Approx(0.5 * (1 - b)));
  const auto back = uncollapse_2d(ElementType::Triangle, {f(a, b)[0], f(a, b)[1]});
  CHECK(back[0] == Approx(a));
  CHECK(back[1] == Approx(b));
}

TEST_CASE("modal bases are orthonormal under collapsed quadrature") {
  for (auto ty : {ElementType::Quad, ElementType::Triangle}) {
    for (int N = 0; N <= 6; ++N) {
      const auto q = gauss_legendre(N + 1);
      const auto mb = modal_vandermonde(ty, N, q);
      CHECK(mb.n_modes == (ty == ElementType::Quad ? (N + 1) * (N + 1) : (N + 1) * (N + 2) / 2));
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(mb.n_modes, mb.n_modes);
      CHECK((mb.mass - I).cwiseAbs().maxCoeff() < 1e-12);
      for (int r = 0; r < mb.V.rows(); ++r)
        CHECK(mb.V(r, 0) == Approx(1.0 / std::sqrt(reference_measure(ty))).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS((void)modal_count(ElementType::Tetrahedron, 2), std::invalid_argument);
}
