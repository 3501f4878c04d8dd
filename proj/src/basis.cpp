#include "mixdg/basis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mixdg {

Quadrature1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  Quadrature1D q;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = (n == 1) ? x : p1;
      const double pnm1 = (n == 1) ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged root for the weight.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double pn = (n == 1) ? x : p1;
    const double pnm1 = (n == 1) ? 1.0 : p0;
    dp = n * (x * pn - pnm1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    q.nodes[i] = -x;
    q.nodes[n - 1 - i] = x;
    q.weights[i] = w;
    q.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) q.nodes[n / 2] = 0.0;
  return q;
}

std::vector<double> barycentric_weights(std::span<const double> nodes) {
  const auto n = nodes.size();
  std::vector<double> w(n, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      if (k != j) w[j] /= (nodes[j] - nodes[k]);
    }
  }
  return w;
}

std::vector<double> lagrange_values(std::span<const double> nodes, double x) {
  const auto n = nodes.size();
  std::vector<double> l(n, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      if (k != j) l[j] *= (x - nodes[k]) / (nodes[j] - nodes[k]);
    }
  }
  return l;
}

std::vector<double> lagrange_derivatives(std::span<const double> nodes, double x) {
  const auto n = nodes.size();
  std::vector<double> d(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double sum = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      if (m == j) continue;
      double prod = 1.0 / (nodes[j] - nodes[m]);
      for (std::size_t k = 0; k < n; ++k) {
        if (k != j && k != m) prod *= (x - nodes[k]) / (nodes[j] - nodes[k]);
      }
      sum += prod;
    }
    d[j] = sum;
  }
  return d;
}

Eigen::RowVectorXd LagrangeOps::eval_row(double x) const {
  const auto l = lagrange_values(nodes, x);
  return Eigen::Map<const Eigen::RowVectorXd>(l.data(), static_cast<Eigen::Index>(l.size()));
}

LagrangeOps lagrange_derivative_matrix(std::span<const double> nodes) {
  LagrangeOps ops;
  ops.nodes.assign(nodes.begin(), nodes.end());
  const int n = static_cast<int>(nodes.size());
  const auto bw = barycentric_weights(nodes);
  ops.D.setZero(n, n);
  // Barycentric formula with the negative-sum trick on the diagonal.
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      ops.D(i, j) = (bw[j] / bw[i]) / (nodes[i] - nodes[j]);
      diag -= ops.D(i, j);
    }
    ops.D(i, i) = diag;
  }
  return ops;
}

LagrangeOps lagrange_derivative_matrix(const Quadrature1D& q) {
  return lagrange_derivative_matrix(std::span<const double>(q.nodes));
}

CollapsePoint collapse_map(ElementType ty, std::span<const double> c) {
  const int d = dimension_of(ty);
  if (static_cast<int>(c.size()) < d) throw std::invalid_argument("collapse_map: point dimension");
  CollapsePoint p;
  switch (ty) {
    case ElementType::Quad:
      p.xi = {c[0], c[1], 0.0};
      break;
    case ElementType::Hexahedron:
      p.xi = {c[0], c[1], c[2]};
      break;
    case ElementType::Triangle:
      p.xi = {0.5 * (1.0 + c[0]) * (1.0 - c[1]) - 1.0, c[1], 0.0};
      p.jdet = 0.5 * (1.0 - c[1]);
      break;
    case ElementType::Prism:
      p.xi = {0.5 * (1.0 + c[0]) * (1.0 - c[1]) - 1.0, c[1], c[2]};
      p.jdet = 0.5 * (1.0 - c[1]);
      break;
    case ElementType::Pyramid: {
      const double s = 0.5 * (1.0 - c[2]);
      p.xi = {c[0] * s, c[1] * s, c[2]};
      p.jdet = s * s;
      break;
    }
    case ElementType::Tetrahedron: {
      const double sc = 0.5 * (1.0 - c[2]);
      const double sb = 0.5 * (1.0 - c[1]);
      p.xi = {(1.0 + c[0]) * sb * sc - 1.0, (1.0 + c[1]) * sc - 1.0, c[2]};
      p.jdet = sb * sc * sc;
      break;
    }
  }
  return p;
}

Eigen::Matrix2d collapse_jacobian_2d(ElementType ty, double a, double b) {
  Eigen::Matrix2d J = Eigen::Matrix2d::Identity();
  if (ty == ElementType::Triangle) {
    J(0, 0) = 0.5 * (1.0 - b);
    J(0, 1) = -0.5 * (1.0 + a);
  } else if (ty != ElementType::Quad) {
    throw std::invalid_argument("collapse_jacobian_2d: not a 2D type");
  }
  return J;
}

Vec2 uncollapse_2d(ElementType ty, const Vec2& xi) {
  if (ty == ElementType::Quad) return xi;
  if (ty != ElementType::Triangle) throw std::invalid_argument("uncollapse_2d: not a 2D type");
  const double den = 1.0 - xi[1];
  if (std::abs(den) < 1e-15) return {-1.0, 1.0};
  return {2.0 * (1.0 + xi[0]) / den - 1.0, xi[1]};
}

double jacobi_normalized(int n, double alpha, double beta, double x) {
  // Three-term recurrence for the classical polynomial, then normalization.
  double p0 = 1.0;
  double p = p0;
  if (n >= 1) {
    double p1 = 0.5 * (alpha - beta + (alpha + beta + 2.0) * x);
    double pm = p0;
    p = p1;
    for (int k = 2; k <= n; ++k) {
      const double ab = alpha + beta;
      const double a1 = 2.0 * k * (k + ab) * (2.0 * k + ab - 2.0);
      const double a2 = (2.0 * k + ab - 1.0) * (alpha * alpha - beta * beta);
      const double a3 = (2.0 * k + ab - 2.0) * (2.0 * k + ab - 1.0) * (2.0 * k + ab);
      const double a4 = 2.0 * (k + alpha - 1.0) * (k + beta - 1.0) * (2.0 * k + ab);
      const double pn = ((a2 + a3 * x) * p - a4 * pm) / a1;
      pm = p;
      p = pn;
    }
  }
  const double ab = alpha + beta;
  const double logh = (ab + 1.0) * std::log(2.0) - std::log(2.0 * n + ab + 1.0) +
                      std::lgamma(n + alpha + 1.0) + std::lgamma(n + beta + 1.0) -
                      std::lgamma(n + ab + 1.0) - std::lgamma(n + 1.0);
  return p / std::exp(0.5 * logh);
}

int modal_count(ElementType ty, int N) {
  if (N < 0) throw std::invalid_argument("modal_count: negative degree");
  switch (ty) {
    case ElementType::Quad: return (N + 1) * (N + 1);
    case ElementType::Triangle: return (N + 1) * (N + 2) / 2;
    default: throw std::invalid_argument("modal basis: only quad and triangle are supported");
  }
}

Eigen::RowVectorXd modal_row(ElementType ty, int N, const Vec2& xi) {
  Eigen::RowVectorXd row(modal_count(ty, N));
  int m = 0;
  if (ty == ElementType::Quad) {
    for (int q = 0; q <= N; ++q) {
      const double pq = jacobi_normalized(q, 0.0, 0.0, xi[1]);
      for (int p = 0; p <= N; ++p) row[m++] = jacobi_normalized(p, 0.0, 0.0, xi[0]) * pq;
    }
    return row;
  }
  const auto ab = uncollapse_2d(ty, xi);
  for (int p = 0; p <= N; ++p) {
    const double pa = jacobi_normalized(p, 0.0, 0.0, ab[0]) * std::pow(1.0 - ab[1], p);
    for (int q = 0; q <= N - p; ++q) {
      row[m++] = std::numbers::sqrt2 * pa * jacobi_normalized(q, 2.0 * p + 1.0, 0.0, ab[1]);
    }
  }
  return row;
}

std::vector<int> modal_degrees(ElementType ty, int N) {
  std::vector<int> deg;
  if (ty == ElementType::Quad) {
    for (int q = 0; q <= N; ++q)
      for (int p = 0; p <= N; ++p) deg.push_back(std::max(p, q));
  } else {
    for (int p = 0; p <= N; ++p)
      for (int q = 0; q <= N - p; ++q) deg.push_back(p + q);
  }
  return deg;
}

ModalBasis modal_vandermonde(ElementType ty, int N, const Quadrature1D& q) {
  ModalBasis mb;
  mb.type = ty;
  mb.N = N;
  mb.n_modes = modal_count(ty, N);
  const int n = q.size();
  mb.V.resize(n * n, mb.n_modes);
  mb.wjhat.resize(n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double c[2] = {q.nodes[i], q.nodes[j]};
      const auto cp = collapse_map(ty, c);
      const int row = i + n * j;
      mb.V.row(row) = modal_row(ty, N, {cp.xi[0], cp.xi[1]});
      mb.wjhat[row] = q.weights[i] * q.weights[j] * cp.jdet;
    }
  }
  mb.mass = mb.V.transpose() * mb.wjhat.asDiagonal() * mb.V;
  return mb;
}

}  // namespace mixdg
