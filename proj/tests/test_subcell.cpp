#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "gen.hpp"
#include "mixdg/mesh.hpp"
#include "mixdg/subcell.hpp"

using namespace mixdg;

namespace {

const ElementType kAll[] = {ElementType::Quad,    ElementType::Triangle, ElementType::Hexahedron,
                            ElementType::Prism,   ElementType::Pyramid,  ElementType::Tetrahedron};

/// Curved hybrid elements from a deformed structured mesh with a given seed.
std::pair<Mesh, std::vector<ElementGeometry>> curved_mesh(int N, std::uint64_t seed, int ngeo = 3) {
  StructuredSpec spec;
  spec.n = {4, 4, 1};
  spec.split = SplitMode::Tri;
  spec.split_fraction = 0.5;
  spec.seed = seed;
  spec.ngeo = ngeo;
  auto mesh = generate_structured(spec);
  deform_sinusoidal(mesh, DeformationSpec{0.15, 1.0, 2});
  auto geo = build_geometry(mesh, N, gauss_legendre(N + 1));
  return {std::move(mesh), std::move(geo)};
}

}  // namespace

TEST_CASE("subcell counts follow the closed forms") {
  // Regression table: quad/tri m^2, hex/prism/tet m^3, pyramid sum_{l<=m} (2l-1)^2.
  struct Row {
    ElementType ty;
    int m;
    int count;
  };
  const Row rows[] = {{ElementType::Quad, 3, 9},         {ElementType::Triangle, 3, 9},
                      {ElementType::Hexahedron, 2, 8},   {ElementType::Prism, 2, 8},
                      {ElementType::Pyramid, 1, 1},      {ElementType::Pyramid, 2, 10},
                      {ElementType::Pyramid, 3, 35},     {ElementType::Tetrahedron, 2, 8},
                      {ElementType::Tetrahedron, 3, 27}, {ElementType::Prism, 5, 125}};
  for (const auto& r : rows) {
    CHECK(expected_subcell_count(r.ty, r.m) == r.count);
    CHECK(subdivide(r.ty, r.m).n_cells() == r.count);
  }
  CHECK_THROWS_AS((void)subdivide(ElementType::Quad, 0), std::invalid_argument);
}

TEST_CASE("single quad subcell is the parent element") {
  const auto d = subdivide(ElementType::Quad, 1);
  REQUIRE(d.n_cells() == 1);
  CHECK(d.volumes[0] == doctest::Approx(4.0));
  CHECK(d.inner.empty());
  CHECK(d.outer.size() == 4);
}

TEST_CASE("triangle with three subdivisions") {
  const auto d = subdivide(ElementType::Triangle, 3);
  CHECK(d.n_cells() == 9);
  double a = 0.0;
  for (double v : d.volumes) a += v;
  CHECK(a == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(d.outer.size() == 9);  // three per non-collapsed parent face
  for (const auto& f : d.outer) CHECK(f.parent_face != 2);
}

TEST_CASE("pyramid with two subdivisions tiles the reference pyramid") {
  const auto d = subdivide(ElementType::Pyramid, 2);
  const auto r = audit_decomposition(d);
  CHECK_MESSAGE(r.ok, r.message);
  CHECK(std::abs(r.volume_sum - 8.0 / 3.0) < 1e-13);
  int pyr = 0, tet = 0;
  for (const auto& c : d.cells) (c.kind == CellKind::Pyramid ? pyr : tet)++;
  CHECK(pyr == 6);
  CHECK(tet == 4);
}

TEST_CASE("subcell geometry suite over all element types") {
  for (auto ty : kAll)
    for (int m : {2, 3, 5, 9}) {
      CAPTURE(element_tag(ty));
      CAPTURE(m);
      const auto d = subdivide(ty, m);
      const auto r = audit_decomposition(d);
      CHECK_MESSAGE(r.ok, r.message);
      CHECK(std::abs(r.volume_sum - reference_measure(ty)) <= 1e-13);
      CHECK(r.min_volume > 0.0);
    }
}

TEST_CASE("audit detects a broken decomposition") {
  auto d = subdivide(ElementType::Hexahedron, 2);
  d.cells.pop_back();
  d.volumes.pop_back();
  CHECK_FALSE(audit_decomposition(d).ok);
}

TEST_CASE("2D outer faces are indexed by position along the parent face") {
  for (auto ty : {ElementType::Quad, ElementType::Triangle})
    for (int m : {1, 2, 4}) {
      const auto d = subdivide(ty, m);
      std::array<std::vector<int>, 4> hits;
      for (auto& h : hits) h.assign(m, 0);
      for (const auto& f : d.outer) ++hits[f.parent_face][f.sub_index];
      for (int pf = 0; pf < 4; ++pf)
        for (int k = 0; k < m; ++k)
          CHECK(hits[pf][k] == ((ty == ElementType::Triangle && pf == 2) ? 0 : 1));
    }
}

TEST_CASE("decomposition vtk export") {
  std::ostringstream os;
  write_decomposition_vtk(os, subdivide(ElementType::Pyramid, 2));
  const auto s = os.str();
  CHECK(s.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
  CHECK(s.find("CELL_TYPES 10") != std::string::npos);
}

TEST_CASE("volume transfer keeps constants and round-trips the modal space") {
  for (auto ty : {ElementType::Quad, ElementType::Triangle})
    for (int N = 1; N <= 4; ++N)
      for (int m : {N + 1, 2 * N + 1}) {
        CAPTURE(N);
        CAPTURE(m);
        const auto d = subdivide(ty, m);
        const auto vt = build_volume_transfer(ty, N, m, d);
        const Eigen::VectorXd one = Eigen::VectorXd::Ones(vt.P.cols());
        CHECK((vt.P * one - Eigen::VectorXd::Ones(vt.P.rows())).cwiseAbs().maxCoeff() < 1e-13);
        const Eigen::MatrixXd rt = vt.R * vt.P * vt.V;
        CHECK((rt - vt.V).cwiseAbs().maxCoeff() < 1e-11);
      }
}

TEST_CASE("surface transfer identities") {
  for (int N = 1; N <= 4; ++N)
    for (int m : {N + 1, 2 * N + 1}) {
      const auto st = build_surface_transfer(N, m);
      const int n = N + 1;
      const auto q = gauss_legendre(n);
      CHECK((st.P * Eigen::VectorXd::Ones(n) - Eigen::VectorXd::Ones(m)).cwiseAbs().maxCoeff() < 1e-13);
      for (int p = 0; p <= N; ++p) {
        Eigen::VectorXd f(n);
        for (int i = 0; i < n; ++i) f[i] = std::pow(q.nodes[i], p);
        CHECK((st.R * st.P * f - f).cwiseAbs().maxCoeff() < 1e-11);
      }
    }
}

TEST_CASE("transfer operator suite on random curved elements") {
  // Conservation: sum_k J_FV^(k) u_k |E_k| equals the quadrature integral of J u
  // (both directions); round-trip exactness for degree <= N fields.
  for (auto ty : {ElementType::Quad, ElementType::Triangle})
    for (int N = 1; N <= 4; ++N) {
      auto [mesh, geo] = curved_mesh(N, 100 + N);
      testing::Gen gen(7 * N + (ty == ElementType::Triangle));
      for (int m : {N + 1, 2 * N + 1}) {
        const auto d = subdivide(ty, m);
        const auto vt = build_volume_transfer(ty, N, m, d);
        const auto st = build_surface_transfer(N, m);
        int tested = 0;
        for (int e = 0; e < mesh.n_elements() && tested < 20; ++e) {
          if (mesh.elements[e].type != ty) continue;
          ++tested;
          const auto& g = geo[e];
          const auto sg = build_subcell_geometry(d, vt, g);
          const int nq = static_cast<int>(g.jm.size());
          Eigen::VectorXd u(nq), J(nq);
          for (int i = 0; i < nq; ++i) {
            u[i] = gen.uniform(-1.0, 2.0);
            J[i] = g.jm[i];
          }
          const Eigen::VectorXd Ju = J.cwiseProduct(u);
          const double exact = vt.wjhat.dot(Ju);
          const Eigen::VectorXd means = (vt.P * Ju).cwiseQuotient(vt.P * J);
          double fv = 0.0;
          for (int k = 0; k < d.n_cells(); ++k) fv += sg.jfv[k] * means[k] * d.volumes[k];
          CHECK(std::abs(fv - exact) < 1e-12 * std::max(1.0, std::abs(exact)));
          // Reconstruction conserves the FV integral.
          Eigen::VectorXd jfu(d.n_cells());
          for (int k = 0; k < d.n_cells(); ++k) jfu[k] = sg.jfv[k] * means[k];
          CHECK(std::abs(vt.wjhat.dot(vt.R * jfu) - fv) < 1e-12 * std::max(1.0, std::abs(fv)));
          // Round trip of a random modal polynomial.
          Eigen::VectorXd c(vt.V.cols());
          for (int p = 0; p < c.size(); ++p) c[p] = gen.uniform(-1.0, 1.0);
          const Eigen::VectorXd poly = vt.V * c;
          CHECK((vt.R * vt.P * poly - poly).cwiseAbs().maxCoeff() < 1e-11);
          // Surface conservation against the face surface element.
          for (int pf = 0; pf < 4; ++pf) {
            if (g.collapsed[pf]) continue;
            Eigen::VectorXd t(N + 1), js(N + 1);
            for (int i = 0; i <= N; ++i) {
              t[i] = gen.uniform(-1.0, 1.0);
              js[i] = g.fsurf[pf][i];
            }
            const Eigen::VectorXd jt = js.cwiseProduct(t);
            const double fint = st.weights.dot(jt);
            const Eigen::VectorXd fm = (st.P * jt).cwiseQuotient(st.P * js);
            const Eigen::VectorXd jfs = st.P * js;
            double sum = 0.0;
            for (int k = 0; k < m; ++k) sum += jfs[k] * fm[k] * st.sub_length;
            CHECK(std::abs(sum - fint) < 1e-12 * std::max(1.0, std::abs(fint)));
            CHECK(std::abs(st.weights.dot(st.R * (jfs.cwiseProduct(fm))) - fint) <
                  1e-12 * std::max(1.0, std::abs(fint)));
          }
        }
        CHECK(tested >= 1);
      }
    }
}

TEST_CASE("subcell geometry is closed and matches the element") {
  for (int N : {2, 4}) {
    auto [mesh, geo] = curved_mesh(N, 5);
    const auto q = gauss_legendre(N + 1);
    for (auto ty : {ElementType::Quad, ElementType::Triangle}) {
      const int m = 2 * N + 1;
      const auto d = subdivide(ty, m);
      const auto vt = build_volume_transfer(ty, N, m, d);
      for (int e = 0; e < mesh.n_elements(); ++e) {
        if (mesh.elements[e].type != ty) continue;
        const auto& g = geo[e];
        const auto sg = build_subcell_geometry(d, vt, g);
        double area = 0.0;
        for (int k = 0; k < d.n_cells(); ++k) {
          CHECK(sg.jfv[k] > 0.0);
          area += sg.area[k];
          Vec2 s{0.0, 0.0};
          for (auto [f, sign] : sg.cell_inner[k])
            for (int c = 0; c < 2; ++c) s[c] += sign * sg.inner[f].n_area[c];
          for (auto [pf, sub] : sg.cell_outer[k])
            for (int c = 0; c < 2; ++c) s[c] += sg.outer_area[pf][sub][c];
          CHECK(std::hypot(s[0], s[1]) < 1e-13);
        }
        CHECK(area == doctest::Approx(g.volume).epsilon(1e-12));
        // Outer subface normals integrate the face metric.
        for (int pf = 0; pf < 4; ++pf) {
          if (g.collapsed[pf]) continue;
          Vec2 dg{0.0, 0.0}, fv{0.0, 0.0};
          for (int i = 0; i <= N; ++i)
            for (int c = 0; c < 2; ++c) dg[c] += q.weights[i] * g.fmetric[pf][i][c];
          for (const auto& a : sg.outer_area[pf])
            for (int c = 0; c < 2; ++c) fv[c] += a[c];
          CHECK(std::hypot(dg[0] - fv[0], dg[1] - fv[1]) < 1e-12);
        }
      }
    }
  }
}
