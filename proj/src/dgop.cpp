#include "mixdg/dgop.hpp"

namespace mixdg {

DGReference make_dg_reference(int N) {
  DGReference ref;
  ref.N = N;
  ref.n = N + 1;
  ref.q = gauss_legendre(ref.n);
  ref.D = lagrange_derivative_matrix(ref.q).D;
  ref.Dhat.resize(ref.n, ref.n);
  for (int i = 0; i < ref.n; ++i)
    for (int k = 0; k < ref.n; ++k) ref.Dhat(i, k) = ref.q.weights[k] * ref.D(k, i) / ref.q.weights[i];
  ref.lm = lagrange_values(ref.q.nodes, -1.0);
  ref.lp = lagrange_values(ref.q.nodes, 1.0);
  return ref;
}

void dg_volume(const DGReference& ref, int nv, const double* F1, const double* F2, double* r) {
  const int n = ref.n;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double* out = r + (i + n * j) * nv;
      for (int k = 0; k < n; ++k) {
        const double da = ref.Dhat(i, k);
        const double db = ref.Dhat(j, k);
        const double* fa = F1 + (k + n * j) * nv;
        const double* fb = F2 + (i + n * k) * nv;
        for (int v = 0; v < nv; ++v) out[v] += da * fa[v] + db * fb[v];
      }
    }
}

void dg_face_trace(const DGReference& ref, int nv, int face, const double* u, double* trace) {
  const int n = ref.n;
  const auto& l = (face == 0 || face == 3) ? ref.lm : ref.lp;
  for (int t = 0; t < n * nv; ++t) trace[t] = 0.0;
  for (int t = 0; t < n; ++t)
    for (int k = 0; k < n; ++k) {
      // Faces 0/2 run along a (node index t) and interpolate in b; 1/3 the reverse.
      const int node = (face == 0 || face == 2) ? t + n * k : k + n * t;
      for (int v = 0; v < nv; ++v) trace[t * nv + v] += l[k] * u[node * nv + v];
    }
}

void dg_surface(const DGReference& ref, int nv, int face, const double* fhat, double* r) {
  const int n = ref.n;
  const auto& l = (face == 0 || face == 3) ? ref.lm : ref.lp;
  for (int t = 0; t < n; ++t)
    for (int k = 0; k < n; ++k) {
      const int node = (face == 0 || face == 2) ? t + n * k : k + n * t;
      const double c = l[k] / ref.q.weights[k];
      for (int v = 0; v < nv; ++v) r[node * nv + v] -= c * fhat[t * nv + v];
    }
}

}  // namespace mixdg
