#include "mixdg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mixdg {

namespace {

constexpr int NV = 4;  // conservative variables in 2D

State<2> state_at(const double* p) {
  State<2> s;
  for (int v = 0; v < NV; ++v) s.u[v] = p[v];
  return s;
}

void store(double* p, const State<2>& s) {
  for (int v = 0; v < NV; ++v) p[v] = s.u[v];
}

GradientState<2> grad_state(const double* g6) {
  GradientState<2> g;
  for (int d = 0; d < 2; ++d)
    for (int c = 0; c < 3; ++c) g.d[d][c] = g6[3 * d + c];
  return g;
}

Cons<2> contract(const Flux<2>& f, const Vec2& n) {
  Cons<2> r{};
  for (int v = 0; v < NV; ++v) r[v] = f[0][v] * n[0] + f[1][v] * n[1];
  return r;
}

/// Velocity components and temperature, the variables lifted by BR1.
std::array<double, 3> lift_vars(const State<2>& s, const GasModel& gas) {
  const double p = (gas.gamma - 1.0) * (s.rhoe() - 0.5 * s.mom_sq() / s.rho());
  return {s.mom(0) / s.rho(), s.mom(1) / s.rho(), p / (s.rho() * gas.R)};
}

constexpr int kLiftPrim[3] = {1, 2, 4};  // (u, v, T) inside Prim

double nu_prime(const GasModel& gas, double rho) {
  return std::max(4.0 * gas.mu / (3.0 * rho), gas.gamma * gas.mu / (gas.Pr * rho));
}

bool point_in_cell(const SubcellDecomposition& d, const Subcell& c, const Vec2& xi) {
  const auto& n = c.nodes;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto& a = d.nodes[n[i]];
    const auto& b = d.nodes[n[(i + 1) % n.size()]];
    const double cr = (b[0] - a[0]) * (xi[1] - a[1]) - (b[1] - a[1]) * (xi[0] - a[0]);
    if (cr < -1e-12) return false;
  }
  return true;
}

}  // namespace

void SolverConfig::validate(const Mesh& mesh) const {
  if (N < 1) throw ConfigError("N must be >= 1");
  const int m = fv_n == 0 ? 2 * N + 1 : fv_n;
  if (m < N + 1 || m > 2 * N + 1)
    throw ConfigError("fv_subdiv must lie in [N+1, 2N+1] (got " + std::to_string(m) + ")");
  if (!(beta >= 1.0 && beta <= 2.0)) throw ConfigError("limiter_beta must lie in [1,2]");
  if (!(cfl > 0.0)) throw ConfigError("cfl must be positive");
  gas.validate();
  indicator.validate();
  for (const auto& f : mesh.faces) {
    if (!f.boundary()) continue;
    if (f.bc < 0 || f.bc >= static_cast<int>(bcs.size()))
      throw ConfigError("no boundary condition for tag " +
                        (f.bc >= 0 && f.bc < static_cast<int>(mesh.bc_names.size()) ? mesh.bc_names[f.bc]
                                                                                    : std::to_string(f.bc)));
    const auto& bc = bcs[f.bc];
    if (bc.kind == BoundaryCondition::Kind::Dirichlet && !bc.state)
      throw ConfigError("dirichlet boundary without state on tag " + mesh.bc_names[f.bc]);
  }
}

Solver::Solver(Mesh mesh, SolverConfig cfg) : mesh_(std::move(mesh)), cfg_(std::move(cfg)) {
  if (mesh_.dim != 2) throw ConfigError("the flow solver requires a 2D mesh");
  cfg_.validate(mesh_);
  if (cfg_.fv_n == 0) cfg_.fv_n = 2 * cfg_.N + 1;
  ref_ = make_dg_reference(cfg_.N);
  m_ = cfg_.fv_n;
  const int n = ref_.n;
  stride_ = NV * std::max(n * n, m_ * m_);
  geo_ = build_geometry(mesh_, cfg_.N, ref_.q);
  dec_[0] = subdivide(ElementType::Quad, m_);
  dec_[1] = subdivide(ElementType::Triangle, m_);
  vt_[0] = build_volume_transfer(ElementType::Quad, cfg_.N, m_, dec_[0]);
  vt_[1] = build_volume_transfer(ElementType::Triangle, cfg_.N, m_, dec_[1]);
  st_ = build_surface_transfer(cfg_.N, m_);
  const int ne = mesh_.n_elements();
  sub_.reserve(ne);
  for (int e = 0; e < ne; ++e) {
    const int ti = tidx(geo_[e].type);
    sub_.push_back(build_subcell_geometry(dec_[ti], vt_[ti], geo_[e]));
  }
  link_.assign(ne, {});
  for (int fi = 0; fi < static_cast<int>(mesh_.faces.size()); ++fi) {
    const auto& f = mesh_.faces[fi];
    const Vec2 sh{f.shift[0], f.shift[1]};
    link_[f.elem_l][f.face_l] = {f.elem_r, f.face_r, f.flip, f.bc, fi, true, sh};
    if (!f.boundary()) link_[f.elem_r][f.face_r] = {f.elem_l, f.face_l, f.flip, f.bc, fi, false, {-sh[0], -sh[1]}};
  }
  u_.assign(static_cast<std::size_t>(ne) * stride_, 0.0);
  regime_.assign(ne, Regime::DG);
  ind_.assign(ne, 0.0);
  scratch_.resize(ne);
  for (int e = 0; e < ne; ++e) {
    auto& s = scratch_[e];
    for (int f = 0; f < 4; ++f) {
      s.tr_u[f].assign(n * NV, 0.0);
      s.tr_g[f].assign(n * 6, 0.0);
      s.pm_u[f].assign(m_ * NV, 0.0);
      s.pm_g[f].assign(m_ * 6, 0.0);
      s.flux[f].assign(std::max(n, m_) * NV, 0.0);
      s.rec_outer[f].assign(m_, Cons<2>{});
    }
    s.grad.assign(n * n * 6, 0.0);
    const int nk = dec_[tidx(geo_[e].type)].n_cells();
    s.wmean.assign(nk, Prim{});
    s.grad_ls.assign(nk, PrimGrad{});
    s.grad_cell.assign(nk, {});
    s.rec_inner.assign(sub_[e].inner.size(), {});
  }
}

const SubcellDecomposition& Solver::decomposition(ElementType ty) const { return dec_[tidx(ty)]; }
const VolumeTransfer& Solver::volume_transfer(ElementType ty) const { return vt_[tidx(ty)]; }
int Solver::n_subcells(int e) const { return dec_[tidx(geo_[e].type)].n_cells(); }

int Solver::count(Regime r) const noexcept {
  return static_cast<int>(std::count(regime_.begin(), regime_.end(), r));
}

State<2> Solver::dg_node(int e, int q) const { return state_at(&u_[static_cast<std::size_t>(e) * stride_ + q * NV]); }
State<2> Solver::fv_mean(int e, int k) const { return state_at(&u_[static_cast<std::size_t>(e) * stride_ + k * NV]); }

// ---- DG <-> FV --------------------------------------------------------------------

void Solver::project_to_fv(int e, const double* nodal, double* means) const {
  const auto& g = geo_[e];
  const auto& t = vt(e);
  const auto& sg = sub_[e];
  const int nq = n_nodes();
  const int nk = n_subcells(e);
  Eigen::MatrixXd ju(nq, NV);
  for (int q = 0; q < nq; ++q)
    for (int v = 0; v < NV; ++v) ju(q, v) = g.jm[q] * nodal[q * NV + v];
  const Eigen::MatrixXd pm = t.P * ju;
  std::vector<State<2>> cells(nk);
  State<2> avg;
  double area = 0.0;
  for (int k = 0; k < nk; ++k) {
    for (int v = 0; v < NV; ++v) cells[k].u[v] = pm(k, v) / sg.jfv[k];
    for (int v = 0; v < NV; ++v) avg.u[v] += sg.area[k] * cells[k].u[v];
    area += sg.area[k];
  }
  for (int v = 0; v < NV; ++v) avg.u[v] /= area;
  bool ok = true;
  for (const auto& c : cells) ok = ok && is_admissible(c, cfg_.gas);
  if (!ok) {
    // Scale fluctuations about the element mean until every subcell is admissible;
    // the admissible set is convex, so the mean stays fixed.
    if (!is_admissible(avg, cfg_.gas)) throw AdmissibilityError("inadmissible element mean", e);
    double theta = 1.0;
    for (const auto& c : cells) {
      if (is_admissible(c, cfg_.gas)) continue;
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        State<2> s;
        for (int v = 0; v < NV; ++v) s.u[v] = avg.u[v] + mid * (c.u[v] - avg.u[v]);
        (is_admissible(s, cfg_.gas) ? lo : hi) = mid;
      }
      theta = std::min(theta, lo);
    }
    for (auto& c : cells)
      for (int v = 0; v < NV; ++v) c.u[v] = avg.u[v] + theta * (c.u[v] - avg.u[v]);
  }
  for (int k = 0; k < nk; ++k) store(means + k * NV, cells[k]);
}

void Solver::reconstruct_to_dg(int e, const double* means, double* nodal) const {
  const auto& g = geo_[e];
  const auto& t = vt(e);
  const auto& sg = sub_[e];
  const int nk = n_subcells(e);
  Eigen::MatrixXd jm(nk, NV);
  for (int k = 0; k < nk; ++k)
    for (int v = 0; v < NV; ++v) jm(k, v) = sg.jfv[k] * means[k * NV + v];
  const Eigen::MatrixXd ju = t.R * jm;
  for (int q = 0; q < n_nodes(); ++q)
    for (int v = 0; v < NV; ++v) nodal[q * NV + v] = ju(q, v) / g.jm[q];
}

void Solver::switch_to_fv(int e) {
  if (regime_[e] == Regime::FV) return;
  std::vector<double> tmp(stride_, 0.0);
  double* base = &u_[static_cast<std::size_t>(e) * stride_];
  project_to_fv(e, base, tmp.data());
  std::copy(tmp.begin(), tmp.end(), base);
  regime_[e] = Regime::FV;
}

void Solver::switch_to_dg(int e) {
  if (regime_[e] == Regime::DG) return;
  std::vector<double> tmp(stride_, 0.0);
  double* base = &u_[static_cast<std::size_t>(e) * stride_];
  reconstruct_to_dg(e, base, tmp.data());
  std::copy(tmp.begin(), tmp.end(), base);
  regime_[e] = Regime::DG;
}

std::vector<State<2>> Solver::dg_view(int e) const {
  const int nq = n_nodes();
  std::vector<double> nodal(nq * NV);
  const double* base = &u_[static_cast<std::size_t>(e) * stride_];
  if (regime_[e] == Regime::DG)
    std::copy(base, base + nq * NV, nodal.begin());
  else
    reconstruct_to_dg(e, base, nodal.data());
  std::vector<State<2>> out(nq);
  for (int q = 0; q < nq; ++q) out[q] = state_at(&nodal[q * NV]);
  return out;
}

void Solver::initialize(const std::function<State<2>(const Vec2&)>& f) {
  const int nq = n_nodes();
  std::vector<double> nodal(nq * NV);
  for (int e = 0; e < n_elements(); ++e) {
    for (int q = 0; q < nq; ++q) store(&nodal[q * NV], f(geo_[e].x[q]));
    double* base = &u_[static_cast<std::size_t>(e) * stride_];
    std::fill(base, base + stride_, 0.0);
    if (regime_[e] == Regime::DG)
      std::copy(nodal.begin(), nodal.end(), base);
    else
      project_to_fv(e, nodal.data(), base);
  }
}

void Solver::set_subcell_means(int e, const std::vector<State<2>>& means) {
  if (static_cast<int>(means.size()) != n_subcells(e)) throw std::invalid_argument("set_subcell_means: size");
  double* base = &u_[static_cast<std::size_t>(e) * stride_];
  std::fill(base, base + stride_, 0.0);
  for (int k = 0; k < n_subcells(e); ++k) store(base + k * NV, means[k]);
  regime_[e] = Regime::FV;
}

void Solver::apply_initial_regimes() {
  switch (cfg_.indicator.kind) {
    case IndicatorKind::ForceDG:
      for (int e = 0; e < n_elements(); ++e) switch_to_dg(e);
      break;
    case IndicatorKind::ForceFV:
      for (int e = 0; e < n_elements(); ++e) switch_to_fv(e);
      break;
    case IndicatorKind::Checkerboard:
      for (int e = 0; e < n_elements(); ++e) {
        if (checkerboard(mesh_.elements[e]) == Regime::FV)
          switch_to_fv(e);
        else
          switch_to_dg(e);
      }
      break;
    case IndicatorKind::Jump:
      update_regimes();
      break;
  }
}

// ---- indicator ------------------------------------------------------------------

void Solver::update_regimes(StepReport* rep) {
  if (cfg_.indicator.kind != IndicatorKind::Jump) return;
  const int ne = n_elements();
  const int n = ref_.n, nq = n_nodes();
  const auto& gas = cfg_.gas;
  const auto& ic = cfg_.indicator;
  std::vector<std::vector<State<2>>> view(ne);
  std::vector<std::array<std::vector<double>, 4>> traces(ne);
  for (int e = 0; e < ne; ++e) {
    view[e] = dg_view(e);
    std::vector<double> nodal(nq * NV);
    for (int q = 0; q < nq; ++q) store(&nodal[q * NV], view[e][q]);
    for (int f = 0; f < 4; ++f) {
      if (geo_[e].collapsed[f]) continue;
      traces[e][f].resize(n * NV);
      dg_face_trace(ref_, NV, f, nodal.data(), traces[e][f].data());
    }
  }
  std::vector<Regime> next(regime_);
  std::vector<double> wj(nq), vals(nq);
  for (int e = 0; e < ne; ++e) {
    const auto& g = geo_[e];
    double vol = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        wj[i + n * j] = ref_.q.weights[i] * ref_.q.weights[j] * g.detj[i + n * j];
        vol += wj[i + n * j];
      }
    // Own and neighbour face states per face node.
    std::array<std::vector<State<2>>, 4> own, nb;
    for (int f = 0; f < 4; ++f) {
      if (g.collapsed[f]) continue;
      own[f].resize(n);
      nb[f].resize(n);
      const auto& L = link_[e][f];
      for (int t = 0; t < n; ++t) {
        own[f][t] = state_at(&traces[e][f][t * NV]);
        if (L.elem < 0) {
          nb[f][t] = own[f][t];
        } else {
          const int t2 = L.flip ? n - 1 - t : t;
          if (regime_[L.elem] == Regime::DG) {
            nb[f][t] = state_at(&traces[L.elem][L.face][t2 * NV]);
          } else {
            const double s = ref_.q.nodes[t2];
            const int k2 = std::clamp(static_cast<int>(std::floor(0.5 * (s + 1.0) * m_)), 0, m_ - 1);
            nb[f][t] = fv_mean(L.elem, sub_[L.elem].outer_cell[L.face][k2]);
          }
        }
      }
    }
    // Sanity: nodes and the distance-to-mean face values of density and pressure.
    bool sane = sanity_check(view[e], gas, ic.eps);
    auto chosen = [&](IndicatorVar var, int f, int t, double mean) {
      return distance_to_mean(indicator_value(var, own[f][t], gas), indicator_value(var, nb[f][t], gas), mean);
    };
    if (sane) {
      for (auto var : {IndicatorVar::Density, IndicatorVar::Pressure}) {
        double mean = 0.0;
        for (int q = 0; q < nq; ++q) mean += indicator_value(var, view[e][q], gas) * wj[q];
        mean /= vol;
        for (int f = 0; f < 4 && sane; ++f)
          for (int t = 0; t < static_cast<int>(own[f].size()); ++t)
            if (!(chosen(var, f, t, mean) > ic.eps)) sane = false;
      }
    }
    double I = ic.big;
    if (sane) {
      I = 0.0;
      for (auto var : ic.vars) {
        double mean = 0.0;
        for (int q = 0; q < nq; ++q) {
          vals[q] = indicator_value(var, view[e][q], gas);
          mean += vals[q] * wj[q];
        }
        mean /= vol;
        std::array<std::vector<double>, 4> fv;
        for (int f = 0; f < 4; ++f) {
          if (own[f].empty()) continue;
          fv[f].resize(n);
          for (int t = 0; t < n; ++t) fv[f][t] = chosen(var, f, t, mean);
        }
        I = std::max(I, jump_indicator(n, vals, fv, wj, ic.eps));
      }
    }
    ind_[e] = I;
    next[e] = update_regime(regime_[e], I, ic);
  }
  for (int e = 0; e < ne; ++e) {
    if (next[e] == regime_[e]) continue;
    if (next[e] == Regime::FV) {
      switch_to_fv(e);
      if (rep) ++rep->switched_to_fv;
    } else {
      // The DG view was already checked by the sanity part of the indicator.
      switch_to_dg(e);
      if (rep) ++rep->switched_to_dg;
    }
  }
}

// ---- boundary conditions ------------------------------------------------------------

State<2> Solver::ghost(int bc, const State<2>& in, const Vec2& x, double t) const {
  const auto& b = cfg_.bcs[bc];
  if (b.kind == BoundaryCondition::Kind::Dirichlet) return b.state(x, t);
  const double p = pressure(in, cfg_.gas);
  const auto v = velocity(in);
  return from_primitive<2>(in.rho(), {2.0 * b.wall_velocity[0] - v[0], 2.0 * b.wall_velocity[1] - v[1]}, p,
                           cfg_.gas);
}

std::array<double, 3> Solver::ghost_lift_value(int bc, const State<2>& in, const Vec2& x, double t) const {
  const auto& b = cfg_.bcs[bc];
  if (b.kind == BoundaryCondition::Kind::Dirichlet) return lift_vars(b.state(x, t), cfg_.gas);
  const auto w = lift_vars(in, cfg_.gas);
  return {b.wall_velocity[0], b.wall_velocity[1], w[2]};
}

Cons<2> Solver::boundary_viscous(int bc, const State<2>& in, const GradientState<2>& g, const Vec2& n,
                                 const Vec2& x, double t) const {
  const auto& b = cfg_.bcs[bc];
  if (b.kind == BoundaryCondition::Kind::Dirichlet) return contract(viscous_flux<2>(b.state(x, t), g, cfg_.gas), n);
  // Adiabatic wall: wall velocity, no heat flux.
  const State<2> w = from_primitive<2>(in.rho(), b.wall_velocity, pressure(in, cfg_.gas), cfg_.gas);
  GradientState<2> ga = g;
  ga.d[0][2] = 0.0;
  ga.d[1][2] = 0.0;
  return contract(viscous_flux<2>(w, ga, cfg_.gas), n);
}

// ---- residual phases -------------------------------------------------------------------

void Solver::phase_traces(int e, const std::vector<double>& u) {
  auto& s = scratch_[e];
  const double* base = &u[static_cast<std::size_t>(e) * stride_];
  if (regime_[e] == Regime::FV) {
    for (int k = 0; k < n_subcells(e); ++k) {
      const auto st = state_at(base + k * NV);
      if (!is_admissible(st, cfg_.gas)) throw AdmissibilityError("inadmissible subcell mean", e);
      s.wmean[k] = to_prim(st, cfg_.gas);
    }
    return;
  }
  const int n = ref_.n;
  const auto& g = geo_[e];
  for (int f = 0; f < 4; ++f) {
    if (g.collapsed[f]) continue;
    dg_face_trace(ref_, NV, f, base, s.tr_u[f].data());
    const auto& L = link_[e][f];
    if (L.elem < 0 || regime_[L.elem] != Regime::FV) continue;
    Eigen::VectorXd js(n), jt(n);
    for (int t = 0; t < n; ++t) js[t] = g.fsurf[f][t];
    const Eigen::VectorXd den = st_.P * js;
    for (int v = 0; v < NV; ++v) {
      for (int t = 0; t < n; ++t) jt[t] = js[t] * s.tr_u[f][t * NV + v];
      const Eigen::VectorXd num = st_.P * jt;
      for (int k = 0; k < m_; ++k) s.pm_u[f][k * NV + v] = num[k] / den[k];
    }
  }
}

void Solver::gather_stencil(int e, int k, const std::vector<double>& u, double t,
                            std::vector<StencilPoint>& pts) const {
  const auto& sg = sub_[e];
  const auto& s = scratch_[e];
  pts.clear();
  for (auto [idx, sign] : sg.cell_inner[k]) {
    const auto& f = sg.inner[idx];
    const int other = sign > 0 ? f.right : f.left;
    pts.push_back({sg.xc[other], s.wmean[other], f.xf});
  }
  const auto& xk = sg.xc[k];
  for (auto [pf, sub] : sg.cell_outer[k]) {
    const auto& L = link_[e][pf];
    const auto& xf = sg.outer_xf[pf][sub];
    if (L.elem < 0) {
      const auto& A = sg.outer_area[pf][sub];
      const double len = std::hypot(A[0], A[1]);
      const Vec2 nn{A[0] / len, A[1] / len};
      const double dn = (xf[0] - xk[0]) * nn[0] + (xf[1] - xk[1]) * nn[1];
      const auto in = state_at(&u[static_cast<std::size_t>(e) * stride_ + k * NV]);
      const auto gs = ghost(L.bc, in, xf, t);
      pts.push_back({{xk[0] + 2.0 * dn * nn[0], xk[1] + 2.0 * dn * nn[1]}, to_prim(gs, cfg_.gas), xf});
      continue;
    }
    const int sub2 = L.flip ? m_ - 1 - sub : sub;
    if (regime_[L.elem] == Regime::FV) {
      const int c2 = sub_[L.elem].outer_cell[L.face][sub2];
      const auto& x2 = sub_[L.elem].xc[c2];
      pts.push_back({{x2[0] + L.shift[0], x2[1] + L.shift[1]}, scratch_[L.elem].wmean[c2], xf});
    } else {
      const auto st = state_at(&scratch_[L.elem].pm_u[L.face][sub2 * NV]);
      if (!is_admissible(st, cfg_.gas)) throw AdmissibilityError("inadmissible projected trace", L.elem);
      pts.push_back({xf, to_prim(st, cfg_.gas), xf});
    }
  }
}

void Solver::phase_fv_reconstruct(int e, const std::vector<double>& u, double t) {
  auto& s = scratch_[e];
  const auto& sg = sub_[e];
  const auto& gas = cfg_.gas;
  const bool quad = geo_[e].type == ElementType::Quad;
  std::vector<StencilPoint> pts;
  std::vector<Vec2> areas;
  for (int k = 0; k < n_subcells(e); ++k) {
    gather_stencil(e, k, u, t, pts);
    const auto& xk = sg.xc[k];
    const auto& wk = s.wmean[k];
    const auto g = least_squares_gradient(xk, wk, pts);
    s.grad_ls[k] = g;
    std::array<double, 4> phi{};
    for (int v = 0; v < 4; ++v) phi[v] = limit_scalar(wk[v], g[v], xk, pts, v, cfg_.beta);
    // Face states; positivity fallback to first order.
    auto face_state = [&](const Vec2& xf) {
      Prim w = wk;
      for (int v = 0; v < 4; ++v) w[v] += phi[v] * (g[v][0] * (xf[0] - xk[0]) + g[v][1] * (xf[1] - xk[1]));
      return from_prim(w, gas);
    };
    bool ok = true;
    for (const auto& p : pts) {
      if (!ok) break;
      ok = is_admissible(face_state(p.xf), gas);
    }
    if (!ok) phi = {0.0, 0.0, 0.0, 0.0};
    int pi = 0;
    for (auto [idx, sign] : sg.cell_inner[k]) {
      s.rec_inner[idx][sign > 0 ? 0 : 1] = face_state(pts[pi].xf).u;
      ++pi;
    }
    for (auto [pf, sub] : sg.cell_outer[k]) {
      s.rec_outer[pf][sub] = face_state(pts[pi].xf).u;
      ++pi;
    }
    if (!viscous()) continue;
    if (quad) {
      // Green-Gauss with face values averaged from the two sides.
      areas.clear();
      for (auto [idx, sign] : sg.cell_inner[k])
        areas.push_back({sign * sg.inner[idx].n_area[0], sign * sg.inner[idx].n_area[1]});
      for (auto [pf, sub] : sg.cell_outer[k]) areas.push_back(sg.outer_area[pf][sub]);
      for (int c = 0; c < 3; ++c) {
        const int pv = kLiftPrim[c];
        std::vector<double> wf(pts.size());
        for (std::size_t f = 0; f < pts.size(); ++f) wf[f] = 0.5 * (wk[pv] + pts[f].w[pv]);
        s.grad_cell[k][c] = green_gauss_gradient(wf, areas, sg.area[k]);
      }
    } else {
      for (int c = 0; c < 3; ++c) s.grad_cell[k][c] = g[kLiftPrim[c]];
    }
  }
}

void Solver::phase_dg_lift(int e, const std::vector<double>& u, double t) {
  auto& s = scratch_[e];
  const auto& g = geo_[e];
  const int n = ref_.n, nq = n_nodes();
  const double* base = &u[static_cast<std::size_t>(e) * stride_];
  std::vector<double> w(nq * 3), F1(nq * 3), F2(nq * 3), r(nq * 3), fhat(n * 3);
  for (int q = 0; q < nq; ++q) {
    const auto lv = lift_vars(state_at(base + q * NV), cfg_.gas);
    for (int c = 0; c < 3; ++c) w[q * 3 + c] = lv[c];
  }
  // Face values w* per face node.
  std::array<std::vector<double>, 4> wstar;
  for (int f = 0; f < 4; ++f) {
    if (g.collapsed[f]) continue;
    wstar[f].assign(n * 3, 0.0);
    const auto& L = link_[e][f];
    std::vector<double> own(n * 3);
    for (int t2 = 0; t2 < n; ++t2) {
      const auto lv = lift_vars(state_at(&s.tr_u[f][t2 * NV]), cfg_.gas);
      for (int c = 0; c < 3; ++c) own[t2 * 3 + c] = lv[c];
    }
    if (L.elem < 0) {
      for (int tt = 0; tt < n; ++tt) {
        const auto gv = ghost_lift_value(L.bc, state_at(&s.tr_u[f][tt * NV]), g.fx[f][tt], t);
        for (int c = 0; c < 3; ++c) wstar[f][tt * 3 + c] = gv[c];
      }
    } else if (regime_[L.elem] == Regime::DG) {
      for (int tt = 0; tt < n; ++tt) {
        const int t2 = L.flip ? n - 1 - tt : tt;
        const auto lv = lift_vars(state_at(&scratch_[L.elem].tr_u[L.face][t2 * NV]), cfg_.gas);
        for (int c = 0; c < 3; ++c) wstar[f][tt * 3 + c] = 0.5 * (own[tt * 3 + c] + lv[c]);
      }
    } else {
      Eigen::MatrixXd wf(m_, 3);
      for (int k = 0; k < m_; ++k) {
        const int k2 = L.flip ? m_ - 1 - k : k;
        const auto lv = lift_vars(State<2>(scratch_[L.elem].rec_outer[L.face][k2]), cfg_.gas);
        for (int c = 0; c < 3; ++c) wf(k, c) = lv[c];
      }
      const Eigen::MatrixXd wn = st_.R * wf;
      for (int tt = 0; tt < n; ++tt)
        for (int c = 0; c < 3; ++c) wstar[f][tt * 3 + c] = 0.5 * (own[tt * 3 + c] + wn(tt, c));
    }
  }
  for (int d = 0; d < 2; ++d) {
    for (int q = 0; q < nq; ++q)
      for (int c = 0; c < 3; ++c) {
        F1[q * 3 + c] = g.ja[q][d] * w[q * 3 + c];
        F2[q * 3 + c] = g.ja[q][2 + d] * w[q * 3 + c];
      }
    std::fill(r.begin(), r.end(), 0.0);
    dg_volume(ref_, 3, F1.data(), F2.data(), r.data());
    for (int f = 0; f < 4; ++f) {
      if (g.collapsed[f]) continue;
      for (int tt = 0; tt < n; ++tt)
        for (int c = 0; c < 3; ++c) fhat[tt * 3 + c] = wstar[f][tt * 3 + c] * g.fmetric[f][tt][d];
      dg_surface(ref_, 3, f, fhat.data(), r.data());
    }
    for (int q = 0; q < nq; ++q)
      for (int c = 0; c < 3; ++c) s.grad[q * 6 + 3 * d + c] = -r[q * 3 + c] / g.detj[q];
  }
  for (int f = 0; f < 4; ++f) {
    if (g.collapsed[f]) continue;
    dg_face_trace(ref_, 6, f, s.grad.data(), s.tr_g[f].data());
    const auto& L = link_[e][f];
    if (L.elem < 0 || regime_[L.elem] != Regime::FV) continue;
    Eigen::VectorXd js(n), jt(n);
    for (int tt = 0; tt < n; ++tt) js[tt] = g.fsurf[f][tt];
    const Eigen::VectorXd den = st_.P * js;
    for (int c = 0; c < 6; ++c) {
      for (int tt = 0; tt < n; ++tt) jt[tt] = js[tt] * s.tr_g[f][tt * 6 + c];
      const Eigen::VectorXd num = st_.P * jt;
      for (int k = 0; k < m_; ++k) s.pm_g[f][k * 6 + c] = num[k] / den[k];
    }
  }
}

void Solver::phase_face_flux(int fi, double t) {
  const auto& F = mesh_.faces[fi];
  const int L = F.elem_l, fl = F.face_l;
  const int n = ref_.n;
  const auto& gas = cfg_.gas;
  const bool visc = viscous();
  auto check = [&](const State<2>& s, int elem) {
    if (!is_admissible(s, gas)) throw AdmissibilityError("inadmissible face state", elem);
  };
  auto conv = [&](const State<2>& a, const State<2>& b, const Vec2& nn) {
    return numerical_flux<2>(cfg_.riemann, a, b, nn, gas);
  };
  // Viscous face gradient of an FV cell towards a neighbour value at xr.
  auto fv_face_grad = [&](int e, int k, const Vec2& gshift, const std::array<Vec2, 3>& gbar, const Prim& wr,
                          const Vec2& xr) {
    (void)gshift;
    const auto& xk = sub_[e].xc[k];
    const auto& wk = scratch_[e].wmean[k];
    GradientState<2> gs;
    for (int c = 0; c < 3; ++c) {
      const auto gc = corrected_face_gradient(gbar[c], wk[kLiftPrim[c]], wr[kLiftPrim[c]], xk, xr);
      gs.d[0][c] = gc[0];
      gs.d[1][c] = gc[1];
    }
    return gs;
  };
  auto& sl = scratch_[L];

  if (F.boundary()) {
    if (regime_[L] == Regime::DG) {
      const auto& g = geo_[L];
      for (int tt = 0; tt < n; ++tt) {
        const auto in = state_at(&sl.tr_u[fl][tt * NV]);
        check(in, L);
        const auto& nn = g.fnormal[fl][tt];
        const auto gs = ghost(F.bc, in, g.fx[fl][tt], t);
        auto c = conv(in, gs, nn);
        if (visc) {
          const auto fv = boundary_viscous(F.bc, in, grad_state(&sl.tr_g[fl][tt * 6]), nn, g.fx[fl][tt], t);
          for (int v = 0; v < NV; ++v) c[v] -= fv[v];
        }
        for (int v = 0; v < NV; ++v) sl.flux[fl][tt * NV + v] = c[v] * g.fsurf[fl][tt];
      }
    } else {
      const auto& sg = sub_[L];
      for (int k = 0; k < m_; ++k) {
        const State<2> in(sl.rec_outer[fl][k]);
        check(in, L);
        const auto& A = sg.outer_area[fl][k];
        const double len = std::hypot(A[0], A[1]);
        const Vec2 nn{A[0] / len, A[1] / len};
        const auto& xf = sg.outer_xf[fl][k];
        auto c = conv(in, ghost(F.bc, in, xf, t), nn);
        if (visc) {
          const int cell = sg.outer_cell[fl][k];
          const auto& xk = sg.xc[cell];
          const double dn = (xf[0] - xk[0]) * nn[0] + (xf[1] - xk[1]) * nn[1];
          const Vec2 xm{xk[0] + 2.0 * dn * nn[0], xk[1] + 2.0 * dn * nn[1]};
          const auto wg = to_prim(ghost(F.bc, from_prim(sl.wmean[cell], gas), xf, t), gas);
          const auto gs = fv_face_grad(L, cell, {0, 0}, sl.grad_cell[cell], wg, xm);
          const auto fv = boundary_viscous(F.bc, in, gs, nn, xf, t);
          for (int v = 0; v < NV; ++v) c[v] -= fv[v];
        }
        for (int v = 0; v < NV; ++v) sl.flux[fl][k * NV + v] = c[v] * len;
      }
    }
    return;
  }

  const int R = F.elem_r, fr = F.face_r;
  auto& sr = scratch_[R];
  const Vec2 shift{F.shift[0], F.shift[1]};  // x_l = x_r + shift
  const bool ldg = regime_[L] == Regime::DG, rdg = regime_[R] == Regime::DG;

  if (ldg && rdg) {
    const auto& g = geo_[L];
    for (int tt = 0; tt < n; ++tt) {
      const int t2 = F.flip ? n - 1 - tt : tt;
      const auto a = state_at(&sl.tr_u[fl][tt * NV]);
      const auto b = state_at(&sr.tr_u[fr][t2 * NV]);
      check(a, L);
      check(b, R);
      const auto& nn = g.fnormal[fl][tt];
      auto c = conv(a, b, nn);
      if (visc) {
        const auto fv = br1_viscous_interface<2>(viscous_flux<2>(a, grad_state(&sl.tr_g[fl][tt * 6]), gas),
                                                 viscous_flux<2>(b, grad_state(&sr.tr_g[fr][t2 * 6]), gas), nn);
        for (int v = 0; v < NV; ++v) c[v] -= fv[v];
      }
      for (int v = 0; v < NV; ++v) {
        sl.flux[fl][tt * NV + v] = c[v] * g.fsurf[fl][tt];
        sr.flux[fr][t2 * NV + v] = -c[v] * g.fsurf[fl][tt];
      }
    }
    return;
  }

  const auto& sgl = sub_[L];
  if (!ldg && !rdg) {
    for (int k = 0; k < m_; ++k) {
      const int k2 = F.flip ? m_ - 1 - k : k;
      const State<2> a(sl.rec_outer[fl][k]);
      const State<2> b(sr.rec_outer[fr][k2]);
      check(a, L);
      check(b, R);
      const auto& A = sgl.outer_area[fl][k];
      const double len = std::hypot(A[0], A[1]);
      const Vec2 nn{A[0] / len, A[1] / len};
      auto c = conv(a, b, nn);
      if (visc) {
        const int cl = sgl.outer_cell[fl][k];
        const int cr = sub_[R].outer_cell[fr][k2];
        std::array<Vec2, 3> gbar;
        for (int q = 0; q < 3; ++q)
          for (int d = 0; d < 2; ++d) gbar[q][d] = 0.5 * (sl.grad_cell[cl][q][d] + sr.grad_cell[cr][q][d]);
        const auto& xr = sub_[R].xc[cr];
        const auto gs = fv_face_grad(L, cl, shift, gbar, sr.wmean[cr], {xr[0] + shift[0], xr[1] + shift[1]});
        State<2> avg;
        for (int v = 0; v < NV; ++v) avg.u[v] = 0.5 * (a.u[v] + b.u[v]);
        const auto fv = contract(viscous_flux<2>(avg, gs, gas), nn);
        for (int v = 0; v < NV; ++v) c[v] -= fv[v];
      }
      for (int v = 0; v < NV; ++v) {
        sl.flux[fl][k * NV + v] = c[v] * len;
        sr.flux[fr][k2 * NV + v] = -c[v] * len;
      }
    }
    return;
  }

  // Mixed interface: fluxes on the FV subfaces; the DG side receives their
  // conservative reconstruction.
  const int D = ldg ? L : R, fd = ldg ? fl : fr;
  const int V = ldg ? R : L, fvf = ldg ? fr : fl;
  auto& sd = scratch_[D];
  auto& sv = scratch_[V];
  Eigen::MatrixXd G(m_, NV);
  for (int kl = 0; kl < m_; ++kl) {
    const int kr = F.flip ? m_ - 1 - kl : kl;
    const int kd = ldg ? kl : kr, kv = ldg ? kr : kl;
    const auto& A = sgl.outer_area[fl][kl];
    const double len = std::hypot(A[0], A[1]);
    const Vec2 nn{A[0] / len, A[1] / len};
    const auto ud = state_at(&sd.pm_u[fd][kd * NV]);
    const State<2> uv(sv.rec_outer[fvf][kv]);
    check(ud, D);
    check(uv, V);
    auto c = ldg ? conv(ud, uv, nn) : conv(uv, ud, nn);
    if (visc) {
      const auto fdg = contract(viscous_flux<2>(ud, grad_state(&sd.pm_g[fd][kd * 6]), gas), nn);
      const int cell = sub_[V].outer_cell[fvf][kv];
      const auto& xf = sub_[V].outer_xf[fvf][kv];
      const auto gs = fv_face_grad(V, cell, {0, 0}, sv.grad_cell[cell], to_prim(ud, gas), xf);
      const auto ffv = contract(viscous_flux<2>(uv, gs, gas), nn);
      for (int v = 0; v < NV; ++v) c[v] -= 0.5 * (fdg[v] + ffv[v]);
    }
    const double sgn_v = ldg ? -1.0 : 1.0;  // outward orientation of the FV side
    for (int v = 0; v < NV; ++v) {
      sv.flux[fvf][kv * NV + v] = sgn_v * c[v] * len;
      G(kd, v) = -sgn_v * c[v] * len / st_.sub_length;
    }
  }
  const Eigen::MatrixXd Gn = st_.R * G;
  for (int tt = 0; tt < n; ++tt)
    for (int v = 0; v < NV; ++v) sd.flux[fd][tt * NV + v] = Gn(tt, v);
}

void Solver::phase_assemble(int e, const std::vector<double>& u, double t, std::vector<double>& dudt) {
  auto& s = scratch_[e];
  const auto& g = geo_[e];
  const auto& gas = cfg_.gas;
  const double* base = &u[static_cast<std::size_t>(e) * stride_];
  double* out = &dudt[static_cast<std::size_t>(e) * stride_];
  std::fill(out, out + stride_, 0.0);
  const int nq = n_nodes();
  if (regime_[e] == Regime::DG) {
    std::vector<double> F1(nq * NV), F2(nq * NV);
    for (int q = 0; q < nq; ++q) {
      const auto st = state_at(base + q * NV);
      auto fc = convective_flux<2>(st, gas);
      if (viscous()) {
        const auto fv = viscous_flux<2>(st, grad_state(&s.grad[q * 6]), gas);
        for (int d = 0; d < 2; ++d)
          for (int v = 0; v < NV; ++v) fc[d][v] -= fv[d][v];
      }
      const auto& ja = g.ja[q];
      for (int v = 0; v < NV; ++v) {
        F1[q * NV + v] = ja[0] * fc[0][v] + ja[1] * fc[1][v];
        F2[q * NV + v] = ja[2] * fc[0][v] + ja[3] * fc[1][v];
      }
    }
    dg_volume(ref_, NV, F1.data(), F2.data(), out);
    for (int f = 0; f < 4; ++f)
      if (!g.collapsed[f]) dg_surface(ref_, NV, f, s.flux[f].data(), out);
    for (int q = 0; q < nq; ++q) {
      const double inv = 1.0 / g.detj[q];
      Cons<2> src{};
      if (cfg_.source) src = cfg_.source(g.x[q], t);
      for (int v = 0; v < NV; ++v) out[q * NV + v] = out[q * NV + v] * inv + src[v];
    }
    return;
  }
  const auto& sg = sub_[e];
  const int nk = n_subcells(e);
  // Inner subcell faces.
  for (std::size_t i = 0; i < sg.inner.size(); ++i) {
    const auto& f = sg.inner[i];
    const State<2> a(s.rec_inner[i][0]);
    const State<2> b(s.rec_inner[i][1]);
    if (!is_admissible(a, gas) || !is_admissible(b, gas)) throw AdmissibilityError("inadmissible subcell face", e);
    const double len = std::hypot(f.n_area[0], f.n_area[1]);
    const Vec2 nn{f.n_area[0] / len, f.n_area[1] / len};
    auto c = numerical_flux<2>(cfg_.riemann, a, b, nn, gas);
    if (viscous()) {
      std::array<Vec2, 3> gbar;
      for (int q = 0; q < 3; ++q)
        for (int d = 0; d < 2; ++d) gbar[q][d] = 0.5 * (s.grad_cell[f.left][q][d] + s.grad_cell[f.right][q][d]);
      GradientState<2> gs;
      for (int q = 0; q < 3; ++q) {
        const int pv = kLiftPrim[q];
        const auto gc = corrected_face_gradient(gbar[q], s.wmean[f.left][pv], s.wmean[f.right][pv], sg.xc[f.left],
                                                sg.xc[f.right]);
        gs.d[0][q] = gc[0];
        gs.d[1][q] = gc[1];
      }
      State<2> avg;
      for (int v = 0; v < NV; ++v) avg.u[v] = 0.5 * (a.u[v] + b.u[v]);
      const auto fv = contract(viscous_flux<2>(avg, gs, gas), nn);
      for (int v = 0; v < NV; ++v) c[v] -= fv[v];
    }
    for (int v = 0; v < NV; ++v) {
      out[f.left * NV + v] -= c[v] * len;
      out[f.right * NV + v] += c[v] * len;
    }
  }
  for (int pf = 0; pf < 4; ++pf) {
    if (g.collapsed[pf]) continue;
    for (int k = 0; k < m_; ++k) {
      const int cell = sg.outer_cell[pf][k];
      for (int v = 0; v < NV; ++v) out[cell * NV + v] -= s.flux[pf][k * NV + v];
    }
  }
  std::vector<double> srcm;
  if (cfg_.source) {
    const auto& t_ = vt(e);
    Eigen::MatrixXd js(nq, NV);
    for (int q = 0; q < nq; ++q) {
      const auto src = cfg_.source(g.x[q], t);
      for (int v = 0; v < NV; ++v) js(q, v) = g.jm[q] * src[v];
    }
    const Eigen::MatrixXd pm = t_.P * js;
    srcm.resize(nk * NV);
    for (int k = 0; k < nk; ++k)
      for (int v = 0; v < NV; ++v) srcm[k * NV + v] = pm(k, v) / sg.jfv[k];
  }
  for (int k = 0; k < nk; ++k)
    for (int v = 0; v < NV; ++v) {
      out[k * NV + v] /= sg.area[k];
      if (!srcm.empty()) out[k * NV + v] += srcm[k * NV + v];
    }
}

void Solver::residual(const std::vector<double>& u, double t, std::vector<double>& dudt) {
  const int ne = n_elements();
  dudt.resize(u.size());
  auto guarded = [](int e, auto&& fn) {
    try {
      fn();
    } catch (const AdmissibilityError& ex) {
      if (ex.element() >= 0) throw;
      throw AdmissibilityError(ex.what(), e);
    }
  };
  for (int e = 0; e < ne; ++e) guarded(e, [&] { phase_traces(e, u); });
  for (int e = 0; e < ne; ++e)
    if (regime_[e] == Regime::FV) guarded(e, [&] { phase_fv_reconstruct(e, u, t); });
  if (viscous())
    for (int e = 0; e < ne; ++e)
      if (regime_[e] == Regime::DG) guarded(e, [&] { phase_dg_lift(e, u, t); });
  for (int f = 0; f < static_cast<int>(mesh_.faces.size()); ++f)
    guarded(mesh_.faces[f].elem_l, [&] { phase_face_flux(f, t); });
  for (int e = 0; e < ne; ++e) guarded(e, [&] { phase_assemble(e, u, t, dudt); });
}

// ---- time stepping ----------------------------------------------------------------------

double Solver::estimate_dt() const {
  const auto& gas = cfg_.gas;
  const double fac = 0.5 * (2.0 * cfg_.N + 1.0);
  double rate = 0.0;
  for (int e = 0; e < n_elements(); ++e) {
    const auto& g = geo_[e];
    if (regime_[e] == Regime::DG) {
      for (int q = 0; q < n_nodes(); ++q) {
        const auto s = dg_node(e, q);
        const auto v = velocity(s);
        const double c = sound_speed(s, gas);
        double rc = 0.0, rv = 0.0;
        for (int p = 0; p < 2; ++p) {
          const double jx = g.ja[q][2 * p], jy = g.ja[q][2 * p + 1];
          const double jn = std::hypot(jx, jy);
          rc += (std::abs(v[0] * jx + v[1] * jy) + c * jn) / g.detj[q];
          const double k = fac * jn / g.detj[q];
          rv += k * k;
        }
        rc *= fac;
        if (viscous()) rv *= nu_prime(gas, s.rho());
        else rv = 0.0;
        rate = std::max(rate, rc + rv);
      }
    } else {
      const auto& sg = sub_[e];
      std::vector<double> rc(n_subcells(e), 0.0), rv(n_subcells(e), 0.0);
      std::vector<State<2>> st(n_subcells(e));
      std::vector<double> cs(n_subcells(e));
      for (int k = 0; k < n_subcells(e); ++k) {
        st[k] = fv_mean(e, k);
        cs[k] = sound_speed(st[k], gas);
      }
      auto add = [&](int k, const Vec2& A) {
        const auto v = velocity(st[k]);
        const double len = std::hypot(A[0], A[1]);
        rc[k] += (std::abs(v[0] * A[0] + v[1] * A[1]) + cs[k] * len);
        rv[k] += len * len;
      };
      for (const auto& f : sg.inner) {
        add(f.left, f.n_area);
        add(f.right, f.n_area);
      }
      for (int pf = 0; pf < 4; ++pf)
        for (std::size_t k = 0; k < sg.outer_cell[pf].size(); ++k) add(sg.outer_cell[pf][k], sg.outer_area[pf][k]);
      for (int k = 0; k < n_subcells(e); ++k) {
        double r = rc[k] / (2.0 * sg.area[k]);
        if (viscous()) r += nu_prime(gas, st[k].rho()) * rv[k] / (sg.area[k] * sg.area[k]);
        rate = std::max(rate, r);
      }
    }
  }
  if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
  return cfg_.cfl / rate;
}

std::vector<int> Solver::inadmissible_elements(const std::vector<double>& u) const {
  std::vector<int> bad;
  for (int e = 0; e < n_elements(); ++e) {
    const int cnt = regime_[e] == Regime::DG ? n_nodes() : n_subcells(e);
    const double* base = &u[static_cast<std::size_t>(e) * stride_];
    for (int i = 0; i < cnt; ++i)
      if (!is_admissible(state_at(base + i * NV), cfg_.gas)) {
        bad.push_back(e);
        break;
      }
  }
  return bad;
}

std::vector<int> Solver::failing_elements_from(const AdmissibilityError& ex) const {
  return {static_cast<int>(ex.element())};
}

StepReport Solver::advance(double dt_cap) {
  StepReport rep;
  update_regimes(&rep);
  double dt = std::min(estimate_dt(), dt_cap);
  if (!(dt > 0.0) || !std::isfinite(dt)) throw AdmissibilityError("invalid time step estimate");
  std::vector<double> u0 = u_;
  const Residual rhs = [this](const std::vector<double>& u, double t, std::vector<double>& r) { residual(u, t, r); };
  for (;;) {
    std::vector<int> bad;
    try {
      low_storage_step(cfg_.rk, u_, t_, dt, rhs, rk_k_, rk_r_);
      bad = inadmissible_elements(u_);
    } catch (const AdmissibilityError& ex) {
      bad = failing_elements_from(ex);
    }
    if (bad.empty()) break;
    if (++rep.retries > cfg_.max_retries)
      throw AdmissibilityError("step failed after " + std::to_string(cfg_.max_retries) + " retries at t=" +
                                   std::to_string(t_),
                               bad.front());
    u_ = u0;
    bool halve = false;
    for (int b : bad) {
      if (b >= 0 && regime_[b] == Regime::DG && cfg_.indicator.kind != IndicatorKind::ForceDG) {
        switch_to_fv(b);
        ++rep.forced_fv;
      } else {
        halve = true;
      }
    }
    u0 = u_;
    if (halve) {
      dt *= 0.5;
      ++rep.dt_halvings;
      if (dt < cfg_.dt_min) throw AdmissibilityError("time step underflow at t=" + std::to_string(t_), bad.front());
    }
  }
  t_ += dt;
  rep.dt = dt;
  return rep;
}

// ---- diagnostics -------------------------------------------------------------------------

std::array<double, 4> Solver::integrals() const {
  std::array<double, 4> s{};
  const int n = ref_.n;
  for (int e = 0; e < n_elements(); ++e) {
    const auto& g = geo_[e];
    if (regime_[e] == Regime::DG) {
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const int q = i + n * j;
          const double w = ref_.q.weights[i] * ref_.q.weights[j] * g.detj[q];
          const auto st = dg_node(e, q);
          for (int v = 0; v < NV; ++v) s[v] += w * st.u[v];
        }
    } else {
      for (int k = 0; k < n_subcells(e); ++k) {
        const auto st = fv_mean(e, k);
        for (int v = 0; v < NV; ++v) s[v] += sub_[e].area[k] * st.u[v];
      }
    }
  }
  return s;
}

double Solver::l2_error(const StateFn& exact, int var) const {
  double err = 0.0;
  const int n = ref_.n;
  for (int e = 0; e < n_elements(); ++e) {
    const auto& g = geo_[e];
    if (regime_[e] == Regime::DG) {
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const int q = i + n * j;
          const double d = dg_node(e, q).u[var] - exact(g.x[q], t_).u[var];
          err += ref_.q.weights[i] * ref_.q.weights[j] * g.detj[q] * d * d;
        }
    } else {
      for (int k = 0; k < n_subcells(e); ++k) {
        const double d = fv_mean(e, k).u[var] - exact(sub_[e].xc[k], t_).u[var];
        err += sub_[e].area[k] * d * d;
      }
    }
  }
  return std::sqrt(err);
}

State<2> Solver::sample(const Vec2& x) const {
  const auto loc = locate_point(geo_, x);
  if (loc.elem < 0) throw std::out_of_range("sample: point outside the mesh");
  const int e = loc.elem;
  if (regime_[e] == Regime::DG) {
    const auto la = lagrange_values(ref_.q.nodes, loc.ab[0]);
    const auto lb = lagrange_values(ref_.q.nodes, loc.ab[1]);
    State<2> s;
    for (int j = 0; j < ref_.n; ++j)
      for (int i = 0; i < ref_.n; ++i) {
        const auto st = dg_node(e, i + ref_.n * j);
        for (int v = 0; v < NV; ++v) s.u[v] += la[i] * lb[j] * st.u[v];
      }
    return s;
  }
  const double c[2] = {loc.ab[0], loc.ab[1]};
  const auto cp = collapse_map(geo_[e].type, c);
  const Vec2 xi{cp.xi[0], cp.xi[1]};
  const auto& d = dec_[tidx(geo_[e].type)];
  for (int k = 0; k < d.n_cells(); ++k)
    if (point_in_cell(d, d.cells[k], xi)) return fv_mean(e, k);
  return fv_mean(e, 0);
}

}  // namespace mixdg
