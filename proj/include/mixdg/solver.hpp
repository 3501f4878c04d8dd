#pragma once

// Mixed DG / FV-subcell semi-discretization of the 2D compressible
// Navier-Stokes equations on hybrid curved meshes, with troubled-cell
// switching and explicit low-storage time stepping.
//
// Storage: one flat buffer with a fixed stride per element. A DG element holds
// conservative nodal values (node = i + n*j), an FV element holds the subcell
// means; the active interpretation is given by the element's regime.

#include <array>
#include <functional>
#include <limits>
#include <vector>

#include "mixdg/dgop.hpp"
#include "mixdg/eqstate.hpp"
#include "mixdg/fvop.hpp"
#include "mixdg/indicator.hpp"
#include "mixdg/mesh.hpp"
#include "mixdg/riemann.hpp"
#include "mixdg/subcell.hpp"
#include "mixdg/timeint.hpp"

namespace mixdg {

using StateFn = std::function<State<2>(const Vec2& x, double t)>;
using SourceFn = std::function<Cons<2>(const Vec2& x, double t)>;

struct BoundaryCondition {
  enum class Kind {
    Wall,       ///< no-slip adiabatic wall moving with `wall_velocity`
    Dirichlet,  ///< weakly imposed external state
  };
  Kind kind = Kind::Dirichlet;
  Vec2 wall_velocity{0.0, 0.0};
  StateFn state;
};

struct SolverConfig {
  int N = 3;
  int fv_n = 0;  ///< subcells per direction; 0 selects 2N+1
  RiemannKind riemann = RiemannKind::Rusanov;
  double beta = 1.0;  ///< generalized minmod parameter in [1,2]
  GasModel gas;
  IndicatorConfig indicator;
  RKScheme rk = ls_rk3_3();
  double cfl = 0.9;
  double dt_min = 1e-14;
  int max_retries = 40;
  std::vector<BoundaryCondition> bcs;  ///< indexed like Mesh::bc_names
  SourceFn source;                     ///< optional volume source

  void validate(const Mesh& mesh) const;
};

struct StepReport {
  double dt = 0.0;
  int retries = 0;
  int forced_fv = 0;     ///< elements switched to FV by a retry
  int dt_halvings = 0;
  int switched_to_fv = 0;
  int switched_to_dg = 0;
};

class Solver {
 public:
  Solver(Mesh mesh, SolverConfig cfg);

  [[nodiscard]] const Mesh& mesh() const noexcept { return mesh_; }
  [[nodiscard]] const SolverConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const std::vector<ElementGeometry>& geometry() const noexcept { return geo_; }
  [[nodiscard]] const SubcellGeometry& subcells(int e) const { return sub_[e]; }
  [[nodiscard]] const SubcellDecomposition& decomposition(ElementType ty) const;
  [[nodiscard]] const VolumeTransfer& volume_transfer(ElementType ty) const;
  [[nodiscard]] const DGReference& reference() const noexcept { return ref_; }
  [[nodiscard]] int n_elements() const noexcept { return mesh_.n_elements(); }
  [[nodiscard]] int n_nodes() const noexcept { return ref_.n * ref_.n; }
  [[nodiscard]] int fv_n() const noexcept { return m_; }
  [[nodiscard]] int n_subcells(int e) const;
  [[nodiscard]] int stride() const noexcept { return stride_; }
  [[nodiscard]] double time() const noexcept { return t_; }
  void set_time(double t) noexcept { t_ = t; }

  [[nodiscard]] std::vector<double>& field() noexcept { return u_; }
  [[nodiscard]] const std::vector<double>& field() const noexcept { return u_; }
  [[nodiscard]] const std::vector<Regime>& regimes() const noexcept { return regime_; }
  [[nodiscard]] const std::vector<double>& indicator_values() const noexcept { return ind_; }
  [[nodiscard]] int count(Regime r) const noexcept;

  [[nodiscard]] State<2> dg_node(int e, int q) const;
  [[nodiscard]] State<2> fv_mean(int e, int k) const;

  /// Nodal initialization of every element (FV elements are projected).
  void initialize(const std::function<State<2>(const Vec2&)>& f);
  /// Direct assignment of FV subcell means (element becomes FV).
  void set_subcell_means(int e, const std::vector<State<2>>& means);
  /// Regime assignment implied by the indicator kind (fixed kinds) or the
  /// current data (jump indicator).
  void apply_initial_regimes();

  void switch_to_fv(int e);
  void switch_to_dg(int e);
  /// Nodal DG representation of an element (FV elements are reconstructed).
  [[nodiscard]] std::vector<State<2>> dg_view(int e) const;

  /// Evaluates indicators on the DG view and switches regimes (jump indicator only).
  void update_regimes(StepReport* rep = nullptr);

  /// Semi-discrete right-hand side for the current regimes.
  void residual(const std::vector<double>& u, double t, std::vector<double>& dudt);

  /// CFL time step for the current field and regimes.
  [[nodiscard]] double estimate_dt() const;

  /// One step of size min(cfl-dt, dt_cap): regime update, then RK stages with
  /// retries (failing DG elements forced to FV, dt halved for failing FV
  /// elements).
  StepReport advance(double dt_cap = std::numeric_limits<double>::infinity());

  /// Conserved integrals (rho, rho u, rho v, rho e) over the domain.
  [[nodiscard]] std::array<double, 4> integrals() const;
  /// Discrete L2 error of one conservative variable (FV elements via means at barycenters).
  [[nodiscard]] double l2_error(const StateFn& exact, int var) const;
  /// Solution at a physical point (DG: polynomial; FV: containing subcell mean).
  [[nodiscard]] State<2> sample(const Vec2& x) const;
  /// Admissibility of every stored value.
  [[nodiscard]] std::vector<int> inadmissible_elements(const std::vector<double>& u) const;

 private:
  struct Link {
    int elem = -1;  ///< neighbour element (-1 on the boundary)
    int face = -1;
    int flip = 0;
    int bc = -1;
    int mesh_face = -1;
    bool left = true;
    Vec2 shift{0.0, 0.0};  ///< add to neighbour coordinates to get own frame
  };

  struct Scratch {
    std::array<std::vector<double>, 4> tr_u;  ///< DG: n x 4 traces
    std::array<std::vector<double>, 4> tr_g;  ///< DG: n x 6 gradient traces
    std::array<std::vector<double>, 4> pm_u;  ///< DG: m x 4 projected trace means
    std::array<std::vector<double>, 4> pm_g;  ///< DG: m x 6
    std::array<std::vector<double>, 4> flux;  ///< outward flux x surface element (DG: n, FV: m)
    std::vector<double> grad;                 ///< DG: nodes x 6 lifted gradients of (u,v,T)
    std::vector<Prim> wmean;                  ///< FV: primitive means
    std::vector<PrimGrad> grad_ls;            ///< FV: unlimited least-squares gradients
    std::vector<std::array<Vec2, 3>> grad_cell;  ///< FV: viscous cell gradients of (u,v,T)
    std::vector<std::array<Cons<2>, 2>> rec_inner;
    std::array<std::vector<Cons<2>>, 4> rec_outer;
  };

  [[nodiscard]] int tidx(ElementType ty) const noexcept { return ty == ElementType::Quad ? 0 : 1; }
  [[nodiscard]] const VolumeTransfer& vt(int e) const { return vt_[tidx(geo_[e].type)]; }
  [[nodiscard]] bool viscous() const noexcept { return cfg_.gas.mu > 0.0; }

  [[nodiscard]] State<2> ghost(int bc, const State<2>& in, const Vec2& x, double t) const;
  [[nodiscard]] std::array<double, 3> ghost_lift_value(int bc, const State<2>& in, const Vec2& x, double t) const;
  [[nodiscard]] Cons<2> boundary_viscous(int bc, const State<2>& in, const GradientState<2>& g, const Vec2& n,
                                         const Vec2& x, double t) const;

  void project_to_fv(int e, const double* nodal, double* means) const;
  void reconstruct_to_dg(int e, const double* means, double* nodal) const;

  void gather_stencil(int e, int k, const std::vector<double>& u, double t, std::vector<StencilPoint>& pts) const;
  void phase_traces(int e, const std::vector<double>& u);
  void phase_fv_reconstruct(int e, const std::vector<double>& u, double t);
  void phase_dg_lift(int e, const std::vector<double>& u, double t);
  void phase_face_flux(int f, double t);
  void phase_assemble(int e, const std::vector<double>& u, double t, std::vector<double>& dudt);

  [[nodiscard]] std::vector<int> failing_elements_from(const AdmissibilityError& ex) const;

  Mesh mesh_;
  SolverConfig cfg_;
  DGReference ref_;
  int m_ = 1;
  int stride_ = 0;
  std::vector<ElementGeometry> geo_;
  std::array<SubcellDecomposition, 2> dec_;
  std::array<VolumeTransfer, 2> vt_;
  SurfaceTransfer st_;
  std::vector<SubcellGeometry> sub_;
  std::vector<std::array<Link, 4>> link_;
  std::vector<double> u_;
  std::vector<Regime> regime_;
  std::vector<double> ind_;
  std::vector<Scratch> scratch_;
  std::vector<double> rk_k_, rk_r_;
  double t_ = 0.0;
};

}  // namespace mixdg
