#pragma once

// Benchmark cases, run configuration and post-processing: manufactured
// solution, Sedov blast, lid-driven cavity, conservation and convergence
// measures, and the CSV / legacy-VTK writers.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mixdg/solver.hpp"

namespace mixdg {

/// Resolved run configuration (key-value text file, `key = value`, `#` comments).
struct RunConfig {
  std::string case_name = "mms";  ///< mms | sedov | cavity | freestream
  // mesh
  std::string mesh_file;  ///< optional; overrides the generator keys
  int nx = 8;
  int ny = 0;  ///< 0: same as nx
  SplitMode split = SplitMode::Tri;
  double split_fraction = 0.5;
  double deform_eps = 0.15;
  std::array<double, 2> box_lo{0.0, 0.0};
  std::array<double, 2> box_hi{1.0, 1.0};
  int ngeo = 2;
  std::uint64_t seed = 1;
  // discretization
  int N = 3;
  int fv_n = 0;
  std::string riemann = "rusanov";
  double limiter_beta = 1.0;
  std::string indicator = "jump";
  double ind_lower = 0.025;
  double ind_upper = 0.030;
  std::vector<std::string> ind_vars{"density", "pressure"};
  double cfl = 0.9;
  std::string rk_scheme = "ls_rk3_3";
  double gamma = 1.4;
  double mu = -1.0;  ///< < 0: case default
  double Pr = 0.72;
  double R = 1.0;
  // run control
  double tend = 0.1;
  long max_steps = 0;  ///< 0: unlimited
  int output_every = 0;  ///< steps between VTK files (0: first and last only)
  int history_every = 1;  ///< steps between time-series rows
  std::string output_dir = "out";
  bool write_vtk = true;
  // case parameters
  std::vector<int> conv_levels{4, 8, 16, 32};
  int profile_bins = 60;
  int centerline_points = 41;

  /// Keys in the order written to the manifest.
  [[nodiscard]] std::map<std::string, std::string> to_map() const;
  void validate() const;
};

/// Parses `key = value` lines; unknown keys and malformed values raise ConfigError.
[[nodiscard]] RunConfig parse_run_config(const std::string& text);
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path);

/// Mesh described by the configuration (generated or read).
[[nodiscard]] Mesh build_mesh(const RunConfig& rc);
/// Solver configuration implied by the run configuration and the case.
[[nodiscard]] SolverConfig build_solver_config(const RunConfig& rc, const Mesh& mesh);

// ---- cases -----------------------------------------------------------------------

[[nodiscard]] State<2> mms_exact(const Vec2& x, double t);
/// Source making mms_exact a solution of the Euler equations.
[[nodiscard]] Cons<2> mms_source(const Vec2& x, double t, const GasModel& gas);

inline constexpr double kSedovEnergy = 0.244816;
inline constexpr double kSedovBackground = 1e-12;
/// Total blast energy: kSedovEnergy / dx_fv^2 over the 2 x 2 subcell block around the origin.
inline constexpr double kSedovSeededEnergy = 4.0 * kSedovEnergy;

struct SedovSeed {
  double dx_fv = 0.0;       ///< average subcell spacing
  int seeded_subcells = 0;
  double seeded_area = 0.0;
  double rhoe = 0.0;        ///< energy density in seeded subcells
};
/// Average subcell spacing: domain extent / (cells per direction * fv_n).
[[nodiscard]] double sedov_dx_fv(const RunConfig& rc, int fv_n);
/// FV initialization of every element; subcells with |x_i| <= dx_fv at the
/// barycenter share the energy kSedovSeededEnergy (uniform density).
SedovSeed sedov_init(Solver& s, double dx_fv);
[[nodiscard]] State<2> sedov_background(const GasModel& gas);

inline constexpr double kCavityPressure = 71.42857;
[[nodiscard]] std::vector<BoundaryCondition> cavity_bcs(const Mesh& mesh);
[[nodiscard]] State<2> cavity_initial(const GasModel& gas);

// ---- post-processing -----------------------------------------------------------

/// max_t |I(t) - I(0)| per variable.
[[nodiscard]] std::array<double, 4> conservation_error(const std::vector<std::array<double, 4>>& history);

struct EocValue {
  double order = 0.0;
  bool exact = false;  ///< both errors zero
};
/// log2(e_i / e_{i+1}) per interval of a halving sequence.
[[nodiscard]] std::vector<EocValue> eoc(const std::vector<double>& errors);

struct RadialBin {
  double r = 0.0;
  double rho = 0.0;
};
/// Density averaged over radius bins about the origin (DG nodes and FV subcell
/// barycenters as samples). A positive `period` uses minimum-image distances.
[[nodiscard]] std::vector<RadialBin> radial_profile(const Solver& s, int bins, double rmax, double period = 0.0);

struct LinePoint {
  double y = 0.0;
  double u = 0.0;
};
/// Horizontal velocity along the vertical line x = x0 (endpoints excluded).
[[nodiscard]] std::vector<LinePoint> centerline_u(const Solver& s, double x0, int npts, double ylo, double yhi);

// ---- output ------------------------------------------------------------------------

void write_vtk(const Solver& s, const std::filesystem::path& path);
/// Element outlines (corner polygons, curved edges sampled) with element type and id.
void write_mesh_vtk(const Mesh& mesh, const std::filesystem::path& path);
void write_radial_csv(const std::vector<RadialBin>& prof, const std::filesystem::path& path);
void write_centerline_csv(const std::vector<LinePoint>& line, const std::filesystem::path& path);
void write_manifest(const RunConfig& rc, const std::filesystem::path& path,
                    const std::map<std::string, std::string>& extra = {});

struct HistoryRow {
  double t = 0.0;
  long step = 0;
  double dt = 0.0;
  std::array<double, 4> integrals{};
  int n_dg = 0;
  int n_fv = 0;
};
inline constexpr const char* kHistoryHeader = "t,step,dt,int_rho,int_rhou,int_rhov,int_rhoe,n_dg,n_fv";
void write_history_csv(const std::vector<HistoryRow>& rows, const std::filesystem::path& path);

struct ConvergenceRow {
  int level = 0;
  int n = 0;
  double h = 0.0;
  double l2_rho = 0.0;
  std::optional<EocValue> eoc;
};
inline constexpr const char* kConvergenceHeader = "level,n,h,l2_rho,eoc";
void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const std::filesystem::path& path);

// ---- drivers -----------------------------------------------------------------------

struct RunSummary {
  long steps = 0;
  double t = 0.0;
  std::array<double, 4> conservation{};
  std::vector<HistoryRow> history;
  double l2_rho = -1.0;  ///< MMS only
  int retries = 0;
  int forced_fv = 0;
};

/// Sets up the case, integrates to tend and writes every output into
/// rc.output_dir (when `write` is true).
RunSummary run_case(const RunConfig& rc, bool write = true);

/// MMS h-refinement over rc.conv_levels; writes convergence.csv.
std::vector<ConvergenceRow> run_convergence(const RunConfig& rc, bool write = true);

}  // namespace mixdg
