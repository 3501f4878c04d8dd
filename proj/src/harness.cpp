#include "mixdg/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace mixdg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a number: '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError("key '" + key + "': not a number: '" + v + "'");
  return d;
}

long to_long(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long d = 0;
  try {
    d = std::stol(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not an integer: '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError("key '" + key + "': not an integer: '" + v + "'");
  return d;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': not a boolean: '" + v + "'");
}

std::array<double, 2> to_pair(const std::string& key, const std::string& v) {
  const auto items = split_list(v);
  if (items.size() != 2) throw ConfigError("key '" + key + "': expected two comma-separated numbers");
  return {to_double(key, items[0]), to_double(key, items[1])};
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

bool periodic_case(const std::string& c) { return c == "mms" || c == "freestream" || c == "sedov"; }

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  os << std::setprecision(16);
  return os;
}

double raw_pressure(const State<2>& s, const GasModel& gas) {
  return (gas.gamma - 1.0) * (s.rhoe() - 0.5 * s.mom_sq() / s.rho());
}

State<2> freestream_state(const GasModel& gas) { return from_primitive<2>(1.2, {0.4, -0.3}, 0.9, gas); }

}  // namespace

// ---- configuration ------------------------------------------------------------------

RunConfig parse_run_config(const std::string& text) {
  RunConfig rc;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string k = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (k == "case") rc.case_name = v;
    else if (k == "mesh_file") rc.mesh_file = v;
    else if (k == "nx") rc.nx = static_cast<int>(to_long(k, v));
    else if (k == "ny") rc.ny = static_cast<int>(to_long(k, v));
    else if (k == "split") rc.split = split_mode_from_string(v);
    else if (k == "split_fraction") rc.split_fraction = to_double(k, v);
    else if (k == "deform_eps") rc.deform_eps = to_double(k, v);
    else if (k == "box_lo") rc.box_lo = to_pair(k, v);
    else if (k == "box_hi") rc.box_hi = to_pair(k, v);
    else if (k == "ngeo") rc.ngeo = static_cast<int>(to_long(k, v));
    else if (k == "seed") rc.seed = static_cast<std::uint64_t>(to_long(k, v));
    else if (k == "N") rc.N = static_cast<int>(to_long(k, v));
    else if (k == "fv_subdiv") rc.fv_n = static_cast<int>(to_long(k, v));
    else if (k == "riemann") rc.riemann = v;
    else if (k == "limiter_beta") rc.limiter_beta = to_double(k, v);
    else if (k == "indicator") rc.indicator = v;
    else if (k == "ind_lower") rc.ind_lower = to_double(k, v);
    else if (k == "ind_upper") rc.ind_upper = to_double(k, v);
    else if (k == "ind_vars") rc.ind_vars = split_list(v);
    else if (k == "cfl") rc.cfl = to_double(k, v);
    else if (k == "rk_scheme") rc.rk_scheme = v;
    else if (k == "gamma") rc.gamma = to_double(k, v);
    else if (k == "mu") rc.mu = to_double(k, v);
    else if (k == "Pr") rc.Pr = to_double(k, v);
    else if (k == "R") rc.R = to_double(k, v);
    else if (k == "tend") rc.tend = to_double(k, v);
    else if (k == "max_steps") rc.max_steps = to_long(k, v);
    else if (k == "output_every") rc.output_every = static_cast<int>(to_long(k, v));
    else if (k == "history_every") rc.history_every = static_cast<int>(to_long(k, v));
    else if (k == "output_dir") rc.output_dir = v;
    else if (k == "write_vtk") rc.write_vtk = to_bool(k, v);
    else if (k == "conv_levels") {
      rc.conv_levels.clear();
      for (const auto& s : split_list(v)) rc.conv_levels.push_back(static_cast<int>(to_long(k, s)));
    } else if (k == "profile_bins") rc.profile_bins = static_cast<int>(to_long(k, v));
    else if (k == "centerline_points") rc.centerline_points = static_cast<int>(to_long(k, v));
    else throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + k + "'");
  }
  rc.validate();
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_run_config(ss.str());
}

void RunConfig::validate() const {
  if (case_name != "mms" && case_name != "sedov" && case_name != "cavity" && case_name != "freestream")
    throw ConfigError("unknown case '" + case_name + "' (expected mms, sedov, cavity or freestream)");
  if (nx < 1 || ny < 0) throw ConfigError("nx must be >= 1 and ny >= 0");
  if (ngeo < 1) throw ConfigError("ngeo must be >= 1");
  if (!(box_hi[0] > box_lo[0] && box_hi[1] > box_lo[1])) throw ConfigError("box_hi must exceed box_lo");
  if (!(tend > 0.0)) throw ConfigError("tend must be positive");
  if (history_every < 1) throw ConfigError("history_every must be >= 1");
  if (conv_levels.size() < 2) throw ConfigError("conv_levels needs at least two levels");
  for (std::size_t i = 1; i < conv_levels.size(); ++i)
    if (conv_levels[i] != 2 * conv_levels[i - 1]) throw ConfigError("conv_levels must double at every level");
  if (profile_bins < 1 || centerline_points < 1) throw ConfigError("profile_bins and centerline_points must be >= 1");
  (void)riemann_from_string(riemann);
  (void)indicator_from_string(indicator);
  (void)rk_scheme_from_string(rk_scheme);
  for (const auto& v : ind_vars) (void)indicator_var_from_string(v);
  if (case_name == "mms" && mu > 0.0) throw ConfigError("the manufactured solution is defined for mu = 0 only");
}

std::map<std::string, std::string> RunConfig::to_map() const {
  std::vector<std::string> lv;
  for (int l : conv_levels) lv.push_back(std::to_string(l));
  return {{"case", case_name},
          {"mesh_file", mesh_file},
          {"nx", std::to_string(nx)},
          {"ny", std::to_string(ny == 0 ? nx : ny)},
          {"split", to_string(split)},
          {"split_fraction", fmt(split_fraction)},
          {"deform_eps", fmt(deform_eps)},
          {"box_lo", fmt(box_lo[0]) + "," + fmt(box_lo[1])},
          {"box_hi", fmt(box_hi[0]) + "," + fmt(box_hi[1])},
          {"ngeo", std::to_string(ngeo)},
          {"seed", std::to_string(seed)},
          {"N", std::to_string(N)},
          {"fv_subdiv", std::to_string(fv_n == 0 ? 2 * N + 1 : fv_n)},
          {"riemann", riemann},
          {"limiter_beta", fmt(limiter_beta)},
          {"indicator", indicator},
          {"ind_lower", fmt(ind_lower)},
          {"ind_upper", fmt(ind_upper)},
          {"ind_vars", join(ind_vars)},
          {"cfl", fmt(cfl)},
          {"rk_scheme", rk_scheme},
          {"gamma", fmt(gamma)},
          {"mu", fmt(mu < 0.0 ? (case_name == "cavity" ? 0.01 : 0.0) : mu)},
          {"Pr", fmt(Pr)},
          {"R", fmt(R)},
          {"tend", fmt(tend)},
          {"max_steps", std::to_string(max_steps)},
          {"output_every", std::to_string(output_every)},
          {"history_every", std::to_string(history_every)},
          {"output_dir", output_dir},
          {"write_vtk", write_vtk ? "true" : "false"},
          {"conv_levels", join(lv)},
          {"profile_bins", std::to_string(profile_bins)},
          {"centerline_points", std::to_string(centerline_points)}};
}

Mesh build_mesh(const RunConfig& rc) {
  if (!rc.mesh_file.empty()) {
    std::ifstream is(rc.mesh_file);
    if (!is) throw ConfigError("cannot read mesh file '" + rc.mesh_file + "'");
    return read_mesh(is);
  }
  StructuredSpec spec;
  spec.dim = 2;
  spec.n = {rc.nx, rc.ny == 0 ? rc.nx : rc.ny, 1};
  spec.box.lo = {rc.box_lo[0], rc.box_lo[1], 0.0};
  spec.box.hi = {rc.box_hi[0], rc.box_hi[1], 1.0};
  spec.split = rc.split;
  spec.split_fraction = rc.split_fraction;
  spec.seed = rc.seed;
  spec.ngeo = rc.ngeo;
  const bool per = periodic_case(rc.case_name);
  spec.periodic = {per, per, false};
  auto mesh = generate_structured(spec);
  if (rc.deform_eps != 0.0) deform_sinusoidal(mesh, DeformationSpec{rc.deform_eps, 1.0, 2});
  return mesh;
}

SolverConfig build_solver_config(const RunConfig& rc, const Mesh& mesh) {
  SolverConfig c;
  c.N = rc.N;
  c.fv_n = rc.fv_n;
  c.riemann = riemann_from_string(rc.riemann);
  c.beta = rc.limiter_beta;
  c.gas.gamma = rc.gamma;
  c.gas.mu = rc.mu < 0.0 ? (rc.case_name == "cavity" ? 0.01 : 0.0) : rc.mu;
  c.gas.Pr = rc.Pr;
  c.gas.R = rc.R;
  c.indicator.kind = indicator_from_string(rc.indicator);
  c.indicator.lower = rc.ind_lower;
  c.indicator.upper = rc.ind_upper;
  c.indicator.vars.clear();
  for (const auto& v : rc.ind_vars) c.indicator.vars.push_back(indicator_var_from_string(v));
  c.cfl = rc.cfl;
  c.rk = rk_scheme_from_string(rc.rk_scheme);
  const GasModel gas = c.gas;
  if (rc.case_name == "cavity") {
    c.bcs = cavity_bcs(mesh);
  } else {
    BoundaryCondition bc;
    bc.kind = BoundaryCondition::Kind::Dirichlet;
    if (rc.case_name == "mms") {
      bc.state = [](const Vec2& x, double t) { return mms_exact(x, t); };
      c.source = [gas](const Vec2& x, double t) { return mms_source(x, t, gas); };
    } else if (rc.case_name == "sedov") {
      bc.state = [gas](const Vec2&, double) { return sedov_background(gas); };
    } else {
      bc.state = [gas](const Vec2&, double) { return freestream_state(gas); };
    }
    c.bcs.assign(mesh.bc_names.size(), bc);
  }
  return c;
}

// ---- cases -----------------------------------------------------------------------

State<2> mms_exact(const Vec2& x, double t) {
  const double rho = 2.0 + 0.1 * std::sin(2.0 * std::numbers::pi * (x[0] + x[1] - t));
  return State<2>(Cons<2>{rho, rho, rho, rho * rho});
}

Cons<2> mms_source(const Vec2& x, double t, const GasModel& gas) {
  // rho_t = -g, rho_x = rho_y = g; u = v = 1; p = (gamma-1)(rho^2 - rho).
  const double ph = 2.0 * std::numbers::pi * (x[0] + x[1] - t);
  const double rho = 2.0 + 0.1 * std::sin(ph);
  const double g = 0.2 * std::numbers::pi * std::cos(ph);
  const double gm = gas.gamma - 1.0;
  const double smom = g * (1.0 + gm * (2.0 * rho - 1.0));
  return {g, smom, smom, g * (2.0 * rho + 2.0 * gm * (2.0 * rho - 1.0))};
}

double sedov_dx_fv(const RunConfig& rc, int fv_n) {
  const int ny = rc.ny == 0 ? rc.nx : rc.ny;
  const double dx = (rc.box_hi[0] - rc.box_lo[0]) / (rc.nx * fv_n);
  const double dy = (rc.box_hi[1] - rc.box_lo[1]) / (ny * fv_n);
  return 0.5 * (dx + dy);
}

State<2> sedov_background(const GasModel& gas) {
  (void)gas;
  return State<2>(Cons<2>{1.0, 0.0, 0.0, kSedovBackground});
}

SedovSeed sedov_init(Solver& s, double dx_fv) {
  SedovSeed seed;
  seed.dx_fv = dx_fv;
  std::vector<std::vector<char>> mark(s.n_elements());
  for (int e = 0; e < s.n_elements(); ++e) {
    const auto& sg = s.subcells(e);
    mark[e].assign(s.n_subcells(e), 0);
    for (int k = 0; k < s.n_subcells(e); ++k) {
      if (std::abs(sg.xc[k][0]) <= dx_fv && std::abs(sg.xc[k][1]) <= dx_fv) {
        mark[e][k] = 1;
        ++seed.seeded_subcells;
        seed.seeded_area += sg.area[k];
      }
    }
  }
  if (seed.seeded_subcells == 0) throw ConfigError("sedov: no subcell barycenter within dx_fv of the origin");
  // On an undistorted grid with a vertex at the origin the criterion selects a
  // 2x2 block of subcells, i.e. a total energy of 4 * kSedovEnergy. Deformed
  // subcells select a mesh-dependent area, so the density is normalized to
  // keep that total.
  seed.rhoe = kSedovSeededEnergy / seed.seeded_area;
  const auto bg = sedov_background(s.config().gas);
  for (int e = 0; e < s.n_elements(); ++e) {
    std::vector<State<2>> means(s.n_subcells(e), bg);
    for (int k = 0; k < s.n_subcells(e); ++k)
      if (mark[e][k]) means[k].u[3] = seed.rhoe;
    s.set_subcell_means(e, means);
  }
  return seed;
}

std::vector<BoundaryCondition> cavity_bcs(const Mesh& mesh) {
  std::vector<BoundaryCondition> bcs;
  for (const auto& name : mesh.bc_names) {
    BoundaryCondition bc;
    bc.kind = BoundaryCondition::Kind::Wall;
    if (name == "ymax" || name == "lid") bc.wall_velocity = {1.0, 0.0};
    bcs.push_back(bc);
  }
  return bcs;
}

State<2> cavity_initial(const GasModel& gas) { return from_primitive<2>(1.0, {0.0, 0.0}, kCavityPressure, gas); }

// ---- post-processing -----------------------------------------------------------

std::array<double, 4> conservation_error(const std::vector<std::array<double, 4>>& history) {
  std::array<double, 4> err{};
  if (history.empty()) return err;
  for (const auto& h : history)
    for (int v = 0; v < 4; ++v) err[v] = std::max(err[v], std::abs(h[v] - history.front()[v]));
  return err;
}

std::vector<EocValue> eoc(const std::vector<double>& errors) {
  std::vector<EocValue> out;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    if (errors[i] == 0.0 && errors[i + 1] == 0.0)
      out.push_back({0.0, true});
    else
      out.push_back({std::log2(errors[i] / errors[i + 1]), false});
  }
  return out;
}

std::vector<RadialBin> radial_profile(const Solver& s, int bins, double rmax, double period) {
  std::vector<double> mass(bins, 0.0), wsum(bins, 0.0);
  auto add = [&](const Vec2& x, double rho, double w) {
    double dx = x[0], dy = x[1];
    if (period > 0.0) {
      dx -= period * std::round(dx / period);
      dy -= period * std::round(dy / period);
    }
    const double r = std::hypot(dx, dy);
    if (r >= rmax) return;
    const int b = std::min(bins - 1, static_cast<int>(r / rmax * bins));
    mass[b] += w * rho;
    wsum[b] += w;
  };
  const auto& ref = s.reference();
  const int n = ref.n;
  for (int e = 0; e < s.n_elements(); ++e) {
    const auto& g = s.geometry()[e];
    if (s.regimes()[e] == Regime::DG) {
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const int q = i + n * j;
          add(g.x[q], s.dg_node(e, q).rho(), ref.q.weights[i] * ref.q.weights[j] * g.detj[q]);
        }
    } else {
      const auto& sg = s.subcells(e);
      for (int k = 0; k < s.n_subcells(e); ++k) add(sg.xc[k], s.fv_mean(e, k).rho(), sg.area[k]);
    }
  }
  std::vector<RadialBin> out;
  for (int b = 0; b < bins; ++b)
    if (wsum[b] > 0.0) out.push_back({(b + 0.5) * rmax / bins, mass[b] / wsum[b]});
  return out;
}

std::vector<LinePoint> centerline_u(const Solver& s, double x0, int npts, double ylo, double yhi) {
  std::vector<LinePoint> out;
  for (int i = 0; i < npts; ++i) {
    const double y = ylo + (yhi - ylo) * (i + 1.0) / (npts + 1.0);
    try {
      const auto st = s.sample({x0, y});
      out.push_back({y, st.mom(0) / st.rho()});
    } catch (const std::out_of_range&) {
      // point outside a curved domain boundary
    }
  }
  return out;
}

// ---- output ------------------------------------------------------------------------

void write_vtk(const Solver& s, const std::filesystem::path& path) {
  const auto& gas = s.config().gas;
  const auto& ref = s.reference();
  const int n = ref.n;
  const int np = n + 1;  // equidistant plot points per direction
  std::vector<Vec2> pts;
  std::vector<State<2>> vals;
  std::vector<std::vector<int>> cells;
  std::vector<int> cell_regime, cell_elem;
  std::vector<double> plot(np);
  for (int i = 0; i < np; ++i) plot[i] = -1.0 + 2.0 * i / (np - 1);
  for (int e = 0; e < s.n_elements(); ++e) {
    const auto& g = s.geometry()[e];
    if (s.regimes()[e] == Regime::DG) {
      std::vector<std::vector<double>> la(np);
      for (int i = 0; i < np; ++i) la[i] = lagrange_values(ref.q.nodes, plot[i]);
      auto value = [&](int i, int j) {
        State<2> st;
        for (int jj = 0; jj < n; ++jj)
          for (int ii = 0; ii < n; ++ii) {
            const auto nd = s.dg_node(e, ii + n * jj);
            for (int v = 0; v < 4; ++v) st.u[v] += la[i][ii] * la[j][jj] * nd.u[v];
          }
        return st;
      };
      for (int j = 0; j + 1 < np; ++j)
        for (int i = 0; i + 1 < np; ++i) {
          std::vector<int> c;
          for (auto [di, dj] : {std::pair{0, 0}, {1, 0}, {1, 1}, {0, 1}}) {
            c.push_back(static_cast<int>(pts.size()));
            pts.push_back(g.map.eval(plot[i + di], plot[j + dj]));
            vals.push_back(value(i + di, j + dj));
          }
          cells.push_back(c);
          cell_regime.push_back(0);
          cell_elem.push_back(e);
        }
    } else {
      const auto& d = s.decomposition(g.type);
      for (int k = 0; k < s.n_subcells(e); ++k) {
        std::vector<int> c;
        for (int id : d.cells[k].nodes) {
          c.push_back(static_cast<int>(pts.size()));
          pts.push_back(g.map.eval_poly({d.nodes[id][0], d.nodes[id][1]}));
          vals.push_back(s.fv_mean(e, k));
        }
        cells.push_back(c);
        cell_regime.push_back(1);
        cell_elem.push_back(e);
      }
    }
  }
  auto os = open_out(path);
  os << "# vtk DataFile Version 3.0\nmixdg solution t=" << s.time() << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << pts.size() << " double\n";
  for (const auto& p : pts) os << p[0] << ' ' << p[1] << " 0\n";
  std::size_t total = 0;
  for (const auto& c : cells) total += c.size() + 1;
  os << "CELLS " << cells.size() << ' ' << total << "\n";
  for (const auto& c : cells) {
    os << c.size();
    for (int id : c) os << ' ' << id;
    os << "\n";
  }
  os << "CELL_TYPES " << cells.size() << "\n";
  for (const auto& c : cells) os << (c.size() == 3 ? 5 : 9) << "\n";
  os << "CELL_DATA " << cells.size() << "\nSCALARS regime int 1\nLOOKUP_TABLE default\n";
  for (int r : cell_regime) os << r << "\n";
  os << "SCALARS element int 1\nLOOKUP_TABLE default\n";
  for (int r : cell_elem) os << r << "\n";
  os << "POINT_DATA " << pts.size() << "\nSCALARS rho double 1\nLOOKUP_TABLE default\n";
  for (const auto& v : vals) os << v.rho() << "\n";
  os << "SCALARS p double 1\nLOOKUP_TABLE default\n";
  for (const auto& v : vals) os << raw_pressure(v, gas) << "\n";
  os << "VECTORS velocity double\n";
  for (const auto& v : vals) os << v.mom(0) / v.rho() << ' ' << v.mom(1) / v.rho() << " 0\n";
  if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void write_mesh_vtk(const Mesh& mesh, const std::filesystem::path& path) {
  if (mesh.dim != 2) throw std::invalid_argument("write_mesh_vtk: 2D meshes only");
  const auto geo = build_geometry(mesh, 1, gauss_legendre(2));
  const int seg = std::max(1, mesh.ngeo) * 4;  // samples per edge
  std::vector<std::vector<Vec2>> polys;
  for (const auto& g : geo) {
    std::vector<Vec2> corners;
    if (g.type == ElementType::Quad)
      corners = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    else
      corners = {{-1, -1}, {1, -1}, {-1, 1}};
    std::vector<Vec2> poly;
    for (std::size_t c = 0; c < corners.size(); ++c) {
      const auto& a = corners[c];
      const auto& b = corners[(c + 1) % corners.size()];
      for (int k = 0; k < seg; ++k) {
        const double t = static_cast<double>(k) / seg;
        poly.push_back(g.map.eval_poly({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])}));
      }
    }
    polys.push_back(std::move(poly));
  }
  auto os = open_out(path);
  std::size_t npts = 0, total = 0;
  for (const auto& p : polys) {
    npts += p.size();
    total += p.size() + 1;
  }
  os << "# vtk DataFile Version 3.0\nmixdg mesh\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS " << npts << " double\n";
  for (const auto& p : polys)
    for (const auto& x : p) os << x[0] << ' ' << x[1] << " 0\n";
  os << "CELLS " << polys.size() << ' ' << total << "\n";
  std::size_t off = 0;
  for (const auto& p : polys) {
    os << p.size();
    for (std::size_t i = 0; i < p.size(); ++i) os << ' ' << off + i;
    os << "\n";
    off += p.size();
  }
  os << "CELL_TYPES " << polys.size() << "\n";
  for (std::size_t i = 0; i < polys.size(); ++i) os << "7\n";
  os << "CELL_DATA " << polys.size() << "\nSCALARS type int 1\nLOOKUP_TABLE default\n";
  for (const auto& g : geo) os << (g.type == ElementType::Quad ? 0 : 1) << "\n";
  os << "SCALARS element int 1\nLOOKUP_TABLE default\n";
  for (std::size_t i = 0; i < geo.size(); ++i) os << i << "\n";
  if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void write_radial_csv(const std::vector<RadialBin>& prof, const std::filesystem::path& path) {
  auto os = open_out(path);
  os << "r,rho\n";
  for (const auto& b : prof) os << b.r << ',' << b.rho << "\n";
  if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void write_centerline_csv(const std::vector<LinePoint>& line, const std::filesystem::path& path) {
  auto os = open_out(path);
  os << "y,u\n";
  for (const auto& p : line) os << p.y << ',' << p.u << "\n";
  if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void write_history_csv(const std::vector<HistoryRow>& rows, const std::filesystem::path& path) {
  auto os = open_out(path);
  os << kHistoryHeader << "\n";
  for (const auto& r : rows) {
    os << r.t << ',' << r.step << ',' << r.dt;
    for (double v : r.integrals) os << ',' << v;
    os << ',' << r.n_dg << ',' << r.n_fv << "\n";
  }
  if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const std::filesystem::path& path) {
  auto os = open_out(path);
  os << kConvergenceHeader << "\n";
  for (const auto& r : rows) {
    os << r.level << ',' << r.n << ',' << r.h << ',' << r.l2_rho << ',';
    if (r.eoc) {
      if (r.eoc->exact)
        os << "exact";
      else
        os << r.eoc->order;
    }
    os << "\n";
  }
  if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void write_manifest(const RunConfig& rc, const std::filesystem::path& path,
                    const std::map<std::string, std::string>& extra) {
  nlohmann::ordered_json j;
  auto& c = j["config"];
  for (const auto& [k, v] : rc.to_map()) c[k] = v;
  for (const auto& [k, v] : extra) j["run"][k] = v;
  auto os = open_out(path);
  os << j.dump(2) << "\n";
  if (!os) throw std::runtime_error("write failed for '" + path.string() + "'");
}

// ---- drivers -----------------------------------------------------------------------

RunSummary run_case(const RunConfig& rc, bool write) {
  rc.validate();
  const auto mesh = build_mesh(rc);
  auto cfg = build_solver_config(rc, mesh);
  Solver s(mesh, cfg);
  const auto& gas = s.config().gas;
  std::map<std::string, std::string> extra;
  extra["gas.gamma"] = fmt(gas.gamma);
  extra["gas.mu"] = fmt(gas.mu);
  extra["gas.Pr"] = fmt(gas.Pr);
  extra["gas.R"] = fmt(gas.R);
  extra["n_elements"] = std::to_string(s.n_elements());
  extra["n_quads"] = std::to_string(mesh.count(ElementType::Quad));
  extra["n_triangles"] = std::to_string(mesh.count(ElementType::Triangle));
  if (rc.case_name == "mms") {
    s.initialize([](const Vec2& x) { return mms_exact(x, 0.0); });
  } else if (rc.case_name == "sedov") {
    const auto seed = sedov_init(s, sedov_dx_fv(rc, s.fv_n()));
    extra["sedov.dx_fv"] = fmt(seed.dx_fv);
    extra["sedov.seeded_subcells"] = std::to_string(seed.seeded_subcells);
    extra["sedov.rhoe"] = fmt(seed.rhoe);
  } else if (rc.case_name == "cavity") {
    s.initialize([&](const Vec2&) { return cavity_initial(gas); });
  } else {
    s.initialize([&](const Vec2&) { return freestream_state(gas); });
  }
  s.apply_initial_regimes();

  const std::filesystem::path dir(rc.output_dir);
  if (write) {
    std::filesystem::create_directories(dir);
    write_manifest(rc, dir / "manifest.json", extra);
    if (rc.write_vtk) write_vtk(s, dir / "solution_000000.vtk");
  }

  RunSummary sum;
  std::vector<std::array<double, 4>> integrals{s.integrals()};
  auto row = [&](double dt) {
    return HistoryRow{s.time(), sum.steps, dt, integrals.back(), s.count(Regime::DG), s.count(Regime::FV)};
  };
  sum.history.push_back(row(0.0));
  const double eps_t = 1e-12 * rc.tend;
  while (s.time() < rc.tend - eps_t && (rc.max_steps == 0 || sum.steps < rc.max_steps)) {
    const auto rep = s.advance(rc.tend - s.time());
    ++sum.steps;
    sum.retries += rep.retries;
    sum.forced_fv += rep.forced_fv;
    integrals.push_back(s.integrals());
    const bool last = !(s.time() < rc.tend - eps_t) || (rc.max_steps != 0 && sum.steps >= rc.max_steps);
    if (sum.steps % rc.history_every == 0 || last) sum.history.push_back(row(rep.dt));
    if (write && rc.write_vtk && rc.output_every > 0 && sum.steps % rc.output_every == 0 && !last) {
      std::ostringstream name;
      name << "solution_" << std::setw(6) << std::setfill('0') << sum.steps << ".vtk";
      write_vtk(s, dir / name.str());
    }
  }
  sum.t = s.time();
  sum.conservation = conservation_error(integrals);
  if (rc.case_name == "mms") sum.l2_rho = s.l2_error([](const Vec2& x, double t) { return mms_exact(x, t); }, 0);
  if (write) {
    write_history_csv(sum.history, dir / "history.csv");
    if (rc.write_vtk) {
      std::ostringstream name;
      name << "solution_" << std::setw(6) << std::setfill('0') << sum.steps << ".vtk";
      write_vtk(s, dir / name.str());
    }
    if (rc.case_name == "sedov") {
      const double period = rc.box_hi[0] - rc.box_lo[0];
      write_radial_csv(radial_profile(s, rc.profile_bins, 0.5 * period, period), dir / "radial.csv");
    }
    if (rc.case_name == "cavity") {
      write_centerline_csv(centerline_u(s, 0.5 * (rc.box_lo[0] + rc.box_hi[0]), rc.centerline_points,
                                        rc.box_lo[1], rc.box_hi[1]),
                           dir / "centerline.csv");
    }
  }
  return sum;
}

std::vector<ConvergenceRow> run_convergence(const RunConfig& rc, bool write) {
  if (rc.case_name != "mms") throw ConfigError("convtest requires case = mms");
  std::vector<ConvergenceRow> rows;
  std::vector<double> errs;
  for (std::size_t l = 0; l < rc.conv_levels.size(); ++l) {
    RunConfig r = rc;
    r.nx = rc.conv_levels[l];
    r.ny = 0;
    const auto sum = run_case(r, false);
    ConvergenceRow row;
    row.level = static_cast<int>(l);
    row.n = r.nx;
    row.h = (rc.box_hi[0] - rc.box_lo[0]) / r.nx;
    row.l2_rho = sum.l2_rho;
    errs.push_back(sum.l2_rho);
    rows.push_back(row);
  }
  const auto orders = eoc(errs);
  for (std::size_t i = 0; i < orders.size(); ++i) rows[i + 1].eoc = orders[i];
  if (write) {
    const std::filesystem::path dir(rc.output_dir);
    std::filesystem::create_directories(dir);
    write_convergence_csv(rows, dir / "convergence.csv");
    write_manifest(rc, dir / "manifest.json", {{"mode", "convtest"}});
  }
  return rows;
}

}  // namespace mixdg
