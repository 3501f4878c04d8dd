// Command-line driver: solve / convtest / mesh on a key-value configuration file.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "mixdg/harness.hpp"

using namespace mixdg;

namespace {

constexpr int kExitAdmissibility = 2;
constexpr int kExitConfig = 3;

RunConfig load(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  std::string text = ss.str() + "\n";
  for (const auto& o : overrides) text += o + "\n";
  return parse_run_config(text);
}

void print_summary(const RunSummary& s) {
  std::cout << "steps " << s.steps << "  t " << s.t << "  retries " << s.retries << "  forced_fv " << s.forced_fv
            << "\n";
  std::cout << "conservation error rho " << s.conservation[0] << "  rhou " << s.conservation[1] << "  rhov "
            << s.conservation[2] << "  rhoe " << s.conservation[3] << "\n";
  if (s.l2_rho >= 0.0) std::cout << "l2 error rho " << s.l2_rho << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixdg: DG / FV-subcell compressible flow solver"};
  app.require_subcommand(1);
  std::string config;
  std::vector<std::string> overrides;

  auto* solve = app.add_subcommand("solve", "run a case to tend and write outputs");
  auto* conv = app.add_subcommand("convtest", "manufactured-solution h-refinement study");
  auto* mesh = app.add_subcommand("mesh", "generate the configured mesh and write it with an outline VTK");
  for (auto* sc : {solve, conv, mesh}) {
    sc->add_option("config", config, "key-value configuration file")->required();
    sc->add_option("--set", overrides, "extra 'key=value' lines applied after the file");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const auto rc = load(config, overrides);
    if (*solve) {
      std::cout << "case " << rc.case_name << " -> " << rc.output_dir << "\n";
      print_summary(run_case(rc));
    } else if (*conv) {
      const auto rows = run_convergence(rc);
      std::cout << kConvergenceHeader << "\n";
      for (const auto& r : rows) {
        std::cout << r.level << ',' << r.n << ',' << r.h << ',' << r.l2_rho << ',';
        if (r.eoc) std::cout << (r.eoc->exact ? std::string("exact") : std::to_string(r.eoc->order));
        std::cout << "\n";
      }
    } else {
      const auto m = build_mesh(rc);
      const std::filesystem::path dir(rc.output_dir);
      std::filesystem::create_directories(dir);
      std::ofstream os(dir / "mesh.txt");
      if (!os) throw std::runtime_error("cannot write " + (dir / "mesh.txt").string());
      write_mesh(os, m);
      write_mesh_vtk(m, dir / "mesh.vtk");
      std::cout << "elements " << m.n_elements() << " (quads " << m.count(ElementType::Quad) << ", triangles "
                << m.count(ElementType::Triangle) << "), faces " << m.faces.size() << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const MeshError& e) {
    std::cerr << "mesh error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const AdmissibilityError& e) {
    std::cerr << "admissibility failure";
    if (e.element() >= 0) std::cerr << " in element " << e.element();
    std::cerr << ": " << e.what() << "\n";
    return kExitAdmissibility;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
