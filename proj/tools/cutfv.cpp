// Command-line driver: solves the built-in test problems and writes CSV
// reports and two-column plot data.
#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "cutfv/harness.hpp"

namespace fs = std::filesystem;
using namespace cutfv;

namespace {

struct Common {
  std::string config;
  std::string problem;
  std::string h;
  std::string eps;
  std::string nu;
  std::string omega;
  std::string tol;
  std::string cycle;
  std::string curve_bc;
  std::string out = ".";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "key = value configuration file");
  app->add_option("--problem", c.problem, "unit-square, rotated-square, flower, four-disks or file");
  app->add_option("--h", c.h, "grid size or comma list, e.g. 1/32,1/64");
  app->add_option("--eps", c.eps, "merging threshold");
  app->add_option("--nu", c.nu, "smoothing steps nu1,nu2");
  app->add_option("--omega", c.omega, "Jacobi weight");
  app->add_option("--tol", c.tol, "relative residual tolerance");
  app->add_option("--cycle", c.cycle, "v or fmg");
  app->add_option("--curve-bc", c.curve_bc, "condition on the curves: dirichlet or neumann");
  app->add_option("--out", c.out, "output directory");
}

// Flags override the config file.
Config merged(const Common& c) {
  Config cfg = c.config.empty() ? Config{} : read_config_file(c.config);
  auto set = [&](const char* key, const std::string& v) {
    if (!v.empty()) cfg[key] = v;
  };
  set("problem", c.problem);
  set("h", c.h);
  set("eps", c.eps);
  set("omega", c.omega);
  set("tol", c.tol);
  set("cycle", c.cycle);
  set("curve_bc", c.curve_bc);
  if (!c.nu.empty()) {
    const auto comma = c.nu.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("--nu expects nu1,nu2");
    cfg["nu1"] = c.nu.substr(0, comma);
    cfg["nu2"] = c.nu.substr(comma + 1);
  }
  if (cfg.count("output") && c.out == ".") cfg["out"] = cfg["output"];
  else cfg["out"] = c.out;
  return cfg;
}

std::vector<double> grid_sizes(const Config& cfg, const std::string& def) {
  const auto it = cfg.find("h");
  return parse_h_list(it == cfg.end() ? def : it->second);
}

std::ofstream open_out(const Config& cfg, const std::string& name) {
  const fs::path dir = cfg.at("out");
  fs::create_directories(dir);
  std::ofstream f(dir / name);
  if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
  return f;
}

std::string tag(const Problem& p) { return p.name; }

int cmd_solve(const Config& cfg) {
  const Problem p = problem_from_config(cfg);
  const SolverSettings s = settings_from_config(cfg);
  const double h = grid_sizes(cfg, "1/64").front();
  Hierarchy hier = build_hierarchy(p.region, p.rect, p.pde, p.eps, h, s.mg);
  const Level& lv = hier.finest();
  const SolveResult res = solve(hier, lv.sys.b, s.cycle, s.tol, s.max_iters);
  const auto exact = unknown_averages(lv, p.exact.u);
  const auto vol = unknown_volumes(lv);
  const Norms n = error_norms(res.u, exact, vol);

  auto sol = open_out(cfg, tag(p) + "_solution.csv");
  sol << "i,j,x,y,volume,plg,u,exact,error\n" << std::setprecision(17);
  for (int u = 0; u < lv.sys.size(); ++u) {
    const CutCell& c = lv.cells.cells[lv.sys.cell_of[u]];
    const Point2 x = lv.cells.grid.cell_box(c.index).center();
    sol << c.index.i << ',' << c.index.j << ',' << x.x << ',' << x.y << ',' << vol[u] << ',' << (u >= lv.sys.n1)
        << ',' << res.u[u] << ',' << exact[u] << ',' << res.u[u] - exact[u] << '\n';
  }
  auto hist = open_out(cfg, tag(p) + "_residual.dat");
  hist << std::setprecision(17);
  for (size_t k = 0; k < res.history.size(); ++k) hist << k << ' ' << res.history[k] << '\n';

  std::cout << std::setprecision(4) << p.name << " h=" << h << " levels=" << hier.depth()
            << " unknowns=" << lv.sys.size() << " plg=" << lv.sys.n2 << " iterations=" << res.iterations
            << " reduction=" << res.reduction_rate() << " L1=" << n.l1 << " L2=" << n.l2 << " Linf=" << n.linf
            << '\n';
  if (!res.converged) {
    std::cerr << "error: residual did not reach the tolerance\n";
    return 1;
  }
  return 0;
}

int cmd_report(const Config& cfg, bool truncation) {
  const Problem p = problem_from_config(cfg);
  const auto hs = grid_sizes(cfg, p.name == "flower" ? "1/40,1/80,1/160" : "1/32,1/64,1/128");
  const RunReport rep = truncation ? run_truncation(p, hs) : run_convergence(p, hs, settings_from_config(cfg));
  auto f = open_out(cfg, tag(p) + (truncation ? "_truncation.csv" : "_convergence.csv"));
  rep.write_csv(f);
  rep.write_csv(std::cout);
  if (!truncation) {
    auto hist = open_out(cfg, tag(p) + "_histories.dat");
    for (const auto& r : rep.rows) {
      hist << "# h=" << r.h << '\n' << std::setprecision(17);
      for (size_t k = 0; k < r.history.size(); ++k) hist << k << ' ' << r.history[k] << '\n';
      hist << "\n\n";
    }
    for (const auto& r : rep.rows)
      if (!r.converged) {
        std::cerr << "error: h=" << r.h << " did not converge\n";
        return 1;
      }
  }
  return 0;
}

int cmd_radius(const Config& cfg) {
  const Problem p = problem_from_config(cfg);
  const SolverSettings s = settings_from_config(cfg);
  const double h = grid_sizes(cfg, "1/64").front();
  MgOptions mg = s.mg;
  mg.max_levels = 2;
  const Hierarchy hier = build_hierarchy(p.region, p.rect, p.pde, p.eps, h, mg);
  const RadiusResult r = two_grid_radius(hier, s.mg.nu1, s.mg.nu2, s.mg.omega);
  std::cout << std::fixed << std::setprecision(4) << r.rho << '\n';
  auto f = open_out(cfg, tag(p) + "_radius.csv");
  f << "problem,h,nu1,nu2,omega,rho,settled\n"
    << p.name << ',' << h << ',' << s.mg.nu1 << ',' << s.mg.nu2 << ',' << s.mg.omega << ',' << r.rho << ','
    << r.converged << '\n';
  if (!r.converged) std::cerr << "warning: power iteration did not settle\n";
  return 0;
}

int cmd_cond(const Config& cfg, int degree) {
  std::vector<double> hs;
  for (int k = 1; k <= 7; ++k) hs.push_back(std::ldexp(1.0, -k));
  const auto rows = conditioning_study(conditioning_nodes(degree), degree, hs, {0.3, 0.7});
  std::vector<double> ku, ks;
  auto f = open_out(cfg, "cond_degree" + std::to_string(degree) + ".csv");
  f << "h,kappa_unscaled,kappa_scaled\n" << std::setprecision(10);
  std::cout << "h,kappa_unscaled,kappa_scaled\n" << std::setprecision(10);
  for (const auto& r : rows) {
    f << r.h << ',' << r.kappa_unscaled << ',' << r.kappa_scaled << '\n';
    std::cout << r.h << ',' << r.kappa_unscaled << ',' << r.kappa_scaled << '\n';
    ku.push_back(r.kappa_unscaled);
    ks.push_back(r.kappa_scaled);
  }
  std::cout << "# slope unscaled " << std::setprecision(4) << loglog_slope(hs, ku) << ", scaled "
            << loglog_slope(hs, ks) << '\n';
  return 0;
}

int cmd_dump(const Config& cfg) {
  const Problem p = problem_from_config(cfg);
  const double h = grid_sizes(cfg, "1/32").front();
  Grid g = make_grid(p.rect, h);
  const CutCellSet set = build_cut_cells(p.region, g, p.eps);
  const auto cls = classify_sfv(set, p.region, p.pde.coeffs.b);
  auto cells = open_out(cfg, tag(p) + "_cells.csv");
  write_cells_csv(cells, set, &cls);
  auto bnd = open_out(cfg, tag(p) + "_boundary.dat");
  bnd << std::setprecision(17);
  for (const auto& c : p.region.curves) {
    for (const auto& pc : c.pieces)
      for (int k = 0; k < 8; ++k) {
        const Point2 x = pc.eval(k / 8.0);
        bnd << x.x << ' ' << x.y << '\n';
      }
    const Point2 x = c.pieces.front().eval(0.0);
    bnd << x.x << ' ' << x.y << "\n\n";
  }
  int plg = 0;
  for (auto k : cls) plg += k == StencilClass::PLG;
  std::cout << p.name << " h=" << h << " cells=" << set.cells.size() << " plg=" << plg << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fourth-order cut-cell finite-volume elliptic solver"};
  app.set_help_flag("--help", "print this help message and exit");
  app.require_subcommand(1);
  Common common;
  auto* solve_cmd = app.add_subcommand("solve", "solve one problem on one grid");
  auto* conv_cmd = app.add_subcommand("convergence", "solution errors over a grid sweep");
  auto* trunc_cmd = app.add_subcommand("truncation", "truncation errors over a grid sweep");
  auto* rad_cmd = app.add_subcommand("spectral-radius", "two-grid spectral radius by power iteration");
  auto* cond_cmd = app.add_subcommand("cond-study", "sample-matrix conditioning of a fixed lattice");
  auto* dump_cmd = app.add_subcommand("dump-mesh", "write cut cells and boundary samples");
  for (auto* c : {solve_cmd, conv_cmd, trunc_cmd, rad_cmd, dump_cmd}) add_common(c, common);
  int degree = 4;
  std::string cond_out = ".";
  cond_cmd->add_option("--degree", degree, "polynomial degree")->check(CLI::Range(1, 8));
  cond_cmd->add_option("--out", cond_out, "output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (cond_cmd->parsed()) {
      Config cfg;
      cfg["out"] = cond_out;
      return cmd_cond(cfg, degree);
    }
    const Config cfg = merged(common);
    if (solve_cmd->parsed()) return cmd_solve(cfg);
    if (conv_cmd->parsed()) return cmd_report(cfg, false);
    if (trunc_cmd->parsed()) return cmd_report(cfg, true);
    if (rad_cmd->parsed()) return cmd_radius(cfg);
    if (dump_cmd->parsed()) return cmd_dump(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
