#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cutfv/multigrid.hpp"
#include "cutfv/problems.hpp"

namespace cutfv {

struct Norms {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

// Volume-weighted L1 and L2 normalized by the total volume, plain max for
// Linf.  All three vectors are indexed alike.
Norms error_norms(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& volumes);

// Exact cell averages, volumes and the per-unknown vectors of a system.
std::vector<double> unknown_averages(const Level& lv, const std::function<double(Point2)>& f);
std::vector<double> unknown_volumes(const Level& lv);

struct CellCounts {
  int regular = 0;
  int irregular = 0;
  int plg = 0;
  int unknowns = 0;
};

CellCounts count_cells(const Level& lv);

struct RunRow {
  double h = 0.0;
  Norms err;
  CellCounts cells;
  int levels = 0;
  int iterations = 0;
  bool converged = false;
  double rate = 0.0;  // per-cycle residual reduction
  double max_kappa = 0.0;
  double seconds = 0.0;
  std::vector<double> history;
};

struct RunReport {
  std::string problem;
  std::string quantity;  // "solution" or "truncation"
  std::vector<RunRow> rows;

  // log2(e_h / e_{h/2}) between rows i and i+1, per norm.
  Norms rate(size_t i) const;
  void write_csv(std::ostream& out) const;
};

struct SolverSettings {
  MgOptions mg;
  CycleKind cycle = CycleKind::FMG;
  double tol = 1e-12;
  int max_iters = 50;
};

RunReport run_convergence(const Problem& p, const std::vector<double>& hs, const SolverSettings& s = {});
RunReport run_truncation(const Problem& p, const std::vector<double>& hs);

// Truncation error per unknown: A u_exact - b.
std::vector<double> truncation_error(const Level& lv, const ExactSolution& e);

// "1/32,1/64" or "0.03125".
std::vector<double> parse_h_list(const std::string& s);

// Lines "key = value"; '#' starts a comment.
using Config = std::map<std::string, std::string>;
Config read_config(std::istream& in);
Config read_config_file(const std::string& path);

BcKind parse_bc(const std::string& s);

// Problem and solver settings from a config.  Keys: problem, boundary,
// exact, a, b, c, frame_bc, curve_bc, eps, nu1, nu2, omega, tol, cycle,
// max_iters.
Problem problem_from_config(const Config& c);
SolverSettings settings_from_config(const Config& c);

}  // namespace cutfv
