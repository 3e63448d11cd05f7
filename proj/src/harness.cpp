#include "cutfv/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cutfv {

Norms error_norms(const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& volumes) {
  if (a.size() != b.size() || a.size() != volumes.size()) throw std::invalid_argument("fields on different cell sets");
  Norms n;
  double vol = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double e = std::abs(a[i] - b[i]);
    n.l1 += e * volumes[i];
    n.l2 += e * e * volumes[i];
    n.linf = std::max(n.linf, e);
    vol += volumes[i];
  }
  if (vol > 0.0) {
    n.l1 /= vol;
    n.l2 = std::sqrt(n.l2 / vol);
  }
  return n;
}

std::vector<double> unknown_averages(const Level& lv, const std::function<double(Point2)>& f) {
  std::vector<double> out(lv.sys.size());
  for (int u = 0; u < lv.sys.size(); ++u) out[u] = integrate_average(lv.cells.cells[lv.sys.cell_of[u]].geometry, f);
  return out;
}

std::vector<double> unknown_volumes(const Level& lv) {
  std::vector<double> out(lv.sys.size());
  for (int u = 0; u < lv.sys.size(); ++u) out[u] = lv.cells.cells[lv.sys.cell_of[u]].volume();
  return out;
}

CellCounts count_cells(const Level& lv) {
  CellCounts c;
  for (const auto& cell : lv.cells.cells) (cell.kind == CellKind::Regular ? c.regular : c.irregular)++;
  c.plg = lv.sys.n2;
  c.unknowns = lv.sys.size();
  return c;
}

Norms RunReport::rate(size_t i) const {
  const Norms& a = rows.at(i).err;
  const Norms& b = rows.at(i + 1).err;
  const double k = std::log2(rows[i].h / rows[i + 1].h);
  return {std::log2(a.l1 / b.l1) / k, std::log2(a.l2 / b.l2) / k, std::log2(a.linf / b.linf) / k};
}

void RunReport::write_csv(std::ostream& out) const {
  out << "problem,quantity,h,L1,rate_L1,L2,rate_L2,Linf,rate_Linf,regular,irregular,plg,unknowns,levels,iterations,"
         "converged,reduction,max_kappa\n";
  out << std::setprecision(6);
  for (size_t i = 0; i < rows.size(); ++i) {
    const RunRow& r = rows[i];
    out << problem << ',' << quantity << ',' << r.h << ',';
    Norms rt;
    const bool has_rate = i > 0;
    if (has_rate) rt = rate(i - 1);
    auto field = [&](double e, double q) {
      out << std::scientific << e << std::defaultfloat << ',';
      if (has_rate) out << std::fixed << std::setprecision(2) << q << std::defaultfloat << std::setprecision(6);
      out << ',';
    };
    field(r.err.l1, rt.l1);
    field(r.err.l2, rt.l2);
    field(r.err.linf, rt.linf);
    out << r.cells.regular << ',' << r.cells.irregular << ',' << r.cells.plg << ',' << r.cells.unknowns << ','
        << r.levels << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ',' << std::fixed
        << std::setprecision(4) << r.rate << std::defaultfloat << std::setprecision(6) << ',' << std::scientific
        << r.max_kappa << std::defaultfloat << '\n';
  }
}

namespace {

double max_kappa(const Level& lv) {
  double k = 0.0;
  for (const auto& l : lv.sys.lattices) k = std::max(k, l.kappa);
  return k;
}

template <class F>
std::vector<RunRow> sweep(const std::vector<double>& hs, F&& one) {
  std::vector<std::future<RunRow>> jobs;
  for (double h : hs) jobs.push_back(std::async(std::launch::async, one, h));
  std::vector<RunRow> rows;
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

}  // namespace

RunReport run_convergence(const Problem& p, const std::vector<double>& hs, const SolverSettings& s) {
  RunReport rep;
  rep.problem = p.name;
  rep.quantity = "solution";
  rep.rows = sweep(hs, [&](double h) {
    const auto t0 = std::chrono::steady_clock::now();
    Hierarchy hier = build_hierarchy(p.region, p.rect, p.pde, p.eps, h, s.mg);
    const Level& lv = hier.finest();
    SolveResult res = solve(hier, lv.sys.b, s.cycle, s.tol, s.max_iters);
    RunRow row;
    row.h = h;
    row.err = error_norms(res.u, unknown_averages(lv, p.exact.u), unknown_volumes(lv));
    row.cells = count_cells(lv);
    row.levels = hier.depth();
    row.iterations = res.iterations;
    row.converged = res.converged;
    row.rate = res.reduction_rate();
    row.max_kappa = max_kappa(lv);
    row.history = res.history;
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
  });
  return rep;
}

std::vector<double> truncation_error(const Level& lv, const ExactSolution& e) {
  const std::vector<double> ue = unknown_averages(lv, e.u);
  std::vector<double> r;
  lv.sys.residual(ue, lv.sys.b, r);
  for (auto& v : r) v = -v;
  return r;
}

RunReport run_truncation(const Problem& p, const std::vector<double>& hs) {
  RunReport rep;
  rep.problem = p.name;
  rep.quantity = "truncation";
  rep.rows = sweep(hs, [&](double h) {
    const auto t0 = std::chrono::steady_clock::now();
    const Level lv = build_level(p.region, p.rect, p.pde, p.eps, h);
    const std::vector<double> tau = truncation_error(lv, p.exact);
    RunRow row;
    row.h = h;
    row.err = error_norms(tau, std::vector<double>(tau.size(), 0.0), unknown_volumes(lv));
    row.cells = count_cells(lv);
    row.levels = 1;
    row.converged = true;
    row.max_kappa = max_kappa(lv);
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
  });
  return rep;
}

std::vector<double> parse_h_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(std::remove_if(tok.begin(), tok.end(), ::isspace), tok.end());
    if (tok.empty()) continue;
    const auto slash = tok.find('/');
    try {
      if (slash == std::string::npos) {
        out.push_back(std::stod(tok));
      } else {
        out.push_back(std::stod(tok.substr(0, slash)) / std::stod(tok.substr(slash + 1)));
      }
    } catch (const std::logic_error&) {
      throw std::invalid_argument("bad grid size '" + tok + "'");
    }
    if (!(out.back() > 0.0)) throw std::invalid_argument("grid size must be positive");
  }
  if (out.empty()) throw std::invalid_argument("empty grid size list");
  return out;
}

Config read_config(std::istream& in) {
  Config c;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    c[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return c;
}

Config read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config '" + path + "'");
  return read_config(in);
}

BcKind parse_bc(const std::string& s) {
  if (s == "dirichlet") return BcKind::Dirichlet;
  if (s == "neumann") return BcKind::Neumann;
  if (s == "robin") return BcKind::Robin;
  if (s == "periodic") return BcKind::Periodic;
  throw std::invalid_argument("unknown boundary condition '" + s + "'");
}

namespace {

double number(const Config& c, const std::string& key, double def) {
  const auto it = c.find(key);
  if (it == c.end()) return def;
  try {
    if (it->second.find('/') != std::string::npos) return parse_h_list(it->second).front();
    return std::stod(it->second);
  } catch (const std::logic_error&) {
    throw std::invalid_argument("config key '" + key + "' is not a number");
  }
}

std::string text(const Config& c, const std::string& key, const std::string& def) {
  const auto it = c.find(key);
  return it == c.end() ? def : it->second;
}

}  // namespace

Problem problem_from_config(const Config& c) {
  const std::string name = text(c, "problem", "unit-square");
  Problem p;
  if (name == "file") {
    const EllipticCoeffs k{number(c, "a", 1.0), number(c, "b", 0.0), number(c, "c", 1.0)};
    if (!k.elliptic()) throw std::invalid_argument("coefficients are not elliptic");
    p = file_problem(text(c, "boundary", ""), text(c, "exact", "sinpix-sinpiy"), k,
                     parse_bc(text(c, "frame_bc", "dirichlet")), parse_bc(text(c, "curve_bc", "dirichlet")),
                     number(c, "eps", 0.1));
  } else {
    ProblemOptions opt;
    opt.curve_bc = parse_bc(text(c, "curve_bc", name == "flower" ? "neumann" : "dirichlet"));
    p = make_problem(name, opt);
    if (name == "flower" && opt.curve_bc != BcKind::Neumann)
      p.pde.bc.curves.assign(1, condition_from(opt.curve_bc, p.exact));
    p.eps = number(c, "eps", p.eps);
  }
  return p;
}

SolverSettings settings_from_config(const Config& c) {
  SolverSettings s;
  s.mg.nu1 = static_cast<int>(number(c, "nu1", s.mg.nu1));
  s.mg.nu2 = static_cast<int>(number(c, "nu2", s.mg.nu2));
  s.mg.omega = number(c, "omega", s.mg.omega);
  s.tol = number(c, "tol", s.tol);
  s.max_iters = static_cast<int>(number(c, "max_iters", s.max_iters));
  const std::string cyc = text(c, "cycle", "fmg");
  if (cyc == "v") {
    s.cycle = CycleKind::V;
  } else if (cyc != "fmg") {
    throw std::invalid_argument("unknown cycle '" + cyc + "'");
  }
  return s;
}

}  // namespace cutfv
