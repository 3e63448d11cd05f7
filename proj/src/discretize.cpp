#include "cutfv/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

namespace cutfv {

BoundaryOperator BoundaryCondition::scaled_op(double h) const {
  switch (kind) {
    case BcKind::Dirichlet: return {1.0, 0.0};
    case BcKind::Neumann: return {0.0, h};
    case BcKind::Robin: return {alpha1, alpha2};
    case BcKind::Periodic: break;
  }
  throw std::invalid_argument("periodic condition has no boundary operator");
}

double BoundaryCondition::data_scale(double h) const { return kind == BcKind::Neumann ? h : 1.0; }

std::array<GhostPlan, 2> ghost_fill_plan(double A, double B) {
  // avg of s^k over [a, a+1]
  auto avg = [](double a, int k) { return (std::pow(a + 1.0, k + 1) - std::pow(a, k + 1)) / (k + 1); };
  Eigen::MatrixXd S(5, 5);
  for (int m = 0; m < 4; ++m)
    for (int k = 0; k < 5; ++k) S(m, k) = avg(-4.0 + m, k);
  S.row(4).setZero();
  S(4, 0) = A;
  S(4, 1) = B;
  DenseLU lu(S.transpose());
  if (lu.singular()) throw std::invalid_argument("ghost fill: degenerate boundary operator");
  std::array<GhostPlan, 2> out;
  for (int g = 0; g < 2; ++g) {
    Eigen::VectorXd e(5);
    for (int k = 0; k < 5; ++k) e(k) = avg(g, k);
    const Eigen::VectorXd w = lu.solve(e);
    for (int m = 0; m < 4; ++m) out[g].cells[m] = w(m);
    out[g].datum = w(4);
  }
  return out;
}

std::array<GhostPlan, 2> ghost_fill_plan(const BoundaryCondition& bc, double h) {
  switch (bc.kind) {
    case BcKind::Dirichlet: return ghost_fill_plan(1.0, 0.0);
    case BcKind::Neumann: return ghost_fill_plan(0.0, 1.0);
    case BcKind::Robin: return ghost_fill_plan(bc.alpha1, bc.alpha2 / h);
    case BcKind::Periodic: break;
  }
  throw std::invalid_argument("periodic faces are not ghost filled");
}

std::vector<StencilEntry> sfv_stencil(const EllipticCoeffs& k, double h) {
  const double d2[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};
  const double d1[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
  std::map<CellIndex, double> acc;
  const double s2 = 1.0 / (12.0 * h * h);
  for (int m = 0; m < 5; ++m) {
    acc[{m - 2, 0}] += k.a * d2[m] * s2;
    acc[{0, m - 2}] += k.c * d2[m] * s2;
  }
  if (k.b != 0.0)
    for (int m1 = 0; m1 < 5; ++m1)
      for (int m2 = 0; m2 < 5; ++m2)
        if (d1[m1] != 0.0 && d1[m2] != 0.0) acc[{m1 - 2, m2 - 2}] += k.b * d1[m1] * d1[m2] / (144.0 * h * h);
  std::vector<StencilEntry> out;
  for (const auto& [o, w] : acc) out.push_back({o, w});
  return out;
}

std::vector<double> operator_moments(const std::vector<double>& m, const EllipticCoeffs& k, double h, int n) {
  const auto ex = monomial_exponents(n);
  std::vector<double> out(ex.size(), 0.0);
  const double s = 1.0 / (h * h);
  for (size_t i = 0; i < ex.size(); ++i) {
    const int a1 = ex[i][0], a2 = ex[i][1];
    double v = 0.0;
    if (a1 >= 2) v += k.a * a1 * (a1 - 1) * m[monomial_index({a1 - 2, a2})];
    if (a1 >= 1 && a2 >= 1) v += k.b * a1 * a2 * m[monomial_index({a1 - 1, a2 - 1})];
    if (a2 >= 2) v += k.c * a2 * (a2 - 1) * m[monomial_index({a1, a2 - 2})];
    out[i] = s * v;
  }
  return out;
}

PlgRow plg_row(const CutCellSet& s, int pos, const Lattice& lat, const EllipticCoeffs& k,
               const BoundaryConditions& bc, int n) {
  const CutCell& cell = s.cells[pos];
  const double h = s.grid.h;
  const Point2 p = s.grid.cell_box(cell.index).center();
  const auto oracle = cell_moment_oracle(s, cell.index, n);
  const Eigen::MatrixXd M = sample_matrix(lat.sites, oracle, n);
  const int N = static_cast<int>(M.rows());
  if (M.cols() != N) throw PlgError("lattice size does not match the basis");
  const auto phibar_v = operator_moments(oracle(cell.index), k, h, n);
  const Eigen::Map<const Eigen::VectorXd> phibar(phibar_v.data(), N);

  PlgRow row;
  const auto edges = boundary_edges(cell.geometry);
  row.cut = cell.kind == CellKind::Irregular && !edges.empty();
  if (!row.cut) {
    DenseLU lu(M);
    if (lu.singular()) throw PlgError("singular sample matrix");
    const Eigen::VectorXd beta = lu.solve(phibar);
    row.beta.assign(beta.data(), beta.data() + N);
    return row;
  }

  std::vector<BoundaryOperator> ops;
  for (const auto& e : edges) ops.push_back(bc.on(e.curve).scaled_op(h));
  const auto col = boundary_averages(edges, ops, p, h, n);
  Eigen::MatrixXd Mb(N, N + 1);
  Mb.leftCols(N) = M;
  for (int r = 0; r < N; ++r) Mb(r, N) = col[r];
  Eigen::VectorXd winv(N + 1);
  for (int j = 0; j < N; ++j) {
    const double d = std::hypot(lat.sites[j].i - cell.index.i, lat.sites[j].j - cell.index.j);
    winv(j) = 1.0 / std::max(d, 0.5);
  }
  winv(N) = 1.0 / 0.5;
  const Eigen::MatrixXd A = Mb * winv.asDiagonal() * Mb.transpose();
  DenseLU lu(A);
  if (lu.singular()) throw PlgError("rank-deficient weighted sample matrix");
  const Eigen::VectorXd y = lu.solve(phibar);
  const Eigen::VectorXd beta = winv.asDiagonal() * (Mb.transpose() * y);
  row.beta.assign(beta.data(), beta.data() + N);
  row.beta_b = beta(N);

  const double len = edges_length(edges);
  row.data = boundary_integral(edges, [&](const Edge& e, Point2 x, Point2 nrm) {
               const BoundaryCondition& c = bc.on(e.curve);
               return c.data_scale(h) * c.g(x, nrm);
             }) /
             len;
  return row;
}

void SparseMatrix::push_row(const std::vector<std::pair<int, double>>& entries) {
  for (const auto& [c, v] : entries) {
    col.push_back(c);
    val.push_back(v);
  }
  ptr.push_back(static_cast<int>(col.size()));
  ++rows;
}

std::vector<double> cell_averages(const CutCellSet& s, const std::function<double(Point2)>& f) {
  std::vector<double> out(s.cells.size(), 0.0);
  if (!f) return out;
  for (size_t p = 0; p < s.cells.size(); ++p) out[p] = integrate_average(s.cells[p].geometry, f);
  return out;
}

BlockSystem assemble(const CutCellSet& s, const Region& r, const PdeSpec& pde, const std::vector<StencilClass>& cls,
                     const std::vector<int>& plg_order, const std::vector<Lattice>& lattices) {
  const Grid& grid = s.grid;
  const double h = grid.h;
  const int n = pde.degree;
  BlockSystem sys;
  sys.grid = grid;
  sys.unknown_of.assign(s.cells.size(), -1);
  for (size_t p = 0; p < s.cells.size(); ++p)
    if (cls[p] == StencilClass::SFV) {
      sys.unknown_of[p] = static_cast<int>(sys.cell_of.size());
      sys.cell_of.push_back(static_cast<int>(p));
    }
  sys.n1 = static_cast<int>(sys.cell_of.size());
  if (plg_order.size() != lattices.size()) throw std::invalid_argument("one lattice per PLG cell expected");
  for (int p : plg_order) {
    if (cls[p] != StencilClass::PLG || sys.unknown_of[p] >= 0) throw std::invalid_argument("bad PLG ordering");
    sys.unknown_of[p] = static_cast<int>(sys.cell_of.size());
    sys.cell_of.push_back(p);
  }
  sys.n2 = static_cast<int>(sys.cell_of.size()) - sys.n1;
  if (sys.size() != static_cast<int>(s.cells.size())) throw std::invalid_argument("PLG ordering misses cells");

  sys.unknown_at.assign(grid.size(), -1);
  sys.lin_of.assign(sys.size(), -1);
  for (size_t p = 0; p < s.cells.size(); ++p) {
    const int lin = grid.linear(s.cells[p].index);
    sys.unknown_at[lin] = sys.unknown_of[p];
    sys.lin_of[sys.unknown_of[p]] = lin;
  }
  sys.stencil = sfv_stencil(pde.coeffs, h);
  for (const auto& e : sys.stencil) sys.stencil_lin.push_back(e.offset.i * grid.ny + e.offset.j);

  const auto favg = cell_averages(s, pde.f);
  sys.b.assign(sys.size(), 0.0);
  sys.explicit_of.assign(sys.size(), -1);

  // Jacobi divides by the central weight of the regular stencil, also in
  // rows where ghost filling adds to the diagonal.
  double center = 0.0;
  for (const auto& e : sys.stencil)
    if (e.offset.i == 0 && e.offset.j == 0) center = e.w;
  sys.diag.assign(sys.n1, center);

  std::array<GhostPlan, 2> plans{};
  const bool ghosts = r.frame && pde.bc.frame.kind != BcKind::Periodic;
  if (ghosts) plans = ghost_fill_plan(pde.bc.frame, h);

  std::ostringstream errors;
  for (int u = 0; u < sys.n1; ++u) {
    const int p = sys.cell_of[u];
    const CellIndex ci = s.cells[p].index;
    sys.b[u] = favg[p];
    std::map<int, double> entries;
    bool pure = true;
    for (const auto& st : sys.stencil) {
      const CellIndex k = ci + st.offset;
      if (!grid.in_range(k)) pure = false;
      const int kp = s.position(k);
      if (kp >= 0) {
        entries[sys.unknown_of[kp]] += st.w;
        continue;
      }
      pure = false;
      const auto g = ghosts ? resolve_ghost(s, r, k) : std::nullopt;
      if (!g) {
        errors << " (" << ci.i << "," << ci.j << ")";
        break;
      }
      const GhostPlan& plan = plans[g->depth - 1];
      const CellIndex d = g->axis == 0 ? CellIndex{g->dir, 0} : CellIndex{0, g->dir};
      for (int t = 0; t < 4; ++t) {
        const CellIndex src{g->cell.i - (3 - t) * d.i, g->cell.j - (3 - t) * d.j};
        entries[sys.unknown_of[s.position(src)]] += st.w * plan.cells[t];
      }
      const Box b = grid.cell_box(g->cell);
      Point2 fa, fb;
      if (g->axis == 0) {
        const double x = g->dir > 0 ? b.x1 : b.x0;
        fa = {x, b.y0};
        fb = {x, b.y1};
      } else {
        const double y = g->dir > 0 ? b.y1 : b.y0;
        fa = {b.x0, y};
        fb = {b.x1, y};
      }
      const Point2 nrm{static_cast<double>(d.i), static_cast<double>(d.j)};
      const BoundaryCondition& fbc = pde.bc.frame;
      const double datum =
          fbc.data_scale(h) * segment_average(fa, fb, [&](Point2 x) { return fbc.g(x, nrm); });
      sys.b[u] -= st.w * plan.datum * datum;
    }
    if (!pure) {
      sys.explicit_of[u] = sys.rows.rows;
      sys.rows.push_row({entries.begin(), entries.end()});
    }
  }
  if (!errors.str().empty()) throw std::runtime_error("SFV rows without ghost support at" + errors.str());

  sys.lattices = lattices;
  for (int t = 0; t < sys.n2; ++t) {
    const int u = sys.n1 + t;
    const int p = sys.cell_of[u];
    PlgRow row;
    try {
      row = plg_row(s, p, lattices[t], pde.coeffs, pde.bc, n);
    } catch (const std::exception& e) {
      const CellIndex ci = s.cells[p].index;
      throw PlgError("PLG row at (" + std::to_string(ci.i) + "," + std::to_string(ci.j) + "): " + e.what());
    }
    std::map<int, double> entries;
    for (size_t k = 0; k < row.beta.size(); ++k) entries[sys.unknown_of[s.position(lattices[t].sites[k])]] += row.beta[k];
    sys.b[u] = favg[p] - row.beta_b * row.data;
    sys.explicit_of[u] = sys.rows.rows;
    sys.rows.push_row({entries.begin(), entries.end()});
    sys.plg_rows.push_back(std::move(row));
  }
  sys.rows.cols = sys.size();
  return sys;
}

double BlockSystem::apply_row(int row, const std::vector<double>& x) const {
  const int e = explicit_of[row];
  double s = 0.0;
  if (e >= 0) {
    for (int k = rows.ptr[e]; k < rows.ptr[e + 1]; ++k) s += rows.val[k] * x[rows.col[k]];
    return s;
  }
  const int lin = lin_of[row];
  for (size_t k = 0; k < stencil.size(); ++k) s += stencil[k].w * x[unknown_at[lin + stencil_lin[k]]];
  return s;
}

void BlockSystem::apply(const std::vector<double>& x, std::vector<double>& y) const {
  y.assign(size(), 0.0);
  // Pure SFV rows: walk the grid so neighbours are found by linear offset.
  const int ns = static_cast<int>(stencil.size());
  for (int lin = 0; lin < grid.size(); ++lin) {
    const int u = unknown_at[lin];
    if (u < 0 || explicit_of[u] >= 0) continue;
    double s = 0.0;
    for (int k = 0; k < ns; ++k) s += stencil[k].w * x[unknown_at[lin + stencil_lin[k]]];
    y[u] = s;
  }
  for (int u = 0; u < size(); ++u) {
    const int e = explicit_of[u];
    if (e < 0) continue;
    double s = 0.0;
    for (int k = rows.ptr[e]; k < rows.ptr[e + 1]; ++k) s += rows.val[k] * x[rows.col[k]];
    y[u] = s;
  }
}

void BlockSystem::residual(const std::vector<double>& x, const std::vector<double>& rhs, std::vector<double>& r) const {
  apply(x, r);
  for (int i = 0; i < size(); ++i) r[i] = rhs[i] - r[i];
}

double BlockSystem::lower_part(int r, const std::vector<double>& x) const {
  const int e = explicit_of[n1 + r];
  double s = 0.0;
  for (int k = rows.ptr[e]; k < rows.ptr[e + 1]; ++k)
    if (rows.col[k] < n1) s += rows.val[k] * x[rows.col[k]];
  return s;
}

std::vector<std::pair<int, double>> BlockSystem::row_entries(int row) const {
  std::vector<std::pair<int, double>> out;
  const int e = explicit_of[row];
  if (e >= 0) {
    for (int k = rows.ptr[e]; k < rows.ptr[e + 1]; ++k) out.emplace_back(rows.col[k], rows.val[k]);
    return out;
  }
  std::map<int, double> acc;
  for (size_t k = 0; k < stencil.size(); ++k) acc[unknown_at[lin_of[row] + stencil_lin[k]]] += stencil[k].w;
  return {acc.begin(), acc.end()};
}

SparseMatrix BlockSystem::a22() const {
  SparseMatrix m;
  m.cols = n2;
  for (int r = 0; r < n2; ++r) {
    const int e = explicit_of[n1 + r];
    std::vector<std::pair<int, double>> row;
    for (int k = rows.ptr[e]; k < rows.ptr[e + 1]; ++k)
      if (rows.col[k] >= n1) row.emplace_back(rows.col[k] - n1, rows.val[k]);
    m.push_row(row);
  }
  return m;
}

SparseMatrix BlockSystem::matrix() const {
  SparseMatrix m;
  m.cols = size();
  for (int u = 0; u < size(); ++u) m.push_row(row_entries(u));
  return m;
}

void BlockSystem::dump_blocks(std::ostream& out) const {
  out.precision(17);
  const SparseMatrix m = matrix();
  for (int r = 0; r < m.rows; ++r)
    for (int k = m.ptr[r]; k < m.ptr[r + 1]; ++k) {
      const int c = m.col[k];
      if (r < n1 && c < n1) continue;
      out << r << ' ' << c << ' ' << m.val[k] << '\n';
    }
}

}  // namespace cutfv
