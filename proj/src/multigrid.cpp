#include "cutfv/multigrid.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <tuple>

namespace cutfv {

PlgOrdering order_plg(const CutCellSet& set, const std::vector<StencilClass>& cls, const Region& r) {
  std::vector<JordanCurve> curves;
  std::vector<int> ids;
  if (r.frame) {
    curves.push_back(box_curve(*r.frame));
    ids.push_back(-1);
  }
  for (size_t c = 0; c < r.curves.size(); ++c) {
    curves.push_back(r.curves[c]);
    ids.push_back(static_cast<int>(c));
  }
  struct Item {
    int rank;
    double s;
    int lin;
    int pos;
  };
  std::vector<Item> items;
  for (size_t p = 0; p < set.cells.size(); ++p) {
    if (cls[p] != StencilClass::PLG) continue;
    const CellIndex ci = set.cells[p].index;
    const Point2 c = set.grid.cell_box(ci).center();
    int best = -1;
    ClosestPoint bp;
    for (size_t k = 0; k < curves.size(); ++k) {
      const ClosestPoint cp = closest_point(curves[k], c);
      if (best < 0 || cp.dist < bp.dist) {
        best = static_cast<int>(k);
        bp = cp;
      }
    }
    if (best < 0) throw std::runtime_error("PLG cell without a boundary curve");
    items.push_back({best, bp.s, set.grid.linear(ci), static_cast<int>(p)});
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return std::tie(a.rank, a.s, a.lin) < std::tie(b.rank, b.s, b.lin);
  });
  PlgOrdering out;
  for (const auto& it : items) {
    out.cells.push_back(it.pos);
    out.curve.push_back(ids[it.rank]);
    out.s.push_back(it.s);
  }
  return out;
}

namespace {

struct ZeroPivot : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace

A22Factorization::A22Factorization(const SparseMatrix& a) : m_(a.rows) {
  if (m_ == 0) return;
  try {
    factor_banded(a);
  } catch (const ZeroPivot& e) {
    std::cerr << "warning: " << e.what() << "; using dense LU for A22\n";
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m_, m_);
    for (int r = 0; r < m_; ++r)
      for (int k = a.ptr[r]; k < a.ptr[r + 1]; ++k) d(r, a.col[k]) += a.val[k];
    dense_ = std::make_shared<Eigen::PartialPivLU<Eigen::MatrixXd>>(d);
    flops_ = 2LL * m_ * m_ * m_ / 3;
  }
}

void A22Factorization::factor_banded(const SparseMatrix& a) {
  const int m = m_;
  // Choose the bandwidth minimizing an estimate of the factorization work.
  const int max_w = std::min(m - 1, 96);
  std::vector<int> stamp(m, -1);
  int best_w = 0, best_k = 0;
  double best_cost = -1.0;
  for (int w = 0; w <= max_w; ++w) {
    int k = 0;
    for (int r = 0; r < m; ++r)
      for (int q = a.ptr[r]; q < a.ptr[r + 1]; ++q) {
        const int c = a.col[q];
        if (std::abs(r - c) <= w || a.val[q] == 0.0) continue;
        const int s = std::max(r, c);
        if (stamp[s] != w) {
          stamp[s] = w;
          ++k;
        }
      }
    const double nb = m - k;
    const double cost = 2.0 * nb * w * w + 4.0 * nb * w * k + 2.0 * nb * k * k + double(k) * k * k;
    if (best_cost < 0.0 || cost < best_cost) {
      best_cost = cost;
      best_w = w;
      best_k = k;
    }
    if (k == 0) break;
  }
  w_ = best_w;
  k_ = best_k;
  nb_ = m - k_;

  std::vector<char> sep(m, 0);
  for (int r = 0; r < m; ++r)
    for (int q = a.ptr[r]; q < a.ptr[r + 1]; ++q)
      if (std::abs(r - a.col[q]) > w_ && a.val[q] != 0.0) sep[std::max(r, a.col[q])] = 1;
  order_.clear();
  for (int i = 0; i < m; ++i)
    if (!sep[i]) order_.push_back(i);
  for (int i = 0; i < m; ++i)
    if (sep[i]) order_.push_back(i);
  std::vector<int> pos(m);
  for (int i = 0; i < m; ++i) pos[order_[i]] = i;

  band_.assign(static_cast<size_t>(nb_) * (2 * w_ + 1), 0.0);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(nb_, k_), Q = Eigen::MatrixXd::Zero(k_, nb_);
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(k_, k_);
  for (int r = 0; r < m; ++r)
    for (int q = a.ptr[r]; q < a.ptr[r + 1]; ++q) {
      const int i = pos[r], j = pos[a.col[q]];
      const double v = a.val[q];
      if (i < nb_ && j < nb_) {
        if (std::abs(i - j) > w_) throw std::logic_error("band block wider than its bandwidth");
        band(i, j) += v;
      } else if (i < nb_) {
        P(i, j - nb_) += v;
      } else if (j < nb_) {
        Q(i - nb_, j) += v;
      } else {
        S(i - nb_, j - nb_) += v;
      }
    }

  std::int64_t flops = 0;
  for (int kk = 0; kk < nb_; ++kk) {
    double scale = 0.0;
    for (int j = std::max(0, kk - w_); j <= std::min(nb_ - 1, kk + w_); ++j) scale = std::max(scale, std::abs(band(kk, j)));
    const double piv = band(kk, kk);
    if (std::abs(piv) <= 1e-14 * scale || piv == 0.0)
      throw ZeroPivot("zero pivot in banded elimination at row " + std::to_string(kk));
    const int last = std::min(nb_ - 1, kk + w_);
    for (int i = kk + 1; i <= last; ++i) {
      const double l = band(i, kk) / piv;
      band(i, kk) = l;
      ++flops;
      if (l == 0.0) continue;
      for (int j = kk + 1; j <= last; ++j) band(i, j) -= l * band(kk, j);
      flops += 2LL * (last - kk);
    }
  }

  X_ = P;
  for (int c = 0; c < k_; ++c) forward(X_.col(c).data());
  flops += 2LL * k_ * nb_ * w_;
  Y_ = Q;
  for (int r = 0; r < k_; ++r) {
    for (int j = 0; j < nb_; ++j) {
      double s = Y_(r, j);
      for (int i = std::max(0, j - w_); i < j; ++i) s -= Y_(r, i) * band(i, j);
      Y_(r, j) = s / band(j, j);
    }
  }
  flops += 2LL * k_ * nb_ * w_;
  if (k_ > 0) {
    const Eigen::MatrixXd Sp = S - Y_ * X_;
    schur_.compute(Sp);
    flops += 2LL * k_ * k_ * nb_ + 2LL * k_ * k_ * k_ / 3;
  }
  flops_ = flops;
}

void A22Factorization::forward(double* z) const {
  for (int i = 0; i < nb_; ++i) {
    double s = z[i];
    for (int j = std::max(0, i - w_); j < i; ++j) s -= band(i, j) * z[j];
    z[i] = s;
  }
}

void A22Factorization::backward(double* z) const {
  for (int i = nb_ - 1; i >= 0; --i) {
    double s = z[i];
    const int last = std::min(nb_ - 1, i + w_);
    for (int j = i + 1; j <= last; ++j) s -= band(i, j) * z[j];
    z[i] = s / band(i, i);
  }
}

void A22Factorization::solve(std::vector<double>& x) const { solve(x.data()); }

void A22Factorization::solve(double* x) const {
  if (m_ == 0) return;
  if (dense_) {
    Eigen::Map<Eigen::VectorXd> v(x, m_);
    v = dense_->solve(Eigen::VectorXd(v));
    return;
  }
  std::vector<double> z(m_);
  for (int i = 0; i < m_; ++i) z[i] = x[order_[i]];
  forward(z.data());
  if (k_ > 0) {
    Eigen::Map<Eigen::VectorXd> z1(z.data(), nb_), z2(z.data() + nb_, k_);
    z2 = schur_.solve(Eigen::VectorXd(z2 - Y_ * z1));
    z1 -= X_ * z2;
  }
  backward(z.data());
  for (int i = 0; i < m_; ++i) x[order_[i]] = z[i];
}

Level build_level(const Region& r, const Box& rect, const PdeSpec& pde, double eps, double h) {
  Level lv;
  Grid g = make_grid(rect, h);
  g.periodic = r.frame && pde.bc.frame.kind == BcKind::Periodic;
  lv.cells = build_cut_cells(r, g, eps);
  lv.cls = classify_sfv(lv.cells, r, pde.coeffs.b);
  lv.order = order_plg(lv.cells, lv.cls, r);
  std::vector<Lattice> lattices;
  lattices.reserve(lv.order.cells.size());
  for (int p : lv.order.cells) lattices.push_back(build_lattice(lv.cells, lv.cells.cells[p].index, pde.degree));
  lv.sys = assemble(lv.cells, r, pde, lv.cls, lv.order.cells, lattices);
  lv.a22 = A22Factorization(lv.sys.a22());
  return lv;
}

namespace {

// A point strictly inside a raw cell piece.
Point2 interior_point(const CellGeometry& g) {
  if (g.regular) return g.box.center();
  const double h = std::min(g.box.width(), g.box.height());
  for (const auto& e : g.loops.front()) {
    if (!e.on_curve()) continue;
    const double t = 0.5 * (e.t0 + e.t1);
    const Point2 m = e.geom.eval(t), d = e.geom.deriv(t);
    const double s = norm(d);
    if (s == 0.0) continue;
    const Point2 p = m + (1e-4 * h / s) * Point2{-d.y, d.x};
    if (g.box.contains(p)) return p;
  }
  // Fall back to the midpoint of the first face segment, nudged inwards.
  const Edge& e = g.loops.front().front();
  const Point2 m = 0.5 * (e.start() + e.end()), d = e.end() - e.start();
  return m + (1e-4 * h / std::max(norm(d), 1e-300)) * Point2{-d.y, d.x};
}

}  // namespace

std::vector<int> parent_map(const Level& fine, const Level& coarse) {
  const CutCellSet& fs = fine.cells;
  const CutCellSet& cs = coarse.cells;
  std::vector<int> parent(fine.sys.size(), -1);
  for (int u = 0; u < fine.sys.size(); ++u) {
    const int p = fine.sys.cell_of[u];
    const CellIndex fi = fs.cells[p].index;
    const CellIndex ci{fi.i / 2, fi.j / 2};
    const int clin = cs.grid.linear(ci);
    const auto& comps = cs.raw.cells[clin];
    int comp = 0;
    if (comps.empty()) throw std::runtime_error("fine cell has no coarse parent");
    if (comps.size() > 1) {
      const auto& raw = fs.raw.cells[fs.grid.linear(fi)];
      const auto largest = std::max_element(raw.begin(), raw.end(), [](const CellGeometry& a, const CellGeometry& b) {
        return a.volume < b.volume;
      });
      const Point2 x = interior_point(*largest);
      comp = -1;
      for (size_t c = 0; c < comps.size() && comp < 0; ++c) {
        int w = 0;
        for (const auto& lp : comps[c].loops) w += winding_number(lp, x);
        if (w != 0) comp = static_cast<int>(c);
      }
      if (comp < 0) comp = 0;
    }
    const int cpos = cs.raw_owner[clin][comp];
    parent[u] = coarse.sys.unknown_of[cpos];
  }
  // Every regular coarse cell must collect its four children.
  std::vector<int> count(coarse.sys.size(), 0);
  for (int u = 0; u < fine.sys.size(); ++u) ++count[parent[u]];
  for (int v = 0; v < coarse.sys.size(); ++v) {
    const CutCell& c = cs.cells[coarse.sys.cell_of[v]];
    if (c.kind == CellKind::Regular && count[v] < 4)
      throw std::runtime_error("coarse regular cell (" + std::to_string(c.index.i) + "," + std::to_string(c.index.j) +
                               ") is missing fine children");
  }
  return parent;
}

void Hierarchy::set_bottom() {
  bottom_ = std::make_shared<Eigen::PartialPivLU<Eigen::MatrixXd>>(dense_matrix(levels.back().sys));
}

Eigen::MatrixXd dense_matrix(const BlockSystem& sys) {
  const SparseMatrix m = sys.matrix();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m.rows, m.rows);
  for (int r = 0; r < m.rows; ++r)
    for (int k = m.ptr[r]; k < m.ptr[r + 1]; ++k) d(r, m.col[k]) += m.val[k];
  return d;
}

Hierarchy build_hierarchy(const Region& r, const Box& rect, const PdeSpec& pde, double eps, double h,
                          const MgOptions& opt) {
  Hierarchy hier;
  hier.opt = opt;
  hier.levels.push_back(build_level(r, rect, pde, eps, h));
  // Coarse levels only need the operator.
  PdeSpec coarse_pde = pde;
  coarse_pde.f = nullptr;
  double hc = h;
  while (hier.depth() < opt.max_levels) {
    const Grid& g = hier.levels.back().cells.grid;
    if (g.nx % 2 != 0 || g.ny % 2 != 0 || g.nx < 4 || g.ny < 4) break;
    if (hier.levels.back().sys.size() <= 16) break;
    try {
      Level coarse = build_level(r, rect, coarse_pde, eps, 2.0 * hc);
      if (coarse.sys.n2 > opt.max_plg_fraction * coarse.sys.size()) break;
      std::vector<int> parent = parent_map(hier.levels.back(), coarse);
      hier.levels.back().parent = std::move(parent);
      hier.levels.push_back(std::move(coarse));
      hc *= 2.0;
    } catch (const std::exception&) {
      break;
    }
  }
  if (hier.levels.back().sys.size() > opt.max_bottom_unknowns)
    std::cerr << "warning: coarsest level has " << hier.levels.back().sys.size() << " unknowns\n";
  hier.set_bottom();
  return hier;
}

void smooth(const Level& lv, double omega, std::vector<double>& u, const std::vector<double>& b) {
  const BlockSystem& sys = lv.sys;
  const int n1 = sys.n1;
  std::vector<double> au;
  sys.apply(u, au);
  for (int i = 0; i < n1; ++i) u[i] += omega * (b[i] - au[i]) / sys.diag[i];
  if (sys.n2 == 0) return;
  std::vector<double> rhs(sys.n2);
  for (int t = 0; t < sys.n2; ++t) rhs[t] = b[n1 + t] - sys.lower_part(t, u);
  lv.a22.solve(rhs);
  std::copy(rhs.begin(), rhs.end(), u.begin() + n1);
}

void restrict_residual(const Level& fine, const std::vector<double>& rf, std::vector<double>& rc, int coarse_size) {
  rc.assign(coarse_size, 0.0);
  for (size_t u = 0; u < fine.parent.size(); ++u) rc[fine.parent[u]] += 0.25 * rf[u];
}

void interpolate_add(const Level& fine, const std::vector<double>& ec, std::vector<double>& uf) {
  for (size_t u = 0; u < fine.parent.size(); ++u) uf[u] += ec[fine.parent[u]];
}

namespace {

std::vector<double> bottom_solve(const Hierarchy& hier, const std::vector<double>& b) {
  const Eigen::Map<const Eigen::VectorXd> bb(b.data(), static_cast<Eigen::Index>(b.size()));
  const Eigen::VectorXd x = hier.bottom().solve(bb);
  return {x.data(), x.data() + x.size()};
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void track_violation(Hierarchy& hier, int level, const std::vector<double>& r) {
  const Level& lv = hier.levels[level];
  const Level& cl = hier.levels[level + 1];
  for (size_t u = 0; u < lv.parent.size(); ++u) {
    const int cp = cl.sys.cell_of[lv.parent[u]];
    if (cl.cells.cells[cp].kind != CellKind::Regular) hier.restrict_violation = std::max(hier.restrict_violation, std::abs(r[u]));
  }
}

}  // namespace

void v_cycle(Hierarchy& hier, int level, std::vector<double>& u, const std::vector<double>& b) {
  const Level& lv = hier.levels[level];
  if (level == hier.depth() - 1) {
    u = bottom_solve(hier, b);
    return;
  }
  for (int k = 0; k < hier.opt.nu1; ++k) smooth(lv, hier.opt.omega, u, b);
  std::vector<double> r;
  lv.sys.residual(u, b, r);
  track_violation(hier, level, r);
  std::vector<double> rc;
  const int nc = hier.levels[level + 1].sys.size();
  restrict_residual(lv, r, rc, nc);
  std::vector<double> ec(nc, 0.0);
  v_cycle(hier, level + 1, ec, rc);
  interpolate_add(lv, ec, u);
  for (int k = 0; k < hier.opt.nu2; ++k) smooth(lv, hier.opt.omega, u, b);
}

std::vector<double> fmg(Hierarchy& hier, int level, const std::vector<double>& r) {
  if (level == hier.depth() - 1) return bottom_solve(hier, r);
  const Level& lv = hier.levels[level];
  std::vector<double> rc;
  restrict_residual(lv, r, rc, hier.levels[level + 1].sys.size());
  const std::vector<double> ec = fmg(hier, level + 1, rc);
  std::vector<double> e(lv.sys.size(), 0.0);
  interpolate_add(lv, ec, e);
  v_cycle(hier, level, e, r);
  return e;
}

double SolveResult::reduction_rate() const {
  if (history.size() < 2 || history.front() == 0.0) return 0.0;
  const int k = static_cast<int>(history.size()) - 1;
  return std::pow(history.back() / history.front(), 1.0 / k);
}

SolveResult solve(Hierarchy& hier, const std::vector<double>& b, CycleKind kind, double tol, int max_iters,
                  const std::vector<double>* u0) {
  const BlockSystem& sys = hier.finest().sys;
  SolveResult res;
  res.u = u0 ? *u0 : std::vector<double>(sys.size(), 0.0);
  const double bnorm = inf_norm(b);
  std::vector<double> r;
  sys.residual(res.u, b, r);
  res.history.push_back(inf_norm(r));
  int stalled = 0;
  for (int it = 0; it < max_iters; ++it) {
    if (res.history.back() <= tol * bnorm) break;
    if (kind == CycleKind::V) {
      v_cycle(hier, 0, res.u, b);
    } else {
      const auto e = fmg(hier, 0, r);
      for (int i = 0; i < sys.size(); ++i) res.u[i] += e[i];
    }
    sys.residual(res.u, b, r);
    res.history.push_back(inf_norm(r));
    ++res.iterations;
    // Roundoff floor: stop when two cycles in a row barely reduce the residual.
    const size_t n = res.history.size();
    stalled = res.history[n - 1] > 0.8 * res.history[n - 2] ? stalled + 1 : 0;
    if (stalled >= 2) break;
  }
  res.converged = res.history.back() <= tol * bnorm;
  return res;
}

RadiusResult two_grid_radius(const Hierarchy& hier, int nu1, int nu2, double omega, int iters, std::uint64_t seed) {
  if (hier.depth() < 2) throw std::invalid_argument("two-grid radius needs two levels");
  const Level& fine = hier.levels[0];
  const Level& coarse = hier.levels[1];
  std::shared_ptr<Eigen::PartialPivLU<Eigen::MatrixXd>> local;
  const Eigen::PartialPivLU<Eigen::MatrixXd>* lu = &hier.bottom();
  if (hier.depth() > 2) {
    local = std::make_shared<Eigen::PartialPivLU<Eigen::MatrixXd>>(dense_matrix(coarse.sys));
    lu = local.get();
  }
  const int n = fine.sys.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> e(n), zero(n, 0.0), r, rc;
  for (auto& v : e) v = dist(rng);
  auto normalize = [&]() {
    double s = 0.0;
    for (double v : e) s += v * v;
    s = std::sqrt(s);
    for (auto& v : e) v /= s;
    return s;
  };
  normalize();
  std::vector<double> logs;
  for (int it = 0; it < iters; ++it) {
    for (int k = 0; k < nu1; ++k) smooth(fine, omega, e, zero);
    fine.sys.residual(e, zero, r);
    restrict_residual(fine, r, rc, coarse.sys.size());
    const Eigen::VectorXd ec = lu->solve(Eigen::Map<const Eigen::VectorXd>(rc.data(), static_cast<Eigen::Index>(rc.size())));
    for (int i = 0; i < n; ++i) e[i] += ec(fine.parent[i]);
    for (int k = 0; k < nu2; ++k) smooth(fine, omega, e, zero);
    logs.push_back(std::log(normalize()));
  }
  const int win = std::max(1, iters / 4);
  auto window = [&](int end) {
    double s = 0.0;
    for (int i = end - win; i < end; ++i) s += logs[i];
    return std::exp(s / win);
  };
  RadiusResult out;
  out.rho = window(iters);
  if (iters >= 2 * win) out.converged = std::abs(window(iters) - window(iters - win)) <= 1e-3;
  return out;
}

}  // namespace cutfv
