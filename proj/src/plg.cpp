#include "cutfv/plg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace cutfv {

DenseLU::DenseLU(Eigen::MatrixXd a) : lu_(std::move(a)) {
  const int n = static_cast<int>(lu_.rows());
  if (lu_.cols() != n) throw std::invalid_argument("DenseLU: matrix not square");
  perm_.resize(n);
  for (int i = 0; i < n; ++i) perm_[i] = i;
  const double scale = lu_.cwiseAbs().maxCoeff();
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(lu_(i, k)) > std::abs(lu_(p, k))) p = i;
    if (!(std::abs(lu_(p, k)) > 1e-300) || std::abs(lu_(p, k)) <= 1e-15 * scale * n) {
      singular_ = true;
      return;
    }
    if (p != k) {
      lu_.row(p).swap(lu_.row(k));
      std::swap(perm_[p], perm_[k]);
    }
    for (int i = k + 1; i < n; ++i) {
      const double l = lu_(i, k) / lu_(k, k);
      lu_(i, k) = l;
      for (int j = k + 1; j < n; ++j) lu_(i, j) -= l * lu_(k, j);
    }
  }
}

Eigen::VectorXd DenseLU::solve(const Eigen::VectorXd& b) const {
  if (singular_) throw std::runtime_error("DenseLU: singular matrix");
  const int n = static_cast<int>(lu_.rows());
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) {
    double s = b(perm_[i]);
    for (int j = 0; j < i; ++j) s -= lu_(i, j) * x(j);
    x(i) = s;
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x(i);
    for (int j = i + 1; j < n; ++j) s -= lu_(i, j) * x(j);
    x(i) = s / lu_(i, i);
  }
  return x;
}

Eigen::MatrixXd DenseLU::inverse() const {
  const int n = static_cast<int>(lu_.rows());
  Eigen::MatrixXd inv(n, n);
  for (int c = 0; c < n; ++c) inv.col(c) = solve(Eigen::VectorXd::Unit(n, c));
  return inv;
}

double condition_inf(const Eigen::MatrixXd& a) {
  DenseLU lu(a);
  if (lu.singular()) return std::numeric_limits<double>::infinity();
  const double na = a.cwiseAbs().rowwise().sum().maxCoeff();
  const double ni = lu.inverse().cwiseAbs().rowwise().sum().maxCoeff();
  return na * ni;
}

std::vector<CellIndex> feasible_set(const CutCellSet& s, CellIndex q, int n) {
  std::vector<CellIndex> out;
  for (int a = -n; a <= n; ++a)
    for (int b = -n; b <= n; ++b) {
      const CellIndex c{q.i + a, q.j + b};
      if (s.position(c) >= 0) out.push_back(c);
    }
  if (static_cast<int>(out.size()) < num_monomials(n))
    throw PlgError("insufficient nodes near cell (" + std::to_string(q.i) + "," + std::to_string(q.j) + ")");
  return out;
}

Eigen::MatrixXd sample_matrix(const std::vector<CellIndex>& sites, const MomentOracle& m, int n) {
  const int rows = num_monomials(n);
  Eigen::MatrixXd M(rows, sites.size());
  for (size_t k = 0; k < sites.size(); ++k) {
    const auto col = m(sites[k]);
    for (int r = 0; r < rows; ++r) M(r, k) = col[r];
  }
  return M;
}

namespace {

double sigma_ratio(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0.0;
  return sv(sv.size() - 1) / sv(0);
}

struct Search {
  int need;
  double kappa_max;
  std::vector<CellIndex> cand;
  std::vector<Eigen::VectorXd> cols;
  CellIndex q;
  int budget = 4000;
  std::vector<int> chosen;
  double kappa = 0.0;

  Eigen::MatrixXd matrix(const std::vector<int>& idx) const {
    Eigen::MatrixXd m(cols[0].size(), idx.size());
    for (size_t k = 0; k < idx.size(); ++k) m.col(k) = cols[idx[k]];
    return m;
  }

  bool dfs() {
    if (--budget < 0) return false;
    if (static_cast<int>(chosen.size()) == need) {
      kappa = condition_inf(matrix(chosen));
      return kappa <= kappa_max;
    }
    struct Scored {
      double score, dist;
      int idx;
    };
    std::vector<Scored> sc;
    for (int c = 0; c < static_cast<int>(cand.size()); ++c) {
      if (std::find(chosen.begin(), chosen.end(), c) != chosen.end()) continue;
      auto trial = chosen;
      trial.push_back(c);
      const double r = sigma_ratio(matrix(trial));
      if (r <= 1e-12) continue;
      const double d = std::hypot(cand[c].i - q.i, cand[c].j - q.j);
      sc.push_back({r, d, c});
    }
    std::sort(sc.begin(), sc.end(), [&](const Scored& a, const Scored& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.dist != b.dist) return a.dist < b.dist;
      return cand[a.idx] < cand[b.idx];
    });
    const int branch = std::min<int>(3, static_cast<int>(sc.size()));
    for (int b = 0; b < branch; ++b) {
      chosen.push_back(sc[b].idx);
      if (dfs()) return true;
      chosen.pop_back();
      if (budget < 0) return false;
    }
    return false;
  }
};

}  // namespace

Lattice generate_lattice(const std::vector<CellIndex>& candidates, CellIndex q, int n, const MomentOracle& m,
                         double kappa_max) {
  const int need = num_monomials(n);
  if (static_cast<int>(candidates.size()) < need) throw PlgError("fewer candidate cells than basis functions");
  std::vector<CellIndex> K = candidates;
  std::sort(K.begin(), K.end());
  if (!std::binary_search(K.begin(), K.end(), q)) throw PlgError("candidate set does not contain q");

  Lattice best;
  best.q = q;
  best.kappa = std::numeric_limits<double>::infinity();
  // Triangular lattices {(p1[a], p2[b]) : a + b <= n} for sequences p1, p2
  // of distinct columns and rows.  These are the images of the principal
  // lattice under reorderings of each coordinate and are poised for point
  // values.  The most compact one around q wins, then the smaller condition
  // number.  The cost sum over nodes of |x - q|^2 splits into
  // sum_a (n+1-a) (p1[a]-q.i)^2 + sum_b (n+1-b) (p2[b]-q.j)^2.
  int lo_i = q.i, hi_i = q.i, lo_j = q.j, hi_j = q.j;
  for (const auto& c : K) {
    lo_i = std::min(lo_i, c.i);
    hi_i = std::max(hi_i, c.i);
    lo_j = std::min(lo_j, c.j);
    hi_j = std::max(hi_j, c.j);
  }
  const int wj = hi_j - lo_j + 1;
  std::vector<char> in(static_cast<size_t>(hi_i - lo_i + 1) * wj, 0);
  for (const auto& c : K) in[static_cast<size_t>(c.i - lo_i) * wj + (c.j - lo_j)] = 1;
  auto inK = [&](int i, int j) {
    return i >= lo_i && i <= hi_i && j >= lo_j && j <= hi_j && in[static_cast<size_t>(i - lo_i) * wj + (j - lo_j)];
  };

  struct Seq {
    double cost;
    std::vector<int> v;
  };
  // Sequences of n+1 distinct values in [lo, hi] with v at slot; keep(seq)
  // filters them.  Sorted by cost.
  auto sequences = [n](int lo, int hi, int slot, int v, const std::function<bool(const std::vector<int>&)>& keep) {
    std::vector<Seq> out;
    std::vector<int> cur(n + 1, 0);
    std::vector<char> used(hi - lo + 1, 0);
    used[v - lo] = 1;
    cur[slot] = v;
    std::function<void(int)> rec = [&](int k) {
      if (k > n) {
        if (!keep(cur)) return;
        double c = 0.0;
        for (int a = 0; a <= n; ++a) c += double(n + 1 - a) * (cur[a] - v) * (cur[a] - v);
        out.push_back({c, cur});
        return;
      }
      if (k == slot) {
        rec(k + 1);
        return;
      }
      for (int x = lo; x <= hi; ++x) {
        if (used[x - lo]) continue;
        used[x - lo] = 1;
        cur[k] = x;
        rec(k + 1);
        used[x - lo] = 0;
      }
    };
    rec(0);
    std::sort(out.begin(), out.end(), [](const Seq& x, const Seq& y) { return x.cost < y.cost || (x.cost == y.cost && x.v < y.v); });
    return out;
  };

  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<std::vector<CellIndex>> ties;
  for (int a0 = 0; a0 <= n; ++a0)
    for (int b0 = 0; a0 + b0 <= n; ++b0) {
      const auto P1 = sequences(lo_i, hi_i, a0, q.i, [&](const std::vector<int>& p) {
        for (int a = 0; a + b0 <= n; ++a)
          if (!inK(p[a], q.j)) return false;
        return true;
      });
      if (P1.empty()) continue;
      const auto P2 = sequences(lo_j, hi_j, b0, q.j, [&](const std::vector<int>& p) {
        for (int b = 0; a0 + b <= n; ++b)
          if (!inK(q.i, p[b])) return false;
        return true;
      });
      if (P2.empty()) continue;
      for (const auto& s1 : P1) {
        if (s1.cost + P2.front().cost > best_cost) break;
        for (const auto& s2 : P2) {
          const double cost = s1.cost + s2.cost;
          if (cost > best_cost) break;
          bool ok = true;
          for (int a = 0; a <= n && ok; ++a)
            for (int b = 0; a + b <= n; ++b)
              if (!inK(s1.v[a], s2.v[b])) {
                ok = false;
                break;
              }
          if (!ok) continue;
          std::vector<CellIndex> sites;
          for (int a = 0; a <= n; ++a)
            for (int b = 0; a + b <= n; ++b) sites.push_back({s1.v[a], s2.v[b]});
          std::sort(sites.begin(), sites.end());
          if (cost < best_cost) {
            best_cost = cost;
            ties.clear();
          }
          if (std::find(ties.begin(), ties.end(), sites) == ties.end()) ties.push_back(std::move(sites));
        }
      }
    }
  std::sort(ties.begin(), ties.end());
  for (auto& sites : ties) {
    std::iter_swap(sites.begin(), std::find(sites.begin(), sites.end(), q));
    const double kap = condition_inf(sample_matrix(sites, m, n));
    if (kap <= kappa_max && kap < best.kappa) {
      best.sites = sites;
      best.kappa = kap;
      best.principal = true;
    }
  }
  if (best.principal) return best;

  Search s;
  s.need = need;
  s.kappa_max = kappa_max;
  s.q = q;
  s.cand = K;
  for (const auto& c : K) {
    const auto v = m(c);
    s.cols.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  s.chosen.push_back(static_cast<int>(std::lower_bound(K.begin(), K.end(), q) - K.begin()));
  if (!s.dfs())
    throw PlgError("no poised lattice for cell (" + std::to_string(q.i) + "," + std::to_string(q.j) + ")");
  for (int idx : s.chosen) best.sites.push_back(K[idx]);
  best.kappa = s.kappa;
  best.principal = false;
  return best;
}

MomentOracle cell_moment_oracle(const CutCellSet& s, CellIndex q, int n) {
  const Point2 p = s.grid.cell_box(q).center();
  const double h = s.grid.h;
  return [&s, p, h, n](CellIndex c) {
    const int pos = s.position(c);
    if (pos < 0) throw PlgError("moment of a cell outside the merged set");
    const CutCell& cell = s.cells[pos];
    // Wrapped periodic neighbours sit at the unwrapped box location.
    const Box b = s.grid.cell_box(c);
    if (cell.kind == CellKind::Regular) return box_moments(b, p, h, n);
    return cell_moments(cell.geometry, p, h, n);
  };
}

Lattice build_lattice(const CutCellSet& s, CellIndex q, int n) {
  const auto K = feasible_set(s, q, n);
  const auto oracle = cell_moment_oracle(s, q, n);
  try {
    return generate_lattice(K, q, n, oracle);
  } catch (const PlgError&) {
    // One more ring of candidates before giving up.
    std::vector<CellIndex> wide;
    for (int a = -(n + 1); a <= n + 1; ++a)
      for (int b = -(n + 1); b <= n + 1; ++b)
        if (s.position(q + CellIndex{a, b}) >= 0) wide.push_back(q + CellIndex{a, b});
    return generate_lattice(wide, q, n, oracle);
  }
}

std::vector<std::vector<int>> lattice_multi_indices(int dims, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> a(dims, 0);
  // Graded order: total degree, then reverse lexicographic like the 2D basis.
  for (int d = 0; d <= degree; ++d) {
    std::function<void(int, int)> rec = [&](int axis, int left) {
      if (axis == dims - 1) {
        a[axis] = left;
        out.push_back(a);
        return;
      }
      for (int v = left; v >= 0; --v) {
        a[axis] = v;
        rec(axis + 1, left - v);
      }
    };
    rec(0, d);
  }
  return out;
}

NewtonPolynomial newton_interpolant(const TriangularLattice& lat,
                                    const std::function<double(const std::vector<double>&)>& f) {
  const int D = static_cast<int>(lat.nodes.size());
  const int n = lat.degree;
  for (const auto& ax : lat.nodes)
    if (static_cast<int>(ax.size()) < n + 1) throw std::invalid_argument("lattice axis has too few nodes");
  auto alphas = lattice_multi_indices(D, n);
  std::map<std::vector<int>, double> table;
  std::vector<double> x(D);
  for (const auto& a : alphas) {
    for (int d = 0; d < D; ++d) x[d] = lat.nodes[d][a[d]];
    table[a] = f(x);
  }
  // One-dimensional divided differences along each axis in turn.
  for (int d = 0; d < D; ++d) {
    const auto& p = lat.nodes[d];
    for (int level = 1; level <= n; ++level) {
      // Higher index first so lower entries still hold the previous level.
      for (auto it = alphas.rbegin(); it != alphas.rend(); ++it) {
        const auto& a = *it;
        if (a[d] < level) continue;
        auto b = a;
        b[d] -= 1;
        table[a] = (table[a] - table[b]) / (p[a[d]] - p[a[d] - level]);
      }
    }
  }
  std::vector<double> coef;
  coef.reserve(alphas.size());
  for (const auto& a : alphas) coef.push_back(table[a]);
  return NewtonPolynomial(lat, std::move(alphas), std::move(coef));
}

double NewtonPolynomial::operator()(const std::vector<double>& x) const {
  double s = 0.0;
  for (size_t k = 0; k < alphas_.size(); ++k) {
    double term = coef_[k];
    for (size_t d = 0; d < x.size(); ++d)
      for (int l = 0; l < alphas_[k][d]; ++l) term *= x[d] - lat_.nodes[d][l];
    s += term;
  }
  return s;
}

Eigen::MatrixXd divided_difference_inverse(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j <= k; ++j) {
      double den = 1.0;
      for (int l = 0; l <= k; ++l)
        if (l != j) den *= x[j] - x[l];
      m(k, j) = 1.0 / den;
    }
  return m;
}

Eigen::MatrixXd newton_sample_matrix(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double v = 1.0;
      for (int l = 0; l < k; ++l) v *= x[j] - x[l];
      m(j, k) = v;
    }
  return m;
}

Eigen::MatrixXd pointwise_sample_matrix(const std::vector<Point2>& sites, int n, Point2 c, double h) {
  const auto ex = monomial_exponents(n);
  Eigen::MatrixXd m(ex.size(), sites.size());
  for (size_t k = 0; k < sites.size(); ++k) {
    const double X = (sites[k].x - c.x) / h, Y = (sites[k].y - c.y) / h;
    for (size_t r = 0; r < ex.size(); ++r) m(r, k) = std::pow(X, ex[r][0]) * std::pow(Y, ex[r][1]);
  }
  return m;
}

std::vector<Point2> conditioning_nodes(int n) {
  std::vector<Point2> out;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; i + j <= n; ++j) out.push_back({0.5 * (i - 1), 0.5 * (j - 1)});
  return out;
}

std::vector<ConditioningRow> conditioning_study(const std::vector<Point2>& nodes, int n,
                                                const std::vector<double>& hs, Point2 c) {
  std::vector<ConditioningRow> out;
  for (double h : hs) {
    std::vector<Point2> sites;
    for (const auto& x : nodes) sites.push_back(c + h * x);
    ConditioningRow row;
    row.h = h;
    row.kappa_unscaled = condition_inf(pointwise_sample_matrix(sites, n, {0.0, 0.0}, 1.0));
    row.kappa_scaled = condition_inf(pointwise_sample_matrix(sites, n, c, h));
    out.push_back(row);
  }
  return out;
}

double loglog_slope(const std::vector<double>& h, const std::vector<double>& v) {
  const size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double x = std::log(h[i]), y = std::log(v[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace cutfv
