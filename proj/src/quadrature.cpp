#include "cutfv/quadrature.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace cutfv {

namespace {

GaussRule build_rule(int k) {
  GaussRule r;
  r.nodes.resize(k);
  r.weights.resize(k);
  for (int i = 0; i < (k + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (k + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= k; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = k * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int j = 2; j <= k; ++j) {
      const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    dp = k * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[k - 1 - i] = x;
    r.weights[i] = r.weights[k - 1 - i] = w;
  }
  if (k % 2 == 1) r.nodes[k / 2] = 0.0;
  return r;
}

}  // namespace

const GaussRule& gauss_rule(int k) {
  static std::vector<GaussRule> rules;
  static std::once_flag once;
  std::call_once(once, [] {
    rules.resize(33);
    for (int j = 1; j <= 32; ++j) rules[j] = build_rule(j);
  });
  if (k < 1 || k > 32) throw std::invalid_argument("gauss_rule: k out of range");
  return rules[k];
}

std::vector<Exponent> monomial_exponents(int n) {
  std::vector<Exponent> out;
  out.reserve(num_monomials(n));
  for (int d = 0; d <= n; ++d)
    for (int a = d; a >= 0; --a) out.push_back({a, d - a});
  return out;
}

int monomial_index(Exponent a) {
  const int d = a[0] + a[1];
  return d * (d + 1) / 2 + (d - a[0]);
}

std::vector<double> cell_moments(const CellGeometry& g, Point2 p, double h, int n) {
  const auto ex = monomial_exponents(n);
  std::vector<double> acc(ex.size(), 0.0);
  std::vector<double> xp(n + 2), yp(n + 1);
  for (const auto& loop : g.loops) {
    for (const auto& e : loop) {
      const int deg = e.geom.degree();
      if (deg == 1 && e.geom.power()[1].y == 0.0) continue;  // dy = 0
      // Integrand degree in t: deg*(n+1) from the primitive, deg-1 from y'.
      const int k = (deg * (n + 1) + deg - 1) / 2 + 1;
      const GaussRule& r = gauss_rule(k);
      const double half = 0.5 * (e.t1 - e.t0), mid = 0.5 * (e.t0 + e.t1);
      for (int q = 0; q < k; ++q) {
        const double t = mid + half * r.nodes[q];
        const Point2 x = e.geom.eval(t);
        const double dy = e.geom.deriv(t).y * half * r.weights[q] * h;
        const double X = (x.x - p.x) / h, Y = (x.y - p.y) / h;
        xp[0] = 1.0;
        yp[0] = 1.0;
        for (int i = 1; i <= n + 1; ++i) xp[i] = xp[i - 1] * X;
        for (int i = 1; i <= n; ++i) yp[i] = yp[i - 1] * Y;
        for (size_t a = 0; a < ex.size(); ++a)
          acc[a] += dy * xp[ex[a][0] + 1] * yp[ex[a][1]] / (ex[a][0] + 1);
      }
    }
  }
  const double vol = acc[0];
  if (!(vol > 0.0)) throw GeometryError("cell with nonpositive volume");
  for (auto& v : acc) v /= vol;
  return acc;
}

std::vector<double> box_moments(const Box& b, Point2 p, double h, int n) {
  auto one_d = [n](double a0, double a1) {
    std::vector<double> m(n + 1);
    double pa = a0, pb = a1;
    for (int k = 0; k <= n; ++k) {
      m[k] = (pb - pa) / ((k + 1) * (a1 - a0));
      pa *= a0;
      pb *= a1;
    }
    return m;
  };
  const auto mx = one_d((b.x0 - p.x) / h, (b.x1 - p.x) / h);
  const auto my = one_d((b.y0 - p.y) / h, (b.y1 - p.y) / h);
  const auto ex = monomial_exponents(n);
  std::vector<double> out(ex.size());
  for (size_t a = 0; a < ex.size(); ++a) out[a] = mx[ex[a][0]] * my[ex[a][1]];
  return out;
}

double edges_length(const std::vector<Edge>& edges) {
  double s = 0.0;
  for (const auto& e : edges) s += e.geom.length(e.t0, e.t1);
  return s;
}

double boundary_integral(const std::vector<Edge>& edges,
                         const std::function<double(const Edge&, Point2, Point2)>& g) {
  const GaussRule& r = gauss_rule(16);
  double s = 0.0;
  for (const auto& e : edges) {
    const double half = 0.5 * (e.t1 - e.t0), mid = 0.5 * (e.t0 + e.t1);
    for (size_t q = 0; q < r.nodes.size(); ++q) {
      const double t = mid + half * r.nodes[q];
      const Point2 d = e.geom.deriv(t);
      const double speed = norm(d);
      const Point2 nrm{d.y / speed, -d.x / speed};
      s += r.weights[q] * half * speed * g(e, e.geom.eval(t), nrm);
    }
  }
  return s;
}

std::vector<double> boundary_averages(const std::vector<Edge>& edges,
                                      const std::vector<BoundaryOperator>& ops, Point2 p,
                                      double h, int n) {
  if (ops.size() != edges.size()) throw std::invalid_argument("boundary_averages: one operator per edge");
  const auto ex = monomial_exponents(n);
  std::vector<double> acc(ex.size(), 0.0);
  std::vector<double> xp(n + 1), yp(n + 1);
  const GaussRule& r = gauss_rule(16);
  double len = 0.0;
  for (size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    const BoundaryOperator& op = ops[i];
    const double half = 0.5 * (e.t1 - e.t0), mid = 0.5 * (e.t0 + e.t1);
    for (size_t q = 0; q < r.nodes.size(); ++q) {
      const double t = mid + half * r.nodes[q];
      const Point2 x = e.geom.eval(t), d = e.geom.deriv(t);
      const double w = r.weights[q] * half;
      const double speed = norm(d);
      len += w * speed;
      // n ds = (y', -x') dt
      const double nx = d.y * w, ny = -d.x * w;
      const double X = (x.x - p.x) / h, Y = (x.y - p.y) / h;
      xp[0] = yp[0] = 1.0;
      for (int k = 1; k <= n; ++k) {
        xp[k] = xp[k - 1] * X;
        yp[k] = yp[k - 1] * Y;
      }
      for (size_t a = 0; a < ex.size(); ++a) {
        const int ax = ex[a][0], ay = ex[a][1];
        double v = 0.0;
        if (op.alpha1 != 0.0) v += op.alpha1 * xp[ax] * yp[ay] * w * speed;
        if (op.alpha2 != 0.0) {
          const double gx = ax > 0 ? ax * xp[ax - 1] * yp[ay] / h : 0.0;
          const double gy = ay > 0 ? ay * xp[ax] * yp[ay - 1] / h : 0.0;
          v += op.alpha2 * (gx * nx + gy * ny);
        }
        acc[a] += v;
      }
    }
  }
  if (!(len > 0.0)) throw GeometryError("boundary_averages: empty boundary");
  for (auto& v : acc) v /= len;
  return acc;
}

namespace {

double box_average(const Box& b, const std::function<double(Point2)>& f, int k, double* fmax) {
  const GaussRule& r = gauss_rule(k);
  const Point2 c = b.center();
  const double hx = 0.5 * b.width(), hy = 0.5 * b.height();
  double s = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const double v = f({c.x + hx * r.nodes[i], c.y + hy * r.nodes[j]});
      if (fmax) *fmax = std::max(*fmax, std::abs(v));
      s += r.weights[i] * r.weights[j] * v;
    }
  return 0.25 * s;
}

// Average via closed integral of F dy with F(x,y) = int_{xi0}^x f(s,y) ds.
double green_average(const CellGeometry& g, const std::function<double(Point2)>& f, int k,
                     double* fmax) {
  const GaussRule& r = gauss_rule(k);
  const double xi0 = g.box.center().x;
  double integral = 0.0, vol = 0.0;
  for (const auto& loop : g.loops)
    for (const auto& e : loop) {
      if (e.geom.degree() == 1 && e.geom.power()[1].y == 0.0) continue;
      const double half = 0.5 * (e.t1 - e.t0), mid = 0.5 * (e.t0 + e.t1);
      for (int q = 0; q < k; ++q) {
        const double t = mid + half * r.nodes[q];
        const Point2 x = e.geom.eval(t);
        const double dy = e.geom.deriv(t).y * half * r.weights[q];
        const double len = x.x - xi0;
        double prim = 0.0;
        for (int m = 0; m < k; ++m) {
          const double v = f({xi0 + 0.5 * len * (1.0 + r.nodes[m]), x.y});
          if (fmax) *fmax = std::max(*fmax, std::abs(v));
          prim += r.weights[m] * v;
        }
        integral += 0.5 * len * prim * dy;
        vol += len * dy;
      }
    }
  return integral / vol;
}

}  // namespace

double integrate_average(const CellGeometry& g, const std::function<double(Point2)>& f) {
  double fmax = 0.0;
  auto rule = [&](int k) { return g.regular ? box_average(g.box, f, k, &fmax) : green_average(g, f, k, &fmax); };
  const double a6 = rule(6), a7 = rule(7);
  if (std::abs(a6 - a7) <= 1e-11 * std::max(std::abs(a7), fmax)) return a7;
  return rule(12);
}

double segment_average(Point2 a, Point2 b, const std::function<double(Point2)>& f) {
  auto rule = [&](int k, double& fmax) {
    const GaussRule& r = gauss_rule(k);
    double s = 0.0;
    for (int i = 0; i < k; ++i) {
      const double v = f(a + 0.5 * (1.0 + r.nodes[i]) * (b - a));
      fmax = std::max(fmax, std::abs(v));
      s += r.weights[i] * v;
    }
    return 0.5 * s;
  };
  double fmax = 0.0;
  const double a6 = rule(6, fmax), a7 = rule(7, fmax);
  if (std::abs(a6 - a7) <= 1e-11 * std::max(std::abs(a7), fmax)) return a7;
  return rule(12, fmax);
}

}  // namespace cutfv
