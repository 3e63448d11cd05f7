#include "cutfv/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cutfv {

namespace {

constexpr double kPi = std::numbers::pi;

Point2 unit(double t) { return {std::cos(t), std::sin(t)}; }

}  // namespace

std::vector<CurvePiece> circle_arc(Point2 c, double r, double t0, double t1, int pieces) {
  std::vector<CurvePiece> out;
  const double d = (t1 - t0) / pieces;
  const double k = 4.0 / 3.0 * std::tan(d / 4.0) * r;
  for (int i = 0; i < pieces; ++i) {
    const double a = t0 + i * d;
    const double b = i + 1 == pieces ? t1 : t0 + (i + 1) * d;
    const Point2 p0 = c + r * unit(a), p3 = c + r * unit(b);
    const Point2 ta{-std::sin(a), std::cos(a)}, tb{-std::sin(b), std::cos(b)};
    out.push_back(CurvePiece::cubic(p0, p0 + k * ta, p3 - k * tb, p3));
  }
  return out;
}

JordanCurve hermite_curve(const std::function<Point2(double)>& p, const std::function<Point2(double)>& dp,
                          int pieces) {
  JordanCurve c;
  const double s = 1.0 / (3.0 * pieces);
  for (int i = 0; i < pieces; ++i) {
    const double ta = double(i) / pieces;
    const double tb = i + 1 == pieces ? 0.0 : double(i + 1) / pieces;
    const Point2 a = p(ta), b = p(tb);
    c.pieces.push_back(CurvePiece::cubic(a, a + s * dp(ta), b - s * dp(tb), b));
  }
  return c;
}

JordanCurve reversed(const JordanCurve& c) {
  JordanCurve out;
  for (auto it = c.pieces.rbegin(); it != c.pieces.rend(); ++it) {
    if (it->kind() == CurvePiece::Kind::Line) {
      out.pieces.push_back(CurvePiece::line(it->eval(1.0), it->eval(0.0)));
    } else {
      const auto q = it->bezier(0.0, 1.0);
      out.pieces.push_back(CurvePiece::cubic(q[3], q[2], q[1], q[0]));
    }
  }
  return out;
}

double radial_deviation(const JordanCurve& curve, Point2 c, const std::function<double(double)>& radius,
                        int samples_per_piece) {
  double dev = 0.0;
  for (const auto& pc : curve.pieces)
    for (int k = 0; k <= samples_per_piece; ++k) {
      const Point2 q = pc.eval(double(k) / samples_per_piece) - c;
      dev = std::max(dev, std::abs(norm(q) - radius(std::atan2(q.y, q.x))));
    }
  return dev;
}

JordanCurve flower_curve(double r0, double amp, int k, int pieces) {
  // theta = -2 pi t gives a clockwise traversal.
  auto p = [=](double t) {
    const double th = -2.0 * kPi * t;
    return (r0 + amp * std::cos(k * th)) * unit(th);
  };
  auto dp = [=](double t) {
    const double th = -2.0 * kPi * t;
    const double rho = r0 + amp * std::cos(k * th), drho = -amp * k * std::sin(k * th);
    return -2.0 * kPi * (drho * unit(th) + rho * Point2{-std::sin(th), std::cos(th)});
  };
  return hermite_curve(p, dp, pieces);
}

JordanCurve disk_union_curve(const Disk& big, const std::vector<Disk>& small, int pieces_per_circle) {
  struct Lobe {
    double phi, delta;
    Disk d;
  };
  std::vector<Lobe> lobes;
  for (const auto& d : small) {
    const Point2 v = d.c - big.c;
    const double dist = norm(v);
    const double cosd = (dist * dist + big.r * big.r - d.r * d.r) / (2.0 * dist * big.r);
    if (std::abs(cosd) >= 1.0) throw GeometryError("disk does not cross the big circle");
    lobes.push_back({std::atan2(v.y, v.x), std::acos(cosd), d});
  }
  std::sort(lobes.begin(), lobes.end(), [](const Lobe& a, const Lobe& b) { return a.phi < b.phi; });
  auto count = [&](double angle) {
    return std::max(1, static_cast<int>(std::ceil(pieces_per_circle * std::abs(angle) / (2.0 * kPi) - 1e-9)));
  };
  // Counter-clockwise outer boundary: big arc, then the outside of each lobe.
  JordanCurve ccw;
  const size_t n = lobes.size();
  for (size_t i = 0; i < n; ++i) {
    const Lobe& l = lobes[i];
    const Lobe& next = lobes[(i + 1) % n];
    const Point2 a = big.c + big.r * unit(l.phi - l.delta), b = big.c + big.r * unit(l.phi + l.delta);
    double a0 = std::atan2((a - l.d.c).y, (a - l.d.c).x), a1 = std::atan2((b - l.d.c).y, (b - l.d.c).x);
    while (a1 <= a0) a1 += 2.0 * kPi;
    auto lobe = circle_arc(l.d.c, l.d.r, a0, a1, count(a1 - a0));
    ccw.pieces.insert(ccw.pieces.end(), lobe.begin(), lobe.end());
    const double g0 = l.phi + l.delta;
    double g1 = next.phi - next.delta;
    while (g1 <= g0) g1 += 2.0 * kPi;
    auto arc = circle_arc(big.c, big.r, g0, g1, count(g1 - g0));
    ccw.pieces.insert(ccw.pieces.end(), arc.begin(), arc.end());
  }
  return reversed(ccw);
}

ExactSolution exact_solution(const std::string& name) {
  ExactSolution e;
  if (name == "sin4x-cos3y") {
    e.u = [](Point2 p) { return std::sin(4 * p.x) * std::cos(3 * p.y); };
    e.grad = [](Point2 p) {
      return Point2{4 * std::cos(4 * p.x) * std::cos(3 * p.y), -3 * std::sin(4 * p.x) * std::sin(3 * p.y)};
    };
    e.hess = [](Point2 p) {
      const double s = std::sin(4 * p.x) * std::cos(3 * p.y);
      return std::array<double, 3>{-16 * s, -12 * std::cos(4 * p.x) * std::sin(3 * p.y), -9 * s};
    };
  } else if (name == "r4cos3t") {
    // r^4 cos 3theta = r P with P = x^3 - 3 x y^2.
    e.u = [](Point2 p) { return norm(p) * (p.x * p.x * p.x - 3 * p.x * p.y * p.y); };
    e.grad = [](Point2 p) {
      const double r = norm(p), P = p.x * p.x * p.x - 3 * p.x * p.y * p.y;
      return Point2{P * p.x / r + r * (3 * p.x * p.x - 3 * p.y * p.y), P * p.y / r - r * 6 * p.x * p.y};
    };
    e.hess = [](Point2 p) {
      const double x = p.x, y = p.y, r = norm(p);
      const double P = x * x * x - 3 * x * y * y, Px = 3 * x * x - 3 * y * y, Py = -6 * x * y;
      const double rx = x / r, ry = y / r;
      const double rxx = (1 - rx * rx) / r, rxy = -rx * ry / r, ryy = (1 - ry * ry) / r;
      return std::array<double, 3>{P * rxx + 2 * rx * Px + r * 6 * x, P * rxy + rx * Py + ry * Px - r * 6 * y,
                                   P * ryy + 2 * ry * Py - r * 6 * x};
    };
  } else if (name == "sinpix-sinpiy") {
    e.u = [](Point2 p) { return std::sin(kPi * p.x) * std::sin(kPi * p.y); };
    e.grad = [](Point2 p) {
      return Point2{kPi * std::cos(kPi * p.x) * std::sin(kPi * p.y), kPi * std::sin(kPi * p.x) * std::cos(kPi * p.y)};
    };
    e.hess = [](Point2 p) {
      const double s = -kPi * kPi * std::sin(kPi * p.x) * std::sin(kPi * p.y);
      return std::array<double, 3>{s, kPi * kPi * std::cos(kPi * p.x) * std::cos(kPi * p.y), s};
    };
  } else if (name == "quartic") {
    // A full quartic: every discretization row is exact on it.
    e.u = [](Point2 p) {
      const double x = p.x, y = p.y;
      return 1 + x - 2 * y + x * y + 0.5 * x * x * x - y * y * y * x + 0.25 * x * x * y * y - 0.3 * y * y * y * y;
    };
    e.grad = [](Point2 p) {
      const double x = p.x, y = p.y;
      return Point2{1 + y + 1.5 * x * x - y * y * y + 0.5 * x * y * y, -2 + x - 3 * y * y * x + 0.5 * x * x * y - 1.2 * y * y * y};
    };
    e.hess = [](Point2 p) {
      const double x = p.x, y = p.y;
      return std::array<double, 3>{3 * x + 0.5 * y * y, 1 - 3 * y * y + x * y, -6 * y * x + 0.5 * x * x - 3.6 * y * y};
    };
  } else {
    throw std::invalid_argument("unknown exact solution '" + name + "'");
  }
  return e;
}

std::function<double(Point2)> forcing(const EllipticCoeffs& k, const ExactSolution& e) {
  auto hess = e.hess;
  return [k, hess](Point2 p) {
    const auto h = hess(p);
    return k.a * h[0] + k.b * h[1] + k.c * h[2];
  };
}

BoundaryCondition condition_from(BcKind kind, const ExactSolution& e, double alpha1, double alpha2) {
  BoundaryCondition bc;
  bc.kind = kind;
  auto u = e.u;
  auto grad = e.grad;
  switch (kind) {
    case BcKind::Dirichlet:
      bc.g = [u](Point2 x, Point2) { return u(x); };
      break;
    case BcKind::Neumann:
      bc.g = [grad](Point2 x, Point2 n) { return dot(grad(x), n); };
      break;
    case BcKind::Robin:
      bc.alpha1 = alpha1;
      bc.alpha2 = alpha2;
      bc.g = [u, grad, alpha1, alpha2](Point2 x, Point2 n) { return alpha1 * u(x) + alpha2 * dot(grad(x), n); };
      break;
    case BcKind::Periodic:
      break;
  }
  return bc;
}

namespace {

void finish(Problem& p, BcKind frame_bc, BcKind curve_bc) {
  p.pde.f = forcing(p.pde.coeffs, p.exact);
  p.pde.bc.frame = condition_from(frame_bc, p.exact);
  p.pde.bc.curves.clear();
  for (size_t i = 0; i < p.region.curves.size(); ++i) p.pde.bc.curves.push_back(condition_from(curve_bc, p.exact));
}

}  // namespace

Problem make_problem(const std::string& name, const ProblemOptions& opt) {
  Problem p;
  p.name = name;
  if (name == "unit-square") {
    p.region.frame = Box{0, 0, 1, 1};
    p.rect = *p.region.frame;
    p.pde.coeffs = {1.0, 0.0, 2.0};
    p.exact = exact_solution("sin4x-cos3y");
    p.eps = 0.1;
    finish(p, BcKind::Dirichlet, BcKind::Dirichlet);
  } else if (name == "rotated-square") {
    const double c = std::cos(kPi / 6), s = std::sin(kPi / 6);
    auto rot = [&](Point2 q) { return Point2{c * q.x - s * q.y, s * q.x + c * q.y}; };
    p.region.curves.push_back(polygon_curve({rot({0, 0}), rot({1, 0}), rot({1, 1}), rot({0, 1})}));
    p.rect = Box{-0.6, -0.1, 1.025, 1.525};
    p.pde.coeffs = {5.0 / 4.0, -2.0 * std::sqrt(3.0) / 4.0, 7.0 / 4.0};
    // u_r(x) = u(R^T x); the Hessian transforms as R H R^T.
    const ExactSolution base = exact_solution("sin4x-cos3y");
    auto back = [c, s](Point2 q) { return Point2{c * q.x + s * q.y, -s * q.x + c * q.y}; };
    p.exact.u = [base, back](Point2 q) { return base.u(back(q)); };
    p.exact.grad = [base, back, c, s](Point2 q) {
      const Point2 g = base.grad(back(q));
      return Point2{c * g.x - s * g.y, s * g.x + c * g.y};
    };
    p.exact.hess = [base, back, c, s](Point2 q) {
      const auto h = base.hess(back(q));
      const double h11 = h[0], h12 = h[1], h22 = h[2];
      // R H R^T with R = [[c,-s],[s,c]].
      const double a11 = c * c * h11 - 2 * c * s * h12 + s * s * h22;
      const double a12 = c * s * h11 + (c * c - s * s) * h12 - c * s * h22;
      const double a22 = s * s * h11 + 2 * c * s * h12 + c * c * h22;
      return std::array<double, 3>{a11, a12, a22};
    };
    p.eps = 0.1;
    finish(p, BcKind::Dirichlet, BcKind::Dirichlet);
  } else if (name == "flower") {
    p.region.frame = Box{-0.5, -0.5, 0.5, 0.5};
    p.region.curves.push_back(flower_curve(0.25, 0.05, 6, opt.flower_pieces));
    p.rect = *p.region.frame;
    p.pde.coeffs = {1.0, 0.0, 1.0};
    p.exact = exact_solution("r4cos3t");
    p.eps = 0.02;
    finish(p, BcKind::Dirichlet, BcKind::Neumann);
  } else if (name == "four-disks") {
    p.region.frame = Box{0, 0, 1, 1};
    p.region.curves.push_back(disk_union_curve(
        {{0.5, 0.5}, 0.2}, {{{0.5, 0.735}, 0.1}, {{0.2965, 0.3825}, 0.1}, {{0.7035, 0.3825}, 0.1}}, opt.disk_pieces));
    p.rect = *p.region.frame;
    p.pde.coeffs = {1.0, 0.0, 1.0};
    p.exact = exact_solution("sinpix-sinpiy");
    p.eps = 0.08;
    finish(p, BcKind::Dirichlet, opt.curve_bc);
    if (opt.curve_bc == BcKind::Neumann) p.name = "four-disks-neumann";
  } else {
    throw std::invalid_argument("unknown problem '" + name + "'");
  }
  return p;
}

Problem file_problem(const std::string& path, const std::string& exact, const EllipticCoeffs& k, BcKind frame_bc,
                     BcKind curve_bc, double eps) {
  Problem p;
  p.name = "file";
  p.region = read_boundary_file(path);
  if (p.region.frame) {
    p.rect = *p.region.frame;
  } else {
    if (p.region.curves.empty()) throw GeometryError("boundary file has no curves");
    p.rect = bounds(p.region.curves.front());
    for (const auto& c : p.region.curves) {
      const Box b = bounds(c);
      p.rect = {std::min(p.rect.x0, b.x0), std::min(p.rect.y0, b.y0), std::max(p.rect.x1, b.x1),
                std::max(p.rect.y1, b.y1)};
    }
  }
  p.pde.coeffs = k;
  p.exact = exact_solution(exact);
  p.eps = eps;
  finish(p, frame_bc, curve_bc);
  return p;
}

std::vector<std::string> problem_names() { return {"unit-square", "rotated-square", "flower", "four-disks"}; }

}  // namespace cutfv
