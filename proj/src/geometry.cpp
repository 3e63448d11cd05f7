#include "cutfv/geometry.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "cutfv/quadrature.hpp"

namespace cutfv {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Box hull(const std::array<Point2, 4>& q, int count) {
  Box b{q[0].x, q[0].y, q[0].x, q[0].y};
  for (int i = 1; i < count; ++i) {
    b.x0 = std::min(b.x0, q[i].x);
    b.x1 = std::max(b.x1, q[i].x);
    b.y0 = std::min(b.y0, q[i].y);
    b.y1 = std::max(b.y1, q[i].y);
  }
  return b;
}

double eval_cubic(const std::array<double, 4>& c, double t) {
  return ((c[3] * t + c[2]) * t + c[1]) * t + c[0];
}

// Real roots of a t^2 + b t + c in (0,1).
void quadratic_roots01(double a, double b, double c, std::vector<double>& out) {
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
  if (scale == 0.0) return;
  auto keep = [&](double t) {
    if (t > 0.0 && t < 1.0) out.push_back(t);
  };
  if (std::abs(a) <= 1e-14 * scale) {
    if (b != 0.0) keep(-c / b);
    return;
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return;
  const double sq = std::sqrt(disc);
  const double qq = -0.5 * (b + (b >= 0.0 ? sq : -sq));
  if (qq != 0.0) {
    keep(qq / a);
    keep(c / qq);
  } else {
    keep(0.0);
  }
}

// Zeros of the cubic c on [0,1].  Breakpoints (ends and critical points) with
// |c| <= tol count as zeros; sign changes are refined by bisection.
void cubic_roots01(const std::array<double, 4>& c, double tol, std::vector<double>& out) {
  std::vector<double> br{0.0, 1.0};
  quadratic_roots01(3.0 * c[3], 2.0 * c[2], c[1], br);
  std::sort(br.begin(), br.end());
  std::vector<double> val(br.size());
  for (size_t i = 0; i < br.size(); ++i) {
    val[i] = eval_cubic(c, br[i]);
    if (std::abs(val[i]) <= tol) out.push_back(br[i]);
  }
  for (size_t i = 0; i + 1 < br.size(); ++i) {
    double lo = br[i], hi = br[i + 1];
    double flo = val[i], fhi = val[i + 1];
    if (std::abs(flo) <= tol || std::abs(fhi) <= tol) continue;
    if ((flo < 0.0) == (fhi < 0.0)) continue;
    for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = eval_cubic(c, mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    out.push_back(0.5 * (lo + hi));
  }
}

double chord_angle(Point2 a, Point2 b, Point2 p) {
  const Point2 u = a - p, v = b - p;
  return std::atan2(cross(u, v), dot(u, v));
}

double sub_angle(const CurvePiece& c, double ta, double tb, Point2 p, int depth) {
  if (c.kind() == CurvePiece::Kind::Line) return chord_angle(c.eval(ta), c.eval(tb), p);
  const Box b = c.bounds(ta, tb);
  if (!b.contains(p) || depth > 60) return chord_angle(c.eval(ta), c.eval(tb), p);
  const double mid = 0.5 * (ta + tb);
  return sub_angle(c, ta, mid, p, depth + 1) + sub_angle(c, mid, tb, p, depth + 1);
}

int base_winding(const Region& r) {
  if (!r.frame) return 0;
  for (const auto& c : r.curves)
    if (area(c) > 0.0) return 0;
  return 1;
}

// Helpers for walking the perimeter of a box counter-clockwise from (x0,y0).
struct Perimeter {
  Box b;
  double w, hgt, total;

  explicit Perimeter(const Box& box)
      : b(box), w(box.width()), hgt(box.height()), total(2.0 * (box.width() + box.height())) {}

  double sigma(Point2 p) const {
    if (p.y == b.y0 && p.x < b.x1) return p.x - b.x0;
    if (p.x == b.x1 && p.y < b.y1) return w + (p.y - b.y0);
    if (p.y == b.y1 && p.x > b.x0) return w + hgt + (b.x1 - p.x);
    return 2.0 * w + hgt + (b.y1 - p.y);
  }

  int side_of(double s) const {
    if (s < w) return 0;
    if (s < w + hgt) return 1;
    if (s < 2.0 * w + hgt) return 2;
    return 3;
  }

  Point2 at(double s) const {
    s = std::fmod(s, total);
    if (s < 0.0) s += total;
    if (s <= w) return {b.x0 + s, b.y0};
    if (s <= w + hgt) return {b.x1, b.y0 + (s - w)};
    if (s <= 2.0 * w + hgt) return {b.x1 - (s - w - hgt), b.y1};
    return {b.x0, b.y1 - (s - 2.0 * w - hgt)};
  }

  // Corner point for exact endpoints.
  Point2 corner(int k) const {
    switch (k & 3) {
      case 0: return {b.x0, b.y0};
      case 1: return {b.x1, b.y0};
      case 2: return {b.x1, b.y1};
      default: return {b.x0, b.y1};
    }
  }

  double corner_sigma(int k) const {
    const double c[5] = {0.0, w, w + hgt, 2.0 * w + hgt, total};
    return c[k];
  }
};

struct Run {
  int curve = 0;
  std::vector<Edge> edges;
  Point2 a, b;
  double sa = 0.0, sb = 0.0;
  bool closed = false;
};

struct Interval {
  int piece;
  double ta, tb;
};

}  // namespace

CurvePiece CurvePiece::line(Point2 a, Point2 b) {
  CurvePiece p;
  p.kind_ = Kind::Line;
  p.c_ = {a, b - a, Point2{}, Point2{}};
  return p;
}

CurvePiece CurvePiece::cubic(Point2 p0, Point2 p1, Point2 p2, Point2 p3) {
  CurvePiece p;
  p.kind_ = Kind::Cubic;
  p.c_ = {p0, 3.0 * (p1 - p0), 3.0 * (p0 - 2.0 * p1 + p2), p3 - 3.0 * p2 + 3.0 * p1 - p0};
  return p;
}

std::array<Point2, 4> CurvePiece::bezier(double ta, double tb) const {
  const double d = (tb - ta) / 3.0;
  const Point2 a = eval(ta), b = eval(tb);
  return {a, a + d * deriv(ta), b - d * deriv(tb), b};
}

Box CurvePiece::bounds(double ta, double tb) const {
  if (kind_ == Kind::Line) {
    std::array<Point2, 4> q{eval(ta), eval(tb), Point2{}, Point2{}};
    return hull(q, 2);
  }
  return hull(bezier(ta, tb), 4);
}

double CurvePiece::length(double ta, double tb) const {
  if (kind_ == Kind::Line) return norm(c_[1]) * std::abs(tb - ta);
  const GaussRule& g = gauss_rule(16);
  const double half = 0.5 * (tb - ta), mid = 0.5 * (ta + tb);
  double s = 0.0;
  for (size_t k = 0; k < g.nodes.size(); ++k) s += g.weights[k] * norm(deriv(mid + half * g.nodes[k]));
  return s * std::abs(half);
}

std::vector<Edge> boundary_edges(const CellGeometry& g) {
  std::vector<Edge> out;
  for (const auto& loop : g.loops)
    for (const auto& e : loop)
      if (e.on_boundary()) out.push_back(e);
  return out;
}

std::vector<Edge> face_edges(const CellGeometry& g, int side) {
  std::vector<Edge> out;
  for (const auto& loop : g.loops)
    for (const auto& e : loop)
      if (!e.on_curve() && e.side == side) out.push_back(e);
  return out;
}

double loop_area(const Loop& loop, double xi0) {
  // Green: area = closed integral of (x - xi0) dy.
  const GaussRule& g = gauss_rule(3);
  double a = 0.0;
  for (const auto& e : loop) {
    const double half = 0.5 * (e.t1 - e.t0), mid = 0.5 * (e.t0 + e.t1);
    for (size_t k = 0; k < g.nodes.size(); ++k) {
      const double t = mid + half * g.nodes[k];
      a += g.weights[k] * half * (e.geom.eval(t).x - xi0) * e.geom.deriv(t).y;
    }
  }
  return a;
}

double area(const JordanCurve& c) {
  Loop loop;
  loop.reserve(c.pieces.size());
  for (const auto& p : c.pieces) loop.push_back(Edge{p, 0.0, 1.0, 0, 0, -1});
  const double xi0 = c.pieces.empty() ? 0.0 : c.pieces.front().eval(0.0).x;
  return loop_area(loop, xi0);
}

Box bounds(const JordanCurve& c) {
  Box b{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
        std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  for (const auto& p : c.pieces) {
    const Box q = p.bounds();
    b.x0 = std::min(b.x0, q.x0);
    b.y0 = std::min(b.y0, q.y0);
    b.x1 = std::max(b.x1, q.x1);
    b.y1 = std::max(b.y1, q.y1);
  }
  return b;
}

int winding_number(const JordanCurve& c, Point2 p) {
  if (!bounds(c).contains(p)) return 0;
  double total = 0.0;
  for (const auto& piece : c.pieces) total += sub_angle(piece, 0.0, 1.0, p, 0);
  return static_cast<int>(std::lround(total / kTwoPi));
}

int winding_number(const Loop& loop, Point2 p) {
  double total = 0.0;
  for (const auto& e : loop) total += sub_angle(e.geom, e.t0, e.t1, p, 0);
  return static_cast<int>(std::lround(total / kTwoPi));
}

bool region_contains(const Region& r, Point2 p) {
  if (r.frame && !(p.x > r.frame->x0 && p.x < r.frame->x1 && p.y > r.frame->y0 && p.y < r.frame->y1))
    return false;
  int w = base_winding(r);
  for (const auto& c : r.curves) w += winding_number(c, p);
  return w == 1;
}

std::vector<CellGeometry> clip_to_box(const Region& r, const Box& box) {
  std::vector<std::pair<int, int>> cand;
  for (int c = 0; c < static_cast<int>(r.curves.size()); ++c) {
    const auto& pieces = r.curves[c].pieces;
    for (int k = 0; k < static_cast<int>(pieces.size()); ++k)
      if (pieces[k].bounds().overlaps(box.expanded(tau_geom(box.width())))) cand.emplace_back(c, k);
  }
  return clip_to_box(r, box, cand);
}

std::vector<CellGeometry> clip_to_box(const Region& r, const Box& box,
                                      const std::vector<std::pair<int, int>>& candidates) {
  const double h = std::min(box.width(), box.height());
  const double tau = tau_geom(h);
  const double tiny = 1e-7 * h;
  const Box inner{box.x0 + tau, box.y0 + tau, box.x1 - tau, box.y1 - tau};
  const Box outer = box.expanded(tau);
  const Perimeter per(box);

  auto on_frame = [&](int side) {
    if (!r.frame) return false;
    const Box& f = *r.frame;
    switch (side) {
      case 0: return std::abs(box.y0 - f.y0) <= tau;
      case 1: return std::abs(box.x1 - f.x1) <= tau;
      case 2: return std::abs(box.y1 - f.y1) <= tau;
      default: return std::abs(box.x0 - f.x0) <= tau;
    }
  };

  auto snap = [&](Point2 p) {
    const double d[4] = {std::abs(p.y - box.y0), std::abs(p.x - box.x1), std::abs(p.y - box.y1),
                         std::abs(p.x - box.x0)};
    const int s = static_cast<int>(std::min_element(d, d + 4) - d);
    if (d[s] > 1e-9 * h)
      throw GeometryError("curve run ends off the cell boundary");
    if (s == 0) p.y = box.y0;
    if (s == 1) p.x = box.x1;
    if (s == 2) p.y = box.y1;
    if (s == 3) p.x = box.x0;
    p.x = std::clamp(p.x, box.x0, box.x1);
    p.y = std::clamp(p.y, box.y0, box.y1);
    if (std::abs(p.x - box.x0) <= tau) p.x = box.x0;
    if (std::abs(p.x - box.x1) <= tau) p.x = box.x1;
    if (std::abs(p.y - box.y0) <= tau) p.y = box.y0;
    if (std::abs(p.y - box.y1) <= tau) p.y = box.y1;
    // A point snapped onto two sides is a corner; it must still lie on the
    // chosen side, so re-pin that coordinate.
    if (s == 0) p.y = box.y0;
    if (s == 1) p.x = box.x1;
    if (s == 2) p.y = box.y1;
    if (s == 3) p.x = box.x0;
    return p;
  };

  // Group candidates by curve.
  std::vector<std::vector<int>> by_curve(r.curves.size());
  for (auto [c, k] : candidates) by_curve[c].push_back(k);

  std::vector<Run> runs;
  for (int c = 0; c < static_cast<int>(r.curves.size()); ++c) {
    auto& ks = by_curve[c];
    if (ks.empty()) continue;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    const auto& pieces = r.curves[c].pieces;
    const int np = static_cast<int>(pieces.size());

    std::vector<Interval> ins;
    bool all_inside = static_cast<int>(ks.size()) == np;
    for (int k : ks) {
      const CurvePiece& pc = pieces[k];
      const Box bb = pc.bounds();
      if (!bb.overlaps(outer)) {
        all_inside = false;
        continue;
      }
      if (bb.x0 > inner.x0 && bb.x1 < inner.x1 && bb.y0 > inner.y0 && bb.y1 < inner.y1) {
        ins.push_back({k, 0.0, 1.0});
        continue;
      }
      const auto& pw = pc.power();
      std::vector<double> ts{0.0, 1.0};
      const double xs[2] = {box.x0, box.x1};
      const double ys[2] = {box.y0, box.y1};
      for (double v : xs) cubic_roots01({pw[0].x - v, pw[1].x, pw[2].x, pw[3].x}, tau, ts);
      for (double v : ys) cubic_roots01({pw[0].y - v, pw[1].y, pw[2].y, pw[3].y}, tau, ts);
      std::sort(ts.begin(), ts.end());
      std::vector<double> split{ts.front()};
      for (size_t i = 1; i < ts.size(); ++i) {
        if (ts[i] - split.back() <= 1e-15 || distance(pc.eval(ts[i]), pc.eval(split.back())) <= 4.0 * tau) {
          if (ts[i] == 1.0) split.back() = 1.0;
          continue;
        }
        split.push_back(ts[i]);
      }
      if (split.back() != 1.0) split.push_back(1.0);
      if (split.front() != 0.0) split.insert(split.begin(), 0.0);
      bool piece_inside = true;
      for (size_t i = 0; i + 1 < split.size(); ++i) {
        const double ta = split[i], tb = split[i + 1];
        const Point2 m = pc.eval(0.5 * (ta + tb));
        bool inside = false;
        if (m.x > inner.x0 && m.x < inner.x1 && m.y > inner.y0 && m.y < inner.y1) {
          inside = true;
        } else if (outer.contains(m)) {
          const double chord = std::max(distance(pc.eval(ta), m), distance(m, pc.eval(tb)));
          if (chord > tiny) throw GeometryError("curve piece runs along a cell side");
        }
        if (!inside) {
          piece_inside = false;
          continue;
        }
        if (!ins.empty() && ins.back().piece == k && ins.back().tb == ta)
          ins.back().tb = tb;
        else
          ins.push_back({k, ta, tb});
      }
      if (!piece_inside) all_inside = false;
    }
    if (ins.empty()) continue;

    auto make_edge = [&](const Interval& iv) {
      return Edge{pieces[iv.piece], iv.ta, iv.tb, c, iv.piece, -1};
    };
    if (all_inside) {
      Run run;
      run.curve = c;
      run.closed = true;
      for (const auto& iv : ins) run.edges.push_back(make_edge(iv));
      runs.push_back(std::move(run));
      continue;
    }
    std::vector<Run> local;
    for (size_t i = 0; i < ins.size(); ++i) {
      const auto& iv = ins[i];
      const bool cont = !local.empty() && i > 0 && ins[i - 1].tb == 1.0 && iv.ta == 0.0 &&
                        iv.piece == (ins[i - 1].piece + 1) % np;
      if (!cont) {
        local.emplace_back();
        local.back().curve = c;
      }
      local.back().edges.push_back(make_edge(iv));
    }
    if (local.size() > 1 && ins.front().ta == 0.0 && ins.front().piece == 0 && ins.back().tb == 1.0 &&
        ins.back().piece == np - 1) {
      auto& last = local.back();
      last.edges.insert(last.edges.end(), local.front().edges.begin(), local.front().edges.end());
      local.front() = std::move(last);
      local.pop_back();
    }
    for (auto& run : local) {
      run.a = snap(run.edges.front().start());
      run.b = snap(run.edges.back().end());
      run.sa = per.sigma(run.a);
      run.sb = per.sigma(run.b);
      runs.push_back(std::move(run));
    }
  }

  auto face = [&](Point2 a, Point2 b, int side) {
    Edge e{CurvePiece::line(a, b), 0.0, 1.0, on_frame(side) ? kFrameSide : kFace, -1, side};
    return e;
  };

  // Face segments from sigma sa counter-clockwise to sb, split at corners.
  auto perimeter_path = [&](Point2 pa, double sa, Point2 pb, double sb, Loop& out) {
    double d = sb - sa;
    if (d < 0.0) d += per.total;
    const double target = sa + d;
    double cur = sa;
    Point2 cp = pa;
    for (int k = 1; k <= 8 && cur < target; ++k) {
      const double cs = per.corner_sigma(k & 3) + (k >= 4 ? per.total : 0.0);
      if (cs <= cur) continue;
      const int side = per.side_of(std::fmod(cur, per.total));
      const bool last = cs >= target;
      const Point2 np = last ? pb : per.corner(k);
      if (distance(cp, np) > 0.0) out.push_back(face(cp, np, side));
      cur = last ? target : cs;
      cp = np;
    }
  };

  std::vector<Loop> outers, holes;
  std::vector<int> open;
  for (int i = 0; i < static_cast<int>(runs.size()); ++i) {
    if (runs[i].closed) {
      const double a = loop_area(runs[i].edges, box.center().x);
      (a > 0.0 ? outers : holes).push_back(runs[i].edges);
    } else {
      open.push_back(i);
    }
  }

  bool regular = false;
  if (open.empty()) {
    // The perimeter does not meet the curves, so any point just inside it
    // decides.  On a frame side the perimeter itself is outside.
    if (region_contains(r, {box.x0 + 0.5 * box.width(), box.y0 + tiny})) {
      Loop loop;
      for (int k = 0; k < 4; ++k) loop.push_back(face(per.corner(k), per.corner(k + 1), k));
      outers.insert(outers.begin(), loop);
      regular = holes.empty() && outers.size() == 1;
    }
  } else {
    std::vector<char> used(runs.size(), 0);
    for (int start : open) {
      if (used[start]) continue;
      Loop loop;
      int cur = start;
      for (size_t guard = 0; guard <= open.size(); ++guard) {
        used[cur] = 1;
        const Run& rc = runs[cur];
        loop.insert(loop.end(), rc.edges.begin(), rc.edges.end());
        int next = -1;
        double best = std::numeric_limits<double>::max();
        for (int j : open) {
          if (used[j] && j != start) continue;
          double d = runs[j].sa - rc.sb;
          if (d < 0.0) d += per.total;
          if (d < best) {
            best = d;
            next = j;
          }
        }
        perimeter_path(rc.b, rc.sb, runs[next].a, runs[next].sa, loop);
        if (next == start) break;
        if (used[next]) throw GeometryError("inconsistent boundary crossings");
        cur = next;
      }
      outers.push_back(std::move(loop));
    }
  }

  std::vector<CellGeometry> out;
  const double xi0 = box.center().x;
  std::vector<double> outer_area;
  for (const auto& lp : outers) {
    CellGeometry g;
    g.box = box;
    g.loops.push_back(lp);
    out.push_back(std::move(g));
    outer_area.push_back(loop_area(lp, xi0));
  }
  for (auto& hl : holes) {
    const Point2 p = hl.front().geom.eval(0.5 * (hl.front().t0 + hl.front().t1));
    int best = -1;
    for (int i = 0; i < static_cast<int>(outers.size()); ++i) {
      if (winding_number(outers[i], p) == 0) continue;
      if (best < 0 || outer_area[i] < outer_area[best]) best = i;
    }
    if (best < 0) throw GeometryError("hole loop outside every component");
    out[best].loops.push_back(std::move(hl));
  }
  std::vector<CellGeometry> kept;
  for (auto& g : out) {
    g.volume = 0.0;
    for (const auto& lp : g.loops) g.volume += loop_area(lp, xi0);
    g.regular = regular;
    if (g.volume > tau * h) kept.push_back(std::move(g));
  }
  return kept;
}

CellGeometry regularized_union(const CellGeometry& a, const CellGeometry& b) {
  const double h = std::min(a.box.width(), a.box.height());
  const double tol = 1e-9 * h;
  std::vector<Edge> ea, eb;
  for (const auto& lp : a.loops) ea.insert(ea.end(), lp.begin(), lp.end());
  for (const auto& lp : b.loops) eb.insert(eb.end(), lp.begin(), lp.end());
  std::vector<char> da(ea.size(), 0), db(eb.size(), 0);
  int matched = 0;
  for (size_t i = 0; i < ea.size(); ++i) {
    if (ea[i].curve != kFace) continue;
    for (size_t j = 0; j < eb.size(); ++j) {
      if (db[j] || eb[j].curve != kFace) continue;
      if (distance(ea[i].start(), eb[j].end()) <= tol && distance(ea[i].end(), eb[j].start()) <= tol) {
        da[i] = db[j] = 1;
        ++matched;
        break;
      }
    }
  }
  if (matched == 0) throw NotAdjacent("cells share no face segment");

  std::vector<Edge> pool;
  for (size_t i = 0; i < ea.size(); ++i)
    if (!da[i]) pool.push_back(ea[i]);
  for (size_t j = 0; j < eb.size(); ++j)
    if (!db[j]) pool.push_back(eb[j]);

  CellGeometry g;
  g.box = a.box;
  std::vector<char> used(pool.size(), 0);
  for (size_t s = 0; s < pool.size(); ++s) {
    if (used[s]) continue;
    Loop loop{pool[s]};
    used[s] = 1;
    const Point2 first = pool[s].start();
    for (size_t guard = 0; guard < pool.size(); ++guard) {
      const Point2 cur = loop.back().end();
      if (distance(cur, first) <= tol) break;
      size_t nxt = pool.size();
      for (size_t j = 0; j < pool.size(); ++j)
        if (!used[j] && distance(pool[j].start(), cur) <= tol) {
          nxt = j;
          break;
        }
      if (nxt == pool.size()) throw GeometryError("merged boundary does not close");
      used[nxt] = 1;
      loop.push_back(pool[nxt]);
    }
    g.loops.push_back(std::move(loop));
  }
  // Outer loop first: the one with the largest signed area.
  const double xi0 = g.box.center().x;
  std::stable_sort(g.loops.begin(), g.loops.end(),
                   [&](const Loop& p, const Loop& q) { return loop_area(p, xi0) > loop_area(q, xi0); });
  g.volume = a.volume + b.volume;
  g.regular = false;
  return g;
}

ClosestPoint closest_point(const JordanCurve& c, Point2 p) {
  const int np = static_cast<int>(c.pieces.size());
  if (np == 0) throw GeometryError("empty curve");
  std::vector<double> cum(np + 1, 0.0);
  for (int k = 0; k < np; ++k) cum[k + 1] = cum[k] + c.pieces[k].length();
  const double total = cum[np];

  ClosestPoint best;
  best.dist = std::numeric_limits<double>::max();
  int best_piece = -1;
  double best_t = 0.0;
  auto consider = [&](int k, double t) {
    const double d = distance(c.pieces[k].eval(t), p);
    if (d < best.dist - 1e-14 || (d <= best.dist + 1e-14 && (k < best_piece || (k == best_piece && t < best_t)))) {
      best.dist = std::min(d, best.dist);
      best_piece = k;
      best_t = t;
    }
  };
  for (int k = 0; k < np; ++k) {
    const CurvePiece& pc = c.pieces[k];
    const Box bb = pc.bounds();
    const double dx = std::max({bb.x0 - p.x, 0.0, p.x - bb.x1});
    const double dy = std::max({bb.y0 - p.y, 0.0, p.y - bb.y1});
    if (std::hypot(dx, dy) > best.dist + 1e-12) continue;
    if (pc.kind() == CurvePiece::Kind::Line) {
      const Point2 d = pc.power()[1];
      const double t = std::clamp(dot(p - pc.eval(0.0), d) / dot(d, d), 0.0, 1.0);
      consider(k, t);
      continue;
    }
    constexpr int ns = 16;
    double dist[ns + 1];
    for (int i = 0; i <= ns; ++i) dist[i] = distance(pc.eval(double(i) / ns), p);
    for (int i = 0; i <= ns; ++i) {
      const bool local = (i == 0 || dist[i] <= dist[i - 1]) && (i == ns || dist[i] <= dist[i + 1]);
      if (!local) continue;
      double lo = std::max(0.0, (i - 1.0) / ns), hi = std::min(1.0, (i + 1.0) / ns);
      double t = double(i) / ns;
      for (int it = 0; it < 40; ++it) {
        const Point2 q = pc.eval(t) - p, d1 = pc.deriv(t), d2 = pc.second_deriv(t);
        const double g1 = dot(q, d1), g2 = dot(d1, d1) + dot(q, d2);
        double tn = g2 > 0.0 ? t - g1 / g2 : 0.5 * (lo + hi);
        if (!(tn > lo && tn < hi)) tn = g1 > 0.0 ? 0.5 * (lo + t) : 0.5 * (t + hi);
        if (g1 > 0.0)
          hi = t;
        else
          lo = t;
        if (std::abs(tn - t) < 1e-15) {
          t = tn;
          break;
        }
        t = tn;
      }
      consider(k, t);
      consider(k, double(i) / ns);
    }
  }
  best.point = c.pieces[best_piece].eval(best_t);
  double s = (cum[best_piece] + c.pieces[best_piece].length(0.0, best_t)) / total;
  if (s >= 1.0) s -= 1.0;
  best.s = s;
  return best;
}

JordanCurve polygon_curve(const std::vector<Point2>& v) {
  JordanCurve c;
  for (size_t i = 0; i < v.size(); ++i) c.pieces.push_back(CurvePiece::line(v[i], v[(i + 1) % v.size()]));
  return c;
}

JordanCurve box_curve(const Box& b) {
  return polygon_curve({{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}});
}

Region read_boundary(std::istream& in) {
  Region r;
  std::string line;
  int expected = 0;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ss(line);
    std::string kw;
    if (!(ss >> kw)) continue;
    auto fail = [&](const std::string& what) {
      throw GeometryError("boundary file line " + std::to_string(lineno) + ": " + what);
    };
    if (kw == "frame") {
      Box b;
      if (!(ss >> b.x0 >> b.y0 >> b.x1 >> b.y1)) fail("bad frame");
      r.frame = b;
    } else if (kw == "curve") {
      if (expected != 0) fail("previous curve is incomplete");
      if (!(ss >> expected) || expected <= 0) fail("bad piece count");
      r.curves.emplace_back();
    } else if (kw == "line" || kw == "cubic") {
      if (expected == 0) fail("piece outside a curve");
      const int np = kw == "line" ? 2 : 4;
      Point2 q[4];
      for (int i = 0; i < np; ++i)
        if (!(ss >> q[i].x >> q[i].y)) fail("bad coordinates");
      r.curves.back().pieces.push_back(np == 2 ? CurvePiece::line(q[0], q[1])
                                               : CurvePiece::cubic(q[0], q[1], q[2], q[3]));
      --expected;
    } else {
      fail("unknown keyword '" + kw + "'");
    }
  }
  if (expected != 0) throw GeometryError("boundary file ends inside a curve");
  for (const auto& c : r.curves) {
    for (size_t k = 0; k < c.pieces.size(); ++k) {
      const Point2 e = c.pieces[k].eval(1.0), s = c.pieces[(k + 1) % c.pieces.size()].eval(0.0);
      if (distance(e, s) > 1e-12 * (1.0 + norm(e))) throw GeometryError("boundary curve is not closed");
    }
  }
  return r;
}

Region read_boundary_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GeometryError("cannot open boundary file " + path);
  return read_boundary(in);
}

void write_boundary(std::ostream& out, const Region& r) {
  out.precision(17);
  if (r.frame) out << "frame " << r.frame->x0 << ' ' << r.frame->y0 << ' ' << r.frame->x1 << ' ' << r.frame->y1 << '\n';
  for (const auto& c : r.curves) {
    out << "curve " << c.pieces.size() << '\n';
    for (const auto& p : c.pieces) {
      if (p.kind() == CurvePiece::Kind::Line) {
        const Point2 a = p.eval(0.0), b = p.eval(1.0);
        out << "line " << a.x << ' ' << a.y << ' ' << b.x << ' ' << b.y << '\n';
      } else {
        const auto q = p.bezier(0.0, 1.0);
        out << "cubic";
        for (const auto& v : q) out << ' ' << v.x << ' ' << v.y;
        out << '\n';
      }
    }
  }
}

}  // namespace cutfv
