#include <doctest.h>

#include <sstream>

#include "cutfv/cutcell.hpp"
#include "cutfv/problems.hpp"
#include "oracles.hpp"

using namespace cutfv;

namespace {

JordanCurve circle(Point2 c, double r, int pieces) {
  JordanCurve j;
  j.pieces = circle_arc(c, r, 0.0, 2.0 * std::numbers::pi, pieces);
  return j;
}

double curve_area_oracle(const JordanCurve& c) {
  const int np = static_cast<int>(c.pieces.size());
  return oracle::enclosed_area(
      [&](double t) {
        const int k = std::min(np - 1, static_cast<int>(t * np));
        const Point2 p = c.pieces[k].eval(t * np - k);
        const Point2 d = c.pieces[k].deriv(t * np - k);
        return std::array<double, 4>{p.x, p.y, d.x * np, d.y * np};
      },
      np);
}

}  // namespace

TEST_CASE("piece evaluation and Bezier round trip") {
  const auto pc = CurvePiece::cubic({0, 0}, {1, 2}, {3, 2}, {4, 0});
  CHECK(pc.eval(0.0).x == doctest::Approx(0.0));
  CHECK(pc.eval(1.0).x == doctest::Approx(4.0));
  // B(1/2) = (P0 + 3P1 + 3P2 + P3) / 8
  CHECK(pc.eval(0.5).x == doctest::Approx(2.0));
  CHECK(pc.eval(0.5).y == doctest::Approx(1.5));
  const auto q = pc.bezier(0.25, 0.75);
  const auto sub = CurvePiece::cubic(q[0], q[1], q[2], q[3]);
  for (double t : {0.0, 0.3, 0.7, 1.0}) {
    CHECK(sub.eval(t).x == doctest::Approx(pc.eval(0.25 + 0.5 * t).x));
    CHECK(sub.eval(t).y == doctest::Approx(pc.eval(0.25 + 0.5 * t).y));
  }
  const Box b = pc.bounds();
  CHECK(b.y1 >= 1.5);
  CHECK(b.x0 <= 0.0);
}

TEST_CASE("polygon area and winding") {
  const JordanCurve tri = polygon_curve({{0, 0}, {2, 0}, {0, 1}});
  CHECK(area(tri) == doctest::Approx(1.0));
  CHECK(winding_number(tri, {0.2, 0.2}) == 1);
  CHECK(winding_number(tri, {1.5, 0.9}) == 0);
  const JordanCurve cw = reversed(tri);
  CHECK(area(cw) == doctest::Approx(-1.0));
  CHECK(winding_number(cw, {0.2, 0.2}) == -1);
}

TEST_CASE("Bezier circle area matches a sampled oracle") {
  const JordanCurve c = circle({0.1, -0.2}, 0.7, 8);
  CHECK(area(c) == doctest::Approx(curve_area_oracle(c)).epsilon(1e-9));
  CHECK(area(c) == doctest::Approx(std::numbers::pi * 0.49).epsilon(1e-5));
}

TEST_CASE("clipped pieces of a disk add up to its area") {
  Region r;
  r.curves.push_back(circle({0, 0}, 1.0, 16));
  const double h = 0.25;
  double total = 0.0;
  int regular = 0;
  for (int i = -4; i < 4; ++i)
    for (int j = -4; j < 4; ++j)
      for (const auto& g : clip_to_box(r, {i * h, j * h, (i + 1) * h, (j + 1) * h})) {
        total += g.volume;
        CHECK(g.volume > 0.0);
        CHECK(g.volume <= h * h * (1 + 1e-14));
        regular += g.regular;
      }
  CHECK(total == doctest::Approx(curve_area_oracle(r.curves[0])).epsilon(1e-10));
  // Cells whose box lies inside the circle of radius 1 - tiny.
  int inside = 0;
  for (int i = -4; i < 4; ++i)
    for (int j = -4; j < 4; ++j) {
      const double fx = std::max(std::abs(i * h), std::abs((i + 1) * h));
      const double fy = std::max(std::abs(j * h), std::abs((j + 1) * h));
      inside += fx * fx + fy * fy < 0.999;
    }
  CHECK(regular == inside);
}

TEST_CASE("box with a hole splits into loops") {
  Region r;
  r.frame = Box{0, 0, 1, 1};
  r.curves.push_back(reversed(circle({0.5, 0.5}, 0.2, 8)));
  const auto parts = clip_to_box(r, {0, 0, 1, 1});
  REQUIRE(parts.size() == 1);
  CHECK(parts[0].loops.size() == 2);
  CHECK(parts[0].volume == doctest::Approx(1.0 + area(r.curves[0])).epsilon(1e-12));
  CHECK(region_contains(r, {0.05, 0.05}));
  CHECK_FALSE(region_contains(r, {0.5, 0.5}));
}

TEST_CASE("a thin neck gives two components") {
  // Dumbbell: two disks joined far from the box, cut by a box across the gap.
  Region r;
  r.frame = Box{0, 0, 1, 1};
  r.curves.push_back(reversed(polygon_curve({{0.4, -0.5}, {0.6, -0.5}, {0.6, 1.5}, {0.4, 1.5}})));
  const auto parts = clip_to_box(r, {0.25, 0.25, 0.75, 0.75});
  REQUIRE(parts.size() == 2);
  CHECK(parts[0].volume + parts[1].volume == doctest::Approx(0.25 - 0.1));
}

TEST_CASE("regularized union of face neighbours") {
  Region r;
  r.curves.push_back(polygon_curve({{-0.5, -0.5}, {3, -0.5}, {-0.5, 2.2}}));
  const auto a = clip_to_box(r, {0, 0, 1, 1});
  const auto b = clip_to_box(r, {1, 0, 2, 1});
  REQUIRE(a.size() == 1);
  REQUIRE(b.size() == 1);
  const CellGeometry u = regularized_union(a[0], b[0]);
  CHECK(u.volume == doctest::Approx(a[0].volume + b[0].volume));
  // Hypotenuse y = -0.5 + 2.7 (3 - x) / 3.5 meets y = 1 at x1.
  const double x1 = 3.0 - 1.5 * 3.5 / 2.7;
  auto prim = [](double x) { return -0.5 * x + 2.7 * (3.0 * x - 0.5 * x * x) / 3.5; };
  CHECK(loop_area(u.loops[0]) == doctest::Approx(x1 + prim(2.0) - prim(x1)).epsilon(1e-12));
  const auto far = clip_to_box(r, {0, 1, 1, 2});
  CHECK_THROWS_AS(regularized_union(b[0], far[0]), NotAdjacent);
}

TEST_CASE("closest point on a square") {
  const JordanCurve sq = box_curve({0, 0, 1, 1});
  const auto cp = closest_point(sq, {0.5, -0.3});
  CHECK(cp.dist == doctest::Approx(0.3));
  CHECK(cp.point.x == doctest::Approx(0.5));
  CHECK(cp.point.y == doctest::Approx(0.0).epsilon(1e-12));
  const auto cp2 = closest_point(sq, {1.2, 0.5});
  CHECK(cp2.s > cp.s);
}

TEST_CASE("boundary file round trip") {
  Region r;
  r.frame = Box{0, 0, 1, 1};
  r.curves.push_back(reversed(circle({0.5, 0.5}, 0.25, 4)));
  std::stringstream ss;
  write_boundary(ss, r);
  const Region back = read_boundary(ss);
  REQUIRE(back.frame);
  CHECK(back.frame->x1 == 1.0);
  REQUIRE(back.curves.size() == 1);
  CHECK(back.curves[0].pieces.size() == 4);
  CHECK(area(back.curves[0]) == doctest::Approx(area(r.curves[0])).epsilon(1e-15));

  std::stringstream bad("curve 1\nline 0 0 1 0\n");
  CHECK_THROWS_AS(read_boundary(bad), GeometryError);
  std::stringstream junk("curve 1\nspline 0 0\n");
  CHECK_THROWS_AS(read_boundary(junk), GeometryError);
}
