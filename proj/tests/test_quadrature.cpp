#include <doctest.h>

#include "cutfv/problems.hpp"
#include "cutfv/quadrature.hpp"
#include "oracles.hpp"

using namespace cutfv;

TEST_CASE("Gauss rules agree with the Golub-Welsch oracle") {
  for (int k = 1; k <= 32; ++k) {
    std::vector<double> x, w;
    oracle::gauss_legendre(k, x, w);
    const GaussRule& r = gauss_rule(k);
    REQUIRE(r.nodes.size() == static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) {
      CHECK(r.nodes[i] == doctest::Approx(x[i]).epsilon(1e-12).scale(1.0));
      CHECK(r.weights[i] == doctest::Approx(w[i]).epsilon(1e-12).scale(1.0));
    }
  }
  CHECK_THROWS(gauss_rule(0));
  CHECK_THROWS(gauss_rule(33));
}

TEST_CASE("Gauss rule with k points integrates degree 2k-1 exactly") {
  for (int k : {1, 2, 5, 9, 16}) {
    const GaussRule& r = gauss_rule(k);
    for (int d = 0; d <= 2 * k - 1; ++d) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += r.weights[i] * std::pow(r.nodes[i], d);
      const double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
      CHECK(s == doctest::Approx(exact).scale(1.0).epsilon(1e-13));
    }
  }
}

TEST_CASE("monomial order") {
  const auto e = monomial_exponents(2);
  const std::vector<Exponent> want{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  CHECK(e == want);
  for (int n = 0; n <= 6; ++n) {
    const auto ex = monomial_exponents(n);
    CHECK(static_cast<int>(ex.size()) == num_monomials(n));
    for (size_t i = 0; i < ex.size(); ++i) CHECK(monomial_index(ex[i]) == static_cast<int>(i));
  }
}

TEST_CASE("box moments are products of one-dimensional averages") {
  const Box b{0.25, -0.5, 0.5, -0.25};
  const Point2 p{0.3, -0.4};
  const double h = 0.25;
  const auto m = box_moments(b, p, h, 5);
  const auto ex = monomial_exponents(5);
  auto avg1 = [&](double lo, double hi, double c, int k) {
    return (std::pow((hi - c) / h, k + 1) - std::pow((lo - c) / h, k + 1)) / (k + 1) * h / (hi - lo);
  };
  for (size_t i = 0; i < ex.size(); ++i)
    CHECK(m[i] == doctest::Approx(avg1(b.x0, b.x1, p.x, ex[i][0]) * avg1(b.y0, b.y1, p.y, ex[i][1])));
  CellGeometry g;
  g.box = b;
  g.volume = b.width() * b.height();
  g.regular = true;
  g.loops.push_back({});
  const Point2 v[4] = {{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}};
  for (int s = 0; s < 4; ++s) {
    Edge e;
    e.geom = CurvePiece::line(v[s], v[(s + 1) % 4]);
    e.side = s;
    g.loops[0].push_back(e);
  }
  const auto mc = cell_moments(g, p, h, 5);
  for (size_t i = 0; i < ex.size(); ++i) CHECK(mc[i] == doctest::Approx(m[i]).scale(1.0).epsilon(1e-13));
}

TEST_CASE("moments of a triangle cell against a collapsed Gauss oracle") {
  Region r;
  const Point2 a{0.1, 0.15}, b{0.9, 0.3}, c{0.35, 0.85};
  r.curves.push_back(polygon_curve({a, b, c}));
  const auto parts = clip_to_box(r, {0, 0, 1, 1});
  REQUIRE(parts.size() == 1);
  const Point2 p{0.5, 0.5};
  const double h = 1.0;
  const auto m = cell_moments(parts[0], p, h, 4);
  const auto ex = monomial_exponents(4);
  const double vol = 0.5 * std::abs(cross(b - a, c - a));
  CHECK(parts[0].volume == doctest::Approx(vol));
  for (size_t i = 0; i < ex.size(); ++i) {
    const double want = oracle::triangle_integral(a, b, c, [&](double x, double y) {
      return std::pow(x - p.x, ex[i][0]) * std::pow(y - p.y, ex[i][1]);
    }) / vol;
    CHECK(m[i] == doctest::Approx(want).scale(1.0).epsilon(1e-13));
  }
  // Cell average of a non-polynomial integrand.
  auto f = [](Point2 q) { return std::exp(q.x) * std::sin(2 * q.y); };
  const double want =
      oracle::triangle_integral(a, b, c, [&](double x, double y) { return f({x, y}); }, 20) / vol;
  CHECK(integrate_average(parts[0], f) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("moments of a quarter disk in polar coordinates") {
  // Quarter disk of radius 0.8 about the box corner (0, 0).
  Region r;
  JordanCurve c;
  c.pieces = circle_arc({0, 0}, 0.8, 0.0, 2.0 * std::numbers::pi, 64);
  r.curves.push_back(c);
  const auto parts = clip_to_box(r, {0, 0, 1, 1});
  REQUIRE(parts.size() == 1);
  std::vector<double> x, w;
  oracle::gauss_legendre(20, x, w);
  const auto m = cell_moments(parts[0], {0.5, 0.5}, 0.5, 4);
  const auto ex = monomial_exponents(4);
  const double vol = std::numbers::pi * 0.64 / 4.0;
  CHECK(parts[0].volume == doctest::Approx(vol).epsilon(1e-9));
  for (size_t i = 0; i < ex.size(); ++i) {
    double s = 0.0;
    for (int a = 0; a < 20; ++a)
      for (int b = 0; b < 20; ++b) {
        const double rho = 0.4 * (x[a] + 1.0), th = std::numbers::pi / 4.0 * (x[b] + 1.0);
        const double X = (rho * std::cos(th) - 0.5) / 0.5, Y = (rho * std::sin(th) - 0.5) / 0.5;
        s += w[a] * w[b] * 0.4 * std::numbers::pi / 4.0 * rho * std::pow(X, ex[i][0]) * std::pow(Y, ex[i][1]);
      }
    CHECK(m[i] == doctest::Approx(s / vol).scale(1.0).epsilon(1e-9));
  }
}

TEST_CASE("boundary averages on a straight edge") {
  Edge e;
  e.geom = CurvePiece::line({0, 0}, {1, 1});
  e.curve = 0;
  const Point2 p{0.5, 0.25};
  const double h = 0.5;
  const auto d = boundary_averages({e}, {{1.0, 0.0}}, p, h, 3);
  const auto nn = boundary_averages({e}, {{0.0, 1.0}}, p, h, 3);
  const auto ex = monomial_exponents(3);
  // Loop direction (1,1): the outward normal is (1,-1)/sqrt 2.
  for (size_t i = 0; i < ex.size(); ++i) {
    const int ax = ex[i][0], ay = ex[i][1];
    auto phi = [&](Point2 q) { return std::pow((q.x - p.x) / h, ax) * std::pow((q.y - p.y) / h, ay); };
    auto dn = [&](Point2 q) {
      const double gx = ax ? ax * std::pow((q.x - p.x) / h, ax - 1) * std::pow((q.y - p.y) / h, ay) / h : 0.0;
      const double gy = ay ? ay * std::pow((q.x - p.x) / h, ax) * std::pow((q.y - p.y) / h, ay - 1) / h : 0.0;
      return (gx - gy) / std::sqrt(2.0);
    };
    CHECK(d[i] == doctest::Approx(segment_average({0, 0}, {1, 1}, phi)).scale(1.0));
    CHECK(nn[i] == doctest::Approx(segment_average({0, 0}, {1, 1}, dn)).scale(1.0));
  }
  CHECK(edges_length({e}) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS(boundary_averages({e}, {}, p, h, 3));
}
