#include <doctest.h>

#include <sstream>

#include "cutfv/harness.hpp"

using namespace cutfv;

TEST_CASE("error norms") {
  const Norms n = error_norms({1.0, 2.0}, {0.0, 0.0}, {1.0, 3.0});
  CHECK(n.l1 == doctest::Approx(7.0 / 4.0));
  CHECK(n.l2 == doctest::Approx(std::sqrt(13.0 / 4.0)));
  CHECK(n.linf == doctest::Approx(2.0));
  const Norms z = error_norms({0.5, -0.5}, {0.5, -0.5}, {0.2, 0.2});
  CHECK(z.l1 == 0.0);
  CHECK(z.linf == 0.0);
  CHECK_THROWS(error_norms({1.0}, {1.0, 2.0}, {1.0, 1.0}));
}

TEST_CASE("convergence rates from a report") {
  RunReport rep;
  rep.rows.resize(2);
  rep.rows[0].h = 0.1;
  rep.rows[0].err = {16.0, 16.0, 8.0};
  rep.rows[1].h = 0.05;
  rep.rows[1].err = {1.0, 2.0, 1.0};
  const Norms r = rep.rate(0);
  CHECK(r.l1 == doctest::Approx(4.0));
  CHECK(r.l2 == doctest::Approx(3.0));
  CHECK(r.linf == doctest::Approx(3.0));
  std::stringstream ss;
  rep.problem = "x";
  rep.quantity = "solution";
  rep.write_csv(ss);
  std::string header, first, second;
  std::getline(ss, header);
  std::getline(ss, first);
  std::getline(ss, second);
  CHECK(header.rfind("problem,quantity,h,L1,rate_L1", 0) == 0);
  CHECK(second.find(",4.00,") != std::string::npos);
}

TEST_CASE("grid size lists") {
  const auto h = parse_h_list("1/32, 1/64,0.25");
  REQUIRE(h.size() == 3);
  CHECK(h[0] == 1.0 / 32);
  CHECK(h[1] == 1.0 / 64);
  CHECK(h[2] == 0.25);
  CHECK_THROWS(parse_h_list(""));
  CHECK_THROWS(parse_h_list("1/x"));
  CHECK_THROWS(parse_h_list("-0.1"));
}

TEST_CASE("config files") {
  std::stringstream in("# run\nproblem = flower\n  h = 1/80 # finest\n\nnu1=2\ncycle = v\n");
  const Config c = read_config(in);
  CHECK(c.at("problem") == "flower");
  CHECK(c.at("h") == "1/80");
  const SolverSettings s = settings_from_config(c);
  CHECK(s.mg.nu1 == 2);
  CHECK(s.mg.nu2 == 3);
  CHECK(s.cycle == CycleKind::V);
  const Problem p = problem_from_config(c);
  CHECK(p.name == "flower");
  CHECK(p.pde.bc.curves.at(0).kind == BcKind::Neumann);
  CHECK(p.eps == doctest::Approx(0.02));

  std::stringstream bad("problem flower\n");
  CHECK_THROWS(read_config(bad));
  CHECK_THROWS(settings_from_config({{"cycle", "w"}}));
  CHECK_THROWS(settings_from_config({{"omega", "half"}}));
  CHECK_THROWS(problem_from_config({{"problem", "teapot"}}));
  CHECK_THROWS(problem_from_config({{"problem", "file"}, {"boundary", "/nonexistent"}}));
  CHECK_THROWS(problem_from_config({{"problem", "file"}, {"a", "1"}, {"b", "3"}, {"c", "1"}}));
  CHECK(parse_bc("robin") == BcKind::Robin);
  CHECK_THROWS(parse_bc("mixed"));
  CHECK_THROWS(read_config_file("/nonexistent/cfg"));
}

TEST_CASE("four-disks variants from config") {
  const Problem d = problem_from_config({{"problem", "four-disks"}});
  const Problem n = problem_from_config({{"problem", "four-disks"}, {"curve_bc", "neumann"}});
  CHECK(d.name == "four-disks");
  CHECK(n.name == "four-disks-neumann");
  CHECK(n.pde.bc.curves.at(0).kind == BcKind::Neumann);
  CHECK(d.pde.bc.frame.kind == BcKind::Dirichlet);
}

TEST_CASE("forcing matches finite differences of the exact solutions") {
  const EllipticCoeffs k{1.1, 0.3, 0.7};
  for (const char* name : {"sin4x-cos3y", "r4cos3t", "sinpix-sinpiy", "quartic"}) {
    const ExactSolution e = exact_solution(name);
    const auto f = forcing(k, e);
    const double d = 1e-3;
    for (const Point2 x : {Point2{0.31, 0.17}, Point2{-0.22, 0.4}, Point2{0.6, -0.35}}) {
      auto u = [&](double dx, double dy) { return e.u({x.x + dx, x.y + dy}); };
      const double uxx = (u(d, 0) - 2 * u(0, 0) + u(-d, 0)) / (d * d);
      const double uyy = (u(0, d) - 2 * u(0, 0) + u(0, -d)) / (d * d);
      const double uxy = (u(d, d) - u(d, -d) - u(-d, d) + u(-d, -d)) / (4 * d * d);
      const double ux = (u(d, 0) - u(-d, 0)) / (2 * d), uy = (u(0, d) - u(0, -d)) / (2 * d);
      CAPTURE(name);
      CHECK(f(x) == doctest::Approx(k.a * uxx + k.b * uxy + k.c * uyy).epsilon(1e-5).scale(1.0));
      CHECK(e.grad(x).x == doctest::Approx(ux).epsilon(1e-5).scale(1.0));
      CHECK(e.grad(x).y == doctest::Approx(uy).epsilon(1e-5).scale(1.0));
    }
  }
  CHECK_THROWS(exact_solution("cubic"));
}

TEST_CASE("rotated square exact solution is the rotated unit-square one") {
  const Problem r = make_problem("rotated-square");
  const Problem s = make_problem("unit-square");
  const double c = std::cos(std::numbers::pi / 6), sn = std::sin(std::numbers::pi / 6);
  for (const Point2 q : {Point2{0.2, 0.3}, Point2{0.7, 0.1}}) {
    const Point2 x{c * q.x - sn * q.y, sn * q.x + c * q.y};
    CHECK(r.exact.u(x) == doctest::Approx(s.exact.u(q)));
    // Both right-hand sides come from the same function.
    CHECK(r.pde.f(x) == doctest::Approx(s.pde.f(q)).epsilon(1e-12));
  }
  CHECK(r.pde.coeffs.elliptic());
  CHECK(r.pde.coeffs.a == doctest::Approx(1.25));
}

TEST_CASE("test geometries") {
  const Problem f = make_problem("flower");
  // Radius 0.25 + 0.05 cos 6 theta, traversed clockwise.
  CHECK(area(f.region.curves[0]) < 0.0);
  CHECK(-area(f.region.curves[0]) == doctest::Approx(std::numbers::pi * (0.0625 + 0.00125)).epsilon(1e-8));
  CHECK(radial_deviation(f.region.curves[0], {0, 0}, [](double t) { return 0.25 + 0.05 * std::cos(6 * t); }) < 1e-10);
  const Problem d = make_problem("four-disks");
  CHECK(area(d.region.curves[0]) < 0.0);
  CHECK(d.region.curves[0].pieces.size() > 64);
  CHECK(region_contains(d.region, {0.05, 0.05}));
  CHECK_FALSE(region_contains(d.region, {0.5, 0.5}));
  CHECK_FALSE(region_contains(d.region, {0.5, 0.8}));
  CHECK_THROWS(disk_union_curve({{0, 0}, 1.0}, {{{5, 0}, 0.5}}, 16));
  CHECK(problem_names().size() == 4);
}

TEST_CASE("convergence run on a coarse unit square") {
  const Problem p = make_problem("unit-square");
  const RunReport rep = run_convergence(p, {1.0 / 16, 1.0 / 32});
  REQUIRE(rep.rows.size() == 2);
  for (const auto& r : rep.rows) CHECK(r.converged);
  CHECK(rep.rate(0).linf == doctest::Approx(4.0).epsilon(0.1));
  const RunReport tr = run_truncation(p, {1.0 / 16, 1.0 / 32});
  CHECK(tr.rows[1].err.linf < tr.rows[0].err.linf);
}
