#include <doctest.h>

#include <random>
#include <sstream>

#include "cutfv/harness.hpp"
#include "oracles.hpp"

using namespace cutfv;

namespace {

Problem quartic_problem(const std::string& name, BcKind curve_bc) {
  ProblemOptions o;
  o.curve_bc = curve_bc;
  Problem p = make_problem(name, o);
  p.exact = exact_solution("quartic");
  p.pde.f = forcing(p.pde.coeffs, p.exact);
  p.pde.bc.frame = condition_from(p.pde.bc.frame.kind, p.exact);
  for (auto& c : p.pde.bc.curves) c = condition_from(curve_bc, p.exact, 1.0, 0.5);
  return p;
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void check_plan(const GhostPlan& g, std::array<double, 4> cells, double datum, double den) {
  for (int m = 0; m < 4; ++m) CHECK(g.cells[m] == doctest::Approx(cells[m] / den).epsilon(1e-12));
  CHECK(g.datum == doctest::Approx(datum / den).epsilon(1e-12));
}

}  // namespace

TEST_CASE("ghost fill plans") {
  const auto d = ghost_fill_plan(1.0, 0.0);
  check_plan(d[0], {3, -17, 43, -77}, 60, 12);
  check_plan(d[1], {27, -145, 335, -505}, 300, 12);
  const auto n = ghost_fill_plan(0.0, 1.0);
  check_plan(n[0], {1, -5, 9, 5}, 12, 10);
  check_plan(n[1], {3, -15, 29, -15}, 12, 2);
  CHECK_THROWS(ghost_fill_plan(0.0, 0.0));
  BoundaryCondition p;
  p.kind = BcKind::Periodic;
  CHECK_THROWS(ghost_fill_plan(p, 0.1));
}

TEST_CASE("ghost plans reproduce quartics") {
  std::mt19937_64 rng(0x5EED);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    double c[5];
    for (auto& v : c) v = U(rng);
    const double A = trial % 3 == 0 ? 1.0 : U(rng), B = trial % 3 == 1 ? 1.0 : U(rng);
    if (std::abs(A) + std::abs(B) < 0.1) continue;
    auto avg = [&](double a) {
      double s = 0.0;
      for (int k = 0; k < 5; ++k) s += c[k] * oracle::unit_average(a, k);
      return s;
    };
    const double datum = A * c[0] + B * c[1];
    const auto plan = ghost_fill_plan(A, B);
    for (int g = 0; g < 2; ++g) {
      double v = plan[g].datum * datum;
      for (int m = 0; m < 4; ++m) v += plan[g].cells[m] * avg(-4.0 + m);
      CHECK(v == doctest::Approx(avg(g)).scale(1.0).epsilon(1e-11));
    }
  }
}

TEST_CASE("regular stencil is exact on quartic cell averages") {
  const double h = 0.1;
  const EllipticCoeffs k{1.3, -0.4, 0.8};
  const auto st = sfv_stencil(k, h);
  CHECK(st.size() == 25);
  const ExactSolution q = exact_solution("quartic");
  const auto f = forcing(k, q);
  const Point2 c{0.35, -0.2};
  auto box = [&](int i, int j) {
    return Box{c.x + (i - 0.5) * h, c.y + (j - 0.5) * h, c.x + (i + 0.5) * h, c.y + (j + 0.5) * h};
  };
  auto cell_avg = [&](const Box& b, const std::function<double(Point2)>& g) {
    CellGeometry geo;
    geo.box = b;
    geo.regular = true;
    geo.volume = b.width() * b.height();
    return integrate_average(geo, g);
  };
  double lhs = 0.0;
  for (const auto& e : st) lhs += e.w * cell_avg(box(e.offset.i, e.offset.j), q.u);
  CHECK(lhs == doctest::Approx(cell_avg(box(0, 0), f)).epsilon(1e-10));
  double wsum = 0.0;
  for (const auto& e : st) wsum += e.w;
  CHECK(wsum == doctest::Approx(0.0).scale(1.0 / (h * h)));
  CHECK(sfv_stencil({1, 0, 1}, h).size() == 9);
}

TEST_CASE("operator moments of the scaled basis") {
  // <L phi> for phi = ((x-p)/h)^alpha from the moments of lower powers.
  const double h = 0.5;
  std::vector<double> m(num_monomials(2), 0.0);
  m[0] = 1.0;
  const auto lm = operator_moments(m, {2.0, 3.0, 5.0}, h, 2);
  CHECK(lm[3] == doctest::Approx(2.0 * 2.0 / (h * h)));
  CHECK(lm[4] == doctest::Approx(3.0 / (h * h)));
  CHECK(lm[5] == doctest::Approx(5.0 * 2.0 / (h * h)));
  CHECK(lm[0] == 0.0);
}

TEST_CASE("every row is exact on quartics") {
  struct Case {
    const char* name;
    BcKind bc;
  };
  for (const Case c : {Case{"unit-square", BcKind::Dirichlet}, Case{"rotated-square", BcKind::Dirichlet},
                       Case{"flower", BcKind::Neumann}, Case{"flower", BcKind::Dirichlet},
                       Case{"four-disks", BcKind::Dirichlet}, Case{"four-disks", BcKind::Neumann},
                       Case{"four-disks", BcKind::Robin}}) {
    const Problem p = quartic_problem(c.name, c.bc);
    const Level lv = build_level(p.region, p.rect, p.pde, p.eps, 1.0 / 32);
    const auto tau = truncation_error(lv, p.exact);
    CAPTURE(c.name);
    CAPTURE(static_cast<int>(c.bc));
    CHECK(inf_norm(tau) <= 1e-11 * inf_norm(lv.sys.b));
  }
}

TEST_CASE("truncation error of a smooth solution is small and nonzero") {
  const Problem p = make_problem("flower");
  const Level lv = build_level(p.region, p.rect, p.pde, p.eps, 1.0 / 40);
  const auto tau = truncation_error(lv, p.exact);
  double sfv = 0.0, plg = 0.0;
  for (int u = 0; u < lv.sys.size(); ++u) {
    double& m = u < lv.sys.n1 ? sfv : plg;
    m = std::max(m, std::abs(tau[u]));
  }
  // Frozen from a reference run: O(h^4) on SFV rows, O(h^3) near the curve.
  CHECK(sfv < 1e-4);
  CHECK(plg > sfv);
  CHECK(plg < 5e-3);
}

TEST_CASE("block structure of the assembled system") {
  const Problem p = make_problem("four-disks");
  const Level lv = build_level(p.region, p.rect, p.pde, p.eps, 1.0 / 32);
  const BlockSystem& s = lv.sys;
  CHECK(s.size() == static_cast<int>(lv.cells.cells.size()));
  for (int u = 0; u < s.size(); ++u) CHECK(s.unknown_of[s.cell_of[u]] == u);
  for (int u = 0; u < s.n1; ++u) CHECK(lv.cls[s.cell_of[u]] == StencilClass::SFV);
  for (int u = s.n1; u < s.size(); ++u) CHECK(lv.cls[s.cell_of[u]] == StencilClass::PLG);
  // SFV unknowns are lexicographic.
  for (int u = 1; u < s.n1; ++u) CHECK(lv.cells.cells[s.cell_of[u - 1]].index < lv.cells.cells[s.cell_of[u]].index);

  // apply() agrees with the explicit sparse matrix.
  std::mt19937_64 rng(0x5EED);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> x(s.size()), y;
  for (auto& v : x) v = U(rng);
  s.apply(x, y);
  const SparseMatrix m = s.matrix();
  for (int r = 0; r < s.size(); ++r) {
    double v = 0.0;
    for (int k = m.ptr[r]; k < m.ptr[r + 1]; ++k) v += m.val[k] * x[m.col[k]];
    CHECK(y[r] == doctest::Approx(v).scale(1e3));
    CHECK(s.apply_row(r, x) == doctest::Approx(v).scale(1e3));
  }
  // A22 is the trailing block.
  const SparseMatrix a22 = s.a22();
  CHECK(a22.rows == s.n2);
  int in_block = 0;
  for (int r = s.n1; r < s.size(); ++r)
    for (int k = m.ptr[r]; k < m.ptr[r + 1]; ++k) in_block += m.col[k] >= s.n1;
  CHECK(a22.nnz() <= in_block);

  std::stringstream ss;
  s.dump_blocks(ss);
  CHECK_FALSE(ss.str().empty());
}

TEST_CASE("boundary condition scaling") {
  BoundaryCondition n;
  n.kind = BcKind::Neumann;
  CHECK(n.scaled_op(0.1).alpha2 == doctest::Approx(0.1));
  CHECK(n.data_scale(0.1) == doctest::Approx(0.1));
  BoundaryCondition d;
  CHECK(d.scaled_op(0.1).alpha1 == 1.0);
  CHECK(d.data_scale(0.1) == 1.0);
}
