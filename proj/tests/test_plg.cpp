#include <doctest.h>

#include <random>
#include <set>

#include "cutfv/multigrid.hpp"
#include "cutfv/problems.hpp"

using namespace cutfv;

namespace {

// Monomial Vandermonde oracle in D dimensions.
double vandermonde_value(const TriangularLattice& lat, const std::function<double(const std::vector<double>&)>& f,
                         const std::vector<double>& at) {
  const int D = static_cast<int>(lat.nodes.size());
  const auto alphas = lattice_multi_indices(D, lat.degree);
  const int N = static_cast<int>(alphas.size());
  Eigen::MatrixXd V(N, N);
  Eigen::VectorXd rhs(N);
  std::vector<double> x(D);
  auto mono = [&](const std::vector<double>& p, const std::vector<int>& e) {
    double v = 1.0;
    for (int d = 0; d < D; ++d) v *= std::pow(p[d], e[d]);
    return v;
  };
  for (int r = 0; r < N; ++r) {
    for (int d = 0; d < D; ++d) x[d] = lat.nodes[d][alphas[r][d]];
    for (int c = 0; c < N; ++c) V(r, c) = mono(x, alphas[c]);
    rhs(r) = f(x);
  }
  const Eigen::VectorXd coef = V.fullPivLu().solve(rhs);
  double s = 0.0;
  for (int c = 0; c < N; ++c) s += coef(c) * mono(at, alphas[c]);
  return s;
}

}  // namespace

TEST_CASE("multi-indices of a triangular lattice") {
  CHECK(lattice_multi_indices(2, 4).size() == 15);
  CHECK(lattice_multi_indices(3, 2).size() == 10);
  const auto a = lattice_multi_indices(2, 2);
  CHECK(a[1] == std::vector<int>{1, 0});
  CHECK(a[5] == std::vector<int>{0, 2});
}

TEST_CASE("Newton interpolant agrees with a Vandermonde solve") {
  std::mt19937_64 rng(0x5EED);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int D : {1, 2, 3}) {
    for (int n : {1, 2, 3, 4}) {
      TriangularLattice lat;
      lat.degree = n;
      for (int d = 0; d < D; ++d) {
        std::vector<double> ax;
        // Distinct, unordered nodes.
        for (int m = 0; m <= n; ++m) ax.push_back(0.37 * m * (m % 2 ? -1 : 1) + 0.1 * d);
        lat.nodes.push_back(ax);
      }
      auto f = [](const std::vector<double>& x) {
        double s = 0.0;
        for (size_t d = 0; d < x.size(); ++d) s += std::sin(1.3 * x[d] + d) * (1 + 0.5 * d);
        return std::exp(0.3 * s);
      };
      const NewtonPolynomial p = newton_interpolant(lat, f);
      std::vector<double> at(D);
      for (int trial = 0; trial < 5; ++trial) {
        for (auto& v : at) v = U(rng);
        CAPTURE(D);
        CAPTURE(n);
        CHECK(p(at) == doctest::Approx(vandermonde_value(lat, f, at)).epsilon(1e-9));
      }
      // Interpolation property on the lattice itself.
      for (const auto& a : lattice_multi_indices(D, n)) {
        std::vector<double> x(D);
        for (int d = 0; d < D; ++d) x[d] = lat.nodes[d][a[d]];
        CHECK(p(x) == doctest::Approx(f(x)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("Newton interpolant reproduces polynomials of its degree") {
  TriangularLattice lat{{{0, 1, -1, 2, -2}, {0.5, -0.5, 1.5, -1.5, 2.5}}, 4};
  auto q = [](const std::vector<double>& x) { return 1 - x[0] + 2 * x[0] * x[1] * x[1] - 0.5 * std::pow(x[1], 4); };
  const NewtonPolynomial p = newton_interpolant(lat, q);
  for (double x : {-0.7, 0.2, 3.1})
    for (double y : {-2.2, 0.4, 1.9}) CHECK(p({x, y}) == doctest::Approx(q({x, y})).epsilon(1e-11));
  CHECK_THROWS(newton_interpolant(TriangularLattice{{{0, 1}}, 2}, q));
}

TEST_CASE("divided-difference matrix inverts the Newton sample matrix") {
  std::mt19937_64 rng(0x5EED);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int n = 1; n <= 8; ++n) {
    std::vector<double> x;
    while (static_cast<int>(x.size()) < n) {
      const double v = U(rng);
      bool far = true;
      for (double y : x) far = far && std::abs(v - y) > 0.2;
      if (far) x.push_back(v);
    }
    const Eigen::MatrixXd M = newton_sample_matrix(x);
    const Eigen::MatrixXd Minv = divided_difference_inverse(x);
    const double err = (Minv * M - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    CAPTURE(n);
    CHECK(err < 1e-10);
    CHECK((M * Minv - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("dense LU and condition numbers") {
  Eigen::MatrixXd a(3, 3);
  a << 2, 1, 0, 1, 3, 1, 0, 1, 4;
  DenseLU lu(a);
  REQUIRE_FALSE(lu.singular());
  const Eigen::VectorXd b = Eigen::Vector3d(1, 2, 3);
  CHECK((a * lu.solve(b) - b).norm() < 1e-14);
  const Eigen::MatrixXd inv = a.inverse();
  CHECK((lu.inverse() - inv).norm() < 1e-14);
  const double k = a.cwiseAbs().rowwise().sum().maxCoeff() * inv.cwiseAbs().rowwise().sum().maxCoeff();
  CHECK(condition_inf(a) == doctest::Approx(k));
  Eigen::MatrixXd s(2, 2);
  s << 1, 2, 2, 4;
  CHECK(DenseLU(s).singular());
  CHECK(std::isinf(condition_inf(s)));
}

TEST_CASE("sample-matrix conditioning grows like h^-n unscaled, flat scaled") {
  std::vector<double> hs;
  for (int k = 1; k <= 7; ++k) hs.push_back(std::ldexp(1.0, -k));
  for (int n : {2, 3, 4}) {
    const auto rows = conditioning_study(conditioning_nodes(n), n, hs, {0.3, 0.7});
    std::vector<double> ku, ks;
    for (const auto& r : rows) {
      ku.push_back(r.kappa_unscaled);
      ks.push_back(r.kappa_scaled);
    }
    CHECK(loglog_slope(hs, ku) == doctest::Approx(-n).epsilon(0.3 / n));
    const auto [lo, hi] = std::minmax_element(ks.begin(), ks.end());
    CHECK(*hi / *lo <= 2.0);
  }
  CHECK(loglog_slope({1, 2, 4}, {3, 12, 48}) == doctest::Approx(2.0));
}

TEST_CASE("flower lattices are poised, centred and bounded in conditioning") {
  const Problem p = make_problem("flower");
  const Level lv = build_level(p.region, p.rect, p.pde, p.eps, 1.0 / 40);
  REQUIRE(lv.sys.n2 > 0);
  for (int t = 0; t < lv.sys.n2; ++t) {
    const Lattice& lat = lv.sys.lattices[t];
    const CellIndex q = lv.cells.cells[lv.sys.cell_of[lv.sys.n1 + t]].index;
    CHECK(lat.q == q);
    CHECK(lat.sites.size() == 15);
    CHECK(lat.sites.front() == q);
    CHECK(lat.kappa <= kKappaMax);
    std::set<CellIndex> uniq(lat.sites.begin(), lat.sites.end());
    CHECK(uniq.size() == lat.sites.size());
    for (const auto& s : lat.sites) {
      CHECK(lv.cells.position(s) >= 0);
      CHECK(std::abs(s.i - q.i) <= 5);
      CHECK(std::abs(s.j - q.j) <= 5);
    }
    const auto M = sample_matrix(lat.sites, cell_moment_oracle(lv.cells, q, 4), 4);
    CHECK_FALSE(DenseLU(M).singular());
  }
}

TEST_CASE("lattice on a full grid is found and well conditioned") {
  const Problem p = make_problem("unit-square");
  const CutCellSet s = build_cut_cells(p.region, make_grid(p.rect, 1.0 / 16), p.eps);
  for (const CellIndex q : {CellIndex{8, 8}, CellIndex{0, 0}, CellIndex{15, 3}}) {
    const Lattice lat = build_lattice(s, q, 4);
    CHECK(lat.sites.size() == 15);
    CHECK(lat.principal);
    CHECK(lat.kappa < 1e4);
    const auto K = feasible_set(s, q, 4);
    for (const auto& x : lat.sites) CHECK(std::find(K.begin(), K.end(), x) != K.end());
  }
  // Too few candidates.
  CHECK_THROWS_AS(generate_lattice({{0, 0}, {1, 0}}, {0, 0}, 4, cell_moment_oracle(s, {0, 0}, 4)), PlgError);
}
