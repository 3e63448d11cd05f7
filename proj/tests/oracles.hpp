#pragma once
// Reference computations shared by the tests.  Nothing here calls into the
// library routines under test.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the
// Legendre recurrence, weights 2 v0^2.
inline void gauss_legendre(int k, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(k, k);
  for (int i = 1; i < k; ++i) J(i, i - 1) = J(i - 1, i) = i / std::sqrt(4.0 * i * i - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x.resize(k);
  w.resize(k);
  for (int i = 0; i < k; ++i) {
    x[i] = es.eigenvalues()(i);
    w[i] = 2.0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
  }
}

// Integral of f over the triangle (a, b, c) by a collapsed tensor rule.
template <class P>
double triangle_integral(P a, P b, P c, const std::function<double(double, double)>& f, int k = 12) {
  std::vector<double> x, w;
  gauss_legendre(k, x, w);
  const double det = std::abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
  double s = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const double u = 0.5 * (x[i] + 1.0), v = 0.5 * (x[j] + 1.0);
      // (u, v) in the square maps to (u, (1-u) v) in the reference triangle.
      const double r = u, t = (1.0 - u) * v;
      const double px = a.x + r * (b.x - a.x) + t * (c.x - a.x);
      const double py = a.y + r * (b.y - a.y) + t * (c.y - a.y);
      s += 0.25 * w[i] * w[j] * (1.0 - u) * f(px, py);
    }
  return s * det;
}

// Area enclosed by a closed curve given on [0, 1] by position and
// velocity, Gauss on each of n equal parameter intervals of (x y' - y x') / 2.
inline double enclosed_area(const std::function<std::array<double, 4>(double)>& p, int intervals, int k = 8) {
  std::vector<double> x, w;
  gauss_legendre(k, x, w);
  double s = 0.0;
  for (int i = 0; i < intervals; ++i)
    for (int q = 0; q < k; ++q) {
      const auto v = p((i + 0.5 * (x[q] + 1.0)) / intervals);
      s += 0.5 * w[q] * (v[0] * v[3] - v[1] * v[2]);
    }
  return 0.5 * s / intervals;
}

// Average of s^k over [a, a+1].
inline double unit_average(double a, int k) { return (std::pow(a + 1.0, k + 1) - std::pow(a, k + 1)) / (k + 1); }

}  // namespace oracle
