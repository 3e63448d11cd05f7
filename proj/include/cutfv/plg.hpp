#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "cutfv/cutcell.hpp"
#include "cutfv/quadrature.hpp"

namespace cutfv {

class PlgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense LU with partial pivoting.  Kept separate from Eigen so poisedness
// checks do not depend on the library factorization used elsewhere.
class DenseLU {
 public:
  explicit DenseLU(Eigen::MatrixXd a);
  bool singular() const { return singular_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd inverse() const;

 private:
  Eigen::MatrixXd lu_;
  std::vector<int> perm_;
  bool singular_ = false;
};

// Infinity-norm condition number; +inf for singular matrices.
double condition_inf(const Eigen::MatrixXd& a);

inline constexpr double kKappaMax = 1e6;

struct Lattice {
  CellIndex q;
  std::vector<CellIndex> sites;  // q first
  double kappa = 0.0;
  bool principal = false;  // true when an image of the triangular lattice was used
};

// Moment oracle: scaled-monomial cell averages about the center of q's box.
using MomentOracle = std::function<std::vector<double>(CellIndex)>;

// Surviving cells of the (2n+1)x(2n+1) box centered on q.
std::vector<CellIndex> feasible_set(const CutCellSet& s, CellIndex q, int n);

// Sample matrix M[alpha][k] = <phi_alpha>_{sites[k]}.
Eigen::MatrixXd sample_matrix(const std::vector<CellIndex>& sites, const MomentOracle& m, int n);

Lattice generate_lattice(const std::vector<CellIndex>& candidates, CellIndex q, int n, const MomentOracle& m,
                         double kappa_max = kKappaMax);

// Moments about the center of q's uncut box, analytic for regular cells.
MomentOracle cell_moment_oracle(const CutCellSet& s, CellIndex q, int n);

// Lattice for one PLG cell, with the standard feasible set.
Lattice build_lattice(const CutCellSet& s, CellIndex q, int n);

// Triangular lattice in D dimensions: nodes[d][m] is the m-th coordinate
// value along axis d; points are (nodes[0][a0], ..., nodes[D-1][a(D-1)]) for
// |a| <= degree.
struct TriangularLattice {
  std::vector<std::vector<double>> nodes;
  int degree = 0;
};

class NewtonPolynomial {
 public:
  NewtonPolynomial(TriangularLattice lat, std::vector<std::vector<int>> alphas, std::vector<double> coef)
      : lat_(std::move(lat)), alphas_(std::move(alphas)), coef_(std::move(coef)) {}
  double operator()(const std::vector<double>& x) const;
  const std::vector<double>& coefficients() const { return coef_; }
  const std::vector<std::vector<int>>& exponents() const { return alphas_; }

 private:
  TriangularLattice lat_;
  std::vector<std::vector<int>> alphas_;
  std::vector<double> coef_;
};

std::vector<std::vector<int>> lattice_multi_indices(int dims, int degree);
NewtonPolynomial newton_interpolant(const TriangularLattice& lat,
                                    const std::function<double(const std::vector<double>&)>& f);

// Row k holds the weights of the divided difference [x0..xk]f.
Eigen::MatrixXd divided_difference_inverse(const std::vector<double>& x);
// M[j][k] = prod_{l<k} (x_j - x_l).
Eigen::MatrixXd newton_sample_matrix(const std::vector<double>& x);

// Pointwise sample matrix of the monomials (x-c)^alpha at the sites, rows
// indexed by alpha.  With scale h the basis is ((x-c)/h)^alpha.
Eigen::MatrixXd pointwise_sample_matrix(const std::vector<Point2>& sites, int n, Point2 c, double h);

struct ConditioningRow {
  double h = 0.0;
  double kappa_unscaled = 0.0;
  double kappa_scaled = 0.0;
};

// Triangular lattice ((i-1)/2, (j-1)/2), i + j <= n, poised for degree n.
std::vector<Point2> conditioning_nodes(int n);

// Sites c + h*x_k for the nodes x_k; condition numbers per h.
std::vector<ConditioningRow> conditioning_study(const std::vector<Point2>& nodes, int n,
                                                const std::vector<double>& hs, Point2 c);

// Least-squares slope of log(kappa) against log(h).
double loglog_slope(const std::vector<double>& h, const std::vector<double>& v);

}  // namespace cutfv
