#pragma once

#include <array>
#include <functional>
#include <vector>

#include "cutfv/geometry.hpp"

namespace cutfv {

struct GaussRule {
  std::vector<double> nodes;  // ascending, on [-1,1]
  std::vector<double> weights;
};

// Gauss-Legendre rule with k points, 1 <= k <= 32.  Rules are cached.
const GaussRule& gauss_rule(int k);

using Exponent = std::array<int, 2>;

// Graded lexicographic order: total degree ascending, x-power descending
// inside each degree, i.e. 1, x, y, x^2, xy, y^2, ...
std::vector<Exponent> monomial_exponents(int n);
inline int num_monomials(int n) { return (n + 1) * (n + 2) / 2; }
int monomial_index(Exponent a);

// Cell averages of ((x-p)/h)^alpha for |alpha| <= n, computed with the
// divergence theorem along the cell boundary.  Exact for polygonal and cubic
// boundaries.
std::vector<double> cell_moments(const CellGeometry& g, Point2 p, double h, int n);
// Same for a full box, in closed form.
std::vector<double> box_moments(const Box& b, Point2 p, double h, int n);

enum class BcKind { Dirichlet, Neumann, Robin, Periodic };

// alpha1 * u + alpha2 * du/dn on one boundary edge.
struct BoundaryOperator {
  double alpha1 = 1.0;
  double alpha2 = 0.0;
};

// Averages over the union of edges of op(phi_alpha), phi_alpha = ((x-p)/h)^alpha.
// The normal is the outward normal of a loop traversed with the region on
// the left.
std::vector<double> boundary_averages(const std::vector<Edge>& edges,
                                      const std::vector<BoundaryOperator>& ops, Point2 p,
                                      double h, int n);

double edges_length(const std::vector<Edge>& edges);

// Integral of g(x, n) ds over the edges, with n the outward unit normal.
double boundary_integral(const std::vector<Edge>& edges,
                         const std::function<double(const Edge&, Point2, Point2)>& g);

// Cell average of f.  Boxes use tensor Gauss; cut cells integrate an
// x-primitive of f along the boundary.
double integrate_average(const CellGeometry& g, const std::function<double(Point2)>& f);

// Average of f along a straight segment.
double segment_average(Point2 a, Point2 b, const std::function<double(Point2)>& f);

}  // namespace cutfv
