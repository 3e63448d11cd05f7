#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "cutfv/discretize.hpp"

namespace cutfv {

// Cubic Bezier approximation of a circular arc from angle t0 to t1 (t1 < t0
// runs clockwise), split into equal pieces.
std::vector<CurvePiece> circle_arc(Point2 c, double r, double t0, double t1, int pieces);

// Piecewise cubic Hermite fit of a closed parametric curve p(t), t in [0,1],
// with derivative dp.  Orientation follows the parameter.
JordanCurve hermite_curve(const std::function<Point2(double)>& p, const std::function<Point2(double)>& dp,
                          int pieces);

JordanCurve reversed(const JordanCurve& c);

// Largest distance from samples of the curve pieces to the exact boundary,
// measured by |radius - target radius| for star-shaped curves about c.
double radial_deviation(const JordanCurve& curve, Point2 c, const std::function<double(double)>& radius,
                        int samples_per_piece = 16);

// Clockwise boundary of r = r0 + amp cos(k theta) about the origin.
JordanCurve flower_curve(double r0, double amp, int k, int pieces);

struct Disk {
  Point2 c;
  double r = 0.0;
};

// Clockwise boundary of the union of a big disk and smaller disks that each
// overlap only the big one.  Each arc gets about pieces_per_circle * angle / 2pi
// Bezier pieces.
JordanCurve disk_union_curve(const Disk& big, const std::vector<Disk>& small, int pieces_per_circle);

struct ExactSolution {
  std::function<double(Point2)> u;
  std::function<Point2(Point2)> grad;
  std::function<std::array<double, 3>(Point2)> hess;  // uxx, uxy, uyy
};

ExactSolution exact_solution(const std::string& name);

struct Problem {
  std::string name;
  Region region;
  Box rect;  // grid extent
  PdeSpec pde;
  ExactSolution exact;
  double eps = 0.1;
};

// f = a uxx + b uxy + c uyy of the exact solution.
std::function<double(Point2)> forcing(const EllipticCoeffs& k, const ExactSolution& e);

// Condition with data taken from the exact solution.
BoundaryCondition condition_from(BcKind kind, const ExactSolution& e, double alpha1 = 1.0, double alpha2 = 0.0);

struct ProblemOptions {
  BcKind curve_bc = BcKind::Dirichlet;  // four-disks only
  int flower_pieces = 2048;
  int disk_pieces = 64;
};

// unit-square, rotated-square, flower, four-disks.
Problem make_problem(const std::string& name, const ProblemOptions& opt = {});

// Problem on a boundary file with a named exact solution.
Problem file_problem(const std::string& path, const std::string& exact, const EllipticCoeffs& k, BcKind frame_bc,
                     BcKind curve_bc, double eps);

std::vector<std::string> problem_names();

}  // namespace cutfv
