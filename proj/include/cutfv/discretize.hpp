#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

#include "cutfv/cutcell.hpp"
#include "cutfv/plg.hpp"
#include "cutfv/quadrature.hpp"

namespace cutfv {

struct EllipticCoeffs {
  double a = 1.0;
  double b = 0.0;
  double c = 1.0;
  bool elliptic() const { return b * b - 4.0 * a * c < 0.0; }
};

struct BoundaryCondition {
  BcKind kind = BcKind::Dirichlet;
  double alpha1 = 1.0;  // Robin only
  double alpha2 = 0.0;
  // Datum at a boundary point x with outward unit normal n.
  std::function<double(Point2 x, Point2 n)> g;

  // Operator and datum scaled so that every column is O(1): Neumann rows
  // carry h*du/dn and h*g.
  BoundaryOperator scaled_op(double h) const;
  double data_scale(double h) const;
};

struct BoundaryConditions {
  BoundaryCondition frame;
  std::vector<BoundaryCondition> curves;
  const BoundaryCondition& on(int curve) const { return curve >= 0 ? curves.at(curve) : frame; }
};

struct PdeSpec {
  EllipticCoeffs coeffs;
  BoundaryConditions bc;
  std::function<double(Point2)> f;  // empty means zero
  int degree = 4;
};

// Ghost average as weights on the cells c-3d, c-2d, c-d, c plus a weight on
// the face datum.
struct GhostPlan {
  std::array<double, 4> cells{};
  double datum = 0.0;
};

// Plans for ghosts 1 and 2 matching a quartic to four interior averages and
// the face condition A p(0) + B p'(0) = datum, with p in units of h.
std::array<GhostPlan, 2> ghost_fill_plan(double A, double B);
std::array<GhostPlan, 2> ghost_fill_plan(const BoundaryCondition& bc, double h);

struct StencilEntry {
  CellIndex offset;
  double w = 0.0;
};

std::vector<StencilEntry> sfv_stencil(const EllipticCoeffs& k, double h);

struct PlgRow {
  std::vector<double> beta;  // one weight per lattice site
  double beta_b = 0.0;       // boundary weight, cut cells only
  double data = 0.0;         // scaled boundary datum average
  bool cut = false;
};

// <L phi_alpha> over the cell from its moments about p.
std::vector<double> operator_moments(const std::vector<double>& m, const EllipticCoeffs& k, double h, int n);

PlgRow plg_row(const CutCellSet& s, int pos, const Lattice& lat, const EllipticCoeffs& k,
               const BoundaryConditions& bc, int n);

struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> ptr{0};
  std::vector<int> col;
  std::vector<double> val;

  void push_row(const std::vector<std::pair<int, double>>& entries);
  int nnz() const { return static_cast<int>(col.size()); }
};

class BlockSystem {
 public:
  int n1 = 0;  // SFV unknowns, lexicographic
  int n2 = 0;  // PLG unknowns, total order
  int size() const { return n1 + n2; }

  std::vector<int> cell_of;     // unknown -> cell position
  std::vector<int> unknown_of;  // cell position -> unknown
  std::vector<double> b;
  std::vector<double> diag;  // SFV diagonal
  std::vector<Lattice> lattices;  // per PLG unknown
  std::vector<PlgRow> plg_rows;

  void apply(const std::vector<double>& x, std::vector<double>& y) const;
  void residual(const std::vector<double>& x, const std::vector<double>& rhs, std::vector<double>& r) const;
  double apply_row(int row, const std::vector<double>& x) const;
  // Sum over SFV columns of PLG row n1 + r.
  double lower_part(int r, const std::vector<double>& x) const;
  std::vector<std::pair<int, double>> row_entries(int row) const;

  SparseMatrix a22() const;
  SparseMatrix matrix() const;
  // Triplets "row col value" of A12, A21 and A22.
  void dump_blocks(std::ostream& out) const;

  Grid grid;
  std::vector<StencilEntry> stencil;
  std::vector<int> stencil_lin;     // linear offsets of the stencil
  std::vector<int> unknown_at;      // per linear id, -1 if none
  std::vector<int> lin_of;          // per unknown
  std::vector<int> explicit_of;     // per unknown: row in rows, -1 for pure SFV rows
  SparseMatrix rows;                // explicit rows
};

// Unknown ordering: SFV cells lexicographically, then plg_order.
BlockSystem assemble(const CutCellSet& s, const Region& r, const PdeSpec& pde, const std::vector<StencilClass>& cls,
                     const std::vector<int>& plg_order, const std::vector<Lattice>& lattices);

// Cell averages of a function over every surviving cell, in position order.
std::vector<double> cell_averages(const CutCellSet& s, const std::function<double(Point2)>& f);

}  // namespace cutfv
