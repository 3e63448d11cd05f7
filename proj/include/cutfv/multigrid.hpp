#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cutfv/discretize.hpp"

namespace cutfv {

struct PlgOrdering {
  std::vector<int> cells;  // positions in the cut-cell set, in order
  std::vector<int> curve;  // assigned curve per entry, -1 for the frame
  std::vector<double> s;   // normalized arc length per entry
};

PlgOrdering order_plg(const CutCellSet& set, const std::vector<StencilClass>& cls, const Region& r);

// LU of A22 in PLG order.  Rows and columns that couple beyond the chosen
// bandwidth w (the wrap-around of each curve) are moved to a border of
// width k; the band block B is factored without pivoting and the border is
// handled through a k x k Schur complement.
class A22Factorization {
 public:
  A22Factorization() = default;
  explicit A22Factorization(const SparseMatrix& a);

  // Overwrites x (length m) with A22^{-1} x.
  void solve(std::vector<double>& x) const;
  void solve(double* x) const;

  int size() const { return m_; }
  int bandwidth() const { return w_; }
  int border() const { return k_; }
  std::int64_t flops() const { return flops_; }
  bool dense_fallback() const { return dense_ != nullptr; }

 private:
  void factor_banded(const SparseMatrix& a);
  double& band(int i, int j) { return band_[static_cast<size_t>(i) * (2 * w_ + 1) + (j - i + w_)]; }
  double band(int i, int j) const { return band_[static_cast<size_t>(i) * (2 * w_ + 1) + (j - i + w_)]; }
  void forward(double* z) const;   // L_B^{-1}
  void backward(double* z) const;  // U_B^{-1}

  int m_ = 0;
  int w_ = 0;
  int k_ = 0;
  int nb_ = 0;
  std::vector<int> order_;  // new position -> original index
  std::vector<double> band_;
  Eigen::MatrixXd X_, Y_;
  Eigen::PartialPivLU<Eigen::MatrixXd> schur_;
  std::shared_ptr<Eigen::PartialPivLU<Eigen::MatrixXd>> dense_;
  std::int64_t flops_ = 0;
};

struct Level {
  CutCellSet cells;
  std::vector<StencilClass> cls;
  PlgOrdering order;
  BlockSystem sys;
  A22Factorization a22;
  std::vector<int> parent;  // per unknown: unknown on the next coarser level
};

struct MgOptions {
  int nu1 = 3;
  int nu2 = 3;
  double omega = 0.5;
  int max_levels = 20;
  int max_bottom_unknowns = 4096;
  // Coarsening stops before a level whose PLG share exceeds this: the
  // boundary is no longer resolved and coarse corrections diverge.
  double max_plg_fraction = 0.45;
};

struct Problem;

class Hierarchy {
 public:
  std::vector<Level> levels;  // finest first
  MgOptions opt;
  double restrict_violation = 0.0;  // max |r| restricted from fine cells under non-regular coarse cells

  int depth() const { return static_cast<int>(levels.size()); }
  const Level& finest() const { return levels.front(); }
  void set_bottom();
  const Eigen::PartialPivLU<Eigen::MatrixXd>& bottom() const { return *bottom_; }

 private:
  std::shared_ptr<Eigen::PartialPivLU<Eigen::MatrixXd>> bottom_;
};

// One level built from scratch: cut and merge, classify, order, lattices,
// assembly and A22 factorization.
Level build_level(const Region& r, const Box& rect, const PdeSpec& pde, double eps, double h);

// Parent map from fine unknowns to coarse unknowns.
std::vector<int> parent_map(const Level& fine, const Level& coarse);

Hierarchy build_hierarchy(const Region& r, const Box& rect, const PdeSpec& pde, double eps, double h,
                          const MgOptions& opt = {});

Eigen::MatrixXd dense_matrix(const BlockSystem& sys);

void smooth(const Level& lv, double omega, std::vector<double>& u, const std::vector<double>& b);
void restrict_residual(const Level& fine, const std::vector<double>& rf, std::vector<double>& rc, int coarse_size);
void interpolate_add(const Level& fine, const std::vector<double>& ec, std::vector<double>& uf);

void v_cycle(Hierarchy& hier, int level, std::vector<double>& u, const std::vector<double>& b);
std::vector<double> fmg(Hierarchy& hier, int level, const std::vector<double>& r);

struct SolveResult {
  std::vector<double> u;
  std::vector<double> history;  // infinity-norm residual per iteration, starting with the initial one
  int iterations = 0;
  bool converged = false;
  double reduction_rate() const;
};

enum class CycleKind { V, FMG };

SolveResult solve(Hierarchy& hier, const std::vector<double>& b, CycleKind kind, double tol = 1e-12,
                  int max_iters = 50, const std::vector<double>* u0 = nullptr);
inline SolveResult fmg_solve(Hierarchy& hier, const std::vector<double>& b, double tol = 1e-12, int max_iters = 50) {
  return solve(hier, b, CycleKind::FMG, tol, max_iters);
}

struct RadiusResult {
  double rho = 0.0;
  bool converged = true;
};

// Spectral radius of the two-grid operator between levels 0 and 1 by power
// iteration.
RadiusResult two_grid_radius(const Hierarchy& hier, int nu1, int nu2, double omega, int iters = 200,
                             std::uint64_t seed = 0x5EED);

}  // namespace cutfv
