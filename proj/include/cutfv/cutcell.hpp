#pragma once

#include <compare>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cutfv/geometry.hpp"

namespace cutfv {

struct CellIndex {
  int i = 0;
  int j = 0;
  auto operator<=>(const CellIndex&) const = default;
};

inline CellIndex operator+(CellIndex a, CellIndex b) { return {a.i + b.i, a.j + b.j}; }

struct Grid {
  Point2 origin;
  double h = 1.0;
  int nx = 0;
  int ny = 0;
  bool periodic = false;

  int size() const { return nx * ny; }
  // Linear ids follow lexicographic order on (i, j).
  int linear(CellIndex c) const { return c.i * ny + c.j; }
  CellIndex index(int lin) const { return {lin / ny, lin % ny}; }
  bool in_range(CellIndex c) const { return c.i >= 0 && c.i < nx && c.j >= 0 && c.j < ny; }
  // In-range index, wrapped for periodic grids.
  std::optional<CellIndex> resolve(CellIndex c) const;
  Box cell_box(CellIndex c) const;
  Box extent() const { return {origin.x, origin.y, origin.x + nx * h, origin.y + ny * h}; }
};

// Grid covering rect with spacing h; rect sides must be multiples of h.
Grid make_grid(const Box& rect, double h);

struct RawCutMap {
  Grid grid;
  std::vector<std::vector<CellGeometry>> cells;  // per linear id, connected components
};

RawCutMap generate(const Region& r, const Grid& grid);

class MergeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CellKind { Regular, Irregular };

struct CutCell {
  CellIndex index;
  CellKind kind = CellKind::Regular;
  CellGeometry geometry;
  std::vector<CellIndex> merged_from;  // other grid cells whose pieces were absorbed
  double volume() const { return geometry.volume; }
};

constexpr int kRawEmpty = -1;
constexpr int kRemoved = -2;

struct CutCellSet {
  Grid grid;
  double eps = 0.0;
  std::vector<CutCell> cells;  // survivors in lexicographic order
  std::vector<int> slot;       // per linear id: position in cells, kRawEmpty or kRemoved
  std::vector<int> forward;    // per linear id: absorbing position for kRemoved cells
  RawCutMap raw;
  std::vector<std::vector<int>> raw_owner;  // per linear id and component: owning position

  int position(CellIndex c) const;  // -1 unless c resolves to a surviving cell
  bool regular(CellIndex c) const;  // surviving and regular
  bool raw_empty(CellIndex c) const;  // outside the grid counts as empty (non-periodic)
  double total_volume() const;
};

// Merge pass: split cells keep their largest piece, the other pieces and then
// every cell with volume < eps*h^2 are merged into a face neighbour.
CutCellSet merge(RawCutMap raw, double eps);
CutCellSet build_cut_cells(const Region& r, const Grid& grid, double eps);

enum class StencilClass { SFV, PLG };

// Ghost value for out-of-domain index k of a stencil, filled from the
// regular cells c, c-d, c-2d, c-3d behind a frame face.
struct GhostSource {
  CellIndex cell;  // c
  int axis = 0;    // 0 for x, 1 for y
  int dir = 1;     // d = dir * e_axis points out of the domain
  int depth = 1;   // k = c + depth * d
};

std::optional<GhostSource> resolve_ghost(const CutCellSet& s, const Region& r, CellIndex k);
std::vector<CellIndex> sfv_offsets(bool mixed);
std::vector<StencilClass> classify_sfv(const CutCellSet& s, const Region& r, double b);

void write_cells_csv(std::ostream& out, const CutCellSet& s, const std::vector<StencilClass>* cls = nullptr);

}  // namespace cutfv
