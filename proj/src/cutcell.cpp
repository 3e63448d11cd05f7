#include "cutfv/cutcell.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

namespace cutfv {

std::optional<CellIndex> Grid::resolve(CellIndex c) const {
  if (periodic) {
    c.i = ((c.i % nx) + nx) % nx;
    c.j = ((c.j % ny) + ny) % ny;
    return c;
  }
  if (!in_range(c)) return std::nullopt;
  return c;
}

Box Grid::cell_box(CellIndex c) const {
  const double x0 = origin.x + c.i * h, y0 = origin.y + c.j * h;
  return {x0, y0, origin.x + (c.i + 1) * h, origin.y + (c.j + 1) * h};
}

Grid make_grid(const Box& rect, double h) {
  Grid g;
  g.origin = {rect.x0, rect.y0};
  g.h = h;
  const double fx = rect.width() / h, fy = rect.height() / h;
  g.nx = static_cast<int>(std::lround(fx));
  g.ny = static_cast<int>(std::lround(fy));
  if (g.nx <= 0 || g.ny <= 0 || std::abs(fx - g.nx) > 1e-9 * fx || std::abs(fy - g.ny) > 1e-9 * fy)
    throw std::invalid_argument("rectangle sides are not multiples of h");
  return g;
}

RawCutMap generate(const Region& r, const Grid& grid) {
  RawCutMap out;
  out.grid = grid;
  out.cells.resize(grid.size());
  const double tau = tau_geom(grid.h);

  std::vector<std::vector<std::pair<int, int>>> cand(grid.size());
  for (int c = 0; c < static_cast<int>(r.curves.size()); ++c) {
    const auto& pieces = r.curves[c].pieces;
    for (int k = 0; k < static_cast<int>(pieces.size()); ++k) {
      const Box b = pieces[k].bounds().expanded(tau);
      const int i0 = std::max(0, static_cast<int>(std::floor((b.x0 - grid.origin.x) / grid.h)));
      const int i1 = std::min(grid.nx - 1, static_cast<int>(std::floor((b.x1 - grid.origin.x) / grid.h)));
      const int j0 = std::max(0, static_cast<int>(std::floor((b.y0 - grid.origin.y) / grid.h)));
      const int j1 = std::min(grid.ny - 1, static_cast<int>(std::floor((b.y1 - grid.origin.y) / grid.h)));
      for (int i = i0; i <= i1; ++i)
        for (int j = j0; j <= j1; ++j) {
          if (!b.overlaps(grid.cell_box({i, j}))) continue;
          cand[grid.linear({i, j})].emplace_back(c, k);
        }
    }
  }

  for (int lin = 0; lin < grid.size(); ++lin)
    if (!cand[lin].empty()) out.cells[lin] = clip_to_box(r, grid.cell_box(grid.index(lin)), cand[lin]);

  // Cells without candidate pieces are wholly inside or outside; flood fill
  // each 4-connected block and test one point.
  std::vector<int> state(grid.size(), -1);
  std::vector<int> stack;
  for (int lin = 0; lin < grid.size(); ++lin) {
    if (!cand[lin].empty() || state[lin] >= 0) continue;
    const bool inside = region_contains(r, grid.cell_box(grid.index(lin)).center());
    stack.assign(1, lin);
    state[lin] = inside;
    while (!stack.empty()) {
      const CellIndex c = grid.index(stack.back());
      stack.pop_back();
      const CellIndex nb[4] = {{c.i - 1, c.j}, {c.i + 1, c.j}, {c.i, c.j - 1}, {c.i, c.j + 1}};
      for (const auto& n : nb) {
        if (!grid.in_range(n)) continue;
        const int l = grid.linear(n);
        if (!cand[l].empty() || state[l] >= 0) continue;
        state[l] = inside;
        stack.push_back(l);
      }
    }
  }
  for (int lin = 0; lin < grid.size(); ++lin) {
    if (state[lin] != 1) continue;
    CellGeometry g;
    g.box = grid.cell_box(grid.index(lin));
    const Box& b = g.box;
    const Point2 c[4] = {{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}};
    Loop loop;
    for (int k = 0; k < 4; ++k) {
      int tag = kFace;
      if (r.frame) {
        const Box& f = *r.frame;
        const double side_coord[4] = {b.y0 - f.y0, b.x1 - f.x1, b.y1 - f.y1, b.x0 - f.x0};
        if (std::abs(side_coord[k]) <= tau) tag = kFrameSide;
      }
      loop.push_back(Edge{CurvePiece::line(c[k], c[(k + 1) % 4]), 0.0, 1.0, tag, -1, k});
    }
    g.loops.push_back(std::move(loop));
    g.volume = b.width() * b.height();
    g.regular = true;
    out.cells[lin].push_back(std::move(g));
  }
  return out;
}

namespace {

struct Group {
  int owner = 0;  // linear id of the owning grid cell
  CellGeometry geom;
  std::vector<int> pieces;
  bool alive = true;
};

Point2 outward(int side) {
  switch (side) {
    case 0: return {0.0, -1.0};
    case 1: return {1.0, 0.0};
    case 2: return {0.0, 1.0};
    default: return {-1.0, 0.0};
  }
}

}  // namespace

CutCellSet merge(RawCutMap raw, double eps) {
  const Grid& grid = raw.grid;
  const double h = grid.h;
  const double h2 = h * h;
  const double tol = 1e-9 * h;

  std::vector<int> piece_cell, piece_comp;
  std::vector<std::vector<int>> cell_pieces(grid.size());
  for (int lin = 0; lin < grid.size(); ++lin)
    for (int k = 0; k < static_cast<int>(raw.cells[lin].size()); ++k) {
      cell_pieces[lin].push_back(static_cast<int>(piece_cell.size()));
      piece_cell.push_back(lin);
      piece_comp.push_back(k);
    }
  std::vector<Group> groups;
  std::vector<int> group_of(piece_cell.size());
  std::vector<std::vector<int>> cell_groups(grid.size());
  for (size_t p = 0; p < piece_cell.size(); ++p) {
    Group g;
    g.owner = piece_cell[p];
    g.geom = raw.cells[piece_cell[p]][piece_comp[p]];
    g.pieces = {static_cast<int>(p)};
    group_of[p] = static_cast<int>(groups.size());
    cell_groups[g.owner].push_back(static_cast<int>(groups.size()));
    groups.push_back(std::move(g));
  }

  // Groups sharing a face segment with group gi.
  auto neighbours = [&](int gi) {
    std::set<int> out;
    for (const auto& loop : groups[gi].geom.loops)
      for (const auto& e : loop) {
        if (e.curve != kFace) continue;
        const Point2 a = e.start(), b = e.end();
        const Point2 m = 0.5 * (a + b) + 0.5 * h * outward(e.side);
        const CellIndex ci{static_cast<int>(std::floor((m.x - grid.origin.x) / h)),
                           static_cast<int>(std::floor((m.y - grid.origin.y) / h))};
        if (!grid.in_range(ci)) continue;
        for (int p : cell_pieces[grid.linear(ci)]) {
          const int gj = group_of[p];
          if (gj == gi) continue;
          bool match = false;
          for (const auto& l2 : raw.cells[piece_cell[p]][piece_comp[p]].loops) {
            for (const auto& f : l2)
              if (f.curve == kFace && distance(f.start(), b) <= tol && distance(f.end(), a) <= tol) {
                match = true;
                break;
              }
            if (match) break;
          }
          if (match) out.insert(gj);
        }
      }
    return out;
  };

  auto absorb = [&](int target, int gi) {
    Group& t = groups[target];
    Group& g = groups[gi];
    t.geom = regularized_union(t.geom, g.geom);
    for (int p : g.pieces) group_of[p] = target;
    t.pieces.insert(t.pieces.end(), g.pieces.begin(), g.pieces.end());
    g.alive = false;
    g.pieces.clear();
    auto& cg = cell_groups[g.owner];
    cg.erase(std::find(cg.begin(), cg.end(), gi));
  };

  auto best_target = [&](int gi) {
    int best = -1;
    double best_cost = 0.0;
    for (int gj : neighbours(gi)) {
      const double cost = std::abs(groups[gj].geom.volume + groups[gi].geom.volume - h2);
      if (best < 0 || cost < best_cost - 1e-14 * h2 ||
          (cost <= best_cost + 1e-14 * h2 && groups[gj].owner < groups[best].owner)) {
        best = gj;
        best_cost = cost;
      }
    }
    return best;
  };

  // Pass 1: one component per cell.
  for (int lin = 0; lin < grid.size(); ++lin) {
    if (cell_groups[lin].size() < 2) continue;
    std::vector<int> gs = cell_groups[lin];
    int keep = gs[0];
    for (int g : gs)
      if (groups[g].geom.volume > groups[keep].geom.volume) keep = g;
    for (int g : gs) {
      if (g == keep) continue;
      const int t = best_target(g);
      if (t < 0)
        throw MergeError("unresolved topology: component of cell (" + std::to_string(grid.index(lin).i) + "," +
                         std::to_string(grid.index(lin).j) + ") has no neighbour");
      absorb(t, g);
    }
  }

  CutCellSet set;
  set.grid = grid;
  set.eps = eps;
  set.slot.assign(grid.size(), kRawEmpty);
  set.forward.assign(grid.size(), -1);
  std::vector<int> forward_lin(grid.size(), -1);

  // Pass 2: small cells.
  for (int lin = 0; lin < grid.size(); ++lin) {
    if (cell_groups[lin].empty()) continue;
    const int g = cell_groups[lin].front();
    if (groups[g].geom.volume >= eps * h2) continue;
    const int t = best_target(g);
    if (t < 0) {
      const CellIndex c = grid.index(lin);
      throw MergeError("isolated sliver at cell (" + std::to_string(c.i) + "," + std::to_string(c.j) + ")");
    }
    absorb(t, g);
    forward_lin[lin] = groups[t].owner;
  }

  for (int lin = 0; lin < grid.size(); ++lin) {
    if (cell_groups[lin].empty()) continue;
    const Group& g = groups[cell_groups[lin].front()];
    CutCell c;
    c.index = grid.index(lin);
    c.geometry = g.geom;
    const bool single = g.pieces.size() == 1;
    c.kind = single && g.geom.regular ? CellKind::Regular : CellKind::Irregular;
    std::set<CellIndex> from;
    for (int p : g.pieces)
      if (piece_cell[p] != lin) from.insert(grid.index(piece_cell[p]));
    c.merged_from.assign(from.begin(), from.end());
    set.slot[lin] = static_cast<int>(set.cells.size());
    set.cells.push_back(std::move(c));
  }
  for (int lin = 0; lin < grid.size(); ++lin) {
    if (raw.cells[lin].empty() || set.slot[lin] >= 0) continue;
    set.slot[lin] = kRemoved;
    int f = forward_lin[lin];
    while (f >= 0 && set.slot[f] < 0) f = forward_lin[f];
    if (f < 0) {
      // Pieces left after pass 1 moved elsewhere; follow the first piece.
      f = groups[group_of[cell_pieces[lin].front()]].owner;
    }
    set.forward[lin] = set.slot[f];
  }
  set.raw_owner.resize(grid.size());
  for (int lin = 0; lin < grid.size(); ++lin)
    for (int p : cell_pieces[lin]) set.raw_owner[lin].push_back(set.slot[groups[group_of[p]].owner]);
  set.raw = std::move(raw);
  return set;
}

CutCellSet build_cut_cells(const Region& r, const Grid& grid, double eps) {
  return merge(generate(r, grid), eps);
}

int CutCellSet::position(CellIndex c) const {
  const auto rc = grid.resolve(c);
  if (!rc) return -1;
  const int s = slot[grid.linear(*rc)];
  return s >= 0 ? s : -1;
}

bool CutCellSet::regular(CellIndex c) const {
  const int p = position(c);
  return p >= 0 && cells[p].kind == CellKind::Regular;
}

bool CutCellSet::raw_empty(CellIndex c) const {
  const auto rc = grid.resolve(c);
  if (!rc) return true;
  return slot[grid.linear(*rc)] == kRawEmpty;
}

double CutCellSet::total_volume() const {
  double v = 0.0;
  for (const auto& c : cells) v += c.volume();
  return v;
}

std::optional<GhostSource> resolve_ghost(const CutCellSet& s, const Region& r, CellIndex k) {
  if (s.grid.periodic || !r.frame) return std::nullopt;
  const Box& f = *r.frame;
  const double tol = tau_geom(s.grid.h);
  for (int axis = 0; axis < 2; ++axis) {
    for (int dir : {-1, 1}) {
      const CellIndex d = axis == 0 ? CellIndex{dir, 0} : CellIndex{0, dir};
      for (int depth = 1; depth <= 2; ++depth) {
        const CellIndex c{k.i - depth * d.i, k.j - depth * d.j};
        if (!s.regular(c)) continue;
        bool empty = true;
        for (int t = 1; t <= depth; ++t) empty = empty && s.raw_empty({c.i + t * d.i, c.j + t * d.j});
        if (!empty) continue;
        const Box b = s.grid.cell_box(c);
        const double face = axis == 0 ? (dir > 0 ? b.x1 : b.x0) : (dir > 0 ? b.y1 : b.y0);
        const double wall = axis == 0 ? (dir > 0 ? f.x1 : f.x0) : (dir > 0 ? f.y1 : f.y0);
        if (std::abs(face - wall) > tol) continue;
        bool behind = true;
        for (int t = 1; t <= 3; ++t) behind = behind && s.regular({c.i - t * d.i, c.j - t * d.j});
        if (!behind) continue;
        return GhostSource{c, axis, dir, depth};
      }
    }
  }
  return std::nullopt;
}

std::vector<CellIndex> sfv_offsets(bool mixed) {
  std::vector<CellIndex> out;
  if (mixed) {
    for (int a = -2; a <= 2; ++a)
      for (int b = -2; b <= 2; ++b) out.push_back({a, b});
  } else {
    for (int a = -2; a <= 2; ++a) out.push_back({a, 0});
    for (int b = -2; b <= 2; ++b)
      if (b != 0) out.push_back({0, b});
  }
  return out;
}

std::vector<StencilClass> classify_sfv(const CutCellSet& s, const Region& r, double b) {
  const auto offs = sfv_offsets(b != 0.0);
  std::vector<StencilClass> out(s.cells.size(), StencilClass::PLG);
  for (size_t p = 0; p < s.cells.size(); ++p) {
    const CutCell& c = s.cells[p];
    if (c.kind != CellKind::Regular) continue;
    bool ok = true;
    for (const auto& o : offs) {
      const CellIndex k = c.index + o;
      if (s.regular(k)) continue;
      if (s.position(k) >= 0 || !s.raw_empty(k) || !resolve_ghost(s, r, k)) {
        ok = false;
        break;
      }
    }
    if (ok) out[p] = StencilClass::SFV;
  }
  return out;
}

void write_cells_csv(std::ostream& out, const CutCellSet& s, const std::vector<StencilClass>* cls) {
  out << "i,j,kind,volume_fraction,stencil,merged_from\n";
  out.precision(17);
  for (size_t p = 0; p < s.cells.size(); ++p) {
    const auto& c = s.cells[p];
    out << c.index.i << ',' << c.index.j << ',' << (c.kind == CellKind::Regular ? "regular" : "irregular") << ','
        << c.volume() / (s.grid.h * s.grid.h) << ',';
    if (cls) out << ((*cls)[p] == StencilClass::SFV ? "SFV" : "PLG");
    out << ',';
    for (size_t m = 0; m < c.merged_from.size(); ++m)
      out << (m ? ";" : "") << c.merged_from[m].i << ':' << c.merged_from[m].j;
    out << '\n';
  }
}

}  // namespace cutfv
