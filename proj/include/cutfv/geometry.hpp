#pragma once

#include <array>
#include <cmath>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cutfv {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

struct Box {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  Point2 center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
  bool contains(Point2 p, double tol = 0.0) const {
    return p.x >= x0 - tol && p.x <= x1 + tol && p.y >= y0 - tol && p.y <= y1 + tol;
  }
  Box expanded(double d) const { return {x0 - d, y0 - d, x1 + d, y1 + d}; }
  bool overlaps(const Box& o) const {
    return x0 <= o.x1 && o.x0 <= x1 && y0 <= o.y1 && o.y0 <= y1;
  }
};

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Line segment or cubic Bezier over t in [0,1], stored in power form
// c0 + c1 t + c2 t^2 + c3 t^3.
class CurvePiece {
 public:
  enum class Kind { Line, Cubic };

  static CurvePiece line(Point2 a, Point2 b);
  static CurvePiece cubic(Point2 p0, Point2 p1, Point2 p2, Point2 p3);

  Kind kind() const { return kind_; }
  int degree() const { return kind_ == Kind::Line ? 1 : 3; }
  const std::array<Point2, 4>& power() const { return c_; }

  Point2 eval(double t) const {
    return ((c_[3] * t + c_[2]) * t + c_[1]) * t + c_[0];
  }
  Point2 deriv(double t) const { return (3.0 * c_[3] * t + 2.0 * c_[2]) * t + c_[1]; }
  Point2 second_deriv(double t) const { return 6.0 * c_[3] * t + 2.0 * c_[2]; }

  // Bezier control points of the restriction to [ta, tb].
  std::array<Point2, 4> bezier(double ta, double tb) const;
  // Hull box of the restriction to [ta, tb].
  Box bounds(double ta = 0.0, double tb = 1.0) const;
  double length(double ta = 0.0, double tb = 1.0) const;

 private:
  Kind kind_ = Kind::Line;
  std::array<Point2, 4> c_{};
};

struct JordanCurve {
  std::vector<CurvePiece> pieces;
};

// Open region: interior of the curves (ccw outer boundaries, cw holes),
// intersected with the optional frame box whose sides lie on grid lines.
struct Region {
  std::vector<JordanCurve> curves;
  std::optional<Box> frame;
};

constexpr int kFace = -1;       // interior grid face
constexpr int kFrameSide = -2;  // grid face on the frame

// One piece of a cell boundary.  Faces are straight segments on the cell box
// and carry the box side (0 bottom, 1 right, 2 top, 3 left).
struct Edge {
  CurvePiece geom;
  double t0 = 0.0;
  double t1 = 1.0;
  int curve = kFace;
  int piece = -1;
  int side = -1;

  Point2 start() const { return geom.eval(t0); }
  Point2 end() const { return geom.eval(t1); }
  bool on_curve() const { return curve >= 0; }
  bool on_boundary() const { return curve >= 0 || curve == kFrameSide; }
};

using Loop = std::vector<Edge>;

struct CellGeometry {
  Box box;
  std::vector<Loop> loops;  // outer loop first, then holes
  double volume = 0.0;
  bool regular = false;
};

inline double tau_geom(double h) { return 1e-12 * h; }

// Edges of a cell that lie on the physical boundary (curves and frame sides).
std::vector<Edge> boundary_edges(const CellGeometry& g);
// Face segments on the given box side, in loop order.
std::vector<Edge> face_edges(const CellGeometry& g, int side);

double loop_area(const Loop& loop, double xi0 = 0.0);
double area(const JordanCurve& c);
Box bounds(const JordanCurve& c);

int winding_number(const JordanCurve& c, Point2 p);
int winding_number(const Loop& loop, Point2 p);
bool region_contains(const Region& r, Point2 p);

// Connected components of region intersected with box.  When candidates is
// given, only those (curve, piece) pairs are tested against the box.
std::vector<CellGeometry> clip_to_box(const Region& r, const Box& box);
std::vector<CellGeometry> clip_to_box(const Region& r, const Box& box,
                                      const std::vector<std::pair<int, int>>& candidates);

class NotAdjacent : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

// Union of two cell pieces sharing at least one face segment.  The result
// keeps the box of a.
CellGeometry regularized_union(const CellGeometry& a, const CellGeometry& b);

struct ClosestPoint {
  double s = 0.0;  // normalized arc length in [0,1)
  double dist = 0.0;
  Point2 point;
};

ClosestPoint closest_point(const JordanCurve& c, Point2 p);
inline double closest_parameter(const JordanCurve& c, Point2 p) { return closest_point(c, p).s; }

JordanCurve polygon_curve(const std::vector<Point2>& vertices);
JordanCurve box_curve(const Box& b);

// Text boundary format: per curve a header "curve <npieces>" followed by
// lines "line x0 y0 x1 y1" or "cubic x0 y0 x1 y1 x2 y2 x3 y3".  An optional
// "frame x0 y0 x1 y1" line sets the frame.  '#' starts a comment.
Region read_boundary(std::istream& in);
Region read_boundary_file(const std::string& path);
void write_boundary(std::ostream& out, const Region& r);

}  // namespace cutfv
