#ifndef HARMAP_GEOMETRY_HPP
#define HARMAP_GEOMETRY_HPP

#include <optional>
#include <string>
#include <vector>

#include "harmap/vec.hpp"

namespace harmap {

enum class DomainKind { torus, euclidean };

/// Flat ambient space: a rectangular torus with per-axis periods, or R^n.
/// n = 2 admits only point singularities; fields on a 2d torus are handled
/// as x3-invariant slices of the 3d machinery.
struct Domain {
  DomainKind kind = DomainKind::torus;
  int n = 3;
  Vec3 lengths{0, 0, 0};  // periods, torus only

  static Domain torus3(double l1, double l2, double l3);
  static Domain torus2(double l1, double l2);
  static Domain euclidean3();

  bool periodic() const { return kind == DomainKind::torus; }
  double min_period() const;
  double volume() const;  // torus only; n = 2 gives the cell area

  /// Wrap a displacement to the minimal periodic image (identity in R^n).
  Vec3 wrap(Vec3 d) const;
};

/// Closed oriented polyline, the support of the singular current.
/// Torus curves store lifted coordinates: consecutive vertices are nearest
/// images of each other, and `wrap` is the lattice shift closing the loop
/// (zero for null-homologous curves). Orientation is the vertex order.
class Curve {
 public:
  /// Vertices in the fundamental cell (or R^3); lifting is applied here.
  Curve(Domain domain, std::vector<Vec3> vertices);

  const Domain& domain() const { return domain_; }
  const std::vector<Vec3>& vertices() const { return verts_; }
  const Vec3& wrap_shift() const { return wrap_; }
  int segment_count() const { return static_cast<int>(verts_.size()); }

  Vec3 segment_start(int i) const { return verts_[i]; }
  Vec3 segment_end(int i) const;
  Vec3 segment_tangent(int i) const;  // unit
  double segment_length(int i) const;

  double length() const;
  double max_segment_length() const;
  double min_segment_length() const;
  double max_turning_angle() const;  // radians, between consecutive tangents

  Curve reversed() const;
  Curve translated(const Vec3& shift) const;

 private:
  Domain domain_;
  std::vector<Vec3> verts_;
  Vec3 wrap_{0, 0, 0};
};

/// Point singularity on a 2-torus.
struct PointCharge {
  Vec3 position;  // z = 0
  int multiplicity = 1;
};

double length(const Curve& c);

/// Equal-arclength resampling along the polyline. Throws if the curve is
/// shorter than 8 * target_h.
Curve resample_arclength(const Curve& c, double target_h);

/// Minimal distance from a point to the curve (over periodic images).
double distance_to_curve(const Vec3& p, const Curve& c);
double distance_to_curves(const Vec3& p, const std::vector<Curve>& cs);

/// Net winding integers (total signed displacement / period). Torus only.
std::array<int, 3> homology_class(const Curve& c);
std::array<int, 3> scene_homology(const std::vector<Curve>& cs);

struct LinkingResult {
  int value = 0;
  double raw = 0;
  double residual = 0;  // |raw - value|; > 0.1 signals under-resolution
};
/// Gauss double sum over segment pairs. Supports must be disjoint.
LinkingResult linking_number(const Curve& loop, const Curve& curve);

/// Simplicity check: non-adjacent segment pairs must stay a quarter of the
/// local segment length apart. Exact coincident duplicates (multiplicity
/// encoding) are the caller's business and compare equal, not close.
bool curve_is_simple(const Curve& c);
bool curves_identical(const Curve& a, const Curve& b);

/// Per-segment tube frames: midpoints, tangents, a parallel-transported
/// normal frame, curvature vectors and arclength weights. Used by tube
/// quadrature and the renormalized-energy offsets.
struct CurveFrames {
  std::vector<Vec3> point, tangent, nu1, nu2, kappa;
  std::vector<double> ds;
  std::size_t size() const { return point.size(); }
};
CurveFrames build_frames(const Curve& c);

namespace presets {

Curve circle(const Domain& d, double radius, const Vec3& center, int nseg = 256,
             int axis = 2);
Curve square(const Domain& d, double side, const Vec3& center, int axis = 2);
/// Two antiparallel straight filaments wrapping axis 3, offset by +-d/2
/// along axis 1 around `center`.
std::vector<Curve> filament_pair(const Domain& d, double separation,
                                 const Vec3& center, int nseg = 64);
Curve torus_knot(const Domain& d, int p, int q, double big_r, double small_r,
                 const Vec3& center, int nseg = 512);
std::vector<Curve> hopf_link(const Domain& d, double radius, double offset,
                             const Vec3& center, int nseg = 256);
Curve polygon(const Domain& d, const std::vector<Vec3>& vertices);

}  // namespace presets

}  // namespace harmap

#endif
