#include "harmap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "harmap/util.hpp"

namespace harmap {

namespace {
constexpr double kPi = std::numbers::pi;
}

Domain Domain::torus3(double l1, double l2, double l3) {
  if (l1 <= 0 || l2 <= 0 || l3 <= 0)
    throw std::invalid_argument("torus periods must be positive");
  return Domain{DomainKind::torus, 3, {l1, l2, l3}};
}

Domain Domain::torus2(double l1, double l2) {
  if (l1 <= 0 || l2 <= 0)
    throw std::invalid_argument("torus periods must be positive");
  return Domain{DomainKind::torus, 2, {l1, l2, 0}};
}

Domain Domain::euclidean3() { return Domain{DomainKind::euclidean, 3, {0, 0, 0}}; }

double Domain::min_period() const {
  if (!periodic()) throw std::logic_error("euclidean domain has no periods");
  double m = lengths.x;
  for (int j = 1; j < n; ++j) m = std::min(m, lengths[j]);
  return m;
}

double Domain::volume() const {
  if (!periodic()) throw std::logic_error("euclidean domain has no volume");
  double v = 1;
  for (int j = 0; j < n; ++j) v *= lengths[j];
  return v;
}

Vec3 Domain::wrap(Vec3 d) const {
  if (!periodic()) return d;
  for (int j = 0; j < n; ++j) d[j] -= lengths[j] * std::round(d[j] / lengths[j]);
  return d;
}

Curve::Curve(Domain domain, std::vector<Vec3> vertices) : domain_(domain) {
  if (domain_.n == 2)
    throw std::invalid_argument("curves need n = 3; use PointCharge on a 2-torus");
  if (vertices.size() < 3) throw std::invalid_argument("curve needs >= 3 vertices");

  verts_.reserve(vertices.size());
  verts_.push_back(vertices.front());
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    Vec3 step = domain_.wrap(vertices[i] - verts_.back());
    verts_.push_back(verts_.back() + step);
  }
  // lattice shift closing the lifted loop
  if (domain_.periodic()) {
    Vec3 back = verts_.front() - verts_.back();
    for (int j = 0; j < 3; ++j) {
      double w = std::round(-back[j] / domain_.lengths[j]);
      wrap_[j] = domain_.lengths[j] * w;
    }
  }

  double scale = 0;
  for (int i = 0; i < segment_count(); ++i) scale = std::max(scale, segment_length(i));
  for (int i = 0; i < segment_count(); ++i) {
    double l = segment_length(i);
    if (l < 1e-12 * std::max(scale, 1.0))
      throw std::invalid_argument("consecutive curve vertices coincide");
    if (domain_.periodic() && l >= 0.5 * domain_.min_period())
      throw std::invalid_argument(
          "curve segment exceeds half the smallest period; geodesic ambiguous");
  }
}

Vec3 Curve::segment_end(int i) const {
  return i + 1 < segment_count() ? verts_[i + 1] : verts_.front() + wrap_;
}

Vec3 Curve::segment_tangent(int i) const { return normalized(segment_end(i) - verts_[i]); }

double Curve::segment_length(int i) const { return norm(segment_end(i) - verts_[i]); }

double Curve::length() const {
  double s = 0;
  for (int i = 0; i < segment_count(); ++i) s += segment_length(i);
  return s;
}

double Curve::max_segment_length() const {
  double m = 0;
  for (int i = 0; i < segment_count(); ++i) m = std::max(m, segment_length(i));
  return m;
}

double Curve::min_segment_length() const {
  double m = segment_length(0);
  for (int i = 1; i < segment_count(); ++i) m = std::min(m, segment_length(i));
  return m;
}

double Curve::max_turning_angle() const {
  double a = 0;
  for (int i = 0; i < segment_count(); ++i) {
    Vec3 t0 = segment_tangent(i);
    Vec3 t1 = segment_tangent((i + 1) % segment_count());
    a = std::max(a, std::acos(std::clamp(dot(t0, t1), -1.0, 1.0)));
  }
  return a;
}

Curve Curve::reversed() const {
  std::vector<Vec3> v(verts_.rbegin(), verts_.rend());
  return Curve(domain_, std::move(v));
}

Curve Curve::translated(const Vec3& shift) const {
  std::vector<Vec3> v = verts_;
  for (auto& p : v) p += shift;
  return Curve(domain_, std::move(v));
}

double length(const Curve& c) { return c.length(); }

Curve resample_arclength(const Curve& c, double target_h) {
  double total = c.length();
  if (!(target_h > 0) || total < 8 * target_h)
    throw std::invalid_argument("resample_arclength: curve shorter than 8 * target_h");
  // already uniform at this resolution: keep it (makes resampling idempotent)
  double own_step = total / c.segment_count();
  if (std::abs(own_step - target_h) < 0.02 * target_h &&
      c.max_segment_length() < 1.005 * own_step &&
      c.min_segment_length() > 0.995 * own_step)
    return c;
  int nseg = std::max(3, static_cast<int>(std::llround(total / target_h)));
  double step = total / nseg;

  std::vector<Vec3> out;
  out.reserve(nseg);
  double carried = 0;  // arclength already consumed on the current segment
  int seg = 0;
  out.push_back(c.segment_start(0));
  for (int k = 1; k < nseg; ++k) {
    double remaining = step;
    while (seg < c.segment_count()) {
      double seg_len = c.segment_length(seg);
      if (carried + remaining < seg_len - 1e-13 * total) {
        carried += remaining;
        break;
      }
      remaining -= seg_len - carried;
      carried = 0;
      ++seg;
    }
    if (seg >= c.segment_count()) {  // round-off at the very end
      seg = c.segment_count() - 1;
      carried = c.segment_length(seg);
    }
    Vec3 a = c.segment_start(seg);
    Vec3 t = c.segment_end(seg) - a;
    out.push_back(a + t * (carried / c.segment_length(seg)));
  }
  return Curve(c.domain(), std::move(out));
}

namespace {

/// Squared distance from p to the segment [a, a+d] shifted by the lattice
/// images that can matter given the wrapped midpoint difference.
double point_segment_dist2(const Vec3& p, const Vec3& a, const Vec3& d,
                           const Domain& dom) {
  auto dist2_plain = [&](const Vec3& rel) {
    double t = std::clamp(dot(rel, d) / norm2(d), 0.0, 1.0);
    return norm2(rel - d * t);
  };
  Vec3 rel = p - a;
  if (!dom.periodic()) return dist2_plain(rel);

  Vec3 mid = a + d * 0.5;
  Vec3 base = dom.wrap(p - mid) + d * 0.5;  // p relative to a, nearest image of mid
  double best = dist2_plain(base);
  // a neighbouring image can win only along axes where the segment extent
  // reaches past the half-cell
  double half_ext[3];
  for (int j = 0; j < dom.n; ++j) half_ext[j] = 0.5 * std::abs(d[j]);
  int options[3] = {1, 1, 1};
  for (int j = 0; j < dom.n; ++j) {
    double margin = 0.5 * dom.lengths[j] - half_ext[j];
    if (std::abs(base[j] - half_ext[j]) > margin - 1e-12 * dom.lengths[j]) options[j] = 3;
  }
  for (int i = 0; i < options[0]; ++i)
    for (int j = 0; j < options[1]; ++j)
      for (int k = 0; k < options[2]; ++k) {
        if (i == 0 && j == 0 && k == 0) continue;
        static const double off[3] = {0, 1, -1};
        Vec3 shifted = base;
        shifted.x += off[i] * dom.lengths.x;
        shifted.y += off[j] * dom.lengths.y;
        if (dom.n > 2) shifted.z += off[k] * dom.lengths.z;
        best = std::min(best, dist2_plain(shifted));
      }
  return best;
}

}  // namespace

double distance_to_curve(const Vec3& p, const Curve& c) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < c.segment_count(); ++i) {
    Vec3 a = c.segment_start(i);
    Vec3 d = c.segment_end(i) - a;
    best = std::min(best, point_segment_dist2(p, a, d, c.domain()));
  }
  return std::sqrt(best);
}

double distance_to_curves(const Vec3& p, const std::vector<Curve>& cs) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : cs) best = std::min(best, distance_to_curve(p, c));
  return best;
}

std::array<int, 3> homology_class(const Curve& c) {
  if (!c.domain().periodic())
    throw std::invalid_argument("homology_class is defined on torus curves");
  std::array<int, 3> w{0, 0, 0};
  for (int j = 0; j < 3; ++j) {
    double lj = c.domain().lengths[j];
    double wj = c.wrap_shift()[j] / lj;
    w[j] = static_cast<int>(std::llround(wj));
    if (std::abs(wj - w[j]) > 1e-9)
      throw std::runtime_error("homology_class: non-integer winding; curve not closed");
  }
  return w;
}

std::array<int, 3> scene_homology(const std::vector<Curve>& cs) {
  std::array<int, 3> w{0, 0, 0};
  for (const auto& c : cs) {
    auto wc = homology_class(c);
    for (int j = 0; j < 3; ++j) w[j] += wc[j];
  }
  return w;
}

LinkingResult linking_number(const Curve& loop, const Curve& curve) {
  // Free-space Gauss integral; torus curves must be null-homologous and are
  // evaluated in the lift after shifting to nearest images.
  Vec3 shift{0, 0, 0};
  if (loop.domain().periodic()) {
    auto wa = homology_class(loop);
    auto wb = homology_class(curve);
    for (int j = 0; j < 3; ++j)
      if (wa[j] != 0 || wb[j] != 0)
        throw std::invalid_argument("linking_number needs null-homologous torus curves");
    Vec3 ca{0, 0, 0}, cb{0, 0, 0};
    for (const auto& v : loop.vertices()) ca += v;
    for (const auto& v : curve.vertices()) cb += v;
    ca = ca / loop.vertices().size();
    cb = cb / curve.vertices().size();
    shift = loop.domain().wrap(cb - ca) - (cb - ca);
  }

  double acc = 0;
  for (int i = 0; i < loop.segment_count(); ++i) {
    Vec3 a = loop.segment_start(i);
    Vec3 da = loop.segment_end(i) - a;
    for (int j = 0; j < curve.segment_count(); ++j) {
      Vec3 b = curve.segment_start(j) + shift;
      Vec3 db = curve.segment_end(j) + shift - b;
      Vec3 cr = cross(da, db);
      for (int qi = 0; qi < Gauss4::n; ++qi)
        for (int qj = 0; qj < Gauss4::n; ++qj) {
          Vec3 r = (a + da * Gauss4::x[qi]) - (b + db * Gauss4::x[qj]);
          double rn = norm(r);
          if (rn < 1e-14) throw std::runtime_error("linking_number: touching supports");
          acc += Gauss4::w[qi] * Gauss4::w[qj] * dot(cr, r) / (rn * rn * rn);
        }
    }
  }
  double raw = acc / (4 * kPi);
  LinkingResult res;
  res.raw = raw;
  res.value = static_cast<int>(std::llround(raw));
  res.residual = std::abs(raw - res.value);
  return res;
}

bool curve_is_simple(const Curve& c) {
  int m = c.segment_count();
  for (int i = 0; i < m; ++i) {
    for (int j = i + 2; j < m; ++j) {
      if (i == 0 && j == m - 1) continue;  // adjacent through closure
      Vec3 a0 = c.segment_start(i), a1 = c.segment_end(i);
      Vec3 b0 = c.segment_start(j), b1 = c.segment_end(j);
      if (c.domain().periodic()) {
        Vec3 off = c.domain().wrap(b0 - a0) - (b0 - a0);
        b0 += off;
        b1 += off;
      }
      // segment-segment distance, clamped closest points
      Vec3 u = a1 - a0, v = b1 - b0, w0 = a0 - b0;
      double A = dot(u, u), B = dot(u, v), C = dot(v, v), D = dot(u, w0), E = dot(v, w0);
      double den = A * C - B * B;
      double s = den > 1e-30 ? std::clamp((B * E - C * D) / den, 0.0, 1.0) : 0.0;
      double t = std::clamp((B * s + E) / C, 0.0, 1.0);
      s = std::clamp((B * t - D) / A, 0.0, 1.0);
      double dist = norm((a0 + u * s) - (b0 + v * t));
      double href = 0.25 * std::min(norm(u), norm(v));
      if (dist < href) return false;
    }
  }
  return true;
}

bool curves_identical(const Curve& a, const Curve& b) {
  if (a.segment_count() != b.segment_count()) return false;
  int m = a.segment_count();
  for (int shift = 0; shift < m; ++shift) {
    bool same = true;
    for (int i = 0; i < m && same; ++i) {
      Vec3 d = a.domain().periodic()
                   ? a.domain().wrap(a.vertices()[i] - b.vertices()[(i + shift) % m])
                   : a.vertices()[i] - b.vertices()[(i + shift) % m];
      if (norm(d) > 1e-12) same = false;
    }
    if (same) return true;
  }
  return false;
}

CurveFrames build_frames(const Curve& c) {
  int m = c.segment_count();
  CurveFrames f;
  f.point.resize(m);
  f.tangent.resize(m);
  f.nu1.resize(m);
  f.nu2.resize(m);
  f.kappa.resize(m);
  f.ds.resize(m);
  for (int i = 0; i < m; ++i) {
    f.point[i] = c.segment_start(i) + (c.segment_end(i) - c.segment_start(i)) * 0.5;
    f.tangent[i] = c.segment_tangent(i);
    f.ds[i] = c.segment_length(i);
  }
  for (int i = 0; i < m; ++i) {
    int ip = (i + 1) % m, im = (i + m - 1) % m;
    double span = 0.5 * (f.ds[im] + f.ds[i]) + 0.5 * (f.ds[i] + f.ds[ip]);
    f.kappa[i] = (f.tangent[ip] - f.tangent[im]) / span;
  }
  // parallel transport of an initial normal
  Vec3 seed = std::abs(f.tangent[0].x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  Vec3 nu = normalized(seed - f.tangent[0] * dot(seed, f.tangent[0]));
  for (int i = 0; i < m; ++i) {
    nu = normalized(nu - f.tangent[i] * dot(nu, f.tangent[i]));
    f.nu1[i] = nu;
    f.nu2[i] = cross(f.tangent[i], nu);
  }
  return f;
}

namespace presets {

namespace {
// embed a planar parametrization into the plane orthogonal to `axis`
Vec3 planar(const Vec3& center, int axis, double u, double v) {
  Vec3 p = center;
  p[(axis + 1) % 3] += u;
  p[(axis + 2) % 3] += v;
  return p;
}
}  // namespace

Curve circle(const Domain& d, double radius, const Vec3& center, int nseg, int axis) {
  if (radius <= 0) throw std::invalid_argument("circle radius must be positive");
  std::vector<Vec3> v;
  v.reserve(nseg);
  for (int i = 0; i < nseg; ++i) {
    double t = 2 * kPi * i / nseg;
    v.push_back(planar(center, axis, radius * std::cos(t), radius * std::sin(t)));
  }
  return Curve(d, std::move(v));
}

Curve square(const Domain& d, double side, const Vec3& center, int axis) {
  double s = side / 2;
  std::vector<Vec3> v = {planar(center, axis, -s, -s), planar(center, axis, s, -s),
                         planar(center, axis, s, s), planar(center, axis, -s, s)};
  return Curve(d, std::move(v));
}

std::vector<Curve> filament_pair(const Domain& d, double separation, const Vec3& center,
                                 int nseg) {
  if (!d.periodic()) throw std::invalid_argument("filament_pair needs a torus domain");
  double lz = d.lengths.z;
  auto line = [&](double x, bool up) {
    std::vector<Vec3> v;
    v.reserve(nseg);
    for (int i = 0; i < nseg; ++i) {
      double z = center.z + (up ? 1.0 : -1.0) * lz * i / nseg;
      v.push_back({x, center.y, z});
    }
    return Curve(d, std::move(v));
  };
  return {line(center.x + separation / 2, true), line(center.x - separation / 2, false)};
}

Curve torus_knot(const Domain& d, int p, int q, double big_r, double small_r,
                 const Vec3& center, int nseg) {
  std::vector<Vec3> v;
  v.reserve(nseg);
  for (int i = 0; i < nseg; ++i) {
    double t = 2 * kPi * i / nseg;
    double r = big_r + small_r * std::cos(q * t);
    v.push_back(center + Vec3{r * std::cos(p * t), r * std::sin(p * t),
                              small_r * std::sin(q * t)});
  }
  return Curve(d, std::move(v));
}

std::vector<Curve> hopf_link(const Domain& d, double radius, double offset,
                             const Vec3& center, int nseg) {
  Curve c1 = circle(d, radius, center, nseg, 2);
  Curve c2 = circle(d, radius, center + Vec3{offset, 0, 0}, nseg, 1);
  return {c1, c2};
}

Curve polygon(const Domain& d, const std::vector<Vec3>& vertices) {
  return Curve(d, vertices);
}

}  // namespace presets

}  // namespace harmap
