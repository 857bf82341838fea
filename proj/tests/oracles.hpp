// Independent numerical oracles used by the test suites. Everything here is
// deliberately written against the definitions, not against the library's
// evaluation paths: fine midpoint quadrature instead of analytic segment
// kernels, AGM elliptic integrals instead of pairwise sums, Jacobi theta
// series instead of Ewald splitting.
#ifndef HARMAP_TESTS_ORACLES_HPP
#define HARMAP_TESTS_ORACLES_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "harmap/geometry.hpp"

namespace oracles {

using harmap::Curve;
using harmap::Vec3;

inline constexpr double pi = std::numbers::pi;

/// complete elliptic integrals by the arithmetic-geometric mean, modulus k
inline void elliptic_ke(double k, double& K, double& E) {
  double a = 1, b = std::sqrt(1 - k * k), c = k;
  double sum = c * c / 2;
  double pow2 = 1;
  for (int it = 0; it < 64 && std::abs(c) > 1e-17; ++it) {
    double an = (a + b) / 2;
    c = (a - b) / 2;
    b = std::sqrt(a * b);
    a = an;
    pow2 *= 2;
    sum += pow2 * c * c / 2;
  }
  K = pi / (2 * a);
  E = K * (1 - sum);
}

/// Neumann integral oint oint t.t'/|x-y| for coaxial circles of radii ra, rb
/// at axial separation d: 4 pi sqrt(ra rb) [ (2/k - k) K(k) - (2/k) E(k) ].
inline double coaxial_neumann(double ra, double rb, double d) {
  double k2 = 4 * ra * rb / ((ra + rb) * (ra + rb) + d * d);
  double k = std::sqrt(k2);
  double K, E;
  elliptic_ke(k, K, E);
  return 4 * pi * std::sqrt(ra * rb) * ((2 / k - k) * K - (2 / k) * E);
}

/// Biot-Savart field of a polyline by brute midpoint quadrature of
/// (1/2) (tau x (x - y)) / |x - y|^3 with `sub` subdivisions per segment.
inline Vec3 biot_savart_quadrature(const Curve& c, const Vec3& x, int sub = 64) {
  Vec3 acc{0, 0, 0};
  for (int i = 0; i < c.segment_count(); ++i) {
    Vec3 a = c.segment_start(i);
    Vec3 d = c.segment_end(i) - a;
    for (int q = 0; q < sub; ++q) {
      Vec3 y = a + d * ((q + 0.5) / sub);
      Vec3 r = x - y;
      double rn = harmap::norm(r);
      acc += harmap::cross(d / sub, r) * (0.5 / (rn * rn * rn));
    }
  }
  return acc;
}

/// Point-to-scene distance by brute force over all segments and all 3^n
/// periodic images.
inline double brute_distance(const Vec3& p, const Curve& c) {
  const auto& dom = c.domain();
  double best = std::numeric_limits<double>::infinity();
  int r = dom.periodic() ? 1 : 0;
  for (int ix = -r; ix <= r; ++ix)
    for (int iy = -r; iy <= r; ++iy)
      for (int iz = -(dom.n == 3 ? r : 0); iz <= (dom.n == 3 ? r : 0); ++iz) {
        Vec3 shift{ix * dom.lengths.x, iy * dom.lengths.y,
                   dom.n == 3 ? iz * dom.lengths.z : 0.0};
        for (int i = 0; i < c.segment_count(); ++i) {
          Vec3 a = c.segment_start(i) + shift;
          Vec3 d = c.segment_end(i) - c.segment_start(i);
          double t = std::clamp(harmap::dot(p - a, d) / harmap::norm2(d), 0.0, 1.0);
          best = std::min(best, harmap::norm(p - a - d * t));
        }
      }
  return best;
}

/// log |theta_1(z, q)| via the rapidly convergent sine series.
inline double log_abs_theta1(std::complex<double> z, double q) {
  std::complex<double> acc = 0;
  double qp = std::pow(q, 0.25);
  for (int n = 0; n < 12; ++n) {
    double coef = (n % 2 ? -2.0 : 2.0) * qp * std::pow(q, n * (n + 1));
    acc += coef * std::sin((2.0 * n + 1.0) * z);
  }
  return std::log(std::abs(acc));
}

/// Zero-mean 2d periodic dipole potential on the square torus [0,L)^2:
/// A(x) = 2 pi [G(x - p_plus) - G(x - p_minus)] with
/// G(w) = -(1/2pi) log|theta_1(pi w / L, e^{-pi})| + (Im w)^2 / (2 L^2).
inline double dipole_potential_2d(const Vec3& x, const Vec3& pp, const Vec3& pm,
                                  double L) {
  auto G = [&](Vec3 w) {
    std::complex<double> z(w.x / L, w.y / L);
    return -log_abs_theta1(pi * z, std::exp(-pi)) / (2 * pi) +
           (w.y / L) * (w.y / L) / 2;
  };
  return 2 * pi * (G(x - pp) - G(x - pm));
}

/// Gauss linking integral with plain midpoint quadrature (independent of the
/// production Gauss-Legendre path).
inline double linking_quadrature(const Curve& a, const Curve& b, int sub = 8) {
  double acc = 0;
  for (int i = 0; i < a.segment_count(); ++i) {
    Vec3 pa = a.segment_start(i);
    Vec3 da = a.segment_end(i) - pa;
    for (int j = 0; j < b.segment_count(); ++j) {
      Vec3 pb = b.segment_start(j);
      Vec3 db = b.segment_end(j) - pb;
      for (int qi = 0; qi < sub; ++qi)
        for (int qj = 0; qj < sub; ++qj) {
          Vec3 r = (pa + da * ((qi + 0.5) / sub)) - (pb + db * ((qj + 0.5) / sub));
          double rn = harmap::norm(r);
          acc += harmap::dot(harmap::cross(da / sub, db / sub), r) / (rn * rn * rn);
        }
    }
  }
  return acc / (4 * pi);
}

}  // namespace oracles

#endif
