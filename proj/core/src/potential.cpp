#include "harmap/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "harmap/util.hpp"

namespace harmap {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2 * std::numbers::pi;
const double kInvSqrtPi = 1.0 / std::sqrt(kPi);

/// F(u) = erf(u)/u, analytic and even; F(0) = 2/sqrt(pi).
double erf_over_u(double u) {
  double u2 = u * u;
  if (u2 < 0.25) {
    // erf(u)/u = 2/sqrt(pi) * sum_k (-u^2)^k / (k! (2k+1))
    double sum = 0, p = 1;
    for (int k = 0; k < 12; ++k) {
      sum += p / (2 * k + 1);
      p *= -u2 / (k + 1);
    }
    return 2 * kInvSqrtPi * sum;
  }
  return std::erf(u) / u;
}

/// H(u) = F'(u)/u with F as above; analytic, H(0) = -4/(3 sqrt(pi)).
double erf_kernel_h(double u) {
  double u2 = u * u;
  if (u2 < 0.25) {
    // F'(u)/u = 2/sqrt(pi) * sum_{k>=1} (-1)^k 2k u^{2k-2} / (k! (2k+1))
    double sum = 0, p = 1, kfact = 1;  // p = (-u^2)^{k-1}
    for (int k = 1; k <= 12; ++k) {
      kfact *= k;
      sum -= p * (2.0 * k) / (kfact * (2 * k + 1));
      p *= -u2;
    }
    return 2 * kInvSqrtPi * sum;
  }
  double f = std::erf(u) / u;
  double fp = (2 * kInvSqrtPi * std::exp(-u2) - f) / u;
  return fp / u;
}

}  // namespace

// ---------------------------------------------------------------------------
// current spectrum
// ---------------------------------------------------------------------------

double CurrentSpectrum::closedness_residual() const {
  double worst = 0, scale = 0;
  const std::size_t total = grid.size();
  for (std::size_t idx = 0; idx < total; ++idx) {
    int i1 = idx % grid.n[0];
    int i2 = (idx / grid.n[0]) % grid.n[1];
    int i3 = idx / (static_cast<std::size_t>(grid.n[0]) * grid.n[1]);
    Vec3 k{grid.wavenumber(0, i1), grid.wavenumber(1, i2),
           grid.dom.n == 2 ? 0.0 : grid.wavenumber(2, i3)};
    cplx kc = k.x * c[0][idx] + k.y * c[1][idx] + k.z * c[2][idx];
    double kn = norm(k);
    double cn = std::sqrt(std::norm(c[0][idx]) + std::norm(c[1][idx]) + std::norm(c[2][idx]));
    worst = std::max(worst, std::abs(kc));
    scale = std::max(scale, kn * cn);
  }
  return scale > 0 ? worst / scale : 0.0;
}

Vec3 CurrentSpectrum::mean_current() const {
  return {c[0][0].real(), c[1][0].real(), c[2][0].real()};
}

CurrentSpectrum current_spectrum(const std::vector<Curve>& curves, const Grid& grid,
                                 int threads) {
  if (grid.dom.n != 3)
    throw std::invalid_argument("curve currents need a 3d grid");
  CurrentSpectrum cs{grid, {}, {}, {}};
  for (auto& comp : cs.c) comp.assign(grid.size(), cplx{0, 0});

  for (const auto& curve : curves) {
    for (int i = 0; i < curve.segment_count(); ++i) {
      SourceSegment s;
      s.a = curve.segment_start(i);
      s.d = curve.segment_end(i) - s.a;
      s.len = norm(s.d);
      s.tau = s.d / s.len;
      cs.segments.push_back(s);
    }
  }

  const double inv_vol = 1.0 / grid.dom.volume();
  const int n1 = grid.n[0], n2 = grid.n[1], n3 = grid.n[2];

  // per-axis phase tables: e^{-i k_j (a_j + d_j/2)} and k_j d_j / 2
  for (const auto& seg : cs.segments) {
    std::array<std::vector<cplx>, 3> pm;
    std::array<std::vector<double>, 3> wh;
    for (int j = 0; j < 3; ++j) {
      pm[j].resize(grid.n[j]);
      wh[j].resize(grid.n[j]);
      double mid = seg.a[j] + 0.5 * seg.d[j];
      for (int idx = 0; idx < grid.n[j]; ++idx) {
        double k = grid.wavenumber(j, idx);
        pm[j][idx] = std::polar(1.0, -k * mid);
        wh[j][idx] = 0.5 * k * seg.d[j];
      }
    }
    cplx f1 = seg.len * inv_vol * seg.tau.x;
    cplx f2 = seg.len * inv_vol * seg.tau.y;
    cplx f3 = seg.len * inv_vol * seg.tau.z;

    parallel_for(n3, threads, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i3 = lo; i3 < hi; ++i3) {
        cplx p3 = pm[2][i3];
        double w3 = wh[2][i3];
        for (int i2 = 0; i2 < n2; ++i2) {
          cplx p23 = p3 * pm[1][i2];
          double w23 = w3 + wh[1][i2];
          std::size_t row = grid.index(0, i2, static_cast<int>(i3));
          for (int i1 = 0; i1 < n1; ++i1) {
            double w = w23 + wh[0][i1];
            double sinc = std::abs(w) < 1e-8 ? 1.0 - w * w / 6.0 : std::sin(w) / w;
            cplx e = p23 * pm[0][i1] * sinc;
            cs.c[0][row + i1] += f1 * e;
            cs.c[1][row + i1] += f2 * e;
            cs.c[2][row + i1] += f3 * e;
          }
        }
      }
    });
  }
  return cs;
}

CurrentSpectrum current_spectrum(const std::vector<PointCharge>& charges,
                                 const Grid& grid) {
  if (grid.dom.n != 2)
    throw std::invalid_argument("point charges live on a 2-torus");
  CurrentSpectrum cs{grid, {}, {}, {}};
  for (auto& comp : cs.c) comp.assign(grid.size(), cplx{0, 0});
  cs.charges = charges;

  const double inv_vol = 1.0 / grid.dom.volume();
  for (const auto& q : charges) {
    for (int i2 = 0; i2 < grid.n[1]; ++i2)
      for (int i1 = 0; i1 < grid.n[0]; ++i1) {
        double kx = grid.wavenumber(0, i1) * q.position.x;
        double ky = grid.wavenumber(1, i2) * q.position.y;
        cs.c[2][grid.index(i1, i2, 0)] +=
            inv_vol * static_cast<double>(q.multiplicity) * std::polar(1.0, -(kx + ky));
      }
  }
  return cs;
}

// ---------------------------------------------------------------------------
// periodic cubic interpolation (Catmull-Rom per axis)
// ---------------------------------------------------------------------------

namespace {

inline void cubic_weights(double t, double w[4]) {
  // Catmull-Rom
  double t2 = t * t, t3 = t2 * t;
  w[0] = 0.5 * (-t3 + 2 * t2 - t);
  w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
  w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
  w[3] = 0.5 * (t3 - t2);
}

}  // namespace

double interpolate_periodic(const Grid& g, const std::vector<double>& f, const Vec3& x) {
  int dims = g.dom.n;
  int base[3] = {0, 0, 0};
  double wts[3][4];
  for (int j = 0; j < dims; ++j) {
    double h = g.spacing(j);
    double u = x[j] / h;
    double fl = std::floor(u);
    base[j] = static_cast<int>(fl);
    cubic_weights(u - fl, wts[j]);
  }
  auto wrapi = [&](int j, int i) {
    int n = g.n[j];
    int r = (i % n + n) % n;
    return r;
  };
  double acc = 0;
  if (dims == 2) {
    for (int b = 0; b < 4; ++b) {
      int i2 = wrapi(1, base[1] - 1 + b);
      for (int a = 0; a < 4; ++a)
        acc += wts[0][a] * wts[1][b] * f[g.index(wrapi(0, base[0] - 1 + a), i2, 0)];
    }
    return acc;
  }
  for (int cidx = 0; cidx < 4; ++cidx) {
    int i3 = wrapi(2, base[2] - 1 + cidx);
    double acc2 = 0;
    for (int b = 0; b < 4; ++b) {
      int i2 = wrapi(1, base[1] - 1 + b);
      double acc1 = 0;
      for (int a = 0; a < 4; ++a)
        acc1 += wts[0][a] * f[g.index(wrapi(0, base[0] - 1 + a), i2, i3)];
      acc2 += wts[1][b] * acc1;
    }
    acc += wts[2][cidx] * acc2;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

PotentialField solve_potential(const CurrentSpectrum& current, double sigma,
                               int threads) {
  const Grid& g = current.grid;
  double h = g.max_spacing();
  if (sigma < h * (1 - 1e-12) || sigma > 4 * h * (1 + 1e-12))
    throw std::invalid_argument("ewald sigma must lie in [h, 4h]");

  Vec3 mean = current.mean_current();
  double mean_scale = 0;
  for (const auto& s : current.segments) mean_scale += s.len;
  for (const auto& q : current.charges) mean_scale += std::abs(q.multiplicity);
  mean_scale = std::max(mean_scale / g.dom.volume(), 1e-300);
  if (norm(mean) > 1e-9 * mean_scale)
    throw std::invalid_argument(
        "admissibility violation: scene has nonzero homology class, Gamma does not bound");

  PotentialField pot(g, sigma);
  pot.threads_ = threads;
  pot.segments_ = current.segments;
  pot.charges_ = current.charges;

  const int n1 = g.n[0], n2 = g.n[1], n3 = g.n[2];
  for (int j = 0; j < 3; ++j) pot.a_hat_[j].assign(g.size(), cplx{0, 0});

  for (int i3 = 0; i3 < n3; ++i3)
    for (int i2 = 0; i2 < n2; ++i2)
      for (int i1 = 0; i1 < n1; ++i1) {
        std::size_t idx = g.index(i1, i2, i3);
        if (i1 == 0 && i2 == 0 && i3 == 0) continue;
        Vec3 k{g.wavenumber(0, i1), g.wavenumber(1, i2),
               g.dom.n == 2 ? 0.0 : g.wavenumber(2, i3)};
        double k2 = norm2(k);
        double coef = kTwoPi * std::exp(-0.5 * sigma * sigma * k2) / k2;
        for (int j = 0; j < 3; ++j) pot.a_hat_[j][idx] = coef * current.c[j][idx];
      }

  // nodal far A and far b = curl A
  std::array<std::vector<cplx>, 3> bhat;
  for (int j = 0; j < 3; ++j) bhat[j].assign(g.size(), cplx{0, 0});
  const cplx iu(0, 1);
  for (int i3 = 0; i3 < n3; ++i3)
    for (int i2 = 0; i2 < n2; ++i2)
      for (int i1 = 0; i1 < n1; ++i1) {
        std::size_t idx = g.index(i1, i2, i3);
        Vec3 k{g.wavenumber(0, i1), g.wavenumber(1, i2),
               g.dom.n == 2 ? 0.0 : g.wavenumber(2, i3)};
        cplx a0 = pot.a_hat_[0][idx], a1 = pot.a_hat_[1][idx], a2 = pot.a_hat_[2][idx];
        bhat[0][idx] = iu * (k.y * a2 - k.z * a1);
        bhat[1][idx] = iu * (k.z * a0 - k.x * a2);
        bhat[2][idx] = iu * (k.x * a1 - k.y * a0);
      }
  for (int j = 0; j < 3; ++j) {
    pot.a_far_[j] = to_nodal(g, pot.a_hat_[j]);
    pot.b_far_[j] = to_nodal(g, std::move(bhat[j]));
  }

  // near-field reach; keep only the periodic images that can touch the
  // fundamental cell (evaluation points are wrapped into it first)
  pot.near_cutoff_ = 7.0 * sigma;
  double max_half = 0;
  for (const auto& s : pot.segments_) max_half = std::max(max_half, 0.5 * s.len);
  int imax[3] = {0, 0, 0};
  for (int j = 0; j < g.dom.n; ++j)
    imax[j] = static_cast<int>(
        std::ceil((pot.near_cutoff_ + max_half) / g.dom.lengths[j]));
  auto in_reach = [&](const Vec3& mid, double half) {
    for (int j = 0; j < g.dom.n; ++j) {
      double margin = pot.near_cutoff_ + half;
      if (mid[j] < -margin || mid[j] > g.dom.lengths[j] + margin) return false;
    }
    return true;
  };
  for (int a = -imax[0]; a <= imax[0]; ++a)
    for (int b = -imax[1]; b <= imax[1]; ++b)
      for (int c = -imax[2]; c <= imax[2]; ++c) {
        Vec3 shift{a * g.dom.lengths.x, b * g.dom.lengths.y,
                   g.dom.n == 2 ? 0.0 : c * g.dom.lengths.z};
        for (const auto& s : pot.segments_) {
          PotentialField::NearSegment ns;
          ns.a = s.a + shift;
          ns.d = s.d;
          ns.tau = s.tau;
          ns.len = s.len;
          ns.mid = ns.a + ns.d * 0.5;
          double reach = pot.near_cutoff_ + 0.5 * s.len;
          ns.reach2 = reach * reach;
          if (in_reach(ns.mid, 0.5 * s.len)) pot.near_segments_.push_back(ns);
        }
        for (const auto& q : pot.charges_) {
          PointCharge img{q.position + shift, q.multiplicity};
          if (in_reach(img.position, 0)) pot.near_charges_.push_back(img);
        }
      }
  return pot;
}

// ---------------------------------------------------------------------------
// near-field kernels
// ---------------------------------------------------------------------------

Vec3 PotentialField::near_a(const Vec3& x) const {
  const double sq2sig = std::numbers::sqrt2 * sigma_;
  Vec3 acc{0, 0, 0};
  for (const auto& s : near_segments_) {
    if (norm2(x - s.mid) > s.reach2) continue;
    // exact line kernel: (1/2) int ds / r
    Vec3 rel = x - s.a;
    double s0 = dot(rel, s.tau);
    double rho2 = std::max(norm2(rel) - s0 * s0, 0.0);
    double rho = std::sqrt(rho2);
    double line;
    if (rho < 1e-14 * s.len) {
      if (s0 > -1e-14 * s.len && s0 < s.len * (1 + 1e-14))
        throw std::domain_error("potential evaluated on the singular set");
      line = s0 < 0 ? 0.5 * std::log((s.len - s0) / (-s0))
                    : 0.5 * std::log(s0 / (s0 - s.len));
    } else {
      line = 0.5 * (std::asinh((s.len - s0) / rho) + std::asinh(s0 / rho));
    }
    // smooth complement: (1/2) int erf(r/(sqrt2 sigma))/r ds  (Gauss rule;
    // the integrand varies on the sigma scale, short segments need few nodes)
    double smooth = 0;
    if (s.len < sigma_) {
      for (int q = 0; q < Gauss4::n; ++q) {
        double r = norm(x - (s.a + s.d * Gauss4::x[q]));
        smooth += Gauss4::w[q] * erf_over_u(r / sq2sig);
      }
    } else {
      for (int q = 0; q < Gauss8::n; ++q) {
        double r = norm(x - (s.a + s.d * Gauss8::x[q]));
        smooth += Gauss8::w[q] * erf_over_u(r / sq2sig);
      }
    }
    smooth *= 0.5 * s.len / sq2sig;
    acc += s.tau * (line - smooth);
  }
  for (const auto& q : near_charges_) {
    double r2 = norm2(x - q.position);
    if (r2 > near_cutoff_ * near_cutoff_) continue;
    if (r2 < 1e-28) throw std::domain_error("potential evaluated on the singular set");
    // (1/2) E1(r^2 / (2 sigma^2))
    double e1 = -std::expint(-r2 / (2 * sigma_ * sigma_));
    acc.z += 0.5 * q.multiplicity * e1;
  }
  return acc;
}

Vec3 PotentialField::near_b(const Vec3& x) const {
  const double sq2sig = std::numbers::sqrt2 * sigma_;
  const double smooth_coef = 1.0 / (4 * std::numbers::sqrt2 * sigma_ * sigma_ * sigma_);
  Vec3 acc{0, 0, 0};
  for (const auto& s : near_segments_) {
    if (norm2(x - s.mid) > s.reach2) continue;
    Vec3 rel = x - s.a;
    double s0 = dot(rel, s.tau);
    Vec3 rho_vec = rel - s.tau * s0;
    double rho2 = norm2(rho_vec);
    if (rho2 < 1e-28 * s.len * s.len) {
      if (s0 > -1e-14 * s.len && s0 < s.len * (1 + 1e-14))
        throw std::domain_error("d*psi evaluated on the singular set");
      // on the axis beyond the ends the line part vanishes
    } else {
      double r0 = norm(rel);
      double r1 = norm(x - (s.a + s.d));
      double bracket = (s.len - s0) / (rho2 * r1) + s0 / (rho2 * r0);
      acc += cross(s.tau, rho_vec) * (0.5 * bracket);
    }
    // smooth complement: int H(u)/(4 sqrt2 sigma^3) ((x-y) x tau) ds
    Vec3 sm{0, 0, 0};
    if (s.len < sigma_) {
      for (int q = 0; q < Gauss4::n; ++q) {
        Vec3 r = x - (s.a + s.d * Gauss4::x[q]);
        sm += cross(r, s.tau) * (Gauss4::w[q] * erf_kernel_h(norm(r) / sq2sig));
      }
    } else {
      for (int q = 0; q < Gauss8::n; ++q) {
        Vec3 r = x - (s.a + s.d * Gauss8::x[q]);
        sm += cross(r, s.tau) * (Gauss8::w[q] * erf_kernel_h(norm(r) / sq2sig));
      }
    }
    acc -= sm * (s.len * smooth_coef);
  }
  for (const auto& q : near_charges_) {
    Vec3 r = x - q.position;
    r.z = 0;
    double r2 = norm2(r);
    if (r2 > near_cutoff_ * near_cutoff_) continue;
    if (r2 < 1e-28) throw std::domain_error("d*psi evaluated on the singular set");
    // b = grad(g) x z_hat with g' = -e^{-r^2/(2 sigma^2)} / r
    double gp_over_r = -std::exp(-r2 / (2 * sigma_ * sigma_)) / r2;
    Vec3 grad = r * gp_over_r;
    acc += Vec3{grad.y, -grad.x, 0} * static_cast<double>(q.multiplicity);
  }
  return acc;
}

namespace {
Vec3 wrap_to_cell(const Grid& g, Vec3 x) {
  for (int j = 0; j < g.dom.n; ++j) {
    double l = g.dom.lengths[j];
    x[j] -= l * std::floor(x[j] / l);
  }
  return x;
}
}  // namespace

Vec3 PotentialField::vector_potential(const Vec3& x0) const {
  Vec3 x = wrap_to_cell(grid_, x0);
  Vec3 far{interpolate_periodic(grid_, a_far_[0], x), interpolate_periodic(grid_, a_far_[1], x),
           interpolate_periodic(grid_, a_far_[2], x)};
  return far + near_a(x);
}

Vec3 PotentialField::dstar_psi(const Vec3& x0) const {
  Vec3 x = wrap_to_cell(grid_, x0);
  Vec3 far{interpolate_periodic(grid_, b_far_[0], x), interpolate_periodic(grid_, b_far_[1], x),
           interpolate_periodic(grid_, b_far_[2], x)};
  return far + near_b(x);
}

const std::array<std::vector<double>, 3>& PotentialField::b_nodal() const {
  if (b_nodal_ready_) return b_nodal_;
  for (int j = 0; j < 3; ++j) b_nodal_[j] = b_far_[j];

  // nodes possibly within reach of a source
  std::vector<std::size_t> candidates;
  std::vector<char> flagged(grid_.size(), 0);
  auto mark_box = [&](const Vec3& lo, const Vec3& hi) {
    int range[3][2];
    for (int j = 0; j < grid_.dom.n; ++j) {
      double h = grid_.spacing(j);
      range[j][0] = static_cast<int>(std::floor(lo[j] / h)) - 1;
      range[j][1] = static_cast<int>(std::ceil(hi[j] / h)) + 1;
      if (range[j][1] - range[j][0] >= grid_.n[j]) {
        range[j][0] = 0;
        range[j][1] = grid_.n[j] - 1;
      }
    }
    if (grid_.dom.n == 2) {
      range[2][0] = 0;
      range[2][1] = 0;
    }
    for (int i3 = range[2][0]; i3 <= range[2][1]; ++i3)
      for (int i2 = range[1][0]; i2 <= range[1][1]; ++i2)
        for (int i1 = range[0][0]; i1 <= range[0][1]; ++i1) {
          int w1 = (i1 % grid_.n[0] + grid_.n[0]) % grid_.n[0];
          int w2 = (i2 % grid_.n[1] + grid_.n[1]) % grid_.n[1];
          int w3 = (i3 % grid_.n[2] + grid_.n[2]) % grid_.n[2];
          std::size_t idx = grid_.index(w1, w2, w3);
          if (!flagged[idx]) {
            flagged[idx] = 1;
            candidates.push_back(idx);
          }
        }
  };
  Vec3 rc{near_cutoff_, near_cutoff_, grid_.dom.n == 2 ? 0.0 : near_cutoff_};
  for (const auto& s : segments_) {
    Vec3 lo = s.a, hi = s.a;
    Vec3 end = s.a + s.d;
    for (int j = 0; j < 3; ++j) {
      lo[j] = std::min(lo[j], end[j]);
      hi[j] = std::max(hi[j], end[j]);
    }
    mark_box(lo - rc, hi + rc);
  }
  for (const auto& q : charges_) mark_box(q.position - rc, q.position + rc);

  std::sort(candidates.begin(), candidates.end());
  parallel_for(candidates.size(), threads_, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      std::size_t idx = candidates[i];
      int i1 = idx % grid_.n[0];
      int i2 = (idx / grid_.n[0]) % grid_.n[1];
      int i3 = idx / (static_cast<std::size_t>(grid_.n[0]) * grid_.n[1]);
      Vec3 nb = near_b(grid_.node(i1, i2, i3));
      for (int j = 0; j < 3; ++j) b_nodal_[j][idx] += nb[j];
    }
  });
  b_nodal_ready_ = true;
  return b_nodal_;
}

double PotentialField::line_integral_b(const Vec3& x0, const Vec3& dir,
                                       int subdivisions) const {
  double acc = 0;
  for (int e = 0; e < subdivisions; ++e)
    for (int q = 0; q < Gauss4::n; ++q) {
      double t = (e + Gauss4::x[q]) / subdivisions;
      acc += Gauss4::w[q] * dot(dstar_psi(x0 + dir * t), dir) / subdivisions;
    }
  return acc;
}

double PotentialField::circulation(const Curve& loop, int subdivisions_per_segment) const {
  double acc = 0;
  for (int i = 0; i < loop.segment_count(); ++i)
    acc += line_integral_b(loop.segment_start(i), loop.segment_end(i) - loop.segment_start(i),
                           subdivisions_per_segment);
  return acc;
}

// ---------------------------------------------------------------------------
// Hodge decomposition
// ---------------------------------------------------------------------------

HodgeParts hodge_decompose(const Grid& g, const std::array<std::vector<double>, 3>& form) {
  HodgeParts out;
  std::array<std::vector<cplx>, 3> fhat;
  int ncomp = g.dom.n == 2 ? 3 : 3;  // z slot participates either way
  for (int j = 0; j < ncomp; ++j) fhat[j] = to_spectral(g, form[j]);

  out.harmonic = {fhat[0][0].real(), fhat[1][0].real(), fhat[2][0].real()};

  std::vector<cplx> phihat(g.size(), cplx{0, 0});
  std::array<std::vector<cplx>, 3> exhat;
  for (int j = 0; j < 3; ++j) exhat[j].assign(g.size(), cplx{0, 0});
  const cplx iu(0, 1);
  for (int i3 = 0; i3 < g.n[2]; ++i3)
    for (int i2 = 0; i2 < g.n[1]; ++i2)
      for (int i1 = 0; i1 < g.n[0]; ++i1) {
        if (i1 == 0 && i2 == 0 && i3 == 0) continue;
        std::size_t idx = g.index(i1, i2, i3);
        Vec3 k{g.wavenumber(0, i1), g.wavenumber(1, i2),
               g.dom.n == 2 ? 0.0 : g.wavenumber(2, i3)};
        double k2 = norm2(k);
        cplx kdotf = k.x * fhat[0][idx] + k.y * fhat[1][idx] + k.z * fhat[2][idx];
        phihat[idx] = -iu * kdotf / k2;
        for (int j = 0; j < 3; ++j) exhat[j][idx] = k[j] * kdotf / k2;
      }

  out.phi = to_nodal(g, phihat);
  for (int j = 0; j < 3; ++j) {
    out.exact[j] = to_nodal(g, exhat[j]);
    out.coexact[j].resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      out.coexact[j][i] = form[j][i] - out.exact[j][i] - out.harmonic[j];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stokes identity check
// ---------------------------------------------------------------------------

TestForm::TestForm(const Domain& dom, unsigned seed, int max_mode, int terms) {
  SplitMix64 rng(seed * 0x9e3779b9u + 12345u);
  terms_.reserve(terms);
  for (int t = 0; t < terms; ++t) {
    Term term;
    Vec3 m{0, 0, 0};
    do {
      for (int j = 0; j < dom.n; ++j)
        m[j] = std::floor(rng.uniform(-max_mode, max_mode + 1));
    } while (norm2(m) == 0);
    for (int j = 0; j < dom.n; ++j) term.k[j] = kTwoPi * m[j] / dom.lengths[j];
    term.amp = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    term.phase = rng.uniform(0, kTwoPi);
    terms_.push_back(term);
  }
}

TestForm TestForm::constant(const Vec3& c) {
  TestForm f;
  f.offset_ = c;
  return f;
}

Vec3 TestForm::value(const Vec3& x) const {
  Vec3 acc = offset_;
  for (const auto& t : terms_) acc += t.amp * std::cos(dot(t.k, x) + t.phase);
  return acc;
}

Vec3 TestForm::curl(const Vec3& x) const {
  Vec3 acc{0, 0, 0};
  for (const auto& t : terms_)
    acc += cross(t.k, t.amp) * (-std::sin(dot(t.k, x) + t.phase));
  return acc;
}

std::vector<StokesResult> stokes_check_batch(const PotentialField& pot, const Curve& curve,
                                             double delta,
                                             const std::vector<TestForm>& forms) {
  const Grid& g = pot.grid();
  double h = g.max_spacing();
  if (delta < 4 * h * (1 - 1e-12) || delta > g.dom.min_period() / 8 * (1 + 1e-12))
    throw std::invalid_argument("stokes_check: delta outside [4h, L/8]");

  CurveFrames fr = build_frames(curve);
  int ntheta = std::clamp(static_cast<int>(kTwoPi * delta / h), 24, 160);

  // b at all quadrature points, shared across forms
  struct QPoint {
    Vec3 x;
    Vec3 b;
    double jac;  // includes ds dtheta (drho) weights
  };
  std::vector<QPoint> surf, vol;
  surf.reserve(fr.size() * ntheta);
  vol.reserve(fr.size() * ntheta * Gauss8::n);
  std::vector<Vec3> normals;
  normals.reserve(fr.size() * ntheta);

  double dtheta = kTwoPi / ntheta;
  for (std::size_t i = 0; i < fr.size(); ++i) {
    for (int jt = 0; jt < ntheta; ++jt) {
      double th = (jt + 0.5) * dtheta;
      Vec3 nu = fr.nu1[i] * std::cos(th) + fr.nu2[i] * std::sin(th);
      double kap = dot(fr.kappa[i], nu);
      {
        Vec3 x = fr.point[i] + nu * delta;
        QPoint qp;
        qp.x = x;
        qp.b = pot.dstar_psi(x);
        qp.jac = delta * (1 - delta * kap) * dtheta * fr.ds[i];
        surf.push_back(qp);
        normals.push_back(nu);
      }
      for (int q = 0; q < Gauss8::n; ++q) {
        double rho = delta * Gauss8::x[q];
        Vec3 x = fr.point[i] + nu * rho;
        QPoint qp;
        qp.x = x;
        qp.b = pot.dstar_psi(x);
        qp.jac = delta * Gauss8::w[q] * rho * (1 - rho * kap) * dtheta * fr.ds[i];
        vol.push_back(qp);
      }
    }
  }

  std::vector<StokesResult> results;
  for (const auto& form : forms) {
    StokesResult r;
    for (std::size_t i = 0; i < surf.size(); ++i)
      r.boundary += dot(cross(form.value(surf[i].x), surf[i].b), normals[i]) * surf[i].jac;
    for (const auto& qp : vol) r.volume += dot(form.curl(qp.x), qp.b) * qp.jac;
    for (std::size_t i = 0; i < fr.size(); ++i) {
      // Gamma integral on the polyline itself
      Vec3 a = curve.segment_start(static_cast<int>(i));
      Vec3 d = curve.segment_end(static_cast<int>(i)) - a;
      for (int q = 0; q < Gauss4::n; ++q)
        r.gamma -= kTwoPi * Gauss4::w[q] * dot(form.value(a + d * Gauss4::x[q]), d);
    }
    // scale floor 2 pi len avg|alpha|: constant forms on closed curves make
    // all three terms vanish identically
    double form_scale = 0, len = 0;
    for (std::size_t i = 0; i < fr.size(); ++i) {
      form_scale += norm(form.value(fr.point[i])) * fr.ds[i];
      len += fr.ds[i];
    }
    form_scale *= kTwoPi;
    double scale = std::max({std::abs(r.boundary), std::abs(r.volume), std::abs(r.gamma),
                             form_scale});
    r.residual = std::abs(r.boundary - r.volume - r.gamma) / std::max(scale, 1e-300);
    results.push_back(r);
  }
  return results;
}

StokesResult stokes_check(const PotentialField& pot, const Curve& curve, double delta,
                          const TestForm& form) {
  return stokes_check_batch(pot, curve, delta, {form}).front();
}

}  // namespace harmap
