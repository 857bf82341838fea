#include "harmap/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "harmap/fft.hpp"
#include "harmap/util.hpp"

namespace harmap {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2 * std::numbers::pi;
constexpr int kNormalDirs = 8;
}  // namespace

double RenormReport::cross(int i, int j, int ncomp) const {
  if (i == j) return 0;
  if (i > j) std::swap(i, j);
  int idx = 0;
  for (int a = 0; a < ncomp; ++a)
    for (int b = a + 1; b < ncomp; ++b) {
      if (a == i && b == j) return cross_terms[idx];
      ++idx;
    }
  throw std::out_of_range("cross pair index");
}

namespace {

/// oint over Gamma_target of the rho->0 extrapolated tangential potential of
/// `source_pot`, with the local log removed when the source contains the
/// target (with_log). Returns 2 pi * integral and tracks fit quality.
double extrapolated_tangential(const PotentialField& source_pot, const Curve& target,
                               bool with_log, const std::vector<double>& offsets,
                               double& max_residual) {
  CurveFrames fr = build_frames(target);
  double acc = 0;
  // averaging over the normal directions cancels the odd-in-rho term, so the
  // samples are even in rho; the fit runs in rho^2
  std::vector<double> rho2(offsets.size()), val(offsets.size());
  for (std::size_t r = 0; r < offsets.size(); ++r) rho2[r] = offsets[r] * offsets[r];
  for (std::size_t i = 0; i < fr.size(); ++i) {
    for (std::size_t r = 0; r < offsets.size(); ++r) {
      double avg = 0;
      for (int m = 0; m < kNormalDirs; ++m) {
        double th = kTwoPi * (m + 0.5) / kNormalDirs;
        Vec3 nu = fr.nu1[i] * std::cos(th) + fr.nu2[i] * std::sin(th);
        avg += dot(source_pot.vector_potential(fr.point[i] + nu * offsets[r]),
                   fr.tangent[i]);
      }
      val[r] = avg / kNormalDirs + (with_log ? std::log(offsets[r]) : 0.0);
    }
    LineFit fit = fit_affine(rho2, val);
    double spread = *std::max_element(val.begin(), val.end()) -
                    *std::min_element(val.begin(), val.end());
    double res = 0;
    for (std::size_t r = 0; r < rho2.size(); ++r)
      res = std::max(res, std::abs(val[r] - fit.a * rho2[r] - fit.b));
    max_residual = std::max(max_residual, res / std::max(spread, 1e-300));
    acc += fit.b * fr.ds[i];
  }
  return kTwoPi * acc;
}

}  // namespace

RenormReport renormalized_energy_torus(const PotentialField& pot,
                                       const std::vector<Curve>& curves, int threads) {
  const Grid& g = pot.grid();
  if (g.dom.n != 3)
    throw std::invalid_argument("renormalized_energy_torus expects curve scenes");
  double h = g.max_spacing();

  RenormReport rep;
  rep.offsets = {2 * h, 3 * h, 4 * h, 6 * h};

  int ncomp = static_cast<int>(curves.size());
  // per-component potentials (the full pot is their sum by linearity)
  std::vector<PotentialField> comps;
  comps.reserve(ncomp);
  for (int i = 0; i < ncomp; ++i) {
    if (ncomp == 1) break;
    CurrentSpectrum cs = current_spectrum({curves[i]}, g, threads);
    comps.push_back(solve_potential(cs, pot.sigma(), threads));
  }

  rep.self_terms.resize(ncomp, 0.0);
  for (int i = 0; i < ncomp; ++i) {
    const PotentialField& src = ncomp == 1 ? pot : comps[i];
    rep.self_terms[i] =
        extrapolated_tangential(src, curves[i], true, rep.offsets, rep.max_fit_residual);
  }
  for (int i = 0; i < ncomp; ++i)
    for (int j = i + 1; j < ncomp; ++j) {
      double sij = extrapolated_tangential(comps[j], curves[i], false, rep.offsets,
                                           rep.max_fit_residual);
      double sji = extrapolated_tangential(comps[i], curves[j], false, rep.offsets,
                                           rep.max_fit_residual);
      rep.cross_terms.push_back(sij + sji);
    }

  rep.w_total = 0;
  for (double s : rep.self_terms) rep.w_total += s;
  for (double c : rep.cross_terms) rep.w_total += c;
  rep.under_resolved = rep.max_fit_residual > 0.05;
  return rep;
}

namespace {

/// exact integral of 1/|x-y| over a straight segment
double segment_inverse_distance(const Vec3& x, const Vec3& a, const Vec3& d, double len) {
  Vec3 rel = x - a;
  Vec3 tau = d / len;
  double s0 = dot(rel, tau);
  double rho2 = std::max(norm2(rel) - s0 * s0, 0.0);
  double rho = std::sqrt(rho2);
  if (rho < 1e-14 * len) {
    if (s0 > -1e-14 * len && s0 < len * (1 + 1e-14))
      throw std::domain_error("coincident points across curves");
    return s0 < 0 ? std::log((len - s0) / (-s0)) : std::log(s0 / (s0 - len));
  }
  return std::asinh((len - s0) / rho) + std::asinh(s0 / rho);
}

}  // namespace

double neumann_inductance(const Curve& c1, const Curve& c2) {
  double acc = 0;
  for (int i = 0; i < c1.segment_count(); ++i) {
    Vec3 a = c1.segment_start(i);
    Vec3 da = c1.segment_end(i) - a;
    double la = norm(da);
    for (int j = 0; j < c2.segment_count(); ++j) {
      Vec3 b = c2.segment_start(j);
      Vec3 db = c2.segment_end(j) - b;
      double lb = norm(db);
      double tt = dot(da, db) / (la * lb);
      if (tt == 0) continue;
      double sep2 = norm2((a + da * 0.5) - (b + db * 0.5));
      double pair = 0;
      if (sep2 > 16 * (la + lb) * (la + lb)) {
        for (int qi = 0; qi < Gauss4::n; ++qi)
          for (int qj = 0; qj < Gauss4::n; ++qj)
            pair += Gauss4::w[qi] * Gauss4::w[qj] /
                    norm((a + da * Gauss4::x[qi]) - (b + db * Gauss4::x[qj]));
        pair *= la * lb;
      } else {
        // inner integral analytic, outer Gauss
        for (int qi = 0; qi < Gauss8::n; ++qi)
          pair += Gauss8::w[qi] *
                  segment_inverse_distance(a + da * Gauss8::x[qi], b, db, lb);
        pair *= la;
      }
      acc += tt * pair;
    }
  }
  return acc;
}

double cross_interaction(const Curve& ci, const Curve& cj, GreenKind kind,
                         const Grid* grid, double sigma) {
  // separation precondition
  double maxseg = std::max(ci.max_segment_length(), cj.max_segment_length());
  double mindist = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ci.segment_count(); ++i)
    mindist = std::min(mindist, distance_to_curve(ci.segment_start(i), cj));
  if (mindist < 4 * maxseg)
    throw std::invalid_argument(
        "cross_interaction: supports closer than 4 x max segment length");

  if (kind == GreenKind::free_space) return kTwoPi * neumann_inductance(ci, cj);

  if (!grid || sigma <= 0)
    throw std::invalid_argument("periodic cross_interaction needs grid and sigma");
  const Grid& g = *grid;

  // Ewald scalar Green's function: filtered spectral part on the grid +
  // erfc images (additive constant drops for closed curves)
  std::vector<cplx> ghat(g.size(), cplx{0, 0});
  for (int i3 = 0; i3 < g.n[2]; ++i3)
    for (int i2 = 0; i2 < g.n[1]; ++i2)
      for (int i1 = 0; i1 < g.n[0]; ++i1) {
        if (i1 == 0 && i2 == 0 && i3 == 0) continue;
        Vec3 k{g.wavenumber(0, i1), g.wavenumber(1, i2), g.wavenumber(2, i3)};
        double k2 = norm2(k);
        ghat[g.index(i1, i2, i3)] =
            std::exp(-0.5 * sigma * sigma * k2) / (g.dom.volume() * k2);
      }
  std::vector<double> gfar = to_nodal(g, std::move(ghat));

  const double rc = 7 * sigma;
  const double sq2sig = std::numbers::sqrt2 * sigma;
  int wr[3];
  for (int ax = 0; ax < 3; ++ax)
    wr[ax] = static_cast<int>(std::ceil(rc / g.dom.lengths[ax])) + 1;
  auto green_per = [&](Vec3 r) {
    for (int ax = 0; ax < 3; ++ax) {
      double l = g.dom.lengths[ax];
      r[ax] -= l * std::floor(r[ax] / l);
    }
    double val = interpolate_periodic(g, gfar, r);
    for (int w1 = -wr[0]; w1 <= wr[0]; ++w1)
      for (int w2 = -wr[1]; w2 <= wr[1]; ++w2)
        for (int w3 = -wr[2]; w3 <= wr[2]; ++w3) {
          Vec3 img{r.x + w1 * g.dom.lengths.x, r.y + w2 * g.dom.lengths.y,
                   r.z + w3 * g.dom.lengths.z};
          double rn = norm(img);
          if (rn < rc && rn > 0) val += std::erfc(rn / sq2sig) / (4 * kPi * rn);
        }
    return val;
  };

  // quadrature over segment pairs
  double acc = 0;
  for (int i = 0; i < ci.segment_count(); ++i) {
    Vec3 a = ci.segment_start(i);
    Vec3 da = ci.segment_end(i) - a;
    for (int j = 0; j < cj.segment_count(); ++j) {
      Vec3 b = cj.segment_start(j);
      Vec3 db = cj.segment_end(j) - b;
      double tt = dot(da, db);
      if (tt == 0) continue;
      for (int qi = 0; qi < Gauss4::n; ++qi)
        for (int qj = 0; qj < Gauss4::n; ++qj) {
          Vec3 r = (a + da * Gauss4::x[qi]) - (b + db * Gauss4::x[qj]);
          acc += Gauss4::w[qi] * Gauss4::w[qj] * tt * green_per(r);
        }
    }
  }
  return 8 * kPi * kPi * acc;
}

SelfInductance self_inductance_r3(const Curve& c, double core) {
  if (c.domain().periodic())
    throw std::invalid_argument("self_inductance_r3 is a free-space operation");
  double len = c.length();
  if (core < 2 * c.min_segment_length() * (1 - 1e-12) || core > len / 20 * (1 + 1e-12))
    throw std::invalid_argument("self_inductance_r3: core outside [2 min_seg, L/20]");

  auto raw_at = [&](double cutoff) {
    int m = static_cast<int>(std::ceil(12 * len / cutoff));
    Curve fine = resample_arclength(c, len / m);
    CurveFrames fr = build_frames(fine);
    double acc = 0;
    std::size_t n = fr.size();
    double spacing = len / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        Vec3 r = fr.point[i] - fr.point[j];
        double rn = norm(r);
        if (rn > cutoff + 2 * spacing) {
          acc += dot(fr.tangent[i], fr.tangent[j]) * fr.ds[i] * fr.ds[j] / rn;
        } else if (rn > cutoff - 2 * spacing) {
          // supersample cells straddling the excision boundary
          const int sub = 8;
          Vec3 ti0 = fr.point[i] - fr.tangent[i] * (fr.ds[i] / 2);
          Vec3 tj0 = fr.point[j] - fr.tangent[j] * (fr.ds[j] / 2);
          double part = 0;
          for (int a = 0; a < sub; ++a)
            for (int b = 0; b < sub; ++b) {
              Vec3 xa = ti0 + fr.tangent[i] * ((a + 0.5) / sub * fr.ds[i]);
              Vec3 xb = tj0 + fr.tangent[j] * ((b + 0.5) / sub * fr.ds[j]);
              double rr = norm(xa - xb);
              if (rr > cutoff) part += 1.0 / rr;
            }
          acc += dot(fr.tangent[i], fr.tangent[j]) * fr.ds[i] * fr.ds[j] * part /
                 (sub * sub);
        }
      }
    return acc;
  };

  SelfInductance out;
  out.core = core;
  out.raw = raw_at(core);
  out.value = out.raw - 2 * len * std::log(1.0 / core);
  double v2 = raw_at(2 * core) - 2 * len * std::log(1.0 / (2 * core));
  out.drift = std::abs(out.value - v2) / std::max(std::abs(out.value), 1e-300);
  if (out.drift > 0.05)
    throw std::runtime_error("self_inductance_r3: core drift exceeds 5% (resolution failure)");
  return out;
}

}  // namespace harmap
