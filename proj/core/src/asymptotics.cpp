#include "harmap/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "harmap/util.hpp"

namespace harmap {

TubeMask tube_mask(const Grid& g, const std::vector<double>& dist, double delta) {
  if (dist.size() != g.size()) throw std::invalid_argument("distance field size mismatch");
  TubeMask m;
  m.delta = delta;
  m.outside.assign(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (dist[i] > delta) {
      m.outside[i] = 1;
      ++m.outside_count;
    }
  m.excluded_volume = (g.size() - m.outside_count) * g.cell_volume();
  return m;
}

TubeEnergy tube_energy(const PotentialField& pot, const Sector& sector, double delta,
                       const std::vector<double>& dist) {
  const Grid& g = pot.grid();
  double h = g.max_spacing();
  if (delta < 4 * h * (1 - 1e-9))
    throw std::invalid_argument("tube_energy: delta below 4h, core under-resolved");
  if (g.dom.periodic() && delta > g.dom.min_period() / 8 * (1 + 1e-9))
    throw std::invalid_argument("tube_energy: delta above L/8");

  const auto& b = pot.b_nodal();
  TubeEnergy e;
  double cv = g.cell_volume();
  std::size_t outside = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (dist[i] <= delta) continue;
    ++outside;
    Vec3 bv{b[0][i], b[1][i], b[2][i]};
    e.dd += norm2(bv);
    e.cross += 2 * dot(bv, sector.omega);
  }
  e.dd *= cv;
  e.cross *= cv;
  e.ww = norm2(sector.omega) * outside * cv;
  e.total = e.dd + e.ww + e.cross;
  return e;
}

ExpansionFit fit_expansion(const std::vector<double>& deltas,
                           const std::vector<double>& energies) {
  if (deltas.size() != energies.size() || deltas.size() < 5)
    throw std::invalid_argument("fit_expansion needs >= 5 samples");
  auto [lo, hi] = std::minmax_element(deltas.begin(), deltas.end());
  if (*hi / *lo < 4 * (1 - 1e-9))
    throw std::invalid_argument("fit_expansion: ill-conditioned sample spacing "
                                "(delta span below a factor 4)");
  std::vector<double> logs(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) logs[i] = std::log(1.0 / deltas[i]);
  LineFit f = fit_affine(logs, energies);
  return {f.a, f.b, f.residual};
}

DecayResult tube_norm_decay(const PotentialField& pot, double r,
                            const std::vector<double>& deltas,
                            const std::vector<double>& dist) {
  if (r < 1 || r >= 2) throw std::invalid_argument("tube_norm_decay: r in [1, 2)");
  const Grid& g = pot.grid();
  double h = g.max_spacing();
  double refine_band = 3 * h;
  const int sub = 4;

  // |dA|^r contribution of every cell within the largest tube, refined near
  // the core where the integrand follows the 1/dist profile
  double dmax = *std::max_element(deltas.begin(), deltas.end());
  std::vector<std::pair<double, double>> cells;  // (node distance, contribution)
  double cv = g.cell_volume();
  for (int i3 = 0; i3 < g.n[2]; ++i3)
    for (int i2 = 0; i2 < g.n[1]; ++i2)
      for (int i1 = 0; i1 < g.n[0]; ++i1) {
        std::size_t idx = g.index(i1, i2, i3);
        if (dist[idx] > dmax) continue;
        Vec3 x = g.node(i1, i2, i3);
        double contrib = 0;
        if (dist[idx] < refine_band) {
          int s3 = g.dom.n == 2 ? 1 : sub;
          for (int a = 0; a < sub; ++a)
            for (int b = 0; b < sub; ++b)
              for (int c = 0; c < s3; ++c) {
                Vec3 y{x.x + ((a + 0.5) / sub - 0.5) * g.spacing(0),
                       x.y + ((b + 0.5) / sub - 0.5) * g.spacing(1),
                       g.dom.n == 2 ? 0.0 : x.z + ((c + 0.5) / sub - 0.5) * g.spacing(2)};
                double mag;
                try {
                  mag = norm(pot.dstar_psi(y));
                } catch (const std::domain_error&) {
                  continue;  // subcell point hit the singular set
                }
                contrib += std::pow(mag, r) * cv / (sub * sub * s3);
              }
        } else {
          const auto& b = pot.b_nodal();
          Vec3 bv{b[0][idx], b[1][idx], b[2][idx]};
          contrib = std::pow(norm(bv), r) * cv;
        }
        cells.emplace_back(dist[idx], contrib);
      }

  DecayResult out;
  out.deltas = deltas;
  std::vector<double> lg_d, lg_n;
  for (double d : deltas) {
    double acc = 0;
    for (const auto& [cd, cc] : cells)
      if (cd <= d) acc += cc;
    double nrm = std::pow(acc, 1.0 / r);
    out.norms.push_back(nrm);
    lg_d.push_back(std::log(d));
    lg_n.push_back(std::log(nrm));
  }
  out.slope = fit_affine(lg_d, lg_n).a;
  return out;
}

}  // namespace harmap
