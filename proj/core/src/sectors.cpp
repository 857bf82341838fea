#include "harmap/sectors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <stdexcept>

#include "harmap/util.hpp"

namespace harmap {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2 * std::numbers::pi;
}  // namespace

std::vector<double> distance_field(const Grid& g, const std::vector<Curve>& curves) {
  std::vector<double> d(g.size());
  for (int i3 = 0; i3 < g.n[2]; ++i3)
    for (int i2 = 0; i2 < g.n[1]; ++i2)
      for (int i1 = 0; i1 < g.n[0]; ++i1)
        d[g.index(i1, i2, i3)] = distance_to_curves(g.node(i1, i2, i3), curves);
  return d;
}

std::vector<double> distance_field(const Grid& g, const std::vector<PointCharge>& charges) {
  std::vector<double> d(g.size());
  for (int i2 = 0; i2 < g.n[1]; ++i2)
    for (int i1 = 0; i1 < g.n[0]; ++i1) {
      Vec3 x = g.node(i1, i2, 0);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : charges) best = std::min(best, norm(g.dom.wrap(x - q.position)));
      d[g.index(i1, i2, 0)] = best;
    }
  return d;
}

double period_along_axis(const PotentialField& pot, int axis, const Vec3& base) {
  const Grid& g = pot.grid();
  Vec3 dir{0, 0, 0};
  dir[axis] = g.dom.lengths[axis];
  return pot.line_integral_b(base, dir, g.n[axis]);
}

PeriodDefect period_defects(const PotentialField& pot, const std::vector<Curve>& curves,
                            const std::vector<double>* dist_in) {
  const Grid& g = pot.grid();
  std::vector<double> dist_own;
  const std::vector<double>* dist = dist_in;
  if (!dist) {
    dist_own = g.dom.n == 2 ? distance_field(g, pot.charges()) : distance_field(g, curves);
    dist = &dist_own;
  }

  PeriodDefect out;
  out.loop_clearance = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < g.dom.n; ++axis) {
    // pick the axis line whose minimum clearance from Gamma is largest
    double best = -1;
    int b1 = 0, b2 = 0;
    int ja = (axis + 1) % 3, jb = (axis + 2) % 3;
    if (g.dom.n == 2) {
      ja = 1 - axis;
      jb = 2;  // degenerate
    }
    for (int ia = 0; ia < g.n[ja]; ++ia)
      for (int ib = 0; ib < (g.dom.n == 2 ? 1 : g.n[jb]); ++ib) {
        double dmin = std::numeric_limits<double>::infinity();
        for (int ic = 0; ic < g.n[axis]; ++ic) {
          int idx3[3] = {0, 0, 0};
          idx3[axis] = ic;
          idx3[ja] = ia;
          idx3[jb] = g.dom.n == 2 ? 0 : ib;
          dmin = std::min(dmin, (*dist)[g.index(idx3[0], idx3[1], idx3[2])]);
        }
        if (dmin > best) {
          best = dmin;
          b1 = ia;
          b2 = ib;
        }
      }
    if (best < 4 * g.max_spacing())
      throw std::runtime_error(
          "period_defects: no axis loop stays 4h clear of Gamma (curve too dense)");
    int idx3[3] = {0, 0, 0};
    idx3[ja] = b1;
    idx3[jb] = g.dom.n == 2 ? 0 : b2;
    Vec3 base = g.node(idx3[0], idx3[1], idx3[2]);
    if (axis == 0) out.loop_base = base;  // representative
    out.loop_clearance = std::min(out.loop_clearance, best);

    double p = period_along_axis(pot, axis, base);
    double w = std::round(p / kTwoPi);
    double red = p - kTwoPi * w;
    if (red <= -kPi) {
      red += kTwoPi;
      w -= 1;
    }
    out.raw[axis] = p;
    out.reduced[axis] = red;
    out.wraps[axis] = static_cast<int>(w);
  }
  return out;
}

std::vector<Sector> enumerate_sectors(const PeriodDefect& defect, int radius,
                                      const Grid& grid) {
  if (radius < 1) throw std::invalid_argument("enumerate_sectors: radius >= 1");
  int n = grid.dom.n;
  double vol = grid.dom.volume();
  std::vector<Sector> out;
  int lo[3] = {-radius, -radius, n == 3 ? -radius : 0};
  int hi[3] = {radius, radius, n == 3 ? radius : 0};
  for (int m3 = lo[2]; m3 <= hi[2]; ++m3)
    for (int m2 = lo[1]; m2 <= hi[1]; ++m2)
      for (int m1 = lo[0]; m1 <= hi[0]; ++m1) {
        Sector s;
        s.m = {m1, m2, m3};
        double e = 0;
        for (int j = 0; j < n; ++j) {
          s.omega[j] = (kTwoPi * s.m[j] - defect.reduced[j]) / grid.dom.lengths[j];
          e += s.omega[j] * s.omega[j];
        }
        s.energy = vol * e;
        out.push_back(s);
      }
  std::sort(out.begin(), out.end(), [](const Sector& a, const Sector& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return a.m < b.m;
  });
  return out;
}

std::vector<std::size_t> minimal_sectors(const std::vector<Sector>& sectors,
                                         double rel_tol) {
  std::vector<std::size_t> out;
  if (sectors.empty()) return out;
  double emin = sectors.front().energy;
  double scale = std::max(emin, sectors.back().energy * 1e-12);
  for (std::size_t i = 0; i < sectors.size(); ++i)
    if (sectors[i].energy <= emin + rel_tol * std::max(scale, 1e-300) + 1e-300)
      out.push_back(i);
  return out;
}

ReferenceMap build_reference_map(const PotentialField& pot, const Sector& sector,
                                 const std::vector<double>& dist) {
  const Grid& g = pot.grid();
  if (dist.size() != g.size())
    throw std::invalid_argument("build_reference_map: distance field size mismatch");
  ReferenceMap map(g);
  map.omega = sector.omega;
  map.theta.assign(g.size(), 0.0);
  map.u.assign(g.size(), {1.0, 0.0});
  map.mask.assign(g.size(), 0);

  double h = g.max_spacing();
  std::size_t root = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (dist[i] < h) map.mask[i] = 1;
    if (dist[i] > dist[root]) root = i;
  }

  auto decompose = [&](std::size_t idx, int out[3]) {
    out[0] = idx % g.n[0];
    out[1] = (idx / g.n[0]) % g.n[1];
    out[2] = idx / (static_cast<std::size_t>(g.n[0]) * g.n[1]);
  };
  auto neighbor = [&](std::size_t idx, int axis, int dir) {
    int c[3];
    decompose(idx, c);
    c[axis] = (c[axis] + dir + g.n[axis]) % g.n[axis];
    return g.index(c[0], c[1], c[2]);
  };
  auto edge_integral = [&](std::size_t from, int axis, int dir) {
    int c[3];
    decompose(from, c);
    Vec3 x = g.node(c[0], c[1], c[2]);
    Vec3 step{0, 0, 0};
    step[axis] = dir * g.spacing(axis);
    return pot.line_integral_b(x, step, 1) + sector.omega[axis] * step[axis];
  };

  // two-phase BFS: integrate the far region first so tree paths avoid the
  // core, then attach core nodes by single edges
  std::vector<std::uint8_t> visited(g.size(), 0);
  auto sweep = [&](double min_clearance) {
    std::queue<std::size_t> frontier;
    if (!visited[root]) {
      visited[root] = 1;
      frontier.push(root);
    }
    // re-seed from already visited nodes bordering unvisited ones
    for (std::size_t i = 0; i < g.size(); ++i)
      if (visited[i]) frontier.push(i);
    while (!frontier.empty()) {
      std::size_t cur = frontier.front();
      frontier.pop();
      for (int axis = 0; axis < g.dom.n; ++axis)
        for (int dir : {+1, -1}) {
          std::size_t nb = neighbor(cur, axis, dir);
          if (visited[nb] || dist[nb] < min_clearance) continue;
          map.theta[nb] = map.theta[cur] + edge_integral(cur, axis, dir);
          visited[nb] = 1;
          frontier.push(nb);
        }
    }
  };
  sweep(2 * h);
  sweep(0.0);

  for (std::size_t i = 0; i < g.size(); ++i)
    map.u[i] = std::polar(1.0, map.theta[i]);

  // holonomy quality over far plaquettes
  std::size_t bad = 0, total = 0;
  for (int j1 = 0; j1 < g.dom.n; ++j1)
    for (int j2 = j1 + 1; j2 < g.dom.n; ++j2) {
      auto res = jacobian_residues(g, map.u, j1, j2);
      for (std::size_t i = 0; i < g.size(); ++i) {
        std::size_t c1 = neighbor(i, j1, +1);
        std::size_t c2 = neighbor(i, j2, +1);
        std::size_t c3 = neighbor(c1, j2, +1);
        double dmin = std::min(std::min(dist[i], dist[c1]), std::min(dist[c2], dist[c3]));
        if (dmin < 2 * h) continue;
        ++total;
        if (std::abs(res.residue[i]) > 0.05 * kTwoPi) ++bad;
      }
    }
  map.holonomy_bad_fraction = total ? static_cast<double>(bad) / total : 0.0;
  return map;
}

PlaquetteResidues jacobian_residues(const Grid& g,
                                    const std::vector<std::complex<double>>& u, int j1,
                                    int j2) {
  PlaquetteResidues out;
  out.j1 = j1;
  out.j2 = j2;
  out.residue.assign(g.size(), 0.0);
  auto shifted = [&](std::size_t idx, int axis) {
    int c[3];
    c[0] = idx % g.n[0];
    c[1] = (idx / g.n[0]) % g.n[1];
    c[2] = idx / (static_cast<std::size_t>(g.n[0]) * g.n[1]);
    c[axis] = (c[axis] + 1) % g.n[axis];
    return g.index(c[0], c[1], c[2]);
  };
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::size_t a = i, b = shifted(i, j1), c = shifted(b, j2), d = shifted(i, j2);
    double r = std::arg(u[b] * std::conj(u[a])) + std::arg(u[c] * std::conj(u[b])) +
               std::arg(u[d] * std::conj(u[c])) + std::arg(u[a] * std::conj(u[d]));
    out.residue[i] = r;
  }
  return out;
}

}  // namespace harmap
