#include "harmap/euclid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "harmap/util.hpp"

namespace harmap {

namespace {
constexpr double kTwoPi = 2 * std::numbers::pi;
}

WireSystem::WireSystem(std::vector<Curve> w, std::vector<double> i)
    : wires(std::move(w)), intensities(std::move(i)) {
  if (wires.size() != intensities.size())
    throw std::invalid_argument("wire/intensity count mismatch");
  for (const auto& c : wires)
    if (c.domain().periodic())
      throw std::invalid_argument("WireSystem lives in euclidean space");
  for (double in : intensities)
    if (!std::isfinite(in)) throw std::invalid_argument("intensity not finite");
}

Vec3 biot_savart_field(const WireSystem& sys, const Vec3& x) {
  Vec3 acc{0, 0, 0};
  for (std::size_t w = 0; w < sys.wires.size(); ++w) {
    const Curve& c = sys.wires[w];
    Vec3 part{0, 0, 0};
    for (int i = 0; i < c.segment_count(); ++i) {
      Vec3 a = c.segment_start(i);
      Vec3 d = c.segment_end(i) - a;
      double len = norm(d);
      Vec3 tau = d / len;
      Vec3 rel = x - a;
      double s0 = dot(rel, tau);
      Vec3 rho_vec = rel - tau * s0;
      double rho2 = norm2(rho_vec);
      if (rho2 < 1e-18 * len * len) {
        if (s0 > -1e-9 * len && s0 < len * (1 + 1e-9))
          throw std::domain_error("biot_savart_field evaluated on a wire");
        continue;  // on the segment axis, field vanishes
      }
      double r0 = norm(rel);
      double r1 = norm(x - (a + d));
      double bracket = (len - s0) / (rho2 * r1) + s0 / (rho2 * r0);
      part += cross(tau, rho_vec) * (0.5 * bracket);
    }
    acc += part * sys.intensities[w];
  }
  return acc;
}

double ampere_circulation(const WireSystem& sys, const Curve& loop,
                          int subdivisions_per_segment) {
  double acc = 0;
  for (int i = 0; i < loop.segment_count(); ++i) {
    Vec3 a = loop.segment_start(i);
    Vec3 d = loop.segment_end(i) - a;
    for (int e = 0; e < subdivisions_per_segment; ++e)
      for (int q = 0; q < Gauss4::n; ++q) {
        double t = (e + Gauss4::x[q]) / subdivisions_per_segment;
        acc += Gauss4::w[q] * dot(biot_savart_field(sys, a + d * t), d) /
               subdivisions_per_segment;
      }
  }
  return acc;
}

EnergyMatrix magnetic_energy_matrix(const WireSystem& sys, double core) {
  EnergyMatrix out;
  out.m = static_cast<int>(sys.wires.size());
  out.entries.assign(static_cast<std::size_t>(out.m) * out.m, 0.0);
  for (int i = 0; i < out.m; ++i)
    out.at(i, i) = self_inductance_r3(sys.wires[i], core).value;
  for (int i = 0; i < out.m; ++i)
    for (int j = i + 1; j < out.m; ++j) {
      double v = neumann_inductance(sys.wires[i], sys.wires[j]);
      out.at(i, j) = v;
      out.at(j, i) = v;
    }
  out.total = 0;
  for (int i = 0; i < out.m; ++i)
    for (int j = 0; j < out.m; ++j)
      out.total += sys.intensities[i] * sys.intensities[j] * out.at(i, j);
  return out;
}

}  // namespace harmap
