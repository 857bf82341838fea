#ifndef HARMAP_RENORM_HPP
#define HARMAP_RENORM_HPP

#include <vector>

#include "harmap/potential.hpp"

namespace harmap {

/// Renormalized interaction energy of the singular set.
///
/// Conventions (both exposed, see also neumann_inductance):
///  - "Green" convention: W is the constant term of the tube-excised field
///    energy, cross pair contribution 8 pi^2 oint oint G t.t'; in free space
///    this equals 2 pi * (Neumann inductance integral).
///  - "inductance" convention: the raw oint oint t.t'/|x-y| double integral.
struct RenormReport {
  double w_total = 0;                  // Green convention
  std::vector<double> self_terms;      // per component
  std::vector<double> cross_terms;     // pair (i<j), flattened row-major
  std::vector<double> offsets;         // rho samples used (units of length)
  double max_fit_residual = 0;         // worst extrapolation residual / spread
  bool under_resolved = false;         // residual > 5% of spread somewhere
  std::string convention = "green";
  double cross(int i, int j, int ncomp) const;
};

/// Diagonal desingularization: tangential A sampled at offsets rho over 8
/// normal directions, + log(rho), extrapolated linearly to rho -> 0;
/// W = 2 pi oint (extrapolated value) ds, split exactly into self and cross
/// parts via per-component potentials.
RenormReport renormalized_energy_torus(const PotentialField& pot,
                                       const std::vector<Curve>& curves,
                                       int threads = 1);

enum class GreenKind { free_space, periodic };

/// Mutual interaction of a disjoint pair as it enters W (Green convention,
/// full unordered-pair contribution 8 pi^2 oint oint G t.t').
/// Free space: equals 2 pi * neumann_inductance. Periodic: Ewald scalar
/// Green's function on the given grid.
double cross_interaction(const Curve& ci, const Curve& cj, GreenKind kind,
                         const Grid* grid = nullptr, double sigma = 0);

/// Neumann double integral oint oint t.t'/|x-y| ds ds' (inductance
/// convention; Appendix-style mutual term with unit intensities).
double neumann_inductance(const Curve& c1, const Curve& c2);

struct SelfInductance {
  double value = 0;  // compensated: raw(core) - 2 L log(1/core)
  double raw = 0;
  double core = 0;
  double drift = 0;  // |value(core) - value(2 core)| / |value|
};
/// Neumann self-integral with |x-y| > core excised plus the analytic
/// 2 L log(1/core) compensation. R^3 only.
SelfInductance self_inductance_r3(const Curve& c, double core);

}  // namespace harmap

#endif
