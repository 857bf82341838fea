#ifndef HARMAP_ASYMPTOTICS_HPP
#define HARMAP_ASYMPTOTICS_HPP

#include <vector>

#include "harmap/potential.hpp"
#include "harmap/sectors.hpp"

namespace harmap {

/// Indicator of {dist > delta} on grid nodes (full-cell staircase).
struct TubeMask {
  double delta = 0;
  std::vector<std::uint8_t> outside;
  std::size_t outside_count = 0;
  double excluded_volume = 0;  // complement volume (the tube)
};
TubeMask tube_mask(const Grid& g, const std::vector<double>& dist, double delta);

/// Masked midpoint quadrature of |d*psi + omega|^2 with the three-term split.
struct TubeEnergy {
  double total = 0;
  double dd = 0;     // int |d*psi|^2
  double ww = 0;     // int |omega|^2
  double cross = 0;  // 2 int (d*psi, omega)
};
TubeEnergy tube_energy(const PotentialField& pot, const Sector& sector, double delta,
                       const std::vector<double>& dist);

/// Least squares E ~ c1 log(1/delta) + c0. Needs >= 5 samples spanning a
/// factor >= 4 in delta.
struct ExpansionFit {
  double c1 = 0, c0 = 0, residual = 0;
};
ExpansionFit fit_expansion(const std::vector<double>& deltas,
                           const std::vector<double>& energies);

/// log-log slope of ||dA||_{L^r(T_delta)} against delta. Cells close to
/// Gamma are refined (subcell midpoints) so the |z|^{-1} profile is resolved.
struct DecayResult {
  double slope = 0;
  std::vector<double> deltas;
  std::vector<double> norms;
};
DecayResult tube_norm_decay(const PotentialField& pot, double r,
                            const std::vector<double>& deltas,
                            const std::vector<double>& dist);

}  // namespace harmap

#endif
