#ifndef HARMAP_EUCLID_HPP
#define HARMAP_EUCLID_HPP

#include <vector>

#include "harmap/geometry.hpp"
#include "harmap/renorm.hpp"

namespace harmap {

/// Wires with current intensities in R^3. Normalization: Delta A = 2 pi I
/// [[gamma]], so a unit-intensity wire gives Ampere circulation 2 pi. To map
/// to SI magnetostatics multiply fields by mu0 I / (2 pi).
struct WireSystem {
  std::vector<Curve> wires;
  std::vector<double> intensities;

  WireSystem() = default;
  WireSystem(std::vector<Curve> w, std::vector<double> i);
};

/// B = *dA at a point via per-segment analytic free-space kernels.
Vec3 biot_savart_field(const WireSystem& sys, const Vec3& x);

/// Line integral of the field around a closed loop; equals
/// 2 pi sum_j I_j link(loop, gamma_j) up to quadrature error.
double ampere_circulation(const WireSystem& sys, const Curve& loop,
                          int subdivisions_per_segment = 4);

struct EnergyMatrix {
  int m = 0;
  std::vector<double> entries;  // row-major m x m, Neumann (inductance) convention
  double total = 0;             // I^T M I
  double& at(int i, int j) { return entries[i * m + j]; }
  double at(int i, int j) const { return entries[i * m + j]; }
};

/// Diagonal: renormalized self-inductances at the given core; off-diagonal:
/// Neumann integrals. Symmetric by construction.
EnergyMatrix magnetic_energy_matrix(const WireSystem& sys, double core);

}  // namespace harmap

#endif
