#ifndef HARMAP_SECTORS_HPP
#define HARMAP_SECTORS_HPP

#include <array>
#include <complex>
#include <vector>

#include "harmap/potential.hpp"

namespace harmap {

/// Circulation of d*psi along the fundamental torus cycles, measured on
/// axis-parallel loops through the node farthest from Gamma. Defined modulo
/// 2 pi; the raw line integral and the (-pi, pi] reduction are both kept.
struct PeriodDefect {
  Vec3 raw{0, 0, 0};
  Vec3 reduced{0, 0, 0};
  std::array<int, 3> wraps{0, 0, 0};
  Vec3 loop_base{0, 0, 0};     // base point of the measurement lines
  double loop_clearance = 0;   // min distance of the lines from Gamma
};

/// Distance to the scene at every grid node (used for masks, loops, roots).
std::vector<double> distance_field(const Grid& g, const std::vector<Curve>& curves);
std::vector<double> distance_field(const Grid& g, const std::vector<PointCharge>& charges);

PeriodDefect period_defects(const PotentialField& pot, const std::vector<Curve>& curves,
                            const std::vector<double>* dist = nullptr);
/// Raw circulation of d*psi along the axis line through `base`.
double period_along_axis(const PotentialField& pot, int axis, const Vec3& base);

/// Topological sector: lattice label m, harmonic form components
/// c_j = (2 pi m_j - p_j)/L_j and desingularized energy e = Vol sum c_j^2.
struct Sector {
  std::array<int, 3> m{0, 0, 0};
  Vec3 omega{0, 0, 0};
  double energy = 0;
};

/// All sectors with |m - nearest|_inf <= radius, sorted by energy.
std::vector<Sector> enumerate_sectors(const PeriodDefect& defect, int radius,
                                      const Grid& grid);
/// Indices of sectors whose energy ties the minimum within rel_tol.
std::vector<std::size_t> minimal_sectors(const std::vector<Sector>& sectors,
                                         double rel_tol = 1e-9);

/// Discrete reference map u_alpha = exp(i integral of d*psi + omega), built by
/// spanning-tree integration (far nodes first, core attached last).
struct ReferenceMap {
  Grid grid;
  Vec3 omega{0, 0, 0};
  std::vector<double> theta;          // accumulated phase
  std::vector<std::complex<double>> u;
  std::vector<std::uint8_t> mask;     // 1 = within h of Gamma (phase untrusted)
  double holonomy_bad_fraction = 0;   // far plaquettes with residue > 5% of 2pi
  ReferenceMap(const Grid& g) : grid(g) {}
};

ReferenceMap build_reference_map(const PotentialField& pot, const Sector& sector,
                                 const std::vector<double>& dist);

/// Plaquette phase residues of a unit-modulus nodal field, as the discrete
/// distributional Jacobian. plane is the (j1, j2) pair, base the node index.
struct PlaquetteResidues {
  int j1 = 0, j2 = 1;
  std::vector<double> residue;  // per base node, units of radians
};
PlaquetteResidues jacobian_residues(const Grid& g,
                                    const std::vector<std::complex<double>>& u,
                                    int j1, int j2);

}  // namespace harmap

#endif
