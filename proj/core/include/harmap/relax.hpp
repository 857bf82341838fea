#ifndef HARMAP_RELAX_HPP
#define HARMAP_RELAX_HPP

#include <vector>

#include "harmap/asymptotics.hpp"
#include "harmap/potential.hpp"
#include "harmap/sectors.hpp"

namespace harmap {

struct RelaxResult {
  std::array<int, 3> sector_m{0, 0, 0};
  double param = 0;        // delta | p | s
  double energy = 0;       // minimized energy
  double energy_zero = 0;  // zero-phase competitor energy
  int iterations = 0;
  bool converged = false;
  double grad_norm = 0;    // relative, at exit
};

/// min over phi of the masked quadratic  sum_{dist>delta} |D phi - ju_alpha|^2
/// with spectral derivatives; preconditioned CG, relative residual <= 1e-8.
/// The zero-phase competitor equals tube_energy by construction.
RelaxResult minimize_delta(const PotentialField& pot, const Sector& sector, double delta,
                           const std::vector<double>& dist);

struct IrlsOptions {
  double eps0 = 0;           // 0: choose from the data (rms of |ju|)
  double eps_factor = 10;    // annealing ratio per stage
  int stages = 9;            // eps0 -> 1e-8 eps0
  double energy_tol = 1e-9;  // relative energy change exit
  int max_inner = 60;
  int max_cg = 400;
};

/// Iteratively reweighted least squares for  int (|d phi - ju_alpha|^2 +
/// eps^2)^{p/2}  on the full torus (central differences, vortex core
/// saturates at the grid scale). Reported energy is the eps = 0 value.
RelaxResult minimize_p(const PotentialField& pot, const Sector& sector, double p,
                       const IrlsOptions& opts = {});

/// Spectral fractional seminorm  Vol sum_{k != 0} |k|^{2s} |u_hat|^2.
double fractional_seminorm(const Grid& g, const std::vector<std::complex<double>>& u,
                           double s);

/// Gradient of the seminorm with respect to the phase of u = e^{-i phi} u_ref;
/// exact in the discrete model (spectral multiplier paired with iu).
std::vector<double> fractional_phase_gradient(const Grid& g,
                                              const std::vector<std::complex<double>>& u,
                                              double s);

struct NcgOptions {
  double grad_tol = 1e-7;
  int max_iter = 500;
};

/// Nonlinear CG over phi of E_s(e^{-i phi} u_ref).
RelaxResult minimize_s(const ReferenceMap& ref, double s, const NcgOptions& opts = {});

enum class RelaxMethod { delta, p, s };

struct SweepEntry {
  Sector sector;
  RelaxResult result;
};
struct SweepReport {
  std::vector<SweepEntry> entries;         // sorted by minimized energy
  std::size_t minimal_index = 0;
  bool ordering_consistent = false;        // energy order matches e(u_alpha) order
};
SweepReport sector_sweep(const PotentialField& pot, const std::vector<Sector>& sectors,
                         RelaxMethod method, double parameter,
                         const std::vector<double>& dist, int threads = 1);

/// 2d polar-grid p-harmonic benchmark on the annulus B_1 \ B_delta with a
/// unit vortex; the minimized energy approaches 2 pi (1 - delta^{2-p})/(2-p).
struct AnnulusResult {
  double energy = 0;
  int iterations = 0;
  bool converged = false;
};
AnnulusResult annulus_p_benchmark(int n, double delta, double p,
                                  double perturbation = 0.3);

}  // namespace harmap

#endif
