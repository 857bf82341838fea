#ifndef HARMAP_POTENTIAL_HPP
#define HARMAP_POTENTIAL_HPP

#include <array>
#include <memory>
#include <vector>

#include "harmap/fft.hpp"
#include "harmap/geometry.hpp"

namespace harmap {

/// One straight source piece of the singular current.
struct SourceSegment {
  Vec3 a;    // start
  Vec3 d;    // end - start
  Vec3 tau;  // unit tangent
  double len = 0;
};

/// Exact Fourier coefficients of the vector-valued current [[Gamma]],
/// normalized by the torus volume. Closed loops satisfy k.c(k) = 0 per mode.
struct CurrentSpectrum {
  Grid grid;
  std::array<std::vector<cplx>, 3> c;
  std::vector<SourceSegment> segments;   // n = 3 sources
  std::vector<PointCharge> charges;      // n = 2 sources

  /// max_k |k.c(k)| / max_k |k||c(k)| — telescoping exactness of closed loops
  double closedness_residual() const;
  /// k = 0 coefficient; zero iff the scene is null-homologous
  Vec3 mean_current() const;
};

CurrentSpectrum current_spectrum(const std::vector<Curve>& curves, const Grid& grid,
                                 int threads = 1);
CurrentSpectrum current_spectrum(const std::vector<PointCharge>& charges,
                                 const Grid& grid);

/// Ewald-split solution of  Delta A = 2 pi [[Gamma]]  (positive-spectrum
/// Laplacian, harmonic k = 0 mode projected out).
///
/// Far field: spectral, Gaussian filter e^{-sigma^2 |k|^2 / 2}.
/// Near field: free-space erfc-complement kernels summed over the periodic
/// images within reach, split as (exact line kernel) - (smooth erf part), so
/// that far + near reproduces the unfiltered solution at any point.
class PotentialField {
 public:
  const Grid& grid() const { return grid_; }
  double sigma() const { return sigma_; }

  /// A evaluated anywhere (far interpolation + near analytic kernels).
  Vec3 vector_potential(const Vec3& x) const;
  /// The 1-form b = d*psi = *dA (curl of A). Throws on the singular set.
  Vec3 dstar_psi(const Vec3& x) const;

  /// Cached exact nodal values of b (far nodal + near correction).
  const std::array<std::vector<double>, 3>& b_nodal() const;
  const std::array<std::vector<double>, 3>& a_far_nodal() const { return a_far_; }
  const std::array<std::vector<cplx>, 3>& a_far_spectral() const { return a_hat_; }

  /// |dA| at a point; equals |b| for the 2-form dA on a flat 3-torus.
  double da_magnitude(const Vec3& x) const { return norm(dstar_psi(x)); }

  const std::vector<SourceSegment>& segments() const { return segments_; }
  const std::vector<PointCharge>& charges() const { return charges_; }

  /// line integral of b along the straight path x0 -> x0 + dir (Gauss rule
  /// per sub-edge); used for circulations and period defects
  double line_integral_b(const Vec3& x0, const Vec3& dir, int subdivisions) const;
  /// circulation of b around a closed polyline loop
  double circulation(const Curve& loop, int subdivisions_per_segment = 4) const;

  friend PotentialField solve_potential(const CurrentSpectrum& current, double sigma,
                                        int threads);

 private:
  PotentialField(Grid g, double sigma) : grid_(g), sigma_(sigma) {}
  Vec3 near_a(const Vec3& x) const;
  Vec3 near_b(const Vec3& x) const;

  Grid grid_;
  double sigma_;
  double near_cutoff_ = 0;
  std::vector<SourceSegment> segments_;
  std::vector<PointCharge> charges_;
  // periodic images pruned to those reachable from the fundamental cell
  struct NearSegment {
    Vec3 a, d, tau, mid;
    double len, reach2;
  };
  std::vector<NearSegment> near_segments_;
  std::vector<PointCharge> near_charges_;
  std::array<std::vector<cplx>, 3> a_hat_;   // filtered spectral A
  std::array<std::vector<double>, 3> a_far_; // nodal far A
  std::array<std::vector<double>, 3> b_far_; // nodal far b
  mutable std::array<std::vector<double>, 3> b_nodal_;  // lazy exact nodal b
  mutable bool b_nodal_ready_ = false;
  int threads_ = 1;
};

/// sigma must lie in [h, 4h]. Throws on nonzero scene homology
/// (admissibility: Gamma must bound).
PotentialField solve_potential(const CurrentSpectrum& current, double sigma,
                               int threads = 1);

struct HodgeParts {
  std::vector<double> phi;                      // zero-mean potential of d(phi)
  std::array<std::vector<double>, 3> exact;     // d(phi)
  std::array<std::vector<double>, 3> coexact;   // d* part
  Vec3 harmonic;                                // constant form
};
HodgeParts hodge_decompose(const Grid& g, const std::array<std::vector<double>, 3>& form);

/// Band-limited smooth test form with analytic values and curls; the
/// pseudo-random family used by stokes_check.
class TestForm {
 public:
  TestForm(const Domain& dom, unsigned seed, int max_mode = 2, int terms = 12);
  static TestForm constant(const Vec3& c);
  Vec3 value(const Vec3& x) const;
  Vec3 curl(const Vec3& x) const;

 private:
  TestForm() = default;
  struct Term {
    Vec3 amp;
    Vec3 k;
    double phase;
  };
  Vec3 offset_{0, 0, 0};
  std::vector<Term> terms_;
};

struct StokesResult {
  double boundary = 0;  // int_{dT_delta} alpha ^ *dA
  double volume = 0;    // int_{T_delta} (d alpha, dA)
  double gamma = 0;     // -2 pi int_Gamma alpha
  double residual = 0;  // |boundary - volume - gamma| / max scale
};

/// Checks the tube-boundary identity for a single smooth curve; quadrature in
/// tube coordinates with the exact Jacobian rho (1 - rho <kappa, nu>).
StokesResult stokes_check(const PotentialField& pot, const Curve& curve, double delta,
                          const TestForm& form);
std::vector<StokesResult> stokes_check_batch(const PotentialField& pot, const Curve& curve,
                                             double delta,
                                             const std::vector<TestForm>& forms);

}  // namespace harmap

#endif
