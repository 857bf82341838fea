#ifndef HARMAP_FFT_HPP
#define HARMAP_FFT_HPP

#include <array>
#include <complex>
#include <numbers>
#include <vector>

#include "harmap/geometry.hpp"

namespace harmap {

using cplx = std::complex<double>;

/// Uniform periodic grid. n = 2 domains use n[2] = 1 (x3-invariant slice),
/// so all index arithmetic is shared between dimensions.
/// Storage layout: index = i1 + n1*(i2 + n2*i3)  (x-fastest).
struct Grid {
  Domain dom;
  std::array<int, 3> n{16, 16, 16};

  Grid(Domain domain, std::array<int, 3> res);
  static Grid cubic(const Domain& d, int nres);

  double spacing(int j) const;
  double max_spacing() const;
  double cell_volume() const;
  std::size_t size() const;
  std::size_t index(int i1, int i2, int i3) const {
    return static_cast<std::size_t>(i1) + n[0] * (static_cast<std::size_t>(i2) +
                                                  static_cast<std::size_t>(n[1]) * i3);
  }
  Vec3 node(int i1, int i2, int i3) const;
  /// physical wavenumber 2*pi*m/L for storage index idx (wrap-around order)
  double wavenumber(int j, int idx) const;
  int mode(int j, int idx) const;
};

/// Convention: f(x) = sum_k fhat(k) e^{i k.x},  fhat = (1/Ntot) sum_x f e^{-i k.x}.
/// With this normalization  int |f|^2 = Vol * sum_k |fhat|^2  (Parseval).
void fft_forward(const Grid& g, std::vector<cplx>& inout);
void fft_backward(const Grid& g, std::vector<cplx>& inout);
std::vector<cplx> to_spectral(const Grid& g, const std::vector<double>& nodal);
std::vector<double> to_nodal(const Grid& g, std::vector<cplx> coeff);

double spectral_norm2(const Grid& g, const std::vector<cplx>& coeff);
double nodal_norm2(const Grid& g, const std::vector<double>& nodal);

/// Periodic cubic (Catmull-Rom) interpolation of a nodal field.
double interpolate_periodic(const Grid& g, const std::vector<double>& f, const Vec3& x);

}  // namespace harmap

#endif
