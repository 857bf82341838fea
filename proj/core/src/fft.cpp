#include "harmap/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

#include "harmap/util.hpp"

namespace harmap {

const double Gauss8::x[8] = {
    (1 - 0.9602898564975363) / 2, (1 - 0.7966664774136267) / 2,
    (1 - 0.5255324099163290) / 2, (1 - 0.1834346424956498) / 2,
    (1 + 0.1834346424956498) / 2, (1 + 0.5255324099163290) / 2,
    (1 + 0.7966664774136267) / 2, (1 + 0.9602898564975363) / 2};
const double Gauss8::w[8] = {0.1012285362903763 / 2, 0.2223810344533745 / 2,
                             0.3137066458778873 / 2, 0.3626837833783620 / 2,
                             0.3626837833783620 / 2, 0.3137066458778873 / 2,
                             0.2223810344533745 / 2, 0.1012285362903763 / 2};

const double Gauss4::x[4] = {(1 - 0.8611363115940526) / 2, (1 - 0.3399810435848563) / 2,
                             (1 + 0.3399810435848563) / 2, (1 + 0.8611363115940526) / 2};
const double Gauss4::w[4] = {0.3478548451374538 / 2, 0.6521451548625461 / 2,
                             0.6521451548625461 / 2, 0.3478548451374538 / 2};

LineFit fit_affine(const std::vector<double>& f, const std::vector<double>& y) {
  if (f.size() != y.size() || f.size() < 2)
    throw std::invalid_argument("fit_affine needs >= 2 samples");
  double n = static_cast<double>(f.size());
  double sf = 0, sy = 0, sff = 0, sfy = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    sf += f[i];
    sy += y[i];
    sff += f[i] * f[i];
    sfy += f[i] * y[i];
  }
  double den = n * sff - sf * sf;
  if (std::abs(den) < 1e-30 * n * std::max(1.0, sff))
    throw std::runtime_error("fit_affine: ill-conditioned sample spacing");
  LineFit out;
  out.a = (n * sfy - sf * sy) / den;
  out.b = (sy - out.a * sf) / n;
  double scale = 0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < f.size(); ++i)
    out.residual = std::max(out.residual,
                            std::abs(y[i] - out.a * f[i] - out.b) / std::max(scale, 1e-300));
  return out;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Grid::Grid(Domain domain, std::array<int, 3> res) : dom(domain), n(res) {
  if (dom.n == 2) n[2] = 1;
  for (int j = 0; j < dom.n; ++j) {
    if (n[j] < 16 || n[j] % 2 != 0)
      throw std::invalid_argument("grid resolution must be even and >= 16");
  }
}

Grid Grid::cubic(const Domain& d, int nres) {
  return Grid(d, {nres, nres, d.n == 2 ? 1 : nres});
}

double Grid::spacing(int j) const { return dom.lengths[j] / n[j]; }

double Grid::max_spacing() const {
  double h = 0;
  for (int j = 0; j < dom.n; ++j) h = std::max(h, spacing(j));
  return h;
}

double Grid::cell_volume() const {
  double v = 1;
  for (int j = 0; j < dom.n; ++j) v *= spacing(j);
  return v;
}

std::size_t Grid::size() const {
  return static_cast<std::size_t>(n[0]) * n[1] * n[2];
}

Vec3 Grid::node(int i1, int i2, int i3) const {
  return {i1 * spacing(0), i2 * spacing(1), dom.n == 2 ? 0.0 : i3 * spacing(2)};
}

double Grid::wavenumber(int j, int idx) const {
  int m = idx <= n[j] / 2 ? idx : idx - n[j];
  return 2 * std::numbers::pi * m / dom.lengths[j];
}

int Grid::mode(int j, int idx) const { return idx <= n[j] / 2 ? idx : idx - n[j]; }

namespace {

struct PlanKey {
  int n0, n1, n2, sign;
  bool operator==(const PlanKey& o) const {
    return n0 == o.n0 && n1 == o.n1 && n2 == o.n2 && sign == o.sign;
  }
};

// FFTW plan creation is not thread-safe; execution with the array-execute
// interface is.
std::mutex plan_mutex;
std::vector<std::pair<PlanKey, fftw_plan>> plan_cache;

fftw_plan get_plan(const Grid& g, int sign, fftw_complex* buf) {
  std::scoped_lock lk(plan_mutex);
  PlanKey key{g.n[0], g.n[1], g.n[2], sign};
  for (auto& [k, p] : plan_cache)
    if (k == key) return p;
  int rank = g.dom.n;
  int dims[3] = {g.n[0], g.n[1], g.n[2]};
  // storage is x-fastest; FFTW wants the last dimension contiguous
  int fdims[3];
  for (int j = 0; j < rank; ++j) fdims[j] = dims[rank - 1 - j];
  fftw_plan p = fftw_plan_dft(rank, fdims, buf, buf, sign,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p) throw std::runtime_error("fftw plan creation failed");
  plan_cache.emplace_back(key, p);
  return p;
}

}  // namespace

void fft_forward(const Grid& g, std::vector<cplx>& a) {
  if (a.size() != g.size()) throw std::invalid_argument("fft size mismatch");
  auto* buf = reinterpret_cast<fftw_complex*>(a.data());
  fftw_plan p = get_plan(g, FFTW_FORWARD, buf);
  fftw_execute_dft(p, buf, buf);
  double inv = 1.0 / static_cast<double>(g.size());
  for (auto& v : a) v *= inv;
}

void fft_backward(const Grid& g, std::vector<cplx>& a) {
  if (a.size() != g.size()) throw std::invalid_argument("fft size mismatch");
  auto* buf = reinterpret_cast<fftw_complex*>(a.data());
  fftw_plan p = get_plan(g, FFTW_BACKWARD, buf);
  fftw_execute_dft(p, buf, buf);
}

std::vector<cplx> to_spectral(const Grid& g, const std::vector<double>& nodal) {
  std::vector<cplx> a(nodal.begin(), nodal.end());
  fft_forward(g, a);
  return a;
}

std::vector<double> to_nodal(const Grid& g, std::vector<cplx> coeff) {
  fft_backward(g, coeff);
  std::vector<double> out(coeff.size());
  for (std::size_t i = 0; i < coeff.size(); ++i) out[i] = coeff[i].real();
  return out;
}

double spectral_norm2(const Grid& g, const std::vector<cplx>& coeff) {
  double s = 0;
  for (const auto& v : coeff) s += std::norm(v);
  return g.dom.volume() * s;
}

double nodal_norm2(const Grid& g, const std::vector<double>& nodal) {
  double s = 0;
  for (double v : nodal) s += v * v;
  return s * g.cell_volume();
}

}  // namespace harmap
