#include <doctest.h>

#include <cmath>
#include <numbers>

#include "harmap/renorm.hpp"
#include "harmap/util.hpp"
#include "oracles.hpp"

using namespace harmap;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_SUITE_BEGIN("renorm");

TEST_CASE("neumann inductance: coaxial circles match the AGM closed form") {
  Domain r3 = Domain::euclidean3();
  for (double d : {0.5, 1.0, 2.0}) {
    Curve c1 = presets::circle(r3, 1.0, {0, 0, 0}, 1024);
    Curve c2 = presets::circle(r3, 1.0, {0, 0, d}, 1024);
    double got = neumann_inductance(c1, c2);
    double want = oracles::coaxial_neumann(1.0, 1.0, d);
    CHECK(std::abs(got - want) / std::abs(want) < 1e-5);
    // translation invariance and reversal antisymmetry
    Vec3 shift{0.7, -0.2, 1.3};
    CHECK(neumann_inductance(c1.translated(shift), c2.translated(shift)) ==
          doctest::Approx(got).epsilon(1e-12));
    CHECK(neumann_inductance(c1, c2.reversed()) == doctest::Approx(-got).epsilon(1e-12));
  }
}

TEST_CASE("neumann inductance: perpendicular-plane symmetry nulls the integral") {
  Domain r3 = Domain::euclidean3();
  Curve a = presets::circle(r3, 1.0, {0, 0, 0}, 512, 2);  // xy-plane
  Curve b = presets::circle(r3, 1.0, {0, 0, 1.0}, 512, 1);  // xz-plane
  CHECK(std::abs(neumann_inductance(a, b)) < 1e-8);
}

TEST_CASE("neumann inductance: coincident points rejected") {
  Domain r3 = Domain::euclidean3();
  Curve a = presets::circle(r3, 1.0, {0, 0, 0}, 64);
  Curve b = presets::circle(r3, 1.0, {1.0, 0, 0}, 64);  // touches a at (1,0,0)? offset center
  // curves intersect; ensure some pair triggers the coincidence guard
  CHECK_THROWS_AS(neumann_inductance(a, a), std::domain_error);
  (void)b;
}

TEST_CASE("cross_interaction: free space scales the Neumann integral by 2 pi") {
  Domain r3 = Domain::euclidean3();
  Curve c1 = presets::circle(r3, 1.0, {0, 0, 0}, 512);
  Curve c2 = presets::circle(r3, 1.0, {0, 0, 1.5}, 512);
  double nm = neumann_inductance(c1, c2);
  CHECK(cross_interaction(c1, c2, GreenKind::free_space) ==
        doctest::Approx(2 * pi * nm).epsilon(1e-12));
  // bilinearity under doubled multiplicity is linearity of the integral
  CHECK(cross_interaction(c1, c2, GreenKind::free_space) * 2 ==
        doctest::Approx(cross_interaction(c1, c2, GreenKind::free_space) +
                        cross_interaction(c1, c2, GreenKind::free_space))
            .epsilon(1e-15));
}

TEST_CASE("cross_interaction: separation precondition") {
  Domain r3 = Domain::euclidean3();
  Curve c1 = presets::circle(r3, 1.0, {0, 0, 0}, 16);  // coarse: max segment 0.39
  Curve c2 = presets::circle(r3, 1.0, {0, 0, 0.8}, 16);
  CHECK_THROWS_AS(cross_interaction(c1, c2, GreenKind::free_space), std::invalid_argument);
}

TEST_CASE("cross_interaction periodic: orthogonal filament and ring do not interact") {
  double L = 2 * pi;
  Domain d = Domain::torus3(L, L, L);
  Grid g = Grid::cubic(d, 32);
  Vec3 c{L / 2, L / 2, L / 2};
  Curve ring = presets::circle(d, 1.0, c, 128);
  // z-wrapping straight filament through the ring center: tangents orthogonal
  std::vector<Vec3> fil;
  for (int i = 0; i < 16; ++i) fil.push_back({c.x, c.y, L * i / 16});
  Curve wire(d, fil);
  double val = cross_interaction(ring, wire, GreenKind::periodic, &g, 2 * g.max_spacing());
  CHECK(val == 0.0);  // perpendicular tangents: the kernel vanishes pointwise
}

TEST_CASE("cross_interaction periodic approaches free space for compact pairs") {
  double L = 4 * pi;
  Domain d = Domain::torus3(L, L, L);
  Grid g = Grid::cubic(d, 48);
  Vec3 c{L / 2, L / 2, L / 2};
  Curve c1 = presets::circle(d, 0.8, c, 256);
  Curve c2 = presets::circle(d, 0.8, c + Vec3{0, 0, 1.2}, 256);
  double per = cross_interaction(c1, c2, GreenKind::periodic, &g, 2 * g.max_spacing());
  double want = 2 * pi * oracles::coaxial_neumann(0.8, 0.8, 1.2);
  CHECK(std::abs(per - want) / std::abs(want) < 0.02);
}

TEST_CASE("renormalized energy: circle self term matches classical magnetostatics") {
  // hollow-core self inductance of a loop: W = 4 pi^2 a (ln(8a) - 2)
  double L = 2 * pi;
  Domain d = Domain::torus3(L, L, L);
  Grid g = Grid::cubic(d, 64);
  double h = g.max_spacing();
  double a = L / 6;
  Curve circ = presets::circle(d, a, {L / 2 + h / 2, L / 2 + h / 2, L / 2 + h / 2}, 512);
  auto pot = solve_potential(current_spectrum({circ}, g), 2 * h);
  auto rep = renormalized_energy_torus(pot, {circ});
  double classical = 4 * pi * pi * a * (std::log(8 * a) - 2);
  CHECK(rep.self_terms.size() == 1);
  CHECK(std::abs(rep.w_total - classical) / std::abs(classical) < 0.05);
  CHECK(rep.max_fit_residual < 0.05);
  CHECK_FALSE(rep.under_resolved);

  // orientation reversal of the whole scene leaves W unchanged
  auto pot_rev = solve_potential(current_spectrum({circ.reversed()}, g), 2 * h);
  auto rep_rev = renormalized_energy_torus(pot_rev, {circ.reversed()});
  CHECK(rep_rev.w_total == doctest::Approx(rep.w_total).epsilon(1e-6));
}

TEST_CASE("renormalized energy: pair decomposition, signs, and the dual route") {
  double L = 2 * pi;
  Domain d = Domain::torus3(L, L, L);
  Grid g = Grid::cubic(d, 48);
  double h = g.max_spacing();
  Vec3 c{L / 2 + h / 2, L / 2 + h / 2, L / 2 + h / 2};
  double a = 0.9, sep = 1.4;
  Curve c1 = presets::circle(d, a, c - Vec3{0, 0, sep / 2}, 256);
  Curve c2 = presets::circle(d, a, c + Vec3{0, 0, sep / 2}, 256);
  auto pot = solve_potential(current_spectrum({c1, c2}, g), 2 * h);
  auto rep = renormalized_energy_torus(pot, {c1, c2});

  // exact decomposition
  double sum = rep.self_terms[0] + rep.self_terms[1] + rep.cross_terms[0];
  CHECK(std::abs(rep.w_total - sum) < 1e-10 * std::abs(rep.w_total));
  // aligned coaxial rings attract: positive mutual term
  CHECK(rep.cross_terms[0] > 0);
  // cross term against the double-integral route
  double dbl = cross_interaction(c1, c2, GreenKind::periodic, &g, 2 * h);
  CHECK(std::abs(rep.cross_terms[0] - dbl) / std::abs(dbl) < 0.02);

  // reversing one component negates the cross term, keeps self terms
  auto pot_r = solve_potential(current_spectrum({c1, c2.reversed()}, g), 2 * h);
  auto rep_r = renormalized_energy_torus(pot_r, {c1, c2.reversed()});
  CHECK(rep_r.cross_terms[0] == doctest::Approx(-rep.cross_terms[0]).epsilon(1e-6));
  CHECK(rep_r.self_terms[0] == doctest::Approx(rep.self_terms[0]).epsilon(1e-6));
  CHECK(rep_r.self_terms[1] == doctest::Approx(rep.self_terms[1]).epsilon(1e-6));

  // translation invariance of the total
  Vec3 shift{3 * h, -2 * h, 5 * h};
  auto pot_t = solve_potential(
      current_spectrum({c1.translated(shift), c2.translated(shift)}, g), 2 * h);
  auto rep_t =
      renormalized_energy_torus(pot_t, {c1.translated(shift), c2.translated(shift)});
  CHECK(std::abs(rep_t.w_total - rep.w_total) / std::abs(rep.w_total) < 0.01);
}

TEST_CASE("self inductance in r3: compensation, scaling, reversal") {
  Domain r3 = Domain::euclidean3();
  double a = 1.0;
  Curve circ = presets::circle(r3, a, {0, 0, 0}, 1024);
  double len = circ.length();
  double core = len / 80;
  auto s = self_inductance_r3(circ, core);
  CHECK(s.drift < 0.02);
  // compensated value approaches the chord-cutoff closed form 4 pi a (ln(4a) - 2)
  CHECK(std::abs(s.value - 4 * pi * a * (std::log(4 * a) - 2)) /
            std::abs(4 * pi * a * (std::log(4 * a) - 2)) <
        0.02);

  // uncompensated integral grows like 2 L log(1/core)
  auto s2 = self_inductance_r3(circ, core / 2);
  double slope = (s2.raw - s.raw) / std::log(2.0);
  CHECK(std::abs(slope - 2 * len) / (2 * len) < 0.02);

  // reversal leaves a quadratic form unchanged
  auto srev = self_inductance_r3(circ.reversed(), core);
  CHECK(srev.value == doctest::Approx(s.value).epsilon(1e-12));

  // scaling law: value(lambda gamma, lambda core) = lambda value + 2 lambda L log lambda
  double lam = 1.7;
  Curve big = presets::circle(r3, lam * a, {0, 0, 0}, 1024);
  auto sl = self_inductance_r3(big, lam * core);
  double predicted = lam * s.value + 2 * lam * len * std::log(lam);
  CHECK(std::abs(sl.value - predicted) / std::abs(predicted) < 5e-3);

  // core preconditions
  CHECK_THROWS_AS(self_inductance_r3(circ, len / 10), std::invalid_argument);
  CHECK_THROWS_AS(self_inductance_r3(circ, circ.min_segment_length()),
                  std::invalid_argument);
}

TEST_SUITE_END();
