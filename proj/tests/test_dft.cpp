#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "ucplab/dft.hpp"
#include "ucplab/grid.hpp"
#include "ucplab/hamiltonian.hpp"
#include "ucplab/rng.hpp"

using namespace ucplab;

namespace {

const PotentialSpec kNoPair = PotentialSpec::constant(0.0);

GridFunction random_state(const Grid& g, std::uint64_t seed) {
  Rng rng(seed);
  GridFunction psi(g);
  for (auto& z : psi.v) z = {rng.normal(), rng.normal()};
  double nrm = norm_l2(psi);
  for (auto& z : psi.v) z /= nrm;
  return psi;
}

}  // namespace

TEST_CASE("density integrates to N for a normalized state") {
  for (int N : {1, 2, 3}) {
    Grid g = make_grid(1, N, 16, 2.0, Boundary::periodic);
    GridFunction psi = random_state(g, 100 + N);
    DensityProfile rho = one_particle_density(psi);
    double mass = 0.0;
    for (double r : rho.rho) mass += r;
    mass *= rho.grid1.cell_volume();
    CHECK(mass == doctest::Approx(double(N)).epsilon(1e-12));
  }
}

TEST_CASE("density pairing reproduces the expectation of a one-body sum") {
  Grid g = make_grid(1, 2, 16, 2.0, Boundary::periodic);
  GridFunction psi = random_state(g, 55);
  DensityProfile rho = one_particle_density(psi);

  // f(x) = cos(pi x / L): compare h sum rho f with <psi, sum_i f(x_i) psi>.
  Grid g1 = rho.grid1;
  std::vector<double> f(g1.points());
  int idx[kMaxAxes];
  for (std::uint64_t p = 0; p < g1.points(); ++p) {
    g1.decode(p, idx);
    f[p] = std::cos(std::numbers::pi * g1.coord(idx[0]) / g1.L);
  }
  double lhs = density_pair(rho, f);

  double rhs = 0.0;
  for (std::uint64_t p = 0; p < g.points(); ++p) {
    g.decode(p, idx);
    double s = 0.0;
    for (int i = 0; i < g.N; ++i)
      s += std::cos(std::numbers::pi * g.coord(idx[i]) / g.L);
    rhs += s * std::norm(psi.v[p]);
  }
  rhs *= g.cell_volume();
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("single-particle density is the squared amplitude") {
  Grid g = make_grid(2, 1, 16, 1.5, Boundary::periodic);
  GridFunction psi = random_state(g, 77);
  DensityProfile rho = one_particle_density(psi);
  for (std::uint64_t p = 0; p < g.points(); ++p)
    CHECK(rho.rho[p] == doctest::Approx(std::norm(psi.v[p])).epsilon(1e-13));
}

TEST_CASE("non-interacting product states have additive densities") {
  // w = 0: the two-particle ground state is a product, so its density is
  // twice the one-particle ground density.
  Grid g2 = make_grid(1, 2, 32, 4.0, Boundary::periodic);
  Grid g1 = make_grid(1, 1, 32, 4.0, Boundary::periodic);
  PotentialSpec v = PotentialSpec::harmonic(1.0);

  Hamiltonian H2 = build_hamiltonian(v, kNoPair, g2, true);
  Hamiltonian H1 = build_hamiltonian(v, kNoPair, g1, true);
  SpectralResult r2 = solve_ground(H2.op, 1, 1e-10, 5);
  SpectralResult r1 = solve_ground(H1.op, 1, 1e-10, 5);
  REQUIRE(r2.converged);
  REQUIRE(r1.converged);

  DensityProfile rho2 = one_particle_density(r2.eigenvectors[0]);
  double worst = 0.0;
  for (std::uint64_t p = 0; p < g1.points(); ++p) {
    double one = std::norm(r1.eigenvectors[0].v[p]);
    worst = std::max(worst, std::abs(rho2.rho[p] - 2.0 * one));
  }
  CHECK(worst < 1e-7);
  CHECK(r2.eigenvalues[0] ==
        doctest::Approx(2.0 * r1.eigenvalues[0]).epsilon(1e-8));
}

TEST_CASE("shifted potentials: same density, energy moves by N times the shift") {
  Grid g = make_grid(1, 2, 32, 4.0, Boundary::periodic);
  PotentialSpec v1 = PotentialSpec::harmonic(1.0);
  PotentialSpec v2 = PotentialSpec::sum({v1, PotentialSpec::constant(3.0)});
  PotentialSpec w = PotentialSpec::gaussian_well(0.4, 1.0);

  HKReport rep = hk_verify(v1, v2, w, g, 1e-9, 21);
  REQUIRE(rep.converged);
  CHECK(rep.density_gap_l1 < 1e-8);
  CHECK(rep.E2 - rep.E1 == doctest::Approx(6.0).epsilon(1e-8));
  CHECK(rep.recovered_c == doctest::Approx(3.0).epsilon(1e-7));
  CHECK(rep.c_formula == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(rep.identity_gap < 1e-7);
  CHECK(rep.residual_weighted < 1e-6);
  CHECK(rep.mask_fraction > 0.5);
}

TEST_CASE("genuinely different potentials separate in density") {
  Grid g = make_grid(1, 2, 32, 4.0, Boundary::periodic);
  PotentialSpec v1 = PotentialSpec::harmonic(1.0);
  // double well: harmonic plus a central barrier
  PotentialSpec v2 = PotentialSpec::sum(
      {PotentialSpec::harmonic(1.0), PotentialSpec::gaussian_well(-6.0, 0.7)});
  PotentialSpec w = PotentialSpec::gaussian_well(0.4, 1.0);

  HKReport rep = hk_verify(v1, v2, w, g, 1e-9, 21);
  REQUIRE(rep.converged);
  CHECK(rep.density_gap_l1 > 1e-2);
  CHECK(rep.residual_weighted > 1e-3);
  // first-order bound: E1 <= <psi2, H1 psi2> strictly here
  CHECK(rep.cross_energy_gap_1 > 0.0);
  CHECK(rep.cross_energy_gap_2 > 0.0);
}

TEST_CASE("energy difference identity holds against the paired density") {
  Grid g = make_grid(1, 2, 32, 4.0, Boundary::periodic);
  PotentialSpec v1 = PotentialSpec::harmonic(1.0);
  PotentialSpec v2 = PotentialSpec::sum(
      {PotentialSpec::harmonic(1.0), PotentialSpec::constant(-1.3)});
  HKReport rep = hk_verify(v1, v2, kNoPair, g, 1e-9, 33);
  REQUIRE(rep.converged);
  // For a pure shift the first-order identity is exact:
  // E1 - E2 = integral rho (v1 - v2) = -c N.
  CHECK(rep.identity_gap < 1e-8);
  CHECK(rep.recovered_c == doctest::Approx(-1.3).epsilon(1e-7));
}
