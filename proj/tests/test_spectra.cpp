#include <doctest.h>

#include <cmath>
#include <vector>

#include "ucplab/errors.hpp"
#include "ucplab/grid.hpp"
#include "ucplab/hamiltonian.hpp"
#include "ucplab/rng.hpp"
#include "ucplab/spectra.hpp"

using namespace ucplab;

namespace {

const PotentialSpec kNoPair = PotentialSpec::constant(0.0);

double overlap(const GridFunction& a, const GridFunction& b) {
  return std::abs(inner(a, b)) / (norm_l2(a) * norm_l2(b));
}

}  // namespace

TEST_CASE("harmonic oscillator levels match the closed-form ladder") {
  // H = -d^2/dx^2 + x^2 has eigenvalues 2n + 1.
  Grid g = make_grid(1, 1, 256, 10.0, Boundary::periodic);
  Hamiltonian H = build_hamiltonian(PotentialSpec::harmonic(1.0), kNoPair, g, true);
  Operator prec = kinetic_preconditioner(g, true, 1.0);
  SpectralResult r = solve_ground(H.op, 3, 1e-9, 11, 600, &prec);
  REQUIRE(r.converged);
  const double expected[3] = {1.0, 3.0, 5.0};
  for (int j = 0; j < 3; ++j)
    CHECK(r.eigenvalues[j] == doctest::Approx(expected[j]).epsilon(1e-7));
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("iterative solver agrees with the dense route") {
  Grid g = make_grid(1, 1, 64, 5.0, Boundary::dirichlet_box);
  Hamiltonian H = build_hamiltonian(PotentialSpec::gaussian_well(4.0, 1.0),
                                    kNoPair, g, /*spectral=*/false);
  SpectralResult it = solve_ground(H.op, 2, 1e-10, 3);
  SpectralResult dn = dense_oracle(H.op, 2);
  REQUIRE(it.converged);
  for (int j = 0; j < 2; ++j)
    CHECK(it.eigenvalues[j] ==
          doctest::Approx(dn.eigenvalues[j]).epsilon(1e-9));
  CHECK(overlap(it.eigenvectors[0], dn.eigenvectors[0]) > 1.0 - 1e-8);
}

TEST_CASE("dense route: trace equals the eigenvalue sum") {
  Grid g = make_grid(1, 1, 48, 4.0, Boundary::dirichlet_box);
  Hamiltonian H =
      build_hamiltonian(PotentialSpec::harmonic(0.7), kNoPair, g, false);
  SpectralResult dn = dense_oracle(H.op, 2);
  double sum = 0.0;
  for (double e : dn.eigenvalues) sum += e;
  CHECK(sum == doctest::Approx(dn.trace).epsilon(1e-10));
}

TEST_CASE("computed eigenvectors are orthonormal in the grid inner product") {
  Grid g = make_grid(1, 1, 128, 6.0, Boundary::periodic);
  Hamiltonian H =
      build_hamiltonian(PotentialSpec::harmonic(1.0), kNoPair, g, true);
  SpectralResult r = solve_ground(H.op, 3, 1e-9, 17);
  REQUIRE(r.converged);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j <= i; ++j) {
      complex s = inner(r.eigenvectors[i], r.eigenvectors[j]);
      double want = (i == j) ? 1.0 : 0.0;
      CHECK(std::abs(s - want) < 1e-10);
    }
  }
}

TEST_CASE("ground energy is a lower bound for random trial states") {
  Grid g = make_grid(1, 1, 64, 5.0, Boundary::periodic);
  Hamiltonian H = build_hamiltonian(PotentialSpec::soft_coulomb(1.0, 0.5),
                                    kNoPair, g, true);
  SpectralResult r = solve_ground(H.op, 1, 1e-10, 23);
  REQUIRE(r.converged);
  Rng rng(99);
  for (int t = 0; t < 5; ++t) {
    GridFunction chi(g);
    for (auto& z : chi.v) z = {rng.normal(), rng.normal()};
    double nrm = norm_l2(chi);
    for (auto& z : chi.v) z /= nrm;
    double ray = inner(chi, H.op.apply(chi)).real();
    CHECK(ray >= r.eigenvalues[0] - 1e-10 * std::abs(r.eigenvalues[0]));
  }
}

TEST_CASE("spectrum is covariant under a constant shift") {
  Grid g = make_grid(1, 1, 64, 5.0, Boundary::periodic);
  PotentialSpec v = PotentialSpec::gaussian_well(2.0, 1.5);
  PotentialSpec vs = PotentialSpec::sum({v, PotentialSpec::constant(3.0)});
  Hamiltonian H0 = build_hamiltonian(v, kNoPair, g, true);
  Hamiltonian H1 = build_hamiltonian(vs, kNoPair, g, true);
  SpectralResult r0 = solve_ground(H0.op, 2, 1e-10, 31);
  SpectralResult r1 = solve_ground(H1.op, 2, 1e-10, 31);
  REQUIRE(r0.converged);
  REQUIRE(r1.converged);
  for (int j = 0; j < 2; ++j)
    CHECK(r1.eigenvalues[j] ==
          doctest::Approx(r0.eigenvalues[j] + 3.0).epsilon(1e-9));
  CHECK(overlap(r0.eigenvectors[0], r1.eigenvectors[0]) > 1.0 - 1e-10);
}

TEST_CASE("a symmetric level crossing trips the degeneracy flag") {
  // Isotropic 2D oscillator: levels 2, 4, 4, 6...; asking for the first two
  // states puts the edge of a degenerate pair inside the probed block.
  Grid g = make_grid(2, 1, 32, 6.0, Boundary::periodic);
  Hamiltonian H =
      build_hamiltonian(PotentialSpec::harmonic(1.0), kNoPair, g, true);
  SpectralResult r = solve_ground(H.op, 2, 1e-8, 41);
  REQUIRE(r.converged);
  CHECK(r.eigenvalues[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(r.eigenvalues[1] == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(r.degenerate);
}

TEST_CASE("phase convention pins the largest component positive real") {
  Grid g = make_grid(1, 1, 64, 5.0, Boundary::periodic);
  Hamiltonian H =
      build_hamiltonian(PotentialSpec::harmonic(1.0), kNoPair, g, true);
  SpectralResult a = solve_ground(H.op, 1, 1e-10, 1);
  SpectralResult b = solve_ground(H.op, 1, 1e-10, 2);  // different seed
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  // same state, same sign, regardless of the random start
  double diff = 0.0;
  for (std::size_t p = 0; p < a.eigenvectors[0].v.size(); ++p)
    diff = std::max(
        diff, std::abs(a.eigenvectors[0].v[p] - b.eigenvectors[0].v[p]));
  CHECK(diff < 1e-6);
}

TEST_CASE("ground state of a real stencil operator is strictly positive") {
  Grid g = make_grid(1, 2, 24, 4.0, Boundary::dirichlet_box);
  PotentialSpec w = PotentialSpec::soft_coulomb(-0.3, 1.0);
  Hamiltonian H = build_hamiltonian(PotentialSpec::harmonic(0.5), w, g,
                                    /*spectral=*/false);
  SpectralResult r = solve_ground(H.op, 1, 1e-9, 13);
  REQUIRE(r.converged);
  double mn = 1e300;
  for (auto& z : r.eigenvectors[0].v) mn = std::min(mn, z.real());
  CHECK(mn > 0.0);
}

TEST_CASE("dense route refuses oversized problems") {
  Grid big = make_grid(2, 2, 16, 2.0, Boundary::periodic);  // 65536 points
  Hamiltonian H =
      build_hamiltonian(PotentialSpec::harmonic(1.0), kNoPair, big, true);
  CHECK_THROWS_AS(dense_oracle(H.op, 2), Error);
}
