#pragma once

#include <cstdint>
#include <vector>

#include "ucplab/grid.hpp"
#include "ucplab/operators.hpp"

namespace ucplab {

struct SpectralResult {
  std::vector<double> eigenvalues;        ///< ascending; dense oracle returns all
  std::vector<GridFunction> eigenvectors; ///< L2-normalized, phase-fixed, lowest first
  std::vector<double> residuals;          ///< ||H psi - E psi|| per returned vector
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;  ///< an adjacent computed gap is below 10*tol
  double tol = 0.0;
  double trace = 0.0;       ///< dense oracle only: sum of matrix diagonal
};

/// Lowest-k eigenpairs of a self-adjoint operator by a preconditioned block
/// Rayleigh-Ritz iteration (LOBPCG family) with full reorthogonalization of
/// the trial basis.  Deterministic for a fixed seed.
///
/// `precond` (optional) is applied to residuals; pass the operator from
/// kinetic_preconditioner for periodic kinetic terms.
///
/// The ground eigenvector's phase is fixed so its largest-magnitude entry is
/// positive real (ties broken by lowest index); the same convention is
/// applied to every returned vector.
SpectralResult solve_ground(const Operator& H, int k, double tol, std::uint64_t seed,
                            int max_iter = 600, const Operator* precond = nullptr);

/// Dense eigendecomposition oracle for small grids (<= 4096 points).
/// Materializes the operator column by column, requires it to be real
/// symmetric (checked), and returns the full spectrum plus the first k_keep
/// eigenvectors under the same normalization and phase convention as
/// solve_ground.
SpectralResult dense_oracle(const Operator& H, int k_keep = 6);

/// Fourier-diagonal approximate inverse (T + shift)^-1 of the kinetic term;
/// periodic grids only.  Used as the LOBPCG preconditioner.
Operator kinetic_preconditioner(const Grid& g, bool spectral_kinetic, double shift = 1.0);

}  // namespace ucplab
