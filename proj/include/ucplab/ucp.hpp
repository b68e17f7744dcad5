#pragma once

#include <cstdint>
#include <vector>

#include "ucplab/grid.hpp"
#include "ucplab/hamiltonian.hpp"

namespace ucplab {

/// Log-log fit of ball mass against radius around a point.  fitted_order is
/// the least-squares slope of log(mass) vs log(eps); a smooth function
/// behaving like |x - center|^m contributes mass ~ eps^(2m + n), so the slope
/// reads off 2m + n directly.
struct VanishingReport {
  Point center{};
  std::vector<double> eps_list;             ///< requested radii, ascending
  std::vector<double> masses;               ///< ball mass per radius (h/2 core excluded)
  std::vector<std::uint64_t> ball_points;   ///< grid points contributing per radius
  double fitted_order = 0.0;                ///< slope; +inf when all masses sit at roundoff
  std::vector<double> c_k_estimates;        ///< c_k = max_eps mass/eps^k, k = 1..threshold
  double zero_fraction = 0.0;               ///< zero_set_fraction(psi, 1e-12)
  double mass_floor = 0.0;                  ///< 100x roundoff floor used to filter radii
  std::size_t radii_used = 0;               ///< radii surviving the mass filter
  double infinite_order_threshold = 12.0;   ///< slopes above this count as "infinite"
  bool effectively_zero = false;            ///< fewer than two radii survived the floor
};

/// Measures the vanishing order of psi at `center`.
///
/// Requires at least four radii, each inside (2h, L/4) and containing at
/// least ten grid points.  Radii whose mass falls below 100x the roundoff
/// floor (points * h^n * (eps_machine * max|psi|)^2) are excluded from the
/// fit: below that level the log-log slope measures accumulated rounding,
/// not the function.  If fewer than two radii survive, the function is
/// declared numerically zero near the center and the order is the +infinity
/// sentinel.
VanishingReport vanishing_order_fit(const GridFunction& psi, const Point& center,
                                    const std::vector<double>& eps_list);

/// Both sides of the radial-weight resummation identity
///
///   integral_0^1 eps^-k integral_{B_eps} |psi|^2  d eps
///       = (k-1)^-1 integral_{B_1} |psi|^2 (|x|^(1-k) - 1)
///
/// evaluated discretely around the origin.  The right side is the exact
/// weighted ball sum; the left side integrates the ball-mass step function
/// with a composite midpoint rule in log(eps) on `cells` cells over
/// [lower_limit, 1].
struct EquivalenceReport {
  int k = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_gap = 0.0;           ///< |lhs - rhs| / |rhs|
  double lower_limit = 0.0;       ///< h, the lower end of the eps integral
  int cells = 256;
  double lhs_refined = 0.0;       ///< same integral on 2x cells
  double rel_gap_refined = 0.0;
  double lhs_half_limit = 0.0;    ///< lower limit h/2 instead of h
  double half_limit_shift = 0.0;  ///< |lhs_half_limit - lhs| / |rhs|
};

/// Requires k >= 2, a box containing the unit ball, and psi supported in the
/// unit ball (mass outside B_1 at roundoff).  A right side beyond the
/// overflow guard (1e100) is reported non-finite: the weighted integral of a
/// function that does not vanish fast enough at 0 diverges, and the discrete
/// sum inherits a blow-up of order h^(1-k).
EquivalenceReport weighted_equivalence_identity(const GridFunction& psi, int k);

/// Discrete derivative analogue of the vanishing-order measurement: how the
/// gradient and Laplacian mass near a point are controlled by the plain mass
/// on the doubled ball.
///
///   rho1(eps) = eps^2 int_{B_eps}|grad psi|^2 / int_{B_2eps}|psi|^2
///   rho2(eps) = eps^4 int_{B_eps}|lap psi|^2
///                  / int_{B_2eps}(|psi|^2 + |grad psi|^2)
///
/// rho2 majorizes both cutoff-commutator terms by the same eps^-4 power, so
/// it decays like eps^2 on smooth data even when the underlying control is
/// saturated.  rho2_split keeps the per-term powers (eps^-4 on |psi|^2,
/// eps^-2 on |grad psi|^2) and is the scale-stationary variant:
///
///   rho2_split(eps) = int_{B_eps}|lap psi|^2
///       / (eps^-4 int_{B_2eps}|psi|^2 + eps^-2 int_{B_2eps}|grad psi|^2).
///
/// Derivatives are spectral on periodic grids and second-order central
/// differences on dirichlet boxes.  V supplies the equation context: the
/// report carries the relative residual of  lap psi = V psi  near the center
/// so a reader can tell manufactured eigen-pairs from arbitrary data.
struct DerivativeVanishingReport {
  Point center{};
  std::vector<double> eps_list;
  std::vector<double> mass;        ///< ball mass of psi at eps
  std::vector<double> grad_mass;   ///< ball mass of |grad psi| at eps
  std::vector<double> lap_mass;    ///< ball mass of |lap psi| at eps
  std::vector<double> rho1;
  std::vector<double> rho2;
  std::vector<double> rho2_split;
  bool rho1_bounded = false;       ///< max/min variation over the sweep < 16
  bool rho2_bounded = false;       ///< rho2 nonincreasing-or-bounded trend
  double equation_residual = 0.0;  ///< ||lap psi - V psi|| / ||V psi|| on B_{4 eps_max}
};

DerivativeVanishingReport derivative_vanishing_check(const GridFunction& psi,
                                                     const AssembledPotential& V,
                                                     const Point& center,
                                                     const std::vector<double>& eps_list);

/// Fraction of grid points with |psi| <= threshold * max|psi|.  Requires
/// threshold >= 0.  An identically zero psi reports 1.
double zero_set_fraction(const GridFunction& psi, double threshold);

/// Per-axis partial derivatives (spectral ik multiplier on periodic grids,
/// the odd-derivative Nyquist mode set to zero; central differences on
/// dirichlet boxes).
std::vector<GridFunction> discrete_gradient(const GridFunction& psi);

/// Laplacian of psi (spectral or FD2 to match the grid's boundary).
GridFunction discrete_laplacian(const GridFunction& psi);

}  // namespace ucplab
