#include "ucplab/ucp.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "ucplab/errors.hpp"
#include "ucplab/fft.hpp"
#include "ucplab/operators.hpp"

namespace ucplab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) return 0.0;
  return (n * sxy - sx * sy) / denom;
}

void check_center_inside(const Grid& g, const Point& center) {
  for (int a = 0; a < g.n; ++a) {
    if (std::abs(center[a]) > g.L)
      throw_config("ball center lies outside the box");
  }
}

}  // namespace

double zero_set_fraction(const GridFunction& psi, double threshold) {
  if (threshold < 0.0) throw_config("zero_set_fraction: threshold must be >= 0");
  const double cut = threshold * norm_max(psi);
  std::uint64_t count = 0;
  for (const complex& z : psi.v)
    if (std::abs(z) <= cut) ++count;
  return static_cast<double>(count) / static_cast<double>(psi.size());
}

VanishingReport vanishing_order_fit(const GridFunction& psi, const Point& center,
                                    const std::vector<double>& eps_list) {
  const Grid& g = psi.grid;
  check_center_inside(g, center);
  if (eps_list.size() < 4)
    throw_config("vanishing_order_fit: need at least 4 radii");
  for (double e : eps_list) {
    if (!(e > 2.0 * g.h) || !(e < g.L / 4.0))
      throw_config("vanishing_order_fit: radii must lie strictly inside (2h, L/4)");
  }

  VanishingReport rep;
  rep.center = center;
  rep.eps_list = eps_list;
  std::sort(rep.eps_list.begin(), rep.eps_list.end());

  for (double e : rep.eps_list) {
    WeightedBallNorm b = ball_mass(psi, center, e);
    // ball_points counts contributing nodes; the h/2 core exclusion applies
    // uniformly across radii so it cannot tilt the fit.
    std::uint64_t pts = 0;
    for (std::uint64_t i = 0; i < psi.size(); ++i)
      if (point_distance(g, i, center) <= e) ++pts;
    if (pts < 10)
      throw_config("vanishing_order_fit: a requested ball holds fewer than 10 grid points");
    rep.masses.push_back(b.value);
    rep.ball_points.push_back(pts);
  }

  // Roundoff floor: a ball of P nodes whose true values are zero still
  // accumulates ~ P * h^n * (eps_mach * max|psi|)^2 from rounding in psi.
  const double psi_max = norm_max(psi);
  const double unit = DBL_EPSILON * psi_max;
  rep.mass_floor = 100.0 * static_cast<double>(rep.ball_points.back()) * g.cell_volume() *
                   unit * unit;

  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < rep.masses.size(); ++i) {
    if (rep.masses[i] > rep.mass_floor) {
      lx.push_back(std::log(rep.eps_list[i]));
      ly.push_back(std::log(rep.masses[i]));
    }
  }
  rep.radii_used = lx.size();
  if (lx.size() < 2) {
    rep.effectively_zero = true;
    rep.fitted_order = kInf;
  } else {
    rep.fitted_order = ls_slope(lx, ly);
  }

  const int k_max = static_cast<int>(rep.infinite_order_threshold);
  for (int k = 1; k <= k_max; ++k) {
    double ck = 0.0;
    for (std::size_t i = 0; i < rep.masses.size(); ++i)
      ck = std::max(ck, rep.masses[i] / std::pow(rep.eps_list[i], k));
    rep.c_k_estimates.push_back(ck);
  }

  rep.zero_fraction = zero_set_fraction(psi, 1e-12);
  return rep;
}

namespace {

/// Cumulative ball-mass evaluator around the origin: mass(eps) in O(1) per
/// query after one grid pass.  Uses the same h/2 core exclusion as
/// weighted_ball_norm so both sides of the identity see the same node set.
class BallMassProfile {
 public:
  explicit BallMassProfile(const GridFunction& psi) {
    const Grid& g = psi.grid;
    const Point c = origin();
    const double vol = g.cell_volume();
    for (std::uint64_t i = 0; i < psi.size(); ++i) {
      const double r = point_distance(g, i, c);
      if (r < 0.5 * g.h) continue;
      const double m = std::norm(psi.v[i]) * vol;
      if (m == 0.0) continue;
      radii_.push_back(r);
      mass_.push_back(m);
    }
    std::vector<std::size_t> order(radii_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return radii_[a] < radii_[b]; });
    std::vector<double> r2(radii_.size()), m2(radii_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      r2[i] = radii_[order[i]];
      acc += mass_[order[i]];
      m2[i] = acc;
    }
    radii_ = std::move(r2);
    mass_ = std::move(m2);
  }

  double operator()(double eps) const {
    const auto it = std::upper_bound(radii_.begin(), radii_.end(), eps);
    if (it == radii_.begin()) return 0.0;
    return mass_[static_cast<std::size_t>(it - radii_.begin()) - 1];
  }

  double total_beyond(double radius) const {
    return (mass_.empty() ? 0.0 : mass_.back()) - (*this)(radius);
  }

 private:
  std::vector<double> radii_;
  std::vector<double> mass_;
};

/// Composite midpoint rule in the log variable u = ln(eps) for
/// integral_a^1 eps^-k mass(eps) d eps = integral e^((1-k)u) mass(e^u) du.
/// The midpoint error telescopes to the interval endpoints, where the
/// integrand is either saturated (eps = 1) or negligible (eps = a) for
/// functions vanishing at the origin.
double eps_integral(const BallMassProfile& mass, int k, double a, int cells) {
  const double du = std::log(1.0 / a) / cells;
  double lhs = 0.0;
  for (int i = 0; i < cells; ++i) {
    const double u = std::log(a) + (i + 0.5) * du;
    lhs += mass(std::exp(u)) * std::exp((1.0 - k) * u) * du;
  }
  return lhs;
}

}  // namespace

EquivalenceReport weighted_equivalence_identity(const GridFunction& psi, int k) {
  const Grid& g = psi.grid;
  if (k < 2) throw_config("weighted_equivalence_identity: k must be >= 2");
  if (g.L < 1.0) throw_config("weighted_equivalence_identity: box must contain the unit ball");

  BallMassProfile mass(psi);
  const double outside = mass.total_beyond(1.0);
  const double total = mass(kInf);
  if (outside > 1e-9 * total && total > 0.0)
    throw_config("weighted_equivalence_identity: psi carries mass outside the unit ball");

  EquivalenceReport rep;
  rep.k = k;
  rep.cells = 256;
  rep.lower_limit = g.h;

  // Right side: exact weighted sum.  (k-1)^-1 [ wbn(k-1) - wbn(0) ].
  const WeightedBallNorm num = weighted_ball_norm(psi, static_cast<double>(k - 1), 1.0, origin());
  const WeightedBallNorm den = ball_mass(psi, origin(), 1.0);
  rep.rhs = (num.value - den.value) / (k - 1.0);

  constexpr double kOverflowGuard = 1e100;
  if (!std::isfinite(rep.rhs) || rep.rhs > kOverflowGuard) {
    rep.rhs = kInf;
    rep.lhs = eps_integral(mass, k, g.h, rep.cells);
    rep.rel_gap = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }

  rep.lhs = eps_integral(mass, k, g.h, rep.cells);
  rep.lhs_refined = eps_integral(mass, k, g.h, 2 * rep.cells);
  rep.lhs_half_limit = eps_integral(mass, k, 0.5 * g.h, rep.cells);

  const double scale = std::max(std::abs(rep.rhs), DBL_MIN);
  rep.rel_gap = std::abs(rep.lhs - rep.rhs) / scale;
  rep.rel_gap_refined = std::abs(rep.lhs_refined - rep.rhs) / scale;
  rep.half_limit_shift = std::abs(rep.lhs_half_limit - rep.lhs) / scale;
  return rep;
}

std::vector<GridFunction> discrete_gradient(const GridFunction& psi) {
  const Grid& g = psi.grid;
  std::vector<GridFunction> out;
  out.reserve(g.n);
  if (g.boundary == Boundary::periodic) {
    std::vector<complex> hat = psi.v;
    fft_all_axes(g, hat, -1);
    const double dk = std::numbers::pi / g.L;
    int idx[kMaxAxes];
    for (int a = 0; a < g.n; ++a) {
      GridFunction da(g);
      for (std::uint64_t i = 0; i < hat.size(); ++i) {
        g.decode(i, idx);
        const int j = idx[a];
        // Odd-derivative convention: the unpaired Nyquist mode is dropped.
        const int js = (2 * j < g.m) ? j : (j == g.m / 2 ? 0 : j - g.m);
        da.v[i] = complex(0.0, dk * js) * hat[i];
      }
      fft_all_axes(g, da.v, +1);
      out.push_back(std::move(da));
    }
    return out;
  }
  // Central differences with zero ghost values at the walls.
  const double inv2h = 1.0 / (2.0 * g.h);
  int idx[kMaxAxes];
  for (int a = 0; a < g.n; ++a) {
    GridFunction da(g);
    for (std::uint64_t i = 0; i < psi.size(); ++i) {
      g.decode(i, idx);
      complex up = 0.0, down = 0.0;
      if (idx[a] + 1 < g.m) {
        idx[a] += 1;
        up = psi.v[g.encode(idx)];
        idx[a] -= 1;
      }
      if (idx[a] > 0) {
        idx[a] -= 1;
        down = psi.v[g.encode(idx)];
        idx[a] += 1;
      }
      da.v[i] = (up - down) * inv2h;
    }
    out.push_back(std::move(da));
  }
  return out;
}

GridFunction discrete_laplacian(const GridFunction& psi) {
  const bool spectral = psi.grid.boundary == Boundary::periodic;
  const Operator minus_lap = spectral ? Operator::laplacian_spectral(psi.grid)
                                      : Operator::laplacian_fd2(psi.grid);
  GridFunction out = minus_lap.apply(psi);
  for (complex& z : out.v) z = -z;
  return out;
}

DerivativeVanishingReport derivative_vanishing_check(const GridFunction& psi,
                                                     const AssembledPotential& V,
                                                     const Point& center,
                                                     const std::vector<double>& eps_list) {
  const Grid& g = psi.grid;
  if (!g.same_geometry(V.grid))
    throw_config("derivative_vanishing_check: psi and V live on different grids");
  check_center_inside(g, center);
  if (eps_list.size() < 4)
    throw_config("derivative_vanishing_check: need at least 4 radii");
  for (double e : eps_list) {
    if (!(e > 2.0 * g.h) || !(e < g.L / 4.0))
      throw_config("derivative_vanishing_check: radii must lie strictly inside (2h, L/4)");
  }

  DerivativeVanishingReport rep;
  rep.center = center;
  rep.eps_list = eps_list;
  std::sort(rep.eps_list.begin(), rep.eps_list.end());

  const std::vector<GridFunction> grad = discrete_gradient(psi);
  const GridFunction lap = discrete_laplacian(psi);

  GridFunction grad_abs(g);
  for (std::uint64_t i = 0; i < psi.size(); ++i) {
    double s = 0.0;
    for (int a = 0; a < g.n; ++a) s += std::norm(grad[a].v[i]);
    grad_abs.v[i] = std::sqrt(s);
  }

  for (double e : rep.eps_list) {
    const double m1 = ball_mass(psi, center, e).value;
    const double gm = ball_mass(grad_abs, center, e).value;
    const double lm = ball_mass(lap, center, e).value;
    const double m2 = ball_mass(psi, center, 2.0 * e).value;
    const double gm2 = ball_mass(grad_abs, center, 2.0 * e).value;
    rep.mass.push_back(m1);
    rep.grad_mass.push_back(gm);
    rep.lap_mass.push_back(lm);
    const double tiny = DBL_MIN;
    rep.rho1.push_back(e * e * gm / std::max(m2, tiny));
    rep.rho2.push_back(e * e * e * e * lm / std::max(m2 + gm2, tiny));
    rep.rho2_split.push_back(lm / std::max(m2 / (e * e * e * e) + gm2 / (e * e), tiny));
  }

  // Boundedness flags: variation across the sweep within a factor 16 for
  // rho1; rho2 counts as bounded when it never grows past 16x its minimum
  // (decay toward small eps is expected, growth is not).
  const auto span_ok = [](const std::vector<double>& v, double factor) {
    double lo = kInf, hi = 0.0;
    for (double x : v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    return hi <= factor * std::max(lo, DBL_MIN) || hi == 0.0;
  };
  rep.rho1_bounded = span_ok(rep.rho1, 16.0);
  rep.rho2_bounded = span_ok(rep.rho2_split, 16.0);

  // Equation residual || lap psi - V psi || / || V psi || on the ball that
  // encloses the whole sweep.
  const double r_eq = std::min(4.0 * rep.eps_list.back(), g.L);
  GridFunction resid(g), vpsi(g);
  for (std::uint64_t i = 0; i < psi.size(); ++i) {
    vpsi.v[i] = V.values[i] * psi.v[i];
    resid.v[i] = lap.v[i] - vpsi.v[i];
  }
  const double denom = std::sqrt(ball_mass(vpsi, center, r_eq).value);
  const double numer = std::sqrt(ball_mass(resid, center, r_eq).value);
  rep.equation_residual = denom > 0.0 ? numer / denom : kInf;
  return rep;
}

}  // namespace ucplab
