#include "ucplab/carleman.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>
#include <utility>

#include <Eigen/Dense>

#include "ucplab/errors.hpp"
#include "ucplab/fft.hpp"
#include "ucplab/rng.hpp"
#include "ucplab/spectra.hpp"

namespace ucplab {

namespace {

constexpr double kRangeCap = 1e12;

double phi_raw(double r) {
  const double t = -std::log(r);
  return t + 1.0 / std::sqrt(t);
}

/// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

/// Extrema of phi over a radius interval inside (0, 1): the single interior
/// minimum is at phi_min_radius(), there is no interior maximum.
void phi_extrema(double r_lo, double r_hi, double* mn, double* mx) {
  const double lo = phi_raw(r_lo), hi = phi_raw(r_hi);
  *mx = std::max(lo, hi);
  const double rs = phi_min_radius();
  *mn = (r_lo <= rs && rs <= r_hi) ? phi_raw(rs) : std::min(lo, hi);
}

}  // namespace

double weight_phi(double r) {
  if (!(r > 0.0) || !(r < 1.0))
    throw_config("weight_phi: radius must lie strictly inside (0, 1), got " + std::to_string(r));
  return phi_raw(r);
}

PhiDerivatives weight_phi_derivatives(double r, int n) {
  if (n < 1) throw_config("weight_phi_derivatives: dimension must be >= 1");
  if (!(r > 0.0) || !(r < 1.0))
    throw_config("weight_phi_derivatives: radius must lie strictly inside (0, 1)");
  const double t = -std::log(r);
  const double t32 = std::pow(t, -1.5);
  const double t52 = std::pow(t, -2.5);
  PhiDerivatives out;
  out.phi = t + 1.0 / std::sqrt(t);
  out.dphi_dr = (-1.0 + 0.5 * t32) / r;
  out.grad_norm = std::fabs(out.dphi_dr);
  const double d2 = (1.0 - 0.5 * t32 + 0.75 * t52) / (r * r);
  out.laplacian = d2 + (n - 1) * out.dphi_dr / r;
  return out;
}

PhiBoundConstants phi_bound_constants(double r_lo, double r_hi, int n, int samples) {
  if (!(r_lo > 0.0 && r_lo < r_hi && r_hi < 1.0))
    throw_config("phi_bound_constants: need 0 < r_lo < r_hi < 1");
  if (samples < 2) throw_config("phi_bound_constants: need at least 2 samples");
  PhiBoundConstants out;
  for (int i = 0; i < samples; ++i) {
    const double r = r_lo + (r_hi - r_lo) * i / (samples - 1);
    const PhiDerivatives pd = weight_phi_derivatives(r, n);
    out.c1 = std::max(out.c1, r * (std::exp(pd.phi) + pd.grad_norm));
    out.c2 = std::max(out.c2, r * r * std::fabs(pd.laplacian));
  }
  return out;
}

double phi_min_radius() {
  // phi'(r) = 0  <=>  (-ln r)^{3/2} = 1/2, i.e. r = exp(-2^{-2/3}).
  return std::exp(-std::pow(2.0, -2.0 / 3.0));
}

std::vector<ShellFunction> shell_bump_family(const Grid& g, int count, double a_min, double a_max,
                                             double delta_phi) {
  if (g.boundary != Boundary::periodic) throw_config("shell_bump_family requires a periodic grid");
  if (g.n > 2) throw_config("shell_bump_family covers 1 and 2 axes only");
  if (!(g.L >= 1.0)) throw_config("shell_bump_family needs the unit ball inside the box (L >= 1)");
  if (count < 1) throw_config("shell_bump_family: count must be >= 1");
  if (!(a_min > 0.0 && a_min <= a_max)) throw_config("shell_bump_family: need 0 < a_min <= a_max");
  if (!(delta_phi > 0.0)) throw_config("shell_bump_family: delta_phi must be positive");

  const double rstar = phi_min_radius();
  std::vector<ShellFunction> family;
  family.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double a = count == 1 ? a_min : a_min + (a_max - a_min) * i / (count - 1);
    if (!(a < rstar)) throw_config("shell_bump_family: inner radius past the weight minimum");
    const double target = weight_phi(a) - delta_phi;
    if (!(phi_raw(rstar) < target))
      throw_config("shell_bump_family: no outer radius reaches the requested phi drop; "
                    "shrink a_max or delta_phi");
    // phi decreases from phi(a) to phi(rstar) on [a, rstar]; bisect for the
    // radius where it has dropped by exactly delta_phi.
    double lo = a, hi = rstar;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      (phi_raw(mid) > target ? lo : hi) = mid;
    }
    const double b = 0.5 * (lo + hi);
    if (!(b - a >= 8.0 * g.h))
      throw_config("shell_bump_family: shell thinner than 8 grid cells; refine the grid or "
                    "enlarge delta_phi");

    ShellFunction sf;
    sf.a = a;
    sf.b = b;
    sf.ell = g.n == 2 ? i % 3 : i % 2;
    char buf[64];
    std::snprintf(buf, sizeof buf, "shell-%02d-a%.4f-b%.4f-l%d", i, a, b, sf.ell);
    sf.id = buf;

    sf.u = GridFunction(g);
    const double c0 = 0.5 * (a + b);
    const double w = 0.5 * (b - a);
    int idx[kMaxAxes] = {};
    for (std::uint64_t p = 0; p < g.points(); ++p) {
      g.decode(p, idx);
      double x0 = g.coord(idx[0]);
      double x1 = g.n == 2 ? g.coord(idx[1]) : 0.0;
      const double r = std::sqrt(x0 * x0 + x1 * x1);
      const double t = std::fabs(r - c0) / w;
      if (t >= 1.0) continue;
      double val = bump_profile(t);
      if (g.n == 2 && sf.ell > 0)
        val *= std::cos(sf.ell * std::atan2(x1, x0));
      else if (g.n == 1 && sf.ell == 1 && x0 < 0.0)
        val = -val;
      sf.u.v[p] = val;
    }
    family.push_back(std::move(sf));
  }
  return family;
}

std::vector<ShellFunction> default_shell_ladder(const Grid& g) {
  struct Rung {
    double drop, a_min, a_max;
  };
  // Wide drops saturate by tau ~ 8 but overflow the range cap past
  // tau ~ 32; narrow drops stay admissible to tau = 256 but only reach
  // their plateau around tau ~ 64.  Inner radii rise with narrowing drop
  // just enough to keep the plateau levels aligned.
  static constexpr Rung rungs[] = {
      {0.84, 0.105, 0.128},
      {0.42, 0.130, 0.155},
      {0.21, 0.160, 0.190},
      {0.105, 0.210, 0.240},
  };
  std::vector<ShellFunction> family;
  for (const Rung& r : rungs) {
    auto part = shell_bump_family(g, 5, r.a_min, r.a_max, r.drop);
    for (auto& sf : part) {
      sf.id += "-d" + std::to_string(r.drop).substr(0, 5);
      family.push_back(std::move(sf));
    }
  }
  return family;
}

namespace {

/// Exact-support radius interval of u, validated for the annulus geometry
/// the weighted quadratures need.
void support_interval(const GridFunction& u, double* rmin, double* rmax) {
  const Grid& g = u.grid;
  const Point c = origin();
  *rmin = std::numeric_limits<double>::infinity();
  *rmax = 0.0;
  bool any = false;
  for (std::uint64_t p = 0; p < u.size(); ++p) {
    if (u.v[p] == complex(0.0)) continue;
    const double r = point_distance(g, p, c);
    *rmin = std::min(*rmin, r);
    *rmax = std::max(*rmax, r);
    any = true;
  }
  if (!any) throw_config("weighted quadrature: the field vanishes identically");
  const double dil = 2.0 * g.h;
  if (!(*rmin > dil) || !(*rmax + dil < 1.0))
    throw_config("weighted quadrature: support violation; the field must live in an annulus "
                  "with 2h < a and b + 2h < 1");
}

}  // namespace

double support_weight_span(const GridFunction& u) {
  double rmin = 0.0, rmax = 0.0;
  support_interval(u, &rmin, &rmax);
  double phi_lo = 0.0, phi_hi = 0.0;
  phi_extrema(rmin, rmax, &phi_lo, &phi_hi);
  return phi_hi - phi_lo;
}

double carleman_ratio(const GridFunction& u, double tau, double s, double xi) {
  const Grid& g = u.grid;
  if (g.boundary != Boundary::periodic) throw_config("carleman_ratio requires a periodic grid");
  if (!(tau > 0.0)) throw_config("carleman_ratio: tau must be positive");
  if (!(s >= 0.0 && s <= 1.0)) throw_config("carleman_ratio: s must lie in [0, 1]");
  if (s > 0.0 && !(xi > 0.0 && xi <= 1.0))
    throw_config("carleman_ratio: xi must lie in (0, 1] when s > 0");

  const Point c = origin();
  double rmin = 0.0, rmax = 0.0;
  support_interval(u, &rmin, &rmax);
  double phi_lo = 0.0, phi_hi = 0.0;
  phi_extrema(rmin, rmax, &phi_lo, &phi_hi);
  if (tau * (phi_hi - phi_lo) > std::log(kRangeCap) + 1e-9)
    throw_config("carleman_ratio: dynamic range exceeded; e^(tau phi) spans more than 1e12 "
                  "over supp u");
  const double dil = 2.0 * g.h;

  // Discrete Laplacian of u (spectral).  Sign drops inside the norms.
  const GridFunction lap = Operator::laplacian_spectral(g).apply(u);

  // Weighted quadratures, restricted to the support dilated by 2h: outside
  // it the analytic lap u vanishes and the exponential weight would only
  // amplify spectral dust.
  const double alo = rmin - dil, bhi = rmax + dil;
  GridFunction wu(g);
  double den2 = 0.0, num2 = 0.0;
  for (std::uint64_t p = 0; p < u.size(); ++p) {
    const double r = point_distance(g, p, c);
    if (r < alo || r > bhi) continue;
    const double w = std::exp(tau * (phi_raw(r) - phi_lo));
    den2 += w * w * std::norm(lap.v[p]);
    if (s == 0.0) {
      num2 += w * w * std::norm(u.v[p]);
    } else {
      wu.v[p] = w * u.v[p];
    }
  }
  const double vol = g.cell_volume();
  const double den = std::sqrt(den2 * vol);
  if (!(den > 0.0)) throw_config("carleman_ratio: weighted Laplacian norm vanished");
  double num;
  if (s == 0.0) {
    num = std::sqrt(num2 * vol);
  } else {
    num = norm_l2(Operator::frac_laplacian(g, (1.0 - xi) * s).apply(wu));
  }
  if (!std::isfinite(num) || !std::isfinite(den))
    throw_resource("carleman_ratio: weighted quadrature overflowed");
  return std::pow(tau, 1.5 - 2.0 * s) * num / den;
}

CarlemanReport estimate_kappa_and_eps(const std::vector<ShellFunction>& family,
                                      const std::vector<double>& tau_list, double s, double xi,
                                      double delta, int d, int N, int threads) {
  if (family.empty()) throw_config("estimate_kappa_and_eps: empty test family");
  if (tau_list.empty()) throw_config("estimate_kappa_and_eps: empty tau list");
  if (d < 1 || N < 1) throw_config("estimate_kappa_and_eps: d and N must be >= 1");
  if (s > 0.0 && std::fabs(xi - 4.0 * delta / 3.0) > 1e-12 * std::max(1.0, std::fabs(xi)))
    throw_config("estimate_kappa_and_eps: the epsilon formulas require xi = 4*delta/3");

  CarlemanReport rep;
  rep.s = s;
  rep.xi = xi;
  rep.delta = delta;
  rep.d = d;
  rep.N = N;
  rep.tau_list = tau_list;
  std::sort(rep.tau_list.begin(), rep.tau_list.end());

  const std::size_t nf = family.size(), nt = rep.tau_list.size();
  std::vector<double> spans(nf);
  for (std::size_t f = 0; f < nf; ++f) spans[f] = support_weight_span(family[f].u);
  const double log_cap = std::log(kRangeCap) + 1e-9;

  rep.ratios.resize(nf * nt);
  for (std::size_t f = 0; f < nf; ++f)
    for (std::size_t j = 0; j < nt; ++j) {
      RatioSample& row = rep.ratios[f * nt + j];
      row.function_id = family[f].id;
      row.tau = rep.tau_list[j];
      row.admissible = rep.tau_list[j] * spans[f] <= log_cap;
    }

  const auto eval = [&](std::size_t row) {
    if (!rep.ratios[row].admissible) return;
    const std::size_t f = row / nt, j = row % nt;
    rep.ratios[row].ratio = carleman_ratio(family[f].u, rep.tau_list[j], s, xi);
  };
  const std::size_t rows = rep.ratios.size();
  if (threads > 1 && rows > 1) {
    std::atomic<std::size_t> next{0};
    std::mutex emu;
    std::exception_ptr eptr;
    auto work = [&] {
      for (;;) {
        const std::size_t row = next.fetch_add(1);
        if (row >= rows) return;
        try {
          eval(row);
        } catch (...) {
          const std::lock_guard<std::mutex> lk(emu);
          if (!eptr) eptr = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    const std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(threads), rows);
    pool.reserve(nw);
    for (std::size_t wkr = 0; wkr < nw; ++wkr) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (eptr) std::rethrow_exception(eptr);
  } else {
    for (std::size_t row = 0; row < rows; ++row) eval(row);
  }

  rep.kappa_tau.assign(nt, 0.0);
  for (std::size_t j = 0; j < nt; ++j) {
    bool covered = false;
    for (std::size_t f = 0; f < nf; ++f) {
      const RatioSample& row = rep.ratios[f * nt + j];
      if (!row.admissible) continue;
      rep.kappa_tau[j] = std::max(rep.kappa_tau[j], row.ratio);
      covered = true;
    }
    if (!covered)
      throw_config("estimate_kappa_and_eps: no admissible test function at tau = " +
                   std::to_string(rep.tau_list[j]));
  }
  rep.kappa_hat = *std::max_element(rep.kappa_tau.begin(), rep.kappa_tau.end());
  if (!(rep.kappa_hat > 0.0)) throw_config("estimate_kappa_and_eps: vanishing kappa estimate");

  std::vector<double> lx(nt), ly(nt);
  for (std::size_t j = 0; j < nt; ++j) {
    lx[j] = std::log(rep.tau_list[j]);
    ly[j] = std::log(rep.kappa_tau[j]);
  }
  rep.slope_log_kappa_vs_log_tau = ls_slope(lx, ly);

  // Smallest tau from which every later kappa stays within 10%.
  rep.tau0 = rep.tau_list.back();
  for (std::size_t i = 0; i < nt; ++i) {
    bool stable = true;
    for (std::size_t j = i + 1; j < nt; ++j)
      stable = stable && std::fabs(rep.kappa_tau[j] / rep.kappa_tau[i] - 1.0) <= 0.10;
    if (stable) {
      rep.tau0 = rep.tau_list[i];
      break;
    }
  }

  // eps_dN first, then eps_main = eps_dN*K/4: division and multiplication by
  // 4 are exact, so eps_dN * N(N+1)^2 == 4 * eps_main bitwise.
  const double K = static_cast<double>(N) * (N + 1.0) * (N + 1.0);
  rep.eps_dN = 1.0 / (K * rep.kappa_hat * rep.kappa_hat);
  rep.eps_main = (rep.eps_dN * K) / 4.0;
  return rep;
}

namespace {

std::vector<double> form_multiplier_table(const Grid& g, double delta) {
  const double p = 1.5 - 2.0 * delta;
  return radial_multiplier_table(
      g, [p](double k2) { return k2 == 0.0 ? 0.0 : std::pow(k2, p); });
}

std::vector<double> pencil_field(const AssembledPotential& V, double R, double c) {
  const Grid& g = V.grid;
  const Point ctr = origin();
  std::vector<double> q(g.points());
  for (std::uint64_t p = 0; p < g.points(); ++p) {
    const double r = point_distance(g, p, ctr);
    const double vv = r <= R ? V.values[p] * V.values[p] : 0.0;
    q[p] = vv - c;
  }
  return q;
}

double pencil_lambda_max(const Grid& g, const std::vector<double>& atab,
                         const std::vector<double>& qfield, double sigma, std::string* solver) {
  std::vector<double> gtab(atab.size());
  for (std::size_t i = 0; i < atab.size(); ++i) gtab[i] = 1.0 / std::sqrt(atab[i] + sigma);
  const Operator G = Operator::fourier_multiplier(g, std::move(gtab), "pencil-resolvent-half");
  const Operator T =
      Operator::composed(G, Operator::composed(Operator::multiply(g, qfield, "pencil-form"), G));
  if (g.points() <= 4096) {
    *solver = "dense";
    return dense_oracle(T, 1).eigenvalues.back();
  }
  *solver = "lobpcg";
  const SpectralResult r = solve_ground(Operator::scaled(T, -1.0), 1, 1e-10, 0x5eedULL, 800);
  if (!r.converged) throw_solver("min_eps_form_inequality: pencil iteration did not converge");
  return -r.eigenvalues.front();
}

}  // namespace

InequalityReport min_eps_form_inequality(const AssembledPotential& V, double R, double delta,
                                         double c) {
  const Grid& g = V.grid;
  if (g.boundary != Boundary::periodic)
    throw_config("min_eps_form_inequality requires a periodic grid");
  if (V.values.size() != g.points())
    throw_config("min_eps_form_inequality: potential does not match its grid");
  if (!(delta >= 0.0 && delta < 0.25))
    throw_config("min_eps_form_inequality: delta must lie in [0, 1/4)");
  if (!(R > 0.0) || !(2.0 * R <= g.L * (1.0 + 1e-12)))
    throw_config("min_eps_form_inequality: the ball must sit inside the box with padding >= 2 "
                  "(2R <= L)");

  const std::vector<double> atab = form_multiplier_table(g, delta);
  const double specrad = *std::max_element(atab.begin(), atab.end());
  const double sigma = 1e-8 * specrad;
  const std::vector<double> q = pencil_field(V, R, c);

  InequalityReport rep;
  rep.delta = delta;
  rep.R = R;
  rep.c = c;
  rep.M = 0.0;
  rep.method = "pencil";
  rep.sigma = sigma;
  rep.eps_min = std::max(0.0, pencil_lambda_max(g, atab, q, sigma, &rep.solver));
  std::string solver10;
  rep.eps_min_10sigma = std::max(0.0, pencil_lambda_max(g, atab, q, 10.0 * sigma, &solver10));
  rep.c_certified = c;
  return rep;
}

double sampled_form_max(const AssembledPotential& V, double R, double delta, double c,
                        double sigma, int trials, std::uint64_t seed) {
  const Grid& g = V.grid;
  if (g.boundary != Boundary::periodic) throw_config("sampled_form_max requires a periodic grid");
  if (trials < 1) throw_config("sampled_form_max: trials must be >= 1");
  if (!(sigma >= 0.0)) throw_config("sampled_form_max: sigma must be >= 0");
  const std::vector<double> atab = form_multiplier_table(g, delta);
  const std::vector<double> q = pencil_field(V, R, c);
  const double npts = static_cast<double>(g.points());

  double best = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(t));
    std::vector<complex> u(g.points());
    for (complex& z : u) z = complex(rng.normal(), rng.normal());
    double qsum = 0.0;
    for (std::uint64_t p = 0; p < g.points(); ++p) qsum += q[p] * std::norm(u[p]);
    std::vector<complex> hat = u;
    fft_all_axes(g, hat, -1);
    double asum = 0.0;
    for (std::uint64_t p = 0; p < g.points(); ++p) asum += (atab[p] + sigma) * std::norm(hat[p]);
    asum /= npts;  // unnormalized forward transform: Parseval carries 1/m^n
    best = std::max(best, qsum / asum);
  }
  return best;
}

namespace {

/// integral over B_R of |v|^q on {|v| > M}, log-radial midpoint quadrature.
double tail_power_integral(const PotentialSpec& v, int d, double q, double R, double M, int cells,
                           double core_frac) {
  const double r0 = R * core_frac;
  const double du = std::log(R / r0) / cells;
  double acc = 0.0;
  double x[kMaxAxes] = {};
  if (d == 1) {
    for (int side = 0; side < 2; ++side) {
      const double sgn = side == 0 ? 1.0 : -1.0;
      for (int i = 0; i < cells; ++i) {
        const double rl = r0 * std::exp(i * du), rh = r0 * std::exp((i + 1) * du);
        x[0] = sgn * std::sqrt(rl * rh);
        const double val = std::fabs(v.eval(x, 1));
        if (val > M) acc += std::pow(val, q) * (rh - rl);
      }
    }
  } else if (d == 2) {
    const int nang = 512;
    const double dth = 2.0 * std::numbers::pi / nang;
    for (int a = 0; a < nang; ++a) {
      const double th = (a + 0.5) * dth;
      const double cth = std::cos(th), sth = std::sin(th);
      for (int i = 0; i < cells; ++i) {
        const double rl = r0 * std::exp(i * du), rh = r0 * std::exp((i + 1) * du);
        const double rm = std::sqrt(rl * rh);
        x[0] = rm * cth;
        x[1] = rm * sth;
        const double val = std::fabs(v.eval(x, 2));
        if (val > M) acc += std::pow(val, q) * rm * (rh - rl) * dth;
      }
    }
  } else {
    // One radial ray scaled by the sphere area; only valid for radial
    // potentials, so spot-check isotropy first.
    for (const double rf : {1e-3, 0.1, 0.5, 0.9}) {
      const double r = rf * R;
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (int dir = 0; dir < 4; ++dir) {
        for (int a = 0; a < d; ++a) x[a] = 0.0;
        if (dir == 0) {
          x[0] = r;
        } else if (dir == 1) {
          x[d - 1] = r;
        } else {
          const double comp = r / std::sqrt(static_cast<double>(d));
          for (int a = 0; a < d; ++a) x[a] = (dir == 3 && a % 2 == 1) ? -comp : comp;
        }
        const double val = v.eval(x, d);
        lo = std::min(lo, val);
        hi = std::max(hi, val);
      }
      if (hi - lo > 1e-8 * (std::fabs(hi) + std::fabs(lo) + 1.0))
        throw_config("sobolev_split_bound: d >= 3 tail quadrature requires a radial potential");
    }
    const double area =
        2.0 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0);
    for (int i = 0; i < cells; ++i) {
      const double rl = r0 * std::exp(i * du), rh = r0 * std::exp((i + 1) * du);
      const double rm = std::sqrt(rl * rh);
      for (int a = 0; a < d; ++a) x[a] = 0.0;
      x[0] = rm;
      const double val = std::fabs(v.eval(x, d));
      if (val > M) acc += std::pow(val, q) * std::pow(rm, d - 1) * (rh - rl);
    }
    acc *= area;
  }
  return acc;
}

double tail_integral_checked(const PotentialSpec& v, int d, double q, double R, double M) {
  const double coarse = tail_power_integral(v, d, q, R, M, 8192, 1e-18);
  const double fine = tail_power_integral(v, d, q, R, M, 16384, 1e-24);
  if (!std::isfinite(coarse) || !std::isfinite(fine) ||
      fine > coarse * 1.02 + 1e-12 * (1.0 + coarse))
    throw_config("sobolev_split_bound: tail norm does not converge under quadrature refinement "
                  "(integrability violated)");
  return fine;
}

}  // namespace

InequalityReport sobolev_split_bound(const PotentialSpec& v, double p, int d, double s, double R,
                                     double M) {
  if (d < 1) throw_config("sobolev_split_bound: dimension must be >= 1");
  if (!(R > 0.0)) throw_config("sobolev_split_bound: R must be positive");
  if (!(M >= 0.0)) throw_config("sobolev_split_bound: split level M must be >= 0");

  InequalityReport rep;
  rep.method = "sobolev-split";
  rep.solver = "closed-form";
  rep.R = R;
  rep.M = M;
  rep.c = M;
  rep.delta = 0.75 - s;

  if (d <= 2) {
    // |v|^2 1_{B_R} <= eps (-lap)^{2s} + (M^2 + eps) through
    // ||u||_inf^2 <= C^2 ||u||_{H^{2s}}^2 and the multiplier bridge
    // (1+|k|^2)^{2s} <= 2^{2s-1}(1 + |k|^{4s}).
    if (!(s >= 0.5 && s <= 1.0) || (d == 2 && !(s > 0.5)))
      throw_config("sobolev_split_bound: d <= 2 route needs s in [1/2, 1] (s > 1/2 when d = 2)");
    if (!(p >= 2.0))
      throw_config("sobolev_split_bound: d <= 2 route measures the tail in L^2, need p >= 2");
    const double t = 2.0 * s;
    const double c2 =
        d == 1 ? std::sqrt(std::numbers::pi) / (2.0 * std::numbers::pi) *
                     std::exp(std::lgamma(t - 0.5) - std::lgamma(t))
               : 1.0 / (4.0 * std::numbers::pi * (t - 1.0));
    const double tail2 = tail_integral_checked(v, d, 2.0, R, M);
    rep.eps_min = std::pow(2.0, t - 1.0) * c2 * tail2;
    rep.c_certified = M * M + rep.eps_min;
    rep.constant_label =
        d == 1 ? "closed-form: sup embedding of H^{2s}(R), C^2 = (2pi)^-1 sqrt(pi) "
                  "Gamma(2s-1/2)/Gamma(2s)"
               : "closed-form: sup embedding of H^{2s}(R^2), C^2 = 1/(4pi(2s-1))";
  } else {
    // |v| 1_{B_R} <= eps (-lap)^s + M with the sharp fractional Sobolev
    // constant for H^s(R^d) -> L^{2d/(d-2s)}.
    if (!(s > 0.0 && 2.0 * s < d))
      throw_config("sobolev_split_bound: d >= 3 route needs s in (0, d/2)");
    const double q = d / (2.0 * s);
    if (!(p >= q))
      throw_config("sobolev_split_bound: insufficient integrability, need p >= d/(2s)");
    const double iq = tail_integral_checked(v, d, q, R, M);
    const double sharp =
        std::pow(2.0, -2.0 * s) * std::pow(std::numbers::pi, -s) *
        std::exp(std::lgamma(0.5 * (d - 2.0 * s)) - std::lgamma(0.5 * (d + 2.0 * s))) *
        std::pow(std::exp(std::lgamma(static_cast<double>(d)) - std::lgamma(0.5 * d)),
                 2.0 * s / d);
    rep.eps_min = sharp * std::pow(iq, 1.0 / q);
    rep.c_certified = M;
    rep.constant_label = "closed-form: sharp fractional Sobolev constant, "
                          "H^s(R^d) -> L^{2d/(d-2s)}";
  }
  return rep;
}

namespace {

Eigen::MatrixXd psd_sqrt_eigen(const Eigen::MatrixXd& a) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  Eigen::VectorXd roots = es.eigenvalues();
  for (Eigen::Index i = 0; i < roots.size(); ++i) roots[i] = std::sqrt(std::max(0.0, roots[i]));
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

std::vector<double> psd_sqrt_dense(const std::vector<double>& sym, int dim) {
  if (dim < 1 || sym.size() != static_cast<std::size_t>(dim) * dim)
    throw_config("psd_sqrt_dense: matrix size mismatch");
  const Eigen::Map<const Eigen::MatrixXd> a(sym.data(), dim, dim);
  const Eigen::MatrixXd r = psd_sqrt_eigen(a);
  return std::vector<double>(r.data(), r.data() + static_cast<std::size_t>(dim) * dim);
}

double min_eigenvalue_dense(const std::vector<double>& sym, int dim) {
  if (dim < 1 || sym.size() != static_cast<std::size_t>(dim) * dim)
    throw_config("min_eigenvalue_dense: matrix size mismatch");
  const Eigen::Map<const Eigen::MatrixXd> a(sym.data(), dim, dim);
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues().minCoeff();
}

SqrtMonotoneReport sqrt_monotone_check(int trials, int dim, std::uint64_t seed, double eps,
                                       double delta, double c) {
  if (dim < 1 || dim > 64) throw_config("sqrt_monotone_check: dim must lie in [1, 64]");
  if (trials < 1) throw_config("sqrt_monotone_check: trials must be >= 1");

  SqrtMonotoneReport rep;
  rep.trials = trials;
  rep.dim = dim;
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(t));
    Eigen::MatrixXd r1(dim, dim), r2(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) r1(i, j) = rng.normal();
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) r2(i, j) = rng.normal();
    const Eigen::MatrixXd a = r1.transpose() * r1 / dim;
    const Eigen::MatrixXd b = a + r2.transpose() * r2 / dim;
    const Eigen::MatrixXd gap = psd_sqrt_eigen(b) - psd_sqrt_eigen(a);
    const double mineig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gap).eigenvalues()(0);
    rep.min_gap = std::min(rep.min_gap, mineig);
    if (mineig < -1e-10) ++rep.violations;
  }

  // Scalar absorption: c' = max over t of sqrt(eps t^{3/2-2delta} + c) - eps^{2/3} t,
  // on a log grid near 0 plus a uniform grid to the right end.
  const double expo = 1.5 - 2.0 * delta;
  const double slope = std::pow(eps, 2.0 / 3.0);
  const double tmax = 1e4;
  double best = std::sqrt(c), argmax = 0.0;  // t = 0
  const auto probe = [&](double t) {
    const double val = std::sqrt(eps * std::pow(t, expo) + c) - slope * t;
    if (val > best) {
      best = val;
      argmax = t;
    }
  };
  for (int i = 0; i <= 100000; ++i) probe(std::pow(10.0, -8.0 + 12.0 * i / 100000.0));
  for (int i = 0; i <= 100000; ++i) probe(tmax * i / 100000.0);
  rep.scalar_cprime = best;
  rep.scalar_argmax_interior = argmax < 0.99 * tmax;
  return rep;
}

BootstrapReport bootstrap_chain_check(const GridFunction& psi, const AssembledPotential& V,
                                      const std::vector<double>& tau_list, double delta,
                                      double c_hint) {
  const Grid& g = psi.grid;
  if (g.boundary != Boundary::periodic)
    throw_config("bootstrap_chain_check requires a periodic grid");
  if (!g.same_geometry(V.grid))
    throw_config("bootstrap_chain_check: psi and V live on different grids");
  if (!(g.L >= 1.0)) throw_config("bootstrap_chain_check: the unit ball must fit in the box");
  if (tau_list.empty()) throw_config("bootstrap_chain_check: empty tau list");
  if (!(delta >= 0.0 && delta < 0.25))
    throw_config("bootstrap_chain_check: delta must lie in [0, 1/4)");
  for (const double tau : tau_list)
    if (!(tau > 0.0)) throw_config("bootstrap_chain_check: tau values must be positive");

  BootstrapReport rep;
  rep.delta = delta;
  rep.phi_half = std::numbers::ln2 + 1.0 / std::sqrt(std::numbers::ln2);

  const Point ctr = origin();
  const std::uint64_t npts = g.points();
  const CutoffField cut = cutoff_plateau(g, 0.5, 0.56, ctr);

  // eta*psi and the two spectral Laplacians, each masked to the exact
  // support of the field it differentiates.
  GridFunction etapsi(g);
  for (std::uint64_t p = 0; p < npts; ++p) etapsi.v[p] = cut.eta.v[p].real() * psi.v[p];

  std::vector<double> radius(npts);
  for (std::uint64_t p = 0; p < npts; ++p) radius[p] = point_distance(g, p, ctr);

  double rmin_s = std::numeric_limits<double>::infinity(), rmax_s = 0.0;
  bool any = false;
  const double half_cell = 0.5 * g.h;
  for (std::uint64_t p = 0; p < npts; ++p) {
    if (etapsi.v[p] == complex(0.0) || radius[p] < half_cell) continue;
    rmin_s = std::min(rmin_s, radius[p]);
    rmax_s = std::max(rmax_s, radius[p]);
    any = true;
  }

  std::vector<double> tlist = tau_list;
  std::sort(tlist.begin(), tlist.end());

  if (!any) {
    // psi (or its overlap with the cutoff) is identically zero: every chain
    // term vanishes and the bound holds trivially.
    rep.measured_half = 0.0;
    rep.phi_ref = 0.0;
    for (const double tau : tlist) {
      BootstrapTerm t;
      t.tau = tau;
      t.range_ok = t.triangle_ok = t.certificate_ok = t.absorb_ok = t.small_ok = t.final_ok = true;
      rep.terms.push_back(t);
    }
    rep.chain_holds = true;
    return rep;
  }

  double phi_lo = 0.0, phi_hi = 0.0;
  phi_extrema(std::min(rmin_s, 1.0 - 1e-12), std::min(rmax_s, 1.0 - 1e-12), &phi_lo, &phi_hi);
  rep.phi_ref = phi_lo;

  const Operator lap_op = Operator::laplacian_spectral(g);
  GridFunction lap_etapsi = lap_op.apply(etapsi);
  GridFunction lap_psi = lap_op.apply(psi);
  for (std::uint64_t p = 0; p < npts; ++p) {
    lap_etapsi.v[p] = etapsi.v[p] == complex(0.0) ? complex(0.0) : -lap_etapsi.v[p];
    lap_psi.v[p] = psi.v[p] == complex(0.0) ? complex(0.0) : -lap_psi.v[p];
  }

  // Pointwise identity: lap(eta psi) = V eta psi + eta(lap psi - V psi) + G,
  // with G the discrete commutator.  The triangle inequality below is exact
  // for these fields by construction.
  std::vector<complex> vt_f(npts), res_f(npts), g_f(npts), eq_f(npts);
  for (std::uint64_t p = 0; p < npts; ++p) {
    const double eta = cut.eta.v[p].real();
    if (eta == 0.0) continue;  // every field carries a factor of eta
    const complex vpsi = V.values[p] * psi.v[p];
    vt_f[p] = V.values[p] * etapsi.v[p];
    res_f[p] = eta * (lap_psi.v[p] - vpsi);
    eq_f[p] = eta * lap_psi.v[p];
    g_f[p] = lap_etapsi.v[p] - eq_f[p];
  }

  // Certificate (eps, c): pointwise cap by default, pencil on request.
  if (c_hint > 0.0) {
    const InequalityReport ineq = min_eps_form_inequality(V, 1.0, delta, c_hint);
    rep.eps_used = ineq.eps_min;
    rep.c_used = c_hint;
    rep.sigma_used = ineq.sigma;
  } else {
    double vmax2 = 0.0;
    for (std::uint64_t p = 0; p < npts; ++p)
      if (radius[p] <= 1.0) vmax2 = std::max(vmax2, V.values[p] * V.values[p]);
    rep.eps_used = 0.0;
    rep.c_used = vmax2;
    rep.sigma_used = 0.0;
  }

  rep.measured_half = std::sqrt(ball_mass(etapsi, ctr, 0.5).value);

  const double vol = g.cell_volume();
  const Operator frac_op = Operator::frac_laplacian(g, 0.75 - delta);

  const double slack = 1e-9;
  int finite_rows = 0;
  for (const double tau : tlist) {
    BootstrapTerm t;
    t.tau = tau;

    GridFunction weighted(g);
    double w2 = 0.0, eq2 = 0.0, vt2 = 0.0, p2 = 0.0, gn2 = 0.0, res2 = 0.0;
    for (std::uint64_t p = 0; p < npts; ++p) {
      const double r = radius[p];
      if (r < half_cell || r >= 1.0) continue;
      const bool used = etapsi.v[p] != complex(0.0) || lap_etapsi.v[p] != complex(0.0) ||
                        g_f[p] != complex(0.0) || res_f[p] != complex(0.0);
      if (!used) continue;
      const double w = std::exp(tau * (phi_raw(r) - phi_lo));
      const double w2i = w * w;
      w2 += w2i * std::norm(lap_etapsi.v[p]);
      eq2 += w2i * std::norm(eq_f[p]);
      vt2 += w2i * std::norm(vt_f[p]);
      p2 += w2i * std::norm(etapsi.v[p]);
      if (r >= 0.5) gn2 += w2i * std::norm(g_f[p]);
      res2 += w2i * std::norm(res_f[p]);
      weighted.v[p] = w * etapsi.v[p];
    }
    t.W = std::sqrt(w2 * vol);
    t.EQ = std::sqrt(eq2 * vol);
    t.VT = std::sqrt(vt2 * vol);
    t.P = std::sqrt(p2 * vol);
    t.GN = std::sqrt(gn2 * vol);
    t.RES = std::sqrt(res2 * vol);
    t.FR = norm_l2(frac_op.apply(weighted));

    t.range_ok = std::isfinite(t.W) && std::isfinite(t.VT) && std::isfinite(t.P) &&
                 std::isfinite(t.GN) && std::isfinite(t.RES) && std::isfinite(t.FR);
    if (t.range_ok) ++finite_rows;

    t.kappa0 = t.range_ok && t.W > 0.0 ? std::pow(tau, 1.5) * t.P / t.W : 0.0;
    t.kappa34 = t.range_ok && t.W > 0.0 ? t.FR / t.W : 0.0;

    t.triangle_ok = t.range_ok && t.W <= (t.VT + t.GN + t.RES) * (1.0 + slack) + 1e-300;
    const double cert_rhs =
        rep.eps_used * (t.FR * t.FR + rep.sigma_used * t.P * t.P) + rep.c_used * t.P * t.P;
    t.certificate_ok = t.range_ok && t.VT * t.VT <= cert_rhs * (1.0 + slack) + 1e-300;
    t.absorb_ok = t.range_ok && std::sqrt(rep.eps_used) * t.kappa34 <= 0.5;
    t.small_ok = t.range_ok && 2.0 * std::sqrt(rep.c_used) * t.kappa0 * std::pow(tau, -1.5) <= 0.5;
    rep.terms.push_back(std::move(t));
  }

  if (finite_rows == 0)
    throw_config("bootstrap_chain_check: dynamic range exceeded, the weighted quadratures "
                  "overflowed at every tau");

  for (const BootstrapTerm& t : rep.terms)
    if (t.range_ok) rep.kappa0_hat = std::max(rep.kappa0_hat, t.kappa0);

  std::vector<double> fit_x, fit_y;
  bool links_ok = true, closes_somewhere = false;
  for (BootstrapTerm& t : rep.terms) {
    t.final_bound = 4.0 * rep.kappa0_hat * std::pow(t.tau, -1.5) * (t.GN + t.RES) *
                    std::exp(-t.tau * (rep.phi_half - rep.phi_ref));
    t.final_ok = t.absorb_ok && t.small_ok &&
                 rep.measured_half <= t.final_bound * (1.0 + slack) + 1e-300;
    links_ok = links_ok && t.range_ok && t.triangle_ok && t.certificate_ok;
    closes_somewhere = closes_somewhere || (t.absorb_ok && t.small_ok && t.final_ok);
    if (t.range_ok && std::isfinite(t.final_bound) && t.final_bound > 0.0) {
      fit_x.push_back(std::log(t.tau));
      fit_y.push_back(std::log(t.final_bound));
    }
  }
  rep.decay_exponent = ls_slope(fit_x, fit_y);
  rep.chain_holds = links_ok && closes_somewhere;
  return rep;
}

ManufacturedPair manufacture_annular_eigenpair(const Grid& g, double a0, double b0, double vcap) {
  if (g.boundary != Boundary::periodic)
    throw_config("manufacture_annular_eigenpair requires a periodic grid");
  if (!(a0 > 2.0 * g.h && a0 < b0 && b0 < 1.0))
    throw_config("manufacture_annular_eigenpair: need 2h < a0 < b0 < 1");
  if (!(vcap > 0.0)) throw_config("manufacture_annular_eigenpair: vcap must be positive");

  ManufacturedPair mp;
  mp.psi = GridFunction(g);
  const Point ctr = origin();
  const double c0 = 0.5 * (a0 + b0), w = 0.5 * (b0 - a0);
  for (std::uint64_t p = 0; p < g.points(); ++p) {
    const double t = std::fabs(point_distance(g, p, ctr) - c0) / w;
    if (t < 1.0) mp.psi.v[p] = bump_profile(t);
  }

  const GridFunction lap = Operator::laplacian_spectral(g).apply(mp.psi);
  std::vector<double> vals(g.points(), 0.0);
  for (std::uint64_t p = 0; p < g.points(); ++p) {
    const double ps = mp.psi.v[p].real();
    if (ps == 0.0) continue;
    vals[p] = std::clamp(-lap.v[p].real() / ps, -vcap, vcap);
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "induced lap(psi)/psi on annulus [%.3f, %.3f], clamped to +-%g",
                a0, b0, vcap);
  mp.V = AssembledPotential{g, std::move(vals), buf};
  return mp;
}

}  // namespace ucplab
