#include "ucplab/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "ucplab/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "grid-function serialization assumes a little-endian host");

namespace ucplab {

std::string to_string(Boundary b) {
  return b == Boundary::periodic ? "periodic" : "dirichlet-box";
}

Boundary boundary_from_string(const std::string& s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "dirichlet-box") return Boundary::dirichlet_box;
  throw_config("unknown boundary '" + s + "' (expected 'periodic' or 'dirichlet-box')");
}

Grid Grid::one_particle() const {
  Grid g = *this;
  g.N = 1;
  g.n = d;
  return g;
}

Grid make_grid(int d, int N, int m, double L, Boundary boundary, std::uint64_t max_points) {
  if (d < 1 || N < 1) throw_config("grid dimensions must satisfy d >= 1 and N >= 1");
  const int n = d * N;
  if (n > kMaxAxes) throw_config("total axis count d*N exceeds " + std::to_string(kMaxAxes));
  if (m < 4) throw_config("need at least 4 points per axis");
  if (!(L > 0.0) || !std::isfinite(L)) throw_config("box half-width L must be positive and finite");
  if (boundary == Boundary::periodic && (m & (m - 1)) != 0)
    throw_config("periodic grids require a power-of-two point count per axis, got m = " +
                 std::to_string(m));

  std::uint64_t pts = 1;
  for (int a = 0; a < n; ++a) {
    if (pts > max_points / static_cast<std::uint64_t>(m))
      throw_resource("grid of " + std::to_string(m) + "^" + std::to_string(n) +
                     " points exceeds the budget of " + std::to_string(max_points));
    pts *= static_cast<std::uint64_t>(m);
  }

  Grid g;
  g.d = d;
  g.N = N;
  g.n = n;
  g.m = m;
  g.boundary = boundary;
  g.h = 2.0 * L / m;
  // Re-derive L from h so the identity m*h == 2*L is exact in the stored
  // fields even when 2L/m rounds (non-power-of-two m).
  g.L = m * g.h / 2.0;
  return g;
}

complex inner(const GridFunction& f, const GridFunction& g) {
  complex acc = 0.0;
  for (std::uint64_t i = 0; i < f.size(); ++i) acc += std::conj(f.v[i]) * g.v[i];
  return acc * f.grid.cell_volume();
}

double norm_l2(const GridFunction& f) {
  double acc = 0.0;
  for (const complex& z : f.v) acc += std::norm(z);
  return std::sqrt(acc * f.grid.cell_volume());
}

double norm_max(const GridFunction& f) {
  double mx = 0.0;
  for (const complex& z : f.v) mx = std::max(mx, std::abs(z));
  return mx;
}

double point_distance(const Grid& g, std::uint64_t flat, const Point& center) {
  int idx[kMaxAxes];
  g.decode(flat, idx);
  double r2 = 0.0;
  for (int a = 0; a < g.n; ++a) {
    const double dx = g.coord(idx[a]) - center[a];
    r2 += dx * dx;
  }
  return std::sqrt(r2);
}

double bump_profile(double t) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

namespace {

// Per-axis index window [lo, hi] covering |x_a - c_a| <= radius.
void axis_window(const Grid& g, double center, double radius, int& lo, int& hi) {
  const double offset = g.boundary == Boundary::periodic ? 0.0 : 0.5;
  // coord(j) = -L + (j + offset) h
  const double jlo = (center - radius + g.L) / g.h - offset;
  const double jhi = (center + radius + g.L) / g.h - offset;
  lo = std::max(0, static_cast<int>(std::floor(jlo)));
  hi = std::min(g.m - 1, static_cast<int>(std::ceil(jhi)));
}

// Calls fn(flat, r2) for every grid point whose distance to center is at
// most radius.  Iterates only the bounding box of the ball.
template <class Fn>
void for_ball(const Grid& g, const Point& center, double radius, Fn&& fn) {
  int lo[kMaxAxes], hi[kMaxAxes], idx[kMaxAxes];
  for (int a = 0; a < g.n; ++a) {
    axis_window(g, center[a], radius, lo[a], hi[a]);
    if (lo[a] > hi[a]) return;
    idx[a] = lo[a];
  }
  const double r2max = radius * radius;
  while (true) {
    double r2 = 0.0;
    for (int a = 0; a < g.n; ++a) {
      const double dx = g.coord(idx[a]) - center[a];
      r2 += dx * dx;
    }
    if (r2 <= r2max) fn(g.encode(idx), r2);
    int a = g.n - 1;
    while (a >= 0) {
      if (++idx[a] <= hi[a]) break;
      idx[a] = lo[a];
      --a;
    }
    if (a < 0) break;
  }
}

}  // namespace

WeightedBallNorm weighted_ball_norm(const GridFunction& psi, double tau, double radius,
                                    const Point& center) {
  const Grid& g = psi.grid;
  if (!(tau >= 0.0)) throw_config("weighted_ball_norm requires tau >= 0");
  if (!(radius > 0.0) || radius > g.L) throw_config("weighted_ball_norm requires 0 < radius <= L");

  WeightedBallNorm out;
  const double rmin = 0.5 * g.h;
  const double rmin2 = rmin * rmin;
  double acc = 0.0;
  for_ball(g, center, radius, [&](std::uint64_t flat, double r2) {
    if (r2 < rmin2) {
      ++out.dropped;
      return;
    }
    const double a2 = std::norm(psi.v[flat]);
    if (tau == 0.0) {
      acc += a2;
    } else {
      acc += a2 * std::pow(r2, -0.5 * tau);
    }
  });
  out.value = acc * g.cell_volume();
  return out;
}

WeightedBallNorm ball_mass(const GridFunction& psi, const Point& center, double radius) {
  return weighted_ball_norm(psi, 0.0, radius, center);
}

namespace {

// Central-difference gradient/Laplacian sup norms of a field, used to report
// the measured cutoff constants.  Dirichlet walls see zero ghost values,
// consistent with the FD2 operator.
void fd_sup_derivatives(const GridFunction& f, double& sup_grad, double& sup_lap) {
  const Grid& g = f.grid;
  const std::uint64_t npts = f.size();
  sup_grad = 0.0;
  sup_lap = 0.0;
  std::uint64_t stride[kMaxAxes];
  stride[g.n - 1] = 1;
  for (int a = g.n - 2; a >= 0; --a) stride[a] = stride[a + 1] * g.m;
  int idx[kMaxAxes];
  for (std::uint64_t i = 0; i < npts; ++i) {
    g.decode(i, idx);
    double grad2 = 0.0;
    double lap = 0.0;
    for (int a = 0; a < g.n; ++a) {
      complex up, dn;
      if (g.boundary == Boundary::periodic) {
        up = f.v[idx[a] + 1 < g.m ? i + stride[a] : i - stride[a] * (g.m - 1)];
        dn = f.v[idx[a] > 0 ? i - stride[a] : i + stride[a] * (g.m - 1)];
      } else {
        up = idx[a] + 1 < g.m ? f.v[i + stride[a]] : complex(0.0);
        dn = idx[a] > 0 ? f.v[i - stride[a]] : complex(0.0);
      }
      const double da = std::abs(up - dn) / (2.0 * g.h);
      grad2 += da * da;
      lap += ((up - f.v[i]) + (dn - f.v[i])).real() / (g.h * g.h);
    }
    sup_grad = std::max(sup_grad, std::sqrt(grad2));
    sup_lap = std::max(sup_lap, std::abs(lap));
  }
}

}  // namespace

CutoffField cutoff_plateau(const Grid& g, double r_inner, double r_outer, const Point& center) {
  if (!(r_inner > 0.0) || !(r_outer > r_inner))
    throw_config("cutoff requires 0 < r_inner < r_outer");
  for (int a = 0; a < g.n; ++a)
    if (std::abs(center[a]) + r_outer > g.L)
      throw_config("cutoff support pokes outside the box; shrink the radius or enlarge L");

  CutoffField out;
  out.eta = GridFunction(g);
  const double width = r_outer - r_inner;
  for (std::uint64_t i = 0; i < out.eta.size(); ++i) {
    const double r = point_distance(g, i, center);
    out.eta.v[i] = bump_profile((r - r_inner) / width);
  }
  double sg = 0.0, sl = 0.0;
  fd_sup_derivatives(out.eta, sg, sl);
  out.grad_const = sg * width;
  out.lap_const = sl * width * width;
  return out;
}

CutoffField cutoff_eta(const Grid& g, double eps, const Point& center) {
  // Bridge width equals eps, so the constants reported by cutoff_plateau are
  // already the eps- and eps^2-scaled ones.
  return cutoff_plateau(g, eps, 2.0 * eps, center);
}

void save_grid_function(const GridFunction& f, const std::string& stem) {
  {
    std::ofstream bin(stem + ".bin", std::ios::binary | std::ios::trunc);
    if (!bin) throw_io("cannot open '" + stem + ".bin' for writing");
    for (const complex& z : f.v) {
      const double re = z.real(), im = z.imag();
      bin.write(reinterpret_cast<const char*>(&re), sizeof re);
      bin.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
    if (!bin) throw_io("short write to '" + stem + ".bin'");
  }
  nlohmann::ordered_json side;
  side["schema"] = "ucplab/1";
  side["n"] = f.grid.n;
  side["d"] = f.grid.d;
  side["N"] = f.grid.N;
  side["m"] = f.grid.m;
  side["L"] = f.grid.L;
  side["boundary"] = to_string(f.grid.boundary);
  std::ofstream js(stem + ".json", std::ios::trunc);
  if (!js) throw_io("cannot open '" + stem + ".json' for writing");
  js << side.dump(2) << '\n';
  if (!js) throw_io("short write to '" + stem + ".json'");
}

GridFunction load_grid_function(const std::string& stem) {
  nlohmann::json side;
  {
    std::ifstream js(stem + ".json");
    if (!js) throw_io("cannot open sidecar '" + stem + ".json'");
    try {
      js >> side;
    } catch (const nlohmann::json::exception& e) {
      throw_config("malformed sidecar '" + stem + ".json': " + e.what());
    }
  }
  Grid g;
  try {
    g = make_grid(side.at("d").get<int>(), side.at("N").get<int>(), side.at("m").get<int>(),
                  side.at("L").get<double>(),
                  boundary_from_string(side.at("boundary").get<std::string>()));
    if (side.at("n").get<int>() != g.n) throw_config("sidecar n does not equal d*N");
  } catch (const nlohmann::json::exception& e) {
    throw_config("sidecar '" + stem + ".json' missing required key: " + e.what());
  }

  GridFunction f(g);
  std::ifstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw_io("cannot open '" + stem + ".bin'");
  for (complex& z : f.v) {
    double re = 0.0, im = 0.0;
    bin.read(reinterpret_cast<char*>(&re), sizeof re);
    bin.read(reinterpret_cast<char*>(&im), sizeof im);
    if (!bin) throw_io("'" + stem + ".bin' is shorter than the sidecar promises");
    z = complex(re, im);
  }
  return f;
}

}  // namespace ucplab
