#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace ucplab {

using complex = std::complex<double>;

/// Hard cap on the number of tensor axes (d*N).  Desk-scale problems use
/// n <= 4; the extra headroom costs nothing.
inline constexpr int kMaxAxes = 6;

/// Default cap on total grid points m^n.
inline constexpr std::uint64_t kDefaultPointBudget = std::uint64_t(1) << 22;

enum class Boundary { periodic, dirichlet_box };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

/// Uniform tensor-product grid on the box [-L, L]^n, n = d*N, with m points
/// per axis and spacing h = 2L/m.
///
/// Point placement differs by boundary condition:
///  - periodic:      x_j = -L + j*h        (node at -L, +L identified with -L)
///  - dirichlet_box: x_j = -L + (j+1/2)*h  (cell centres; the wall carries u=0)
///
/// L is nudged by at most one ulp at construction so that m*h == 2*L holds
/// exactly in the stored representation.
struct Grid {
  int d = 1;          ///< single-particle dimension
  int N = 1;          ///< particle count
  int n = 1;          ///< total axes, d*N
  int m = 0;          ///< points per axis
  double L = 0.0;     ///< box half-width
  double h = 0.0;     ///< spacing, 2L/m
  Boundary boundary = Boundary::periodic;

  std::uint64_t points() const {
    std::uint64_t p = 1;
    for (int a = 0; a < n; ++a) p *= static_cast<std::uint64_t>(m);
    return p;
  }

  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < n; ++a) v *= h;
    return v;
  }

  /// Coordinate of index j along any axis.
  double coord(int j) const {
    return boundary == Boundary::periodic ? -L + h * j : -L + h * (j + 0.5);
  }

  /// Row-major decode, axis 0 slowest.
  void decode(std::uint64_t flat, int* idx) const {
    for (int a = n - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(flat % m);
      flat /= m;
    }
  }

  std::uint64_t encode(const int* idx) const {
    std::uint64_t flat = 0;
    for (int a = 0; a < n; ++a) flat = flat * m + static_cast<std::uint64_t>(idx[a]);
    return flat;
  }

  bool same_geometry(const Grid& o) const {
    return d == o.d && N == o.N && m == o.m && L == o.L && boundary == o.boundary;
  }

  /// The d-dimensional single-particle grid with identical axis layout.
  Grid one_particle() const;
};

/// Validates parameters and constructs a grid.
///
/// Throws ErrorKind::config for bad dimensions (d, N < 1, n > kMaxAxes,
/// m < 4, non-positive L, or a periodic grid whose m is not a power of two)
/// and ErrorKind::resource when m^n exceeds max_points.
Grid make_grid(int d, int N, int m, double L, Boundary boundary,
               std::uint64_t max_points = kDefaultPointBudget);

/// Complex scalar field sampled on a Grid, stored row-major (axis 0 slowest).
struct GridFunction {
  Grid grid;
  std::vector<complex> v;

  GridFunction() = default;
  explicit GridFunction(const Grid& g) : grid(g), v(g.points()) {}

  std::uint64_t size() const { return v.size(); }
  complex& operator[](std::uint64_t i) { return v[i]; }
  const complex& operator[](std::uint64_t i) const { return v[i]; }
};

/// Discrete L^2 inner product  h^n * sum conj(f_i) g_i.
complex inner(const GridFunction& f, const GridFunction& g);

/// Discrete L^2 norm, sqrt(inner(f, f)).
double norm_l2(const GridFunction& f);

/// Largest |f_i|.
double norm_max(const GridFunction& f);

/// Point in R^n; only the first grid.n entries are meaningful.
using Point = std::array<double, kMaxAxes>;

inline Point origin() { return Point{}; }

/// Euclidean distance from grid point `flat` to `center` (no periodic wrap;
/// balls are assumed to sit inside the fundamental box).
double point_distance(const Grid& g, std::uint64_t flat, const Point& center);

/// Smooth radial cutoff and the measured constants of its discrete
/// derivatives.  grad_const ~ sup|grad eta| * eps and lap_const ~
/// sup|lap eta| * eps^2 are reported so callers can confirm the C/eps and
/// C/eps^2 scaling without recomputing derivatives.
struct CutoffField {
  GridFunction eta;
  double grad_const = 0.0;
  double lap_const = 0.0;
};

/// eta == 1 on the ball |x-center| <= eps, 0 outside |x-center| >= 2*eps,
/// bridged by the fixed radial profile exp(1 - 1/(1-t^2)).
///
/// Requires eps > 0 and the outer ball to fit inside the box.
CutoffField cutoff_eta(const Grid& g, double eps, const Point& center);

/// Same profile rescaled to an arbitrary plateau/support pair
/// r_inner < r_outer.  cutoff_eta(g, e, c) == cutoff_plateau(g, e, 2e, c).
CutoffField cutoff_plateau(const Grid& g, double r_inner, double r_outer, const Point& center);

/// Value of the fixed bridge profile at t in [0, 1]; 1 at t=0, 0 at t>=1.
double bump_profile(double t);

struct WeightedBallNorm {
  double value = 0.0;          ///< h^n * sum_{h/2 <= |x-c| <= r} |x-c|^-tau |psi|^2
  std::uint64_t dropped = 0;   ///< grid points inside |x-c| < h/2, excluded
};

/// Weighted quadrature of |psi|^2 |x-center|^-tau over the ball of the given
/// radius (intersected with the box).  Grid points closer than h/2 to the
/// center are always excluded and counted in `dropped`, so singular weights
/// never touch the r=0 node; the convention is applied uniformly, including
/// tau = 0.  Requires tau >= 0 and 0 < radius <= L.
WeightedBallNorm weighted_ball_norm(const GridFunction& psi, double tau, double radius,
                                    const Point& center);

/// Plain ball mass: weighted_ball_norm with tau = 0.
WeightedBallNorm ball_mass(const GridFunction& psi, const Point& center, double radius);

/// Writes <stem>.bin (raw little-endian f64 (re, im) pairs, row-major) and
/// a JSON sidecar <stem>.json describing the grid.
void save_grid_function(const GridFunction& f, const std::string& stem);

/// Loads a pair written by save_grid_function.  Throws ErrorKind::io on
/// missing/short files and ErrorKind::config on a malformed sidecar.
GridFunction load_grid_function(const std::string& stem);

}  // namespace ucplab
