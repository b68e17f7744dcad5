#include "ucplab/hamiltonian.hpp"

#include <cmath>
#include <cstdio>

#include "ucplab/errors.hpp"
#include "ucplab/rng.hpp"

namespace ucplab {

namespace {

double radius2(const double* x, int d) {
  double r2 = 0.0;
  for (int a = 0; a < d; ++a) r2 += x[a] * x[a];
  return r2;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Multilinear interpolation of a tabulated field; coordinates outside the
// table are clamped to the boundary cell.
double interp(const PotentialSpec::Tabulated& t, const double* x) {
  const Grid& g = t.grid1;
  const double offset = g.boundary == Boundary::periodic ? 0.0 : 0.5;
  int base[kMaxAxes];
  double frac[kMaxAxes];
  for (int a = 0; a < g.d; ++a) {
    double u = (x[a] + g.L) / g.h - offset;  // fractional index
    u = std::min(std::max(u, 0.0), static_cast<double>(g.m - 1));
    const double fl = std::floor(u);
    base[a] = std::min(static_cast<int>(fl), g.m - 2);
    frac[a] = u - base[a];
  }
  double acc = 0.0;
  for (int corner = 0; corner < (1 << g.d); ++corner) {
    double wgt = 1.0;
    std::uint64_t flat = 0;
    for (int a = 0; a < g.d; ++a) {
      const int bit = (corner >> a) & 1;
      wgt *= bit ? frac[a] : 1.0 - frac[a];
      flat = flat * g.m + static_cast<std::uint64_t>(base[a] + bit);
    }
    acc += wgt * t.values[flat];
  }
  return acc;
}

}  // namespace

PotentialSpec PotentialSpec::harmonic(double kappa) {
  if (!std::isfinite(kappa)) throw_config("harmonic: kappa must be finite");
  return PotentialSpec(Node(Harmonic{kappa}));
}

PotentialSpec PotentialSpec::soft_coulomb(double q, double a) {
  if (!std::isfinite(q) || !(a > 0.0)) throw_config("soft-coulomb: requires finite q and a > 0");
  return PotentialSpec(Node(SoftCoulomb{q, a}));
}

PotentialSpec PotentialSpec::power_singular(double alpha, double cap) {
  if (!(alpha > 0.0) || !(cap > 0.0)) throw_config("power-singular: requires alpha > 0 and cap > 0");
  return PotentialSpec(Node(PowerSingular{alpha, cap}));
}

PotentialSpec PotentialSpec::gaussian_well(double depth, double width) {
  if (!std::isfinite(depth) || !(width > 0.0))
    throw_config("gaussian-well: requires finite depth and width > 0");
  return PotentialSpec(Node(GaussianWell{depth, width}));
}

PotentialSpec PotentialSpec::constant(double c) {
  if (!std::isfinite(c)) throw_config("constant: value must be finite");
  return PotentialSpec(Node(Constant{c}));
}

PotentialSpec PotentialSpec::tabulated(const Grid& grid1, std::vector<double> values) {
  if (grid1.N != 1) throw_config("tabulated: grid must be a one-particle grid (N = 1)");
  if (grid1.d > 3) throw_config("tabulated: interpolation supports d <= 3");
  if (values.size() != grid1.points()) throw_config("tabulated: value count does not match grid");
  for (double v : values)
    if (!std::isfinite(v)) throw_config("tabulated: values must be finite");
  return PotentialSpec(Node(Tabulated{grid1, std::move(values)}));
}

PotentialSpec PotentialSpec::sum(std::vector<PotentialSpec> terms) {
  if (terms.empty()) throw_config("sum: needs at least one term");
  return PotentialSpec(Node(Sum{std::move(terms)}));
}

double PotentialSpec::eval(const double* x, int d) const {
  return std::visit(
      [&](const auto& node) -> double {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Harmonic>) {
          return node.kappa * radius2(x, d);
        } else if constexpr (std::is_same_v<T, SoftCoulomb>) {
          return -node.q / std::sqrt(radius2(x, d) + node.a * node.a);
        } else if constexpr (std::is_same_v<T, PowerSingular>) {
          const double r = std::sqrt(radius2(x, d));
          return std::min(std::pow(r, -node.alpha), node.cap);
        } else if constexpr (std::is_same_v<T, GaussianWell>) {
          return -node.depth * std::exp(-radius2(x, d) / (node.width * node.width));
        } else if constexpr (std::is_same_v<T, Constant>) {
          return node.c;
        } else if constexpr (std::is_same_v<T, Tabulated>) {
          if (d != node.grid1.d) throw_config("tabulated: dimension mismatch in eval");
          return interp(node, x);
        } else {
          double acc = 0.0;
          for (const PotentialSpec& term : node.terms) acc += term.eval(x, d);
          return acc;
        }
      },
      *node_);
}

double PotentialSpec::eval1d(double x) const { return eval(&x, 1); }

bool PotentialSpec::is_even(int d, double box_half_width, std::uint64_t seed, int samples) const {
  return std::visit(
      [&](const auto& node) -> bool {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Sum>) {
          for (const PotentialSpec& term : node.terms)
            if (!term.is_even(d, box_half_width, seed, samples)) return false;
          return true;
        } else if constexpr (std::is_same_v<T, Tabulated>) {
          Rng rng(seed);
          double scale = 0.0;
          for (double v : node.values) scale = std::max(scale, std::abs(v));
          for (int s = 0; s < samples; ++s) {
            double x[kMaxAxes], mx[kMaxAxes];
            for (int a = 0; a < d; ++a) {
              x[a] = rng.uniform(-box_half_width, box_half_width);
              mx[a] = -x[a];
            }
            if (std::abs(eval(x, d) - eval(mx, d)) > 1e-10 * std::max(1.0, scale)) return false;
          }
          return true;
        } else {
          return true;  // radial by construction
        }
      },
      *node_);
}

std::string PotentialSpec::describe() const {
  return std::visit(
      [](const auto& node) -> std::string {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, Harmonic>) {
          return "harmonic(kappa=" + num(node.kappa) + ")";
        } else if constexpr (std::is_same_v<T, SoftCoulomb>) {
          return "soft-coulomb(q=" + num(node.q) + ", a=" + num(node.a) + ")";
        } else if constexpr (std::is_same_v<T, PowerSingular>) {
          return "power-singular(alpha=" + num(node.alpha) + ", cap=" + num(node.cap) + ")";
        } else if constexpr (std::is_same_v<T, GaussianWell>) {
          return "gaussian-well(depth=" + num(node.depth) + ", width=" + num(node.width) + ")";
        } else if constexpr (std::is_same_v<T, Constant>) {
          return "constant(" + num(node.c) + ")";
        } else if constexpr (std::is_same_v<T, Tabulated>) {
          return "tabulated(m=" + std::to_string(node.grid1.m) + ")";
        } else {
          std::string s = "sum(";
          for (std::size_t i = 0; i < node.terms.size(); ++i) {
            if (i) s += ", ";
            s += node.terms[i].describe();
          }
          return s + ")";
        }
      },
      *node_);
}

AssembledPotential assemble_total_potential(const PotentialSpec& v, const PotentialSpec& w,
                                            const Grid& grid) {
  if (grid.N >= 2 && !w.is_even(grid.d, 2.0 * grid.L, /*seed=*/7))
    throw_config("interaction w must be even under x -> -x");

  AssembledPotential out;
  out.grid = grid;
  out.values.resize(grid.points());
  out.provenance = "v=" + v.describe() + ", w=" + w.describe();

  const int d = grid.d, N = grid.N;
  int idx[kMaxAxes] = {};
  double coords[kMaxAxes];
  for (std::uint64_t i = 0; i < out.values.size(); ++i) {
    for (int a = 0; a < grid.n; ++a) coords[a] = grid.coord(idx[a]);
    double total = 0.0;
    for (int p = 0; p < N; ++p) total += v.eval(coords + p * d, d);
    double diff[kMaxAxes];
    for (int p = 0; p < N; ++p)
      for (int q = p + 1; q < N; ++q) {
        for (int a = 0; a < d; ++a) diff[a] = coords[p * d + a] - coords[q * d + a];
        total += w.eval(diff, d);
      }
    if (!std::isfinite(total))
      throw_config("potential is non-finite on a grid node; cap the singularity or move the grid");
    out.values[i] = total;

    int a = grid.n - 1;
    while (a >= 0 && ++idx[a] == grid.m) idx[a--] = 0;
  }
  return out;
}

Hamiltonian build_hamiltonian(const PotentialSpec& v, const PotentialSpec& w, const Grid& grid,
                              bool spectral_kinetic) {
  AssembledPotential pot = assemble_total_potential(v, w, grid);
  Operator kin = Operator::kinetic_nbody(grid, spectral_kinetic);
  Operator op = Operator::sum(std::move(kin),
                              Operator::multiply(grid, pot.values, "total-potential"));
  return Hamiltonian{std::move(op), std::move(pot), spectral_kinetic};
}

}  // namespace ucplab
