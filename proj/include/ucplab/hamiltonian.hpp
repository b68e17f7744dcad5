#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "ucplab/grid.hpp"
#include "ucplab/operators.hpp"

namespace ucplab {

/// Declarative one-particle potential (or pair interaction).  All analytic
/// kinds are radial, hence automatically even; tabulated fields are checked
/// for evenness by sampling when used as an interaction.
///
/// Kinds and their values at a point x in R^d:
///   harmonic(kappa)            kappa * |x|^2
///   soft-coulomb(q, a)         -q / sqrt(|x|^2 + a^2)
///   power-singular(alpha, cap) min(|x|^-alpha, cap)
///   gaussian-well(depth, width) -depth * exp(-|x|^2 / width^2)
///                              (negative depth gives a barrier)
///   constant(c)                c
///   tabulated(values)          multilinear interpolation on a d-grid
///   sum(list)                  sum of the parts
class PotentialSpec {
 public:
  struct Harmonic {
    double kappa;
  };
  struct SoftCoulomb {
    double q, a;
  };
  struct PowerSingular {
    double alpha, cap;
  };
  struct GaussianWell {
    double depth, width;
  };
  struct Constant {
    double c;
  };
  struct Tabulated {
    Grid grid1;                  ///< d-dimensional one-particle grid
    std::vector<double> values;  ///< one value per grid1 point
  };
  struct Sum {
    std::vector<PotentialSpec> terms;
  };

  static PotentialSpec harmonic(double kappa);
  static PotentialSpec soft_coulomb(double q, double a);
  static PotentialSpec power_singular(double alpha, double cap);
  static PotentialSpec gaussian_well(double depth, double width);
  static PotentialSpec constant(double c);
  static PotentialSpec tabulated(const Grid& grid1, std::vector<double> values);
  static PotentialSpec sum(std::vector<PotentialSpec> terms);

  /// Value at x (first d entries of the array are read).
  double eval(const double* x, int d) const;
  double eval1d(double x) const;

  /// True when the spec is even under x -> -x.  Analytic kinds are radial;
  /// tabulated specs are sampled at `samples` random points.
  bool is_even(int d, double box_half_width, std::uint64_t seed, int samples = 64) const;

  /// Short provenance string, e.g. "harmonic(kappa=1)".
  std::string describe() const;

  const auto& node() const { return node_; }

 private:
  using Node =
      std::variant<Harmonic, SoftCoulomb, PowerSingular, GaussianWell, Constant, Tabulated, Sum>;
  explicit PotentialSpec(Node node) : node_(std::make_shared<Node>(std::move(node))) {}
  std::shared_ptr<const Node> node_;
};

/// Total N-body potential sampled on the full grid:
///   V(x_1..x_N) = sum_i v(x_i) + sum_{i<j} w(x_i - x_j).
struct AssembledPotential {
  Grid grid;
  std::vector<double> values;
  std::string provenance;  ///< "v=..., w=..." description of the inputs
};

/// Evaluates the total potential on every grid point.  Throws
/// ErrorKind::config when a value comes out non-finite (uncapped singularity
/// on a node) or when w fails the evenness check.
AssembledPotential assemble_total_potential(const PotentialSpec& v, const PotentialSpec& w,
                                            const Grid& grid);

/// Assembled Schrodinger operator  sum_i -Laplacian_{x_i} + V  together with
/// the potential it was built from.
struct Hamiltonian {
  Operator op;
  AssembledPotential potential;
  bool spectral_kinetic = true;
};

Hamiltonian build_hamiltonian(const PotentialSpec& v, const PotentialSpec& w, const Grid& grid,
                              bool spectral_kinetic);

}  // namespace ucplab
