#include "ucplab/operators.hpp"

#include <cmath>
#include <utility>

#include "ucplab/errors.hpp"
#include "ucplab/fft.hpp"
#include "ucplab/rng.hpp"

namespace ucplab {

class Operator::Impl {
 public:
  Impl(Grid g, std::string label) : grid_(g), label_(std::move(label)) {}
  virtual ~Impl() = default;
  virtual void apply(const std::vector<complex>& in, std::vector<complex>& out) const = 0;

  Grid grid_;
  std::string label_;
};

namespace {

using Values = std::vector<complex>;

class FourierMultiplierImpl final : public Operator::Impl {
 public:
  FourierMultiplierImpl(const Grid& g, std::vector<double> table, std::string label)
      : Impl(g, std::move(label)), table_(std::move(table)) {
    if (g.boundary != Boundary::periodic)
      throw_config("spectral operator '" + label_ + "' requires a periodic grid");
    if (table_.size() != g.points()) throw_config("multiplier table size does not match grid");
  }

  void apply(const Values& in, Values& out) const override {
    out = in;
    fft_all_axes(grid_, out, -1);
    for (std::uint64_t i = 0; i < out.size(); ++i) out[i] *= table_[i];
    fft_all_axes(grid_, out, +1);
  }

 private:
  std::vector<double> table_;
};

class IdentityImpl final : public Operator::Impl {
 public:
  explicit IdentityImpl(const Grid& g) : Impl(g, "identity") {}
  void apply(const Values& in, Values& out) const override { out = in; }
};

class Fd2LaplacianImpl final : public Operator::Impl {
 public:
  explicit Fd2LaplacianImpl(const Grid& g) : Impl(g, "laplacian-fd2") {}

  void apply(const Values& in, Values& out) const override {
    const Grid& g = grid_;
    const std::uint64_t total = in.size();
    out.assign(total, complex(0.0));
    const double inv_h2 = 1.0 / (g.h * g.h);
    const bool periodic = g.boundary == Boundary::periodic;
    std::uint64_t stride = 1;
    for (int a = g.n - 1; a >= 0; --a) {
      const std::uint64_t sm = stride * g.m;
      for (std::uint64_t q = 0; q < total / sm; ++q) {
        const std::uint64_t block = q * sm;
        for (std::uint64_t r = 0; r < stride; ++r) {
          const std::uint64_t base = block + r;
          for (int j = 0; j < g.m; ++j) {
            const std::uint64_t at = base + stride * j;
            complex up{0.0}, dn{0.0};
            if (j + 1 < g.m)
              up = in[at + stride];
            else if (periodic)
              up = in[base];
            if (j > 0)
              dn = in[at - stride];
            else if (periodic)
              dn = in[base + stride * (g.m - 1)];
            out[at] += (2.0 * in[at] - up - dn) * inv_h2;
          }
        }
      }
      stride = sm;
    }
  }
};

class MultiplyImpl final : public Operator::Impl {
 public:
  MultiplyImpl(const Grid& g, std::vector<double> values, std::string label)
      : Impl(g, std::move(label)), values_(std::move(values)) {
    if (values_.size() != g.points()) throw_config("multiplier field size does not match grid");
  }

  void apply(const Values& in, Values& out) const override {
    out.resize(in.size());
    for (std::uint64_t i = 0; i < in.size(); ++i) out[i] = in[i] * values_[i];
  }

 private:
  std::vector<double> values_;
};

using ImplPtr = std::shared_ptr<const Operator::Impl>;

class SumImpl final : public Operator::Impl {
 public:
  SumImpl(ImplPtr a, ImplPtr b, const Grid& g)
      : Impl(g, "sum"), a_(std::move(a)), b_(std::move(b)) {}

  void apply(const Values& in, Values& out) const override {
    Values tmp;
    a_->apply(in, out);
    b_->apply(in, tmp);
    for (std::uint64_t i = 0; i < out.size(); ++i) out[i] += tmp[i];
  }

 private:
  ImplPtr a_, b_;
};

class ScaledImpl final : public Operator::Impl {
 public:
  ScaledImpl(ImplPtr a, double factor, const Grid& g)
      : Impl(g, "scaled"), a_(std::move(a)), factor_(factor) {}

  void apply(const Values& in, Values& out) const override {
    a_->apply(in, out);
    for (complex& z : out) z *= factor_;
  }

 private:
  ImplPtr a_;
  double factor_;
};

class ComposedImpl final : public Operator::Impl {
 public:
  ComposedImpl(ImplPtr outer, ImplPtr inner, const Grid& g)
      : Impl(g, "composed"), outer_(std::move(outer)), inner_(std::move(inner)) {}

  void apply(const Values& in, Values& out) const override {
    Values mid;
    inner_->apply(in, mid);
    outer_->apply(mid, out);
  }

 private:
  ImplPtr outer_, inner_;
};

}  // namespace

GridFunction Operator::apply(const GridFunction& f) const {
  if (!f.grid.same_geometry(impl_->grid_))
    throw_config("operator '" + impl_->label_ + "' applied to a field on a different grid");
  GridFunction out;
  out.grid = f.grid;
  impl_->apply(f.v, out.v);
  return out;
}

const Grid& Operator::grid() const { return impl_->grid_; }
std::string Operator::describe() const { return impl_->label_; }

Operator Operator::laplacian_fd2(const Grid& g) {
  return Operator(std::make_shared<Fd2LaplacianImpl>(g));
}

Operator Operator::laplacian_spectral(const Grid& g) {
  return fourier_multiplier(g, radial_multiplier_table(g, [](double k2) { return k2; }),
                            "laplacian-spectral");
}

Operator Operator::frac_laplacian(const Grid& g, double s) {
  if (!(s >= 0.0 && s <= 2.0)) throw_config("frac_laplacian requires s in [0, 2]");
  if (s == 0.0) return Operator(std::make_shared<IdentityImpl>(g));
  return fourier_multiplier(
      g, radial_multiplier_table(g, [s](double k2) { return k2 == 0.0 ? 0.0 : std::pow(k2, s); }),
      "frac-laplacian(s=" + std::to_string(s) + ")");
}

Operator Operator::kinetic_nbody(const Grid& g, bool spectral) {
  if (spectral)
    return fourier_multiplier(g, radial_multiplier_table(g, [](double k2) { return k2; }),
                              "kinetic-nbody-spectral");
  return Operator(std::make_shared<Fd2LaplacianImpl>(g));
}

Operator Operator::frac_kinetic_per_particle(const Grid& g, double s) {
  if (!(s > 0.0)) throw_config("frac_kinetic_per_particle requires s > 0");
  return fourier_multiplier(
      g,
      per_particle_multiplier_table(
          g, [s](double k2) { return k2 == 0.0 ? 0.0 : std::pow(k2, s); }),
      "frac-kinetic-per-particle(s=" + std::to_string(s) + ")");
}

Operator Operator::multiply(const Grid& g, std::vector<double> values, std::string label) {
  return Operator(std::make_shared<MultiplyImpl>(g, std::move(values), std::move(label)));
}

Operator Operator::constant(const Grid& g, double c) {
  return multiply(g, std::vector<double>(g.points(), c), "constant(" + std::to_string(c) + ")");
}

Operator Operator::sum(Operator a, Operator b) {
  if (!a.grid().same_geometry(b.grid())) throw_config("cannot sum operators on different grids");
  const Grid g = a.grid();
  return Operator(std::make_shared<SumImpl>(std::move(a.impl_), std::move(b.impl_), g));
}

Operator Operator::scaled(Operator a, double factor) {
  const Grid g = a.grid();
  return Operator(std::make_shared<ScaledImpl>(std::move(a.impl_), factor, g));
}

Operator Operator::composed(Operator outer, Operator inner) {
  if (!outer.grid().same_geometry(inner.grid()))
    throw_config("cannot compose operators on different grids");
  const Grid g = outer.grid();
  return Operator(std::make_shared<ComposedImpl>(std::move(outer.impl_), std::move(inner.impl_), g));
}

Operator Operator::fourier_multiplier(const Grid& g, std::vector<double> table, std::string label) {
  return Operator(std::make_shared<FourierMultiplierImpl>(g, std::move(table), std::move(label)));
}

GridFunction frac_laplacian_apply(const GridFunction& psi, double s) {
  return Operator::frac_laplacian(psi.grid, s).apply(psi);
}

GridFunction kinetic_nbody_apply(const GridFunction& psi, bool spectral) {
  return Operator::kinetic_nbody(psi.grid, spectral).apply(psi);
}

std::vector<double> radial_multiplier_table(const Grid& g, const std::function<double(double)>& f) {
  const std::vector<double> k2 = axis_k2_table(g);
  std::vector<double> table(g.points());
  int idx[kMaxAxes] = {};
  for (std::uint64_t i = 0; i < table.size(); ++i) {
    double total = 0.0;
    for (int a = 0; a < g.n; ++a) total += k2[static_cast<std::size_t>(idx[a])];
    table[i] = f(total);
    int a = g.n - 1;
    while (a >= 0 && ++idx[a] == g.m) idx[a--] = 0;
  }
  return table;
}

std::vector<double> per_particle_multiplier_table(const Grid& g,
                                                  const std::function<double(double)>& f) {
  const std::vector<double> k2 = axis_k2_table(g);
  std::vector<double> table(g.points());
  int idx[kMaxAxes] = {};
  for (std::uint64_t i = 0; i < table.size(); ++i) {
    double total = 0.0;
    for (int p = 0; p < g.N; ++p) {
      double block = 0.0;
      for (int a = 0; a < g.d; ++a) block += k2[static_cast<std::size_t>(idx[p * g.d + a])];
      total += f(block);
    }
    table[i] = total;
    int a = g.n - 1;
    while (a >= 0 && ++idx[a] == g.m) idx[a--] = 0;
  }
  return table;
}

SymbolInequalityReport verify_symbol_inequality(double delta, std::uint64_t samples, int N,
                                                std::uint64_t seed) {
  if (!(delta >= 0.0 && delta < 0.25)) throw_config("symbol check requires delta in [0, 1/4)");
  if (N < 1) throw_config("symbol check requires N >= 1");

  const double p = 3.0 - 4.0 * delta;
  const double q = 1.5 - 2.0 * delta;
  SymbolInequalityReport rep;
  rep.samples = samples;

  constexpr std::uint64_t kChunk = 1 << 16;
  const double log_hi = std::log(1e6);
  const double log_lo = std::log(1e-3);

  // Primary band |k_i| in [1, 1e6]; chunked so the stream is independent of
  // any future parallel split.
  for (std::uint64_t done = 0, chunk = 0; done < samples; ++chunk) {
    const std::uint64_t count = std::min(kChunk, samples - done);
    Rng rng = Rng::stream(seed, chunk);
    for (std::uint64_t i = 0; i < count; ++i) {
      double lhs = 0.0, sum2 = 0.0;
      for (int j = 0; j < N; ++j) {
        const double t = std::exp(rng.uniform() * log_hi);
        lhs += std::pow(t, p);
        sum2 += t * t;
      }
      const double rhs = std::pow(sum2, q);
      if (lhs > rhs) ++rep.violations;
      rep.max_ratio = std::max(rep.max_ratio, lhs / rhs);
    }
    done += count;
  }

  // Diagnostic low band |k_i| in [1e-3, 1], outside the estimate's regime.
  const std::uint64_t low_samples = samples / 4;
  for (std::uint64_t done = 0, chunk = 0; done < low_samples; ++chunk) {
    const std::uint64_t count = std::min(kChunk, low_samples - done);
    Rng rng = Rng::stream(seed ^ 0xabcdef1234567890ull, chunk);
    for (std::uint64_t i = 0; i < count; ++i) {
      double lhs = 0.0, sum2 = 0.0;
      for (int j = 0; j < N; ++j) {
        const double t = std::exp(rng.uniform() * log_lo);
        lhs += std::pow(t, p);
        sum2 += t * t;
      }
      const double rhs = std::pow(sum2, q);
      if (lhs > rhs) ++rep.lowband_violations;
      rep.lowband_max_ratio = std::max(rep.lowband_max_ratio, lhs / rhs);
    }
    done += count;
  }
  return rep;
}

}  // namespace ucplab
