#include "ucplab/spectra.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>

#include "ucplab/errors.hpp"
#include "ucplab/fft.hpp"
#include "ucplab/rng.hpp"

namespace ucplab {

namespace {

using Col = std::vector<complex>;

complex dotc(const Col& a, const Col& b) {
  complex acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double nrm2(const Col& a) {
  double acc = 0.0;
  for (const complex& z : a) acc += std::norm(z);
  return std::sqrt(acc);
}

void axpy(const complex& alpha, const Col& x, Col& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scal(double alpha, Col& x) {
  for (complex& z : x) z *= alpha;
}

Col apply_op(const Operator& op, const Grid& g, const Col& x) {
  GridFunction f;
  f.grid = g;
  f.v = x;
  return op.apply(f).v;
}

// Orthonormalizes `col` against the columns already in `basis` (two MGS
// passes) and appends it; `image` receives the identical linear combination
// so H*col stays consistent without a fresh operator application.  Columns
// that lose more than ~13 digits to the projection are dropped.
bool append_orthonormal(std::vector<Col>& basis, std::vector<Col>* images, Col col, Col image,
                        bool has_image) {
  const double orig = nrm2(col);
  if (!(orig > 0.0) || !std::isfinite(orig)) return false;
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const complex c = dotc(basis[j], col);
      if (c == complex(0.0)) continue;
      axpy(-c, basis[j], col);
      if (has_image) axpy(-c, (*images)[j], image);
    }
  }
  const double after = nrm2(col);
  if (!(after > 1e-13 * orig)) return false;
  scal(1.0 / after, col);
  if (has_image) scal(1.0 / after, image);
  basis.push_back(std::move(col));
  if (has_image) images->push_back(std::move(image));
  return true;
}

// Phase convention shared by both solvers: the largest-magnitude entry
// (lowest index on ties) is made positive real, then the vector is
// L2-normalized on the grid.
void fix_phase_and_normalize(GridFunction& f) {
  std::uint64_t arg = 0;
  double best = -1.0;
  for (std::uint64_t i = 0; i < f.size(); ++i) {
    const double a = std::abs(f.v[i]);
    if (a > best) {
      best = a;
      arg = i;
    }
  }
  if (best > 0.0) {
    const complex phase = std::conj(f.v[arg]) / best;
    for (complex& z : f.v) z *= phase;
  }
  const double nl2 = norm_l2(f);
  if (nl2 > 0.0)
    for (complex& z : f.v) z /= nl2;
}

}  // namespace

SpectralResult solve_ground(const Operator& H, int k, double tol, std::uint64_t seed, int max_iter,
                            const Operator* precond) {
  const Grid g = H.grid();
  const std::uint64_t dim = g.points();
  if (k < 1) throw_config("solve_ground requires k >= 1");
  if (static_cast<std::uint64_t>(k) > dim) throw_config("k exceeds the grid dimension");
  if (!(tol > 0.0)) throw_config("solve_ground requires tol > 0");

  const int guard = 2;
  const int b = static_cast<int>(std::min<std::uint64_t>(k + guard, dim));

  // Seeded random block, orthonormalized.
  std::vector<Col> X;
  {
    Rng rng(seed);
    for (int j = 0; j < b; ++j) {
      Col col(dim);
      for (complex& z : col) z = complex(rng.normal(), rng.normal());
      append_orthonormal(X, nullptr, std::move(col), Col(), false);
    }
    if (static_cast<int>(X.size()) < b) throw_solver("failed to build an initial block");
  }

  std::vector<Col> HX;
  HX.reserve(X.size());
  for (const Col& x : X) HX.push_back(apply_op(H, g, x));

  std::vector<Col> P, HP;
  std::vector<double> rho(b, 0.0), resid(b, 0.0);
  bool converged = false;
  int it = 0;

  for (; it < max_iter; ++it) {
    // Residuals of the current Ritz block.
    bool all_ok = it > 0;
    for (int j = 0; j < b; ++j) {
      Col r = HX[j];
      axpy(-rho[j], X[j], r);
      resid[j] = nrm2(r);
      if (j < k && resid[j] > tol * std::max(1.0, std::abs(rho[j]))) all_ok = false;
    }
    if (all_ok) {
      converged = true;
      break;
    }

    // Assemble the trial basis S = [X | W | P] with paired H-images.
    std::vector<Col> S = X;
    std::vector<Col> HS = HX;
    const std::size_t nx = S.size();
    for (int j = 0; j < b; ++j) {
      Col r = HX[j];
      axpy(-rho[j], X[j], r);
      Col w = precond ? apply_op(*precond, g, r) : std::move(r);
      append_orthonormal(S, nullptr, std::move(w), Col(), false);
    }
    for (std::size_t j = nx; j < S.size(); ++j) HS.push_back(apply_op(H, g, S[j]));
    for (std::size_t j = 0; j < P.size(); ++j)
      append_orthonormal(S, &HS, P[j], HP[j], true);

    const int s = static_cast<int>(S.size());
    if (s == static_cast<int>(nx) && it > 0)
      break;  // no fresh directions survived; stagnation

    // Rayleigh-Ritz on the orthonormal basis.
    Eigen::MatrixXcd G(s, s);
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) G(i, j) = dotc(S[i], HS[j]);
    G = 0.5 * (G + G.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(G);
    if (eig.info() != Eigen::Success) throw_solver("Rayleigh-Ritz eigensolve failed");

    std::vector<Col> Xn(b, Col(dim, complex(0.0))), HXn(b, Col(dim, complex(0.0)));
    std::vector<Col> Pr(b, Col(dim, complex(0.0))), HPr(b, Col(dim, complex(0.0)));
    for (int v = 0; v < b; ++v) {
      rho[v] = eig.eigenvalues()(v);
      for (int j = 0; j < s; ++j) {
        const complex y = eig.eigenvectors()(j, v);
        if (y == complex(0.0)) continue;
        axpy(y, S[j], Xn[v]);
        axpy(y, HS[j], HXn[v]);
        if (j >= static_cast<int>(nx)) {  // W and P rows feed the next P
          axpy(y, S[j], Pr[v]);
          axpy(y, HS[j], HPr[v]);
        }
      }
    }
    X = std::move(Xn);
    HX = std::move(HXn);

    P.clear();
    HP.clear();
    for (int v = 0; v < b; ++v)
      append_orthonormal(P, &HP, std::move(Pr[v]), std::move(HPr[v]), true);
  }

  SpectralResult out;
  out.tol = tol;
  out.iterations = it;
  out.converged = converged;
  out.eigenvalues.assign(rho.begin(), rho.end());
  for (int j = 0; j + 1 < b; ++j)
    if (std::abs(rho[j + 1] - rho[j]) < 10.0 * tol && j < k) out.degenerate = true;

  const double vol_root = std::sqrt(g.cell_volume());
  for (int j = 0; j < k; ++j) {
    GridFunction f;
    f.grid = g;
    f.v = std::move(X[j]);
    fix_phase_and_normalize(f);
    Col hf = apply_op(H, g, f.v);
    axpy(-rho[j], f.v, hf);
    out.residuals.push_back(nrm2(hf) * vol_root);
    out.eigenvectors.push_back(std::move(f));
  }
  return out;
}

SpectralResult dense_oracle(const Operator& H, int k_keep) {
  const Grid g = H.grid();
  const std::uint64_t dim = g.points();
  if (dim > 4096) throw_config("dense oracle is limited to grids of at most 4096 points");

  // Materialize column by column; the operators used here are real symmetric
  // in the position basis, which we verify rather than assume.
  Eigen::MatrixXd A(dim, dim);
  GridFunction e;
  e.grid = g;
  e.v.assign(dim, complex(0.0));
  double scale = 0.0;
  double max_imag = 0.0;
  for (std::uint64_t j = 0; j < dim; ++j) {
    e.v[j] = 1.0;
    GridFunction col = H.apply(e);
    e.v[j] = 0.0;
    for (std::uint64_t i = 0; i < dim; ++i) {
      A(i, j) = col.v[i].real();
      max_imag = std::max(max_imag, std::abs(col.v[i].imag()));
      scale = std::max(scale, std::abs(col.v[i].real()));
    }
  }
  if (max_imag > 1e-10 * std::max(1.0, scale))
    throw_config("dense oracle expects a real-symmetric operator");
  const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * std::max(1.0, scale))
    throw_config("dense oracle expects a symmetric operator (asymmetry detected)");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (A + A.transpose()));
  if (eig.info() != Eigen::Success) throw_solver("dense eigendecomposition failed");

  SpectralResult out;
  out.converged = true;
  out.trace = A.trace();
  out.eigenvalues.assign(eig.eigenvalues().data(), eig.eigenvalues().data() + dim);

  const int keep = static_cast<int>(std::min<std::uint64_t>(k_keep, dim));
  for (int v = 0; v < keep; ++v) {
    GridFunction f;
    f.grid = g;
    f.v.resize(dim);
    for (std::uint64_t i = 0; i < dim; ++i) f.v[i] = eig.eigenvectors()(i, v);
    fix_phase_and_normalize(f);
    GridFunction hf = H.apply(f);
    double rnorm = 0.0;
    for (std::uint64_t i = 0; i < dim; ++i)
      rnorm += std::norm(hf.v[i] - out.eigenvalues[v] * f.v[i]);
    out.residuals.push_back(std::sqrt(rnorm * g.cell_volume()));
    out.eigenvectors.push_back(std::move(f));
  }
  return out;
}

Operator kinetic_preconditioner(const Grid& g, bool spectral_kinetic, double shift) {
  if (!(shift > 0.0)) throw_config("preconditioner shift must be positive");
  std::vector<double> table;
  if (spectral_kinetic) {
    table = radial_multiplier_table(g, [shift](double k2) { return 1.0 / (k2 + shift); });
  } else {
    // Exact Fourier symbol of the periodic FD2 Laplacian.
    const double h = g.h;
    std::vector<double> k2 = axis_k2_table(g);
    table.resize(g.points());
    std::vector<double> axis_sym(k2.size());
    for (std::size_t j = 0; j < k2.size(); ++j) {
      const double kh = std::sqrt(k2[j]) * h;
      axis_sym[j] = (2.0 - 2.0 * std::cos(kh)) / (h * h);
    }
    int idx[kMaxAxes] = {};
    for (std::uint64_t i = 0; i < table.size(); ++i) {
      double sym = 0.0;
      for (int a = 0; a < g.n; ++a) sym += axis_sym[static_cast<std::size_t>(idx[a])];
      table[i] = 1.0 / (sym + shift);
      int a = g.n - 1;
      while (a >= 0 && ++idx[a] == g.m) idx[a--] = 0;
    }
  }
  return Operator::fourier_multiplier(g, std::move(table), "kinetic-preconditioner");
}

}  // namespace ucplab
