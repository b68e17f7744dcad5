#pragma once

#include <vector>

#include "ucplab/grid.hpp"

namespace ucplab {

/// In-place complex FFT over all n axes of a periodic grid (every axis has
/// length m).  sign = -1 is the forward transform; sign = +1 is the inverse
/// and includes the 1/m^n normalization, so forward-then-inverse returns the
/// input up to roundoff.
///
/// Plans are FFTW_ESTIMATE (deterministic plan choice) and cached per
/// (rank, m, sign); execution is thread-safe on distinct buffers.
void fft_all_axes(const Grid& g, std::vector<complex>& data, int sign);

/// Squared wavenumber table for one axis: entry j holds k_j^2 with
/// k_j = pi * j_signed / L and j_signed in [-m/2, m/2).  The Nyquist entry
/// carries k = -pi*(m/2)/L; only even multipliers consume this table, so the
/// cosine-only Nyquist convention is automatic.
std::vector<double> axis_k2_table(const Grid& g);

}  // namespace ucplab
