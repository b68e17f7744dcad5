#include "ucplab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <numbers>

#include "ucplab/errors.hpp"

namespace ucplab {

namespace {

// FFTW's planner is not thread-safe; executing a plan on fresh buffers is.
// Plans are made once per (rank, m, sign) on a throwaway buffer and reused
// through the new-array execute interface.  FFTW_UNALIGNED keeps the plan
// valid for whatever alignment std::vector hands us.
class PlanCache {
 public:
  fftw_plan get(int rank, int m, int sign) {
    std::scoped_lock lock(mu_);
    const Key key{rank, m, sign};
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    std::size_t total = 1;
    for (int a = 0; a < rank; ++a) total *= static_cast<std::size_t>(m);
    fftw_complex* buf = fftw_alloc_complex(total);
    if (!buf) throw_resource("FFTW scratch allocation failed");
    int dims[kMaxAxes];
    for (int a = 0; a < rank; ++a) dims[a] = m;
    fftw_plan plan = fftw_plan_dft(rank, dims, buf, buf, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!plan) throw_resource("FFTW plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  struct Key {
    int rank, m, sign;
    bool operator<(const Key& o) const {
      return std::tie(rank, m, sign) < std::tie(o.rank, o.m, o.sign);
    }
  };
  std::mutex mu_;
  std::map<Key, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace

void fft_all_axes(const Grid& g, std::vector<complex>& data, int sign) {
  if (g.boundary != Boundary::periodic)
    throw_config("spectral transforms are only defined on periodic grids");
  if (data.size() != g.points()) throw_config("field size does not match grid");

  fftw_plan plan = plan_cache().get(g.n, g.m, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD);
  auto* raw = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, raw, raw);

  if (sign > 0) {
    const double scale = 1.0 / static_cast<double>(g.points());
    for (complex& z : data) z *= scale;
  }
}

std::vector<double> axis_k2_table(const Grid& g) {
  std::vector<double> k2(static_cast<std::size_t>(g.m));
  for (int j = 0; j < g.m; ++j) {
    const int js = j < g.m / 2 ? j : j - g.m;
    const double k = std::numbers::pi * js / g.L;
    k2[static_cast<std::size_t>(j)] = k * k;
  }
  return k2;
}

}  // namespace ucplab
