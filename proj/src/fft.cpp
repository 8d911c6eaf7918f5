#include "rfflab/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

namespace rfflab {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface
// is. Plans are created once per (size, direction) and kept for the process.
class PlanCache {
 public:
  fftw_plan get(int n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto* in = fftw_alloc_complex(static_cast<std::size_t>(n));
    auto* out = fftw_alloc_complex(static_cast<std::size_t>(n));
    fftw_plan plan = fftw_plan_dft_1d(n, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

CVector transform(const CVector& x, int sign, double scale) {
  const auto n = static_cast<int>(x.size());
  CVector out(x.size());
  if (n == 0) return out;
  fftw_plan plan = plan_cache().get(n, sign);
  // fftw_complex is layout-compatible with std::complex<double>.
  CVector in = x;
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  if (scale != 1.0) out *= scale;
  return out;
}

}  // namespace

CVector unitary_dft(const CVector& x) {
  return transform(x, FFTW_FORWARD, 1.0 / std::sqrt(static_cast<double>(x.size())));
}

CVector unitary_idft(const CVector& x) {
  return transform(x, FFTW_BACKWARD, 1.0 / std::sqrt(static_cast<double>(x.size())));
}

CVector frequency_response(const CVector& taps, Index n_points) {
  if (taps.size() > n_points) {
    throw InputSizeError("frequency_response: " + std::to_string(taps.size()) +
                         " taps exceed " + std::to_string(n_points) + " points");
  }
  CVector padded = CVector::Zero(n_points);
  padded.head(taps.size()) = taps;
  return transform(padded, FFTW_FORWARD, 1.0);
}

}  // namespace rfflab
