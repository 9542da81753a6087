#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace envlab::fft {

namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// The FFTW planner is not thread-safe; execution of an existing plan on new
// arrays is. Plans live for the lifetime of the process.
class PlanCache {
 public:
  const PlanPair& get(std::size_t n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    ComplexVector in(n), out(n);
    auto* pin = reinterpret_cast<fftw_complex*>(in.data());
    auto* pout = reinterpret_cast<fftw_complex*>(out.data());
    const int size = static_cast<int>(n);
    PlanPair pair;
    pair.forward = fftw_plan_dft_1d(size, pin, pout, FFTW_FORWARD, FFTW_ESTIMATE);
    pair.backward = fftw_plan_dft_1d(size, pin, pout, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (pair.forward == nullptr || pair.backward == nullptr) {
      throw std::runtime_error("fftw: plan creation failed");
    }
    return plans_.emplace(n, pair).first->second;
  }

 private:
  std::mutex mutex_;
  std::map<std::size_t, PlanPair> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void check(std::span<const cplx> in, std::span<cplx> out) {
  if (in.size() != out.size() || in.empty()) {
    throw std::invalid_argument("fft: buffer size mismatch");
  }
  if (static_cast<const void*>(in.data()) == static_cast<const void*>(out.data())) {
    throw std::invalid_argument("fft: in-place transforms are not supported");
  }
}

}  // namespace

void forward(std::span<const cplx> in, std::span<cplx> out) {
  check(in, out);
  const auto& plan = cache().get(in.size());
  // fftw never writes the input of an out-of-place complex DFT.
  auto* pin = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
  fftw_execute_dft(plan.forward, pin, reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / static_cast<double>(in.size());
  for (auto& v : out) v *= scale;
}

void backward(std::span<const cplx> in, std::span<cplx> out) {
  check(in, out);
  const auto& plan = cache().get(in.size());
  auto* pin = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
  fftw_execute_dft(plan.backward, pin, reinterpret_cast<fftw_complex*>(out.data()));
}

std::size_t next_smooth_size(std::size_t n) {
  for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

}  // namespace envlab::fft
