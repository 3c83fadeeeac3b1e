#include "bellsim/fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace bellsim {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

FftPlan::FftPlan(int rank, int n, std::size_t batch) : batch_(batch) {
  if (rank < 1 || n < 1 || batch < 1) throw DomainError("FftPlan: bad shape");
  std::vector<int> dims(rank, n);
  block_ = 1;
  for (int r = 0; r < rank; ++r) block_ *= static_cast<std::size_t>(n);
  // Scratch buffer only used for planning; FFTW_ESTIMATE does not touch it.
  std::vector<cplx> scratch(block_ * batch_);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  const int dist = static_cast<int>(block_);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fwd_ = fftw_plan_many_dft(rank, dims.data(), static_cast<int>(batch_), buf,
                            nullptr, 1, dist, buf, nullptr, 1, dist,
                            FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  bwd_ = fftw_plan_many_dft(rank, dims.data(), static_cast<int>(batch_), buf,
                            nullptr, 1, dist, buf, nullptr, 1, dist,
                            FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!fwd_ || !bwd_) {
    release();
    throw ResourceError("FftPlan: FFTW could not create a plan");
  }
}

FftPlan::~FftPlan() { release(); }

FftPlan::FftPlan(FftPlan&& other) noexcept
    : fwd_(other.fwd_), bwd_(other.bwd_), block_(other.block_),
      batch_(other.batch_) {
  other.fwd_ = other.bwd_ = nullptr;
}

FftPlan& FftPlan::operator=(FftPlan&& other) noexcept {
  if (this != &other) {
    release();
    fwd_ = other.fwd_;
    bwd_ = other.bwd_;
    block_ = other.block_;
    batch_ = other.batch_;
    other.fwd_ = other.bwd_ = nullptr;
  }
  return *this;
}

void FftPlan::release() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
  fwd_ = bwd_ = nullptr;
}

void FftPlan::forward(cplx* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), p, p);
}

void FftPlan::backward(cplx* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(bwd_), p, p);
  const double scale = 1.0 / static_cast<double>(block_);
  const std::size_t total = block_ * batch_;
  for (std::size_t i = 0; i < total; ++i) data[i] *= scale;
}

}  // namespace bellsim
