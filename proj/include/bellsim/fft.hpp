#pragma once

#include <vector>

#include "bellsim/common.hpp"

namespace bellsim {

// In-place multidimensional complex FFT over `rank` axes of length n, repeated
// over `batch` contiguous blocks. Plans use FFTW_ESTIMATE so results do not
// depend on timing. Plan creation is serialized internally.
class FftPlan {
 public:
  FftPlan(int rank, int n, std::size_t batch);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  FftPlan(FftPlan&& other) noexcept;
  FftPlan& operator=(FftPlan&& other) noexcept;

  std::size_t block() const { return block_; }
  std::size_t batch() const { return batch_; }

  // Unnormalized forward transform (exp(-i k x)).
  void forward(cplx* data) const;
  // Inverse transform scaled by 1/block, so backward(forward(x)) == x.
  void backward(cplx* data) const;

 private:
  void release();
  void* fwd_ = nullptr;
  void* bwd_ = nullptr;
  std::size_t block_ = 0;
  std::size_t batch_ = 0;
};

}  // namespace bellsim
