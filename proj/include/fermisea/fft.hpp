#pragma once
// Thin FFTW wrapper: cached in-place guru plans keyed by shape/strides/sign.
// Plans use FFTW_ESTIMATE (shape-deterministic) and FFTW_UNALIGNED so one plan
// serves any buffer with the same layout.
#include <cstdint>
#include <vector>

#include "fermisea/util.hpp"

namespace fermisea {

struct FftDim {
  std::int64_t n;   // length
  std::int64_t is;  // stride (elements); used for both input and output
};

// Unnormalized in-place DFT over `transform` axes, repeated over `loop` axes.
// sign -1: kernel e^{-2*pi*i jk/n}; sign +1: e^{+2*pi*i jk/n}.
void fft_exec(const std::vector<FftDim>& transform, const std::vector<FftDim>& loop, int sign, cplx* data);

// 1d convenience: contiguous length-n transform repeated `howmany` times with
// distance `dist` between starts.
void fft_1d_batch(std::int64_t n, std::int64_t stride, std::int64_t howmany, std::int64_t dist, int sign, cplx* data);

}  // namespace fermisea
