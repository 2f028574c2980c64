#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace advaudio::dsp {

using cdouble = std::complex<double>;

// In-place iterative radix-2 FFT. n must be a power of two.
// inverse=true applies the conjugate transform WITHOUT the 1/n factor;
// callers that need a true inverse divide themselves. The unnormalized
// form is exactly the adjoint needed for spectrogram gradients.
void fft_pow2(cdouble* data, std::size_t n, bool inverse);

inline void fft_pow2(std::vector<cdouble>& data, bool inverse) {
    fft_pow2(data.data(), data.size(), inverse);
}

bool is_pow2(std::size_t n);

}  // namespace advaudio::dsp
