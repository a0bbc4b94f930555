#pragma once

#include <complex>
#include <vector>

namespace mfgjd {

/// In-place radix-2 transform, forward kernel exp(-2 pi i j k / N).
/// Length must be a power of two.
void fft(std::vector<std::complex<double>>& data, bool inverse = false);

}  // namespace mfgjd
