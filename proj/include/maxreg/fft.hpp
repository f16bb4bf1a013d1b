#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace maxreg::fft {

using cplx = std::complex<double>;

/// In-place batched DFT over the leading (time) index of a time-major array:
/// data[j * batch + c] holds sample j of component c. Unnormalized in both
/// directions; backward(forward(x)) == n * x.
///
/// Plans are cached per (n, batch, direction) and shared across threads;
/// execution is reentrant.
void forward(std::span<cplx> data, std::size_t n, std::size_t batch);
void backward(std::span<cplx> data, std::size_t n, std::size_t batch);

} // namespace maxreg::fft
