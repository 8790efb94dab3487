//
//  fft.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace classroom::dsp {

using Complex = std::complex<double>;

/// Smallest n' >= n whose only prime factors are 2, 3 and 5.
std::size_t fast_fft_size(std::size_t n);

/// Real-to-complex transform of `x` zero-padded (or truncated) to `n` points.
/// Returns n/2 + 1 bins. Safe to call from several threads.
std::vector<Complex> rfft(std::span<const double> x, std::size_t n);

/// Inverse of rfft, scaled by 1/n so that irfft(rfft(x, n), n) == x.
std::vector<double> irfft(std::span<const Complex> spectrum, std::size_t n);

} // namespace classroom::dsp
