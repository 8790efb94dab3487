//
//  signal.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <classroom/dsp/audio_buffer.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace classroom::dsp {

/// Linear convolution through the FFT. Output length is x.size() + h.size() - 1.
AudioBuffer fft_convolve(const AudioBuffer& x, const AudioBuffer& h);

/// Convolution of raw sample spans, same contract as fft_convolve.
std::vector<double> fft_convolve(std::span<const double> x, std::span<const double> h);

/// Windowed-sinc resampler with a 64-tap kernel (measured at the lower of the
/// two rates) and cutoff at 0.45 * min(rate, targetRate).
AudioBuffer resample(const AudioBuffer& x, double targetRate);

inline constexpr int kResamplerTaps = 64;

/// Raised-cosine fade-in gain for overlap position i of `overlap`; the
/// matching fade-out gain is 1 - crossfade_gain(i, overlap).
double crossfade_gain(std::size_t i, std::size_t overlap) noexcept;

/// Concatenate segments, overlapping neighbours by `overlap` samples with
/// amplitude-complementary gains. Result length is
/// sum(lengths) - (segments - 1) * overlap.
AudioBuffer crossfade_concat(std::span<const AudioBuffer> segments, std::size_t overlap);

/// Samples for a duration in seconds at `rate`, rounded to nearest.
std::size_t samples_for(double seconds, double rate) noexcept;

} // namespace classroom::dsp
