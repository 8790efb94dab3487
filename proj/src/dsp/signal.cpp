//
//  signal.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include <classroom/dsp/fft.hpp>
#include <classroom/dsp/signal.hpp>
#include <classroom/errors.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace classroom::dsp {

std::vector<double> fft_convolve(std::span<const double> x, std::span<const double> h) {
    if (x.empty() || h.empty()) throw InvalidInput("fft_convolve needs non-empty inputs");
    const std::size_t outLength = x.size() + h.size() - 1;
    // Direct summation for short kernels.
    if (std::min(x.size(), h.size()) <= 32) {
        std::vector<double> y(outLength, 0.0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] == 0.0) continue;
            for (std::size_t j = 0; j < h.size(); ++j) y[i + j] += x[i] * h[j];
        }
        return y;
    }
    const std::size_t n = fast_fft_size(outLength);
    auto X = rfft(x, n);
    const auto H = rfft(h, n);
    for (std::size_t k = 0; k < X.size(); ++k) X[k] *= H[k];
    auto y = irfft(X, n);
    y.resize(outLength);
    return y;
}

AudioBuffer fft_convolve(const AudioBuffer& x, const AudioBuffer& h) {
    if (x.rate() != h.rate()) {
        throw InvalidInput("fft_convolve rate mismatch: " + std::to_string(x.rate()) + " vs " +
                           std::to_string(h.rate()));
    }
    return AudioBuffer(x.rate(), fft_convolve(x.samples(), h.samples()));
}

namespace {

double kaiser(double t, double beta) {
    // t in [-1, 1]
    if (std::abs(t) > 1.0) return 0.0;
    return std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - t * t)) / std::cyl_bessel_i(0.0, beta);
}

double sinc(double x) {
    if (std::abs(x) < 1e-12) return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

} // namespace

AudioBuffer resample(const AudioBuffer& x, double targetRate) {
    if (!(targetRate > 0.0)) throw InvalidInput("resample target rate must be positive");
    if (targetRate == x.rate()) return x;

    const double rate = x.rate();
    const double lower = std::min(rate, targetRate);
    const double cutoff = 0.45 * lower / rate; // cycles per input sample
    const double halfWidth = 0.5 * kResamplerTaps * rate / lower; // input samples
    constexpr double kBeta = 8.6;

    const auto outLength =
        static_cast<std::size_t>(std::llround(static_cast<double>(x.size()) * targetRate / rate));
    AudioBuffer out(targetRate, outLength);
    const auto in = x.samples();
    const auto inLength = static_cast<std::ptrdiff_t>(in.size());
    for (std::size_t m = 0; m < outLength; ++m) {
        const double pos = static_cast<double>(m) * rate / targetRate;
        const auto first = static_cast<std::ptrdiff_t>(std::ceil(pos - halfWidth));
        const auto last = static_cast<std::ptrdiff_t>(std::floor(pos + halfWidth));
        double acc = 0.0;
        for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(first, 0); k <= std::min(last, inLength - 1); ++k) {
            const double u = pos - static_cast<double>(k);
            acc += in[static_cast<std::size_t>(k)] * 2.0 * cutoff * sinc(2.0 * cutoff * u) *
                   kaiser(u / halfWidth, kBeta);
        }
        out[m] = acc;
    }
    return out;
}

double crossfade_gain(std::size_t i, std::size_t overlap) noexcept {
    const double phase = (static_cast<double>(i) + 0.5) / static_cast<double>(overlap);
    return 0.5 * (1.0 - std::cos(std::numbers::pi * phase));
}

AudioBuffer crossfade_concat(std::span<const AudioBuffer> segments, std::size_t overlap) {
    if (segments.empty()) throw InvalidInput("crossfade_concat needs at least one segment");
    const double rate = segments.front().rate();
    std::size_t total = 0;
    for (const auto& s : segments) {
        if (s.rate() != rate) throw InvalidInput("crossfade_concat segments differ in rate");
        if (s.size() < overlap) {
            throw InvalidInput("segment of " + std::to_string(s.size()) +
                               " samples is shorter than the overlap of " + std::to_string(overlap));
        }
        total += s.size();
    }
    if (segments.size() == 1) return segments.front();
    total -= (segments.size() - 1) * overlap;

    AudioBuffer out(rate, total);
    std::size_t cursor = 0; // where the current segment starts
    for (std::size_t k = 0; k < segments.size(); ++k) {
        const auto seg = segments[k].samples();
        const bool fadeIn = k > 0;
        const bool fadeOut = k + 1 < segments.size();
        for (std::size_t i = 0; i < seg.size(); ++i) {
            double g = 1.0;
            if (fadeIn && i < overlap) g *= crossfade_gain(i, overlap);
            if (fadeOut && i >= seg.size() - overlap) {
                g *= 1.0 - crossfade_gain(i - (seg.size() - overlap), overlap);
            }
            out[cursor + i] += g * seg[i];
        }
        cursor += seg.size() - overlap;
    }
    return out;
}

std::size_t samples_for(double seconds, double rate) noexcept {
    return static_cast<std::size_t>(std::llround(seconds * rate));
}

} // namespace classroom::dsp
