//
//  stft.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include <classroom/dsp/stft.hpp>
#include <classroom/errors.hpp>

#include <cmath>
#include <numbers>

namespace classroom::dsp {

std::size_t frame_count(std::size_t length, std::size_t frameLength, std::size_t hop) noexcept {
    if (frameLength == 0 || hop == 0 || length < frameLength) return 0;
    return (length - frameLength) / hop + 1;
}

Spectrogram stft(const AudioBuffer& x, std::size_t frameLength, std::size_t hop, Window window) {
    if (frameLength == 0 || hop == 0 || hop > frameLength) {
        throw InvalidInput("stft needs 0 < hop <= frameLength");
    }
    Spectrogram s;
    s.frameLength = frameLength;
    s.hop = hop;
    s.rate = x.rate();
    s.bins = frameLength / 2 + 1;
    s.frames = frame_count(x.size(), frameLength, hop);
    s.values.resize(s.frames * s.bins);

    std::vector<double> w(frameLength, 1.0);
    if (window == Window::Hann) {
        for (std::size_t i = 0; i < frameLength; ++i) {
            w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                        static_cast<double>(frameLength));
        }
    }
    std::vector<double> frame(frameLength);
    const auto in = x.samples();
    for (std::size_t f = 0; f < s.frames; ++f) {
        for (std::size_t i = 0; i < frameLength; ++i) frame[i] = in[f * hop + i] * w[i];
        const auto spec = rfft(frame, frameLength);
        std::copy(spec.begin(), spec.end(), s.values.begin() + static_cast<std::ptrdiff_t>(f * s.bins));
    }
    return s;
}

} // namespace classroom::dsp
