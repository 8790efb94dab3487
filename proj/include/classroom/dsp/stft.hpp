//
//  stft.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <classroom/dsp/audio_buffer.hpp>
#include <classroom/dsp/fft.hpp>

#include <cstddef>
#include <vector>

namespace classroom::dsp {

enum class Window { Rectangular, Hann };

/// frames x bins grid, bins == frameLength / 2 + 1, stored frame-major.
struct Spectrogram {
    std::size_t frames = 0;
    std::size_t bins = 0;
    std::size_t frameLength = 0;
    std::size_t hop = 0;
    double rate = kCorpusRate;
    std::vector<Complex> values;

    Complex at(std::size_t frame, std::size_t bin) const { return values[frame * bins + bin]; }
};

/// Number of full frames that fit: floor((length - frameLength) / hop) + 1,
/// or 0 when the signal is shorter than one frame.
std::size_t frame_count(std::size_t length, std::size_t frameLength, std::size_t hop) noexcept;

/// Short-time transform over full frames only (no padding).
Spectrogram stft(const AudioBuffer& x, std::size_t frameLength, std::size_t hop,
                 Window window = Window::Hann);

} // namespace classroom::dsp
