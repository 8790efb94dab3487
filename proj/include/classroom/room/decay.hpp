//
//  decay.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <classroom/dsp/audio_buffer.hpp>

#include <vector>

namespace classroom::room {

/// Schroeder backward-integrated energy decay curve in dB, normalised to 0 dB
/// at the first sample.
std::vector<double> energy_decay_curve(const dsp::AudioBuffer& rir);

/// Reverberation time from a least-squares line through the decay curve
/// between `upperDb` and `lowerDb`, extrapolated to -60 dB.
double schroeder_t60(const dsp::AudioBuffer& rir, double upperDb = -5.0, double lowerDb = -25.0);

} // namespace classroom::room
