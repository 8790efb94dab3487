//
//  metrics.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <classroom/dsp/audio_buffer.hpp>

#include <array>
#include <limits>
#include <span>

namespace classroom::eval {

inline constexpr double kSnrEpsilon = 1e-12;
/// Stand-in for an infinite SNR in aggregate statistics.
inline constexpr double kSentinelDb = 60.0;

/// 10 log10(|s|^2 / (|s - sHat|^2 + eps)); +infinity when the residual energy is below eps.
double snr(std::span<const double> s, std::span<const double> sHat);
double snr(const dsp::AudioBuffer& s, const dsp::AudioBuffer& sHat);

/// Mean over ears of snr(ref, est) - snr(ref, mix). Ears where the estimate equals the mixture count as 0.
double snri(const dsp::BinauralBuffer& ref, const dsp::BinauralBuffer& est, const dsp::BinauralBuffer& mix);

/// Replaces +infinity by the sentinel so means stay finite.
double finite_db(double db) noexcept;

/// permutation[c] is the reference matched to estimate c.
using Permutation = std::array<int, 2>;
inline constexpr Permutation kIdentity{0, 1};
inline constexpr Permutation kSwapped{1, 0};

struct PitResult {
    double loss = 0.0; // minus the best summed SNR
    Permutation permutation = kIdentity;
    /// Summed (capped) SNR of every ear and talker under each candidate permutation.
    std::array<double, 2> scores{};
};

/// Two-talker permutation-invariant SNR objective. One permutation is shared by both ears. Each SNR
/// term is clamped at `capDb`, and ties go to the identity.
PitResult pit_loss(std::span<const dsp::BinauralBuffer> refs, std::span<const dsp::BinauralBuffer> ests,
                   double capDb = std::numeric_limits<double>::infinity());

/// Permutation maximising the summed uncapped two-ear SNR.
Permutation pit_align(std::span<const dsp::BinauralBuffer> refs, std::span<const dsp::BinauralBuffer> ests);

} // namespace classroom::eval
