//
//  metrics.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include <classroom/errors.hpp>
#include <classroom/eval/metrics.hpp>

#include <algorithm>
#include <cmath>

namespace classroom::eval {

double snr(std::span<const double> s, std::span<const double> sHat) {
    if (s.size() != sHat.size()) throw InvalidInput("snr needs signals of equal length");
    double signal = 0.0, residual = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double d = s[i] - sHat[i];
        signal += s[i] * s[i];
        residual += d * d;
    }
    if (!(signal > 0.0)) throw InvalidInput("snr reference signal is silent");
    if (residual < kSnrEpsilon) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(signal / (residual + kSnrEpsilon));
}

double snr(const dsp::AudioBuffer& s, const dsp::AudioBuffer& sHat) {
    if (s.rate() != sHat.rate()) throw InvalidInput("snr needs signals at the same rate");
    return snr(s.samples(), sHat.samples());
}

double snri(const dsp::BinauralBuffer& ref, const dsp::BinauralBuffer& est, const dsp::BinauralBuffer& mix) {
    double total = 0.0;
    for (int e = 0; e < 2; ++e) {
        const double improved = snr(ref.ear(e), est.ear(e));
        const double baseline = snr(ref.ear(e), mix.ear(e));
        if (est.ear(e) == mix.ear(e)) continue;
        total += improved - baseline;
    }
    return total / 2.0;
}

double finite_db(double db) noexcept { return std::isinf(db) && db > 0 ? kSentinelDb : db; }

PitResult pit_loss(std::span<const dsp::BinauralBuffer> refs, std::span<const dsp::BinauralBuffer> ests,
                   double capDb) {
    if (refs.size() != 2 || ests.size() != 2) throw InvalidInput("PIT expects two references and two estimates");
    for (int c = 0; c < 2; ++c) {
        if (refs[c].size() != ests[c].size() || refs[c].size() != refs[0].size()) {
            throw InvalidInput("PIT references and estimates differ in shape");
        }
    }
    PitResult result;
    const Permutation candidates[2] = {kIdentity, kSwapped};
    for (int p = 0; p < 2; ++p) {
        std::array<double, 4> terms{};
        for (int c = 0; c < 2; ++c)
            for (int e = 0; e < 2; ++e) terms[2 * c + e] = std::min(capDb, snr(refs[candidates[p][c]].ear(e), ests[c].ear(e)));
        // Summing in sorted order makes the score independent of how the talkers are labelled.
        std::sort(terms.begin(), terms.end());
        result.scores[p] = ((terms[0] + terms[1]) + terms[2]) + terms[3];
    }
    const int best = result.scores[1] > result.scores[0] ? 1 : 0;
    result.permutation = candidates[best];
    result.loss = -result.scores[best];
    return result;
}

Permutation pit_align(std::span<const dsp::BinauralBuffer> refs, std::span<const dsp::BinauralBuffer> ests) {
    return pit_loss(refs, ests).permutation;
}

} // namespace classroom::eval
