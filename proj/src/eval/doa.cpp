//
//  doa.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include <classroom/binaural/azimuth.hpp>
#include <classroom/dsp/fft.hpp>
#include <classroom/dsp/signal.hpp>
#include <classroom/errors.hpp>
#include <classroom/eval/doa.hpp>
#include <classroom/room/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace classroom::eval {

double invert_woodworth(double itdSeconds, double headRadius) {
    const double scale = headRadius / room::kSpeedOfSound;
    const double target = std::clamp(itdSeconds / scale, -(std::numbers::pi / 2 + 1), std::numbers::pi / 2 + 1);
    // theta + sin(theta) is monotone on [-pi/2, pi/2].
    double lo = -std::numbers::pi / 2, hi = std::numbers::pi / 2;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid + std::sin(mid) < target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi) * 180.0 / std::numbers::pi;
}

DoaTrajectoryEstimate doa_estimate(const dsp::BinauralBuffer& signal, const DoaOptions& options) {
    const double rate = signal.rate();
    const std::size_t frame = dsp::samples_for(options.frameSeconds, rate);
    const std::size_t hop = dsp::samples_for(options.hopSeconds, rate);
    if (signal.size() < frame || frame == 0 || hop == 0) throw InvalidInput("signal is shorter than one DoA frame");
    const std::size_t frames = (signal.size() - frame) / hop + 1;
    const std::size_t nfft = dsp::fast_fft_size(2 * frame);
    const double maxItd = options.headRadius / room::kSpeedOfSound * (std::numbers::pi / 2 + 1) * rate;
    const int maxLag = static_cast<int>(std::ceil(maxItd)) + 1;

    std::vector<double> window(frame);
    for (std::size_t i = 0; i < frame; ++i) {
        window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) / frame);
    }

    std::vector<double> energy(frames, 0.0);
    std::vector<double> estimate(frames, 0.0);
    std::vector<double> l(frame), r(frame);
    for (std::size_t f = 0; f < frames; ++f) {
        const std::size_t begin = f * hop;
        for (std::size_t i = 0; i < frame; ++i) {
            l[i] = window[i] * signal.left()[begin + i];
            r[i] = window[i] * signal.right()[begin + i];
            energy[f] += l[i] * l[i] + r[i] * r[i];
        }
        if (energy[f] == 0.0) continue;
        const auto specL = dsp::rfft(l, nfft);
        auto cross = dsp::rfft(r, nfft);
        for (std::size_t k = 0; k < cross.size(); ++k) {
            cross[k] *= std::conj(specL[k]);
            const double mag = std::abs(cross[k]);
            cross[k] = mag > 1e-20 ? cross[k] / mag : dsp::Complex{};
        }
        // cc[lag] = sum_k l[k] r[k + lag]; a positive lag means the right ear hears it later.
        const auto cc = dsp::irfft(cross, nfft);
        auto at = [&](int lag) { return cc[static_cast<std::size_t>((lag + static_cast<long>(nfft)) % nfft)]; };
        int best = 0;
        for (int lag = -maxLag; lag <= maxLag; ++lag)
            if (at(lag) > at(best)) best = lag;
        double refined = best;
        if (best > -maxLag && best < maxLag) {
            const double a = at(best - 1), b = at(best), c = at(best + 1);
            const double den = a - 2.0 * b + c;
            if (den < 0.0) refined += 0.5 * (a - c) / den;
        }
        estimate[f] = invert_woodworth(refined / rate, options.headRadius);
    }

    const double loudest = *std::max_element(energy.begin(), energy.end());
    if (!(loudest > 0.0)) throw InvalidInput("cannot estimate a direction from silence");
    DoaTrajectoryEstimate out;
    out.frameSeconds = static_cast<double>(frame) / rate;
    out.hopSeconds = static_cast<double>(hop) / rate;
    out.azimuthDeg.assign(frames, 0);
    std::size_t firstVoiced = frames;
    for (std::size_t f = 0; f < frames; ++f) {
        if (energy[f] >= options.energyGate * loudest) {
            out.azimuthDeg[f] = binaural::snap_azimuth(estimate[f]);
            if (firstVoiced == frames) firstVoiced = f;
        } else if (f > 0) {
            out.azimuthDeg[f] = out.azimuthDeg[f - 1];
        }
    }
    // Leading quiet frames have nothing to inherit, so they take the first voiced estimate.
    for (std::size_t f = 0; f < firstVoiced; ++f) out.azimuthDeg[f] = out.azimuthDeg[firstVoiced];
    return out;
}

double doa_error(const DoaTrajectoryEstimate& estimate, const motion::Trajectory& truth) {
    if (estimate.azimuthDeg.empty()) throw InvalidInput("empty DoA estimate");
    double total = 0.0;
    for (std::size_t i = 0; i < estimate.size(); ++i) {
        const double t = std::min(estimate.frame_center(i), truth.duration);
        total += std::abs(estimate.azimuthDeg[i] - motion::trajectory_at(truth, t));
    }
    return total / static_cast<double>(estimate.size());
}

} // namespace classroom::eval
