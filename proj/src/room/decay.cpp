//
//  decay.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include <classroom/errors.hpp>
#include <classroom/room/decay.hpp>

#include <cmath>

namespace classroom::room {

std::vector<double> energy_decay_curve(const dsp::AudioBuffer& rir) {
    const auto h = rir.samples();
    std::vector<double> edc(h.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = h.size(); i-- > 0;) {
        acc += h[i] * h[i];
        edc[i] = acc;
    }
    if (edc.empty() || !(edc[0] > 0.0)) throw InvalidInput("decay curve of a silent response");
    const double total = edc[0];
    for (double& e : edc) e = 10.0 * std::log10(e / total + 1e-300);
    return edc;
}

double schroeder_t60(const dsp::AudioBuffer& rir, double upperDb, double lowerDb) {
    const auto edc = energy_decay_curve(rir);
    // Least-squares fit of level against time over the chosen range.
    double n = 0, st = 0, sl = 0, stt = 0, stl = 0;
    for (std::size_t i = 0; i < edc.size(); ++i) {
        if (edc[i] > upperDb) continue;
        if (edc[i] < lowerDb) break;
        const double t = static_cast<double>(i) / rir.rate();
        n += 1;
        st += t;
        sl += edc[i];
        stt += t * t;
        stl += t * edc[i];
    }
    if (n < 2) throw InvalidInput("decay curve does not span the fitting range");
    const double slope = (n * stl - st * sl) / (n * stt - st * st);
    if (!(slope < 0.0)) throw InvalidInput("decay curve is not decaying");
    return -60.0 / slope;
}

} // namespace classroom::room
