//
//  sdm.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include <classroom/binaural/azimuth.hpp>
#include <classroom/binaural/sdm.hpp>
#include <classroom/errors.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace classroom::binaural {

int DoaTrack::snapped(std::size_t n) const {
    if (diffuse(n)) throw InvalidInput("sample " + std::to_string(n) + " carries no direction");
    return snap_azimuth(*azimuthDeg[n]);
}

DoaTrack DoaTrack::mirrored() const {
    DoaTrack m = *this;
    for (auto& a : m.azimuthDeg)
        if (a) a = -*a;
    return m;
}

DoaTrack sdm_analyze(const room::MultiChannelRir& rir, const room::MicArray& array) {
    array.validate();
    constexpr std::size_t kOuter = 6;
    if (rir.channels.size() != kOuter + 1) throw InvalidInput("SDM analysis needs 7 RIR channels");
    const std::size_t n = rir.size();
    for (const auto& c : rir.channels)
        if (c.size() != n) throw InvalidInput("RIR channels are not aligned");

    // Least-squares map from capsule delays (samples) to the unit vector toward the source.
    Eigen::Matrix<double, kOuter, 3> p;
    for (std::size_t i = 0; i < kOuter; ++i) {
        const auto& q = array.capsules[i + 1];
        p.row(static_cast<Eigen::Index>(i)) << q.x, q.y, q.z;
    }
    const Eigen::Matrix<double, 3, kOuter> solve =
        -(room::kSpeedOfSound / rir.rate) * (p.transpose() * p).inverse() * p.transpose();

    const auto& c0 = rir.center().vector();
    constexpr int kLags = 2 * kSdmMaxLag + 1;
    auto at = [n](const std::vector<double>& x, long k) { return k >= 0 && k < static_cast<long>(n) ? x[k] : 0.0; };

    // Running sums over k of c0[k] * ci[k + lag] and of the squared channels, so every window is O(1).
    std::vector<std::vector<double>> cross(kOuter * kLags, std::vector<double>(n + 1, 0.0));
    std::vector<std::vector<double>> power(kOuter + 1, std::vector<double>(n + 1, 0.0));
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t ch = 0; ch <= kOuter; ++ch) {
            const double v = rir.channels[ch][k];
            power[ch][k + 1] = power[ch][k] + v * v;
        }
        for (std::size_t i = 0; i < kOuter; ++i) {
            const auto& ci = rir.channels[i + 1].vector();
            for (int l = -kSdmMaxLag; l <= kSdmMaxLag; ++l) {
                auto& acc = cross[i * kLags + static_cast<std::size_t>(l + kSdmMaxLag)];
                acc[k + 1] = acc[k] + c0[k] * at(ci, static_cast<long>(k) + l);
            }
        }
    }

    double peak = 0.0;
    for (double v : c0) peak = std::max(peak, std::abs(v));
    const double gate = kSdmDiffuseFloor * peak * peak;

    DoaTrack track;
    track.azimuthDeg.assign(n, std::nullopt);
    track.confidence.assign(n, 0.0);
    constexpr long kHalf = static_cast<long>(kSdmWindow / 2);
    auto window_sum = [n](const std::vector<double>& prefix, long centre) {
        const auto lo = static_cast<std::size_t>(std::clamp(centre - kHalf, 0L, static_cast<long>(n)));
        const auto hi = static_cast<std::size_t>(std::clamp(centre + kHalf, 0L, static_cast<long>(n)));
        return prefix[hi] - prefix[lo];
    };

    for (std::size_t s = 0; s < n; ++s) {
        const long centre = static_cast<long>(s);
        const double e0 = window_sum(power[0], centre);
        if (!(e0 > gate) || peak == 0.0) continue;

        Eigen::Matrix<double, kOuter, 1> delay;
        double confidence = 0.0;
        for (std::size_t i = 0; i < kOuter; ++i) {
            double r[kLags];
            int best = 0;
            for (int l = 0; l < kLags; ++l) {
                r[l] = window_sum(cross[i * kLags + static_cast<std::size_t>(l)], centre);
                if (r[l] > r[best]) best = l;
            }
            double frac = 0.0;
            if (best > 0 && best < kLags - 1) {
                const double den = r[best - 1] - 2.0 * r[best] + r[best + 1];
                if (den < 0.0) frac = 0.5 * (r[best - 1] - r[best + 1]) / den;
            }
            delay(static_cast<Eigen::Index>(i)) = best - kSdmMaxLag + frac;
            const double ei = window_sum(power[i + 1], centre);
            if (ei > 0.0) confidence += std::max(0.0, r[best]) / std::sqrt(e0 * ei);
        }
        const Eigen::Vector3d u = solve * delay;
        if (std::hypot(u.x(), u.y()) < 1e-12) continue;
        track.azimuthDeg[s] = std::atan2(u.y(), u.x()) * 180.0 / std::numbers::pi;
        track.confidence[s] = std::clamp(confidence / kOuter, 0.0, 1.0);
    }
    return track;
}

} // namespace classroom::binaural
