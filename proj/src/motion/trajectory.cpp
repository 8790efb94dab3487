//
//  trajectory.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include <classroom/binaural/azimuth.hpp>
#include <classroom/dsp/signal.hpp>
#include <classroom/errors.hpp>
#include <classroom/motion/trajectory.hpp>

#include <algorithm>
#include <cmath>

namespace classroom::motion {

using dsp::AudioBuffer;
using dsp::BinauralBuffer;

void Trajectory::validate() const {
    if (direction != 1 && direction != -1) throw InvalidInput("trajectory direction must be +1 or -1");
    if (!(angularVelocity >= kMinAngularVelocity && angularVelocity <= kMaxAngularVelocity)) {
        throw InvalidInput("angular velocity outside [8, 15] deg/s");
    }
    if (steps.empty() || steps.front().startTime != 0.0) throw InvalidInput("trajectory must start at t = 0");
    if (steps.front().azimuthDeg != startAzimuth) throw InvalidInput("first step must sit at the start azimuth");
    for (std::size_t k = 0; k < steps.size(); ++k) {
        if (!binaural::is_frontal_grid(steps[k].azimuthDeg)) throw InvalidInput("trajectory leaves the frontal grid");
        if (steps[k].startTime >= duration) throw InvalidInput("trajectory step starts after the utterance ends");
        if (k > 0) {
            if (std::abs(steps[k].azimuthDeg - steps[k - 1].azimuthDeg) != 5) {
                throw InvalidInput("consecutive trajectory azimuths must differ by 5 degrees");
            }
            if (std::abs(steps[k].startTime - steps[k - 1].startTime - dwell()) > 1e-9) {
                throw InvalidInput("trajectory dwell does not match its angular velocity");
            }
        }
    }
}

Trajectory make_trajectory(int startAzimuth, int direction, double angularVelocity, double duration) {
    Trajectory t;
    t.startAzimuth = startAzimuth;
    t.direction = direction;
    t.angularVelocity = angularVelocity;
    t.duration = duration;
    if (!binaural::is_frontal_grid(startAzimuth)) throw InvalidInput("start azimuth is not on the frontal grid");
    if (!(duration > 0.0)) throw InvalidInput("trajectory duration must be positive");

    int azimuth = startAzimuth;
    int dir = direction;
    for (int k = 0;; ++k) {
        const double start = k * 5.0 / angularVelocity;
        if (start >= duration - 1e-9) break;
        if (k > 0) {
            if (std::abs(azimuth + 5 * dir) > 90) dir = -dir;
            azimuth += 5 * dir;
        }
        t.steps.push_back({start, azimuth});
    }
    t.validate();
    return t;
}

Trajectory sample_trajectory(dsp::Rng& rng) {
    const auto grid = binaural::frontal_azimuths();
    const int start = grid[rng.below(grid.size())];
    const int direction = rng.coin() ? 1 : -1;
    const double velocity = rng.uniform(kMinAngularVelocity, kMaxAngularVelocity);
    return make_trajectory(start, direction, velocity);
}

Trajectory static_trajectory(int azimuthDeg, double duration) {
    if (!binaural::is_frontal_grid(azimuthDeg)) throw InvalidInput("azimuth is not on the frontal grid");
    Trajectory t;
    t.startAzimuth = azimuthDeg;
    t.angularVelocity = kMinAngularVelocity;
    t.duration = duration;
    t.steps.push_back({0.0, azimuthDeg});
    return t;
}

int trajectory_at(const Trajectory& trajectory, double t) {
    if (!(t >= 0.0 && t <= trajectory.duration)) {
        throw InvalidInput("time " + std::to_string(t) + " s lies outside the trajectory");
    }
    const auto it = std::upper_bound(trajectory.steps.begin(), trajectory.steps.end(), t,
                                     [](double v, const TrajectoryStep& s) { return v < s.startTime; });
    return std::prev(it)->azimuthDeg;
}

std::vector<std::size_t> step_boundaries(const Trajectory& trajectory, double rate) {
    std::vector<std::size_t> b;
    b.reserve(trajectory.steps.size());
    for (const auto& s : trajectory.steps) b.push_back(dsp::samples_for(s.startTime, rate));
    return b;
}

BinauralBuffer render_moving_source(const AudioBuffer& dry, const Trajectory& trajectory,
                                    const binaural::BrirBank& bank) {
    bank.validate();
    if (dry.rate() != bank.rate()) throw InvalidInput("dry signal and BRIR bank rates differ");
    const std::size_t total = dry.size();
    if (total != dsp::samples_for(trajectory.duration, dry.rate())) {
        throw InvalidInput("dry signal length does not match the trajectory duration");
    }

    const auto bounds = step_boundaries(trajectory, dry.rate());
    const std::size_t steps = bounds.size();
    std::vector<AudioBuffer> segments[2];
    for (std::size_t k = 0; k < steps; ++k) {
        const auto& h = bank.at(trajectory.steps[k].azimuthDeg).response;
        const std::size_t begin = bounds[k];
        const std::size_t end = (k + 1 < steps ? bounds[k + 1] : total) + kCrossfadeSamples;
        // Only dry samples that reach [begin, end) through the filter are needed.
        const std::size_t reach = h.size() - 1;
        const std::size_t lo = begin > reach ? begin - reach : 0;
        const AudioBuffer part = dry.slice(lo, std::min(end, total));
        for (int e = 0; e < 2; ++e) {
            const auto wet = dsp::fft_convolve(part, h.ear(e));
            segments[e].push_back(wet.slice(begin - lo, end - lo));
        }
    }
    BinauralBuffer out(dsp::crossfade_concat(segments[0], kCrossfadeSamples),
                       dsp::crossfade_concat(segments[1], kCrossfadeSamples));
    out.resize(total);
    return out;
}

void to_json(nlohmann::json& j, const Trajectory& t) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : t.steps) steps.push_back({{"startTime", s.startTime}, {"azimuth", s.azimuthDeg}});
    j = {{"startAzimuth", t.startAzimuth},
         {"direction", t.direction},
         {"velocity", t.angularVelocity},
         {"duration", t.duration},
         {"steps", steps}};
}

void from_json(const nlohmann::json& j, Trajectory& t) {
    t.startAzimuth = j.at("startAzimuth").get<int>();
    t.direction = j.at("direction").get<int>();
    t.angularVelocity = j.at("velocity").get<double>();
    t.duration = j.value("duration", kUtteranceSeconds);
    t.steps.clear();
    for (const auto& s : j.at("steps")) t.steps.push_back({s.at("startTime").get<double>(), s.at("azimuth").get<int>()});
}

} // namespace classroom::motion
