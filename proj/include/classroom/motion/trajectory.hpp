//
//  trajectory.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <classroom/binaural/brir.hpp>
#include <classroom/dsp/audio_buffer.hpp>
#include <classroom/dsp/rng.hpp>

#include <json.hpp>

#include <vector>

namespace classroom::motion {

inline constexpr double kUtteranceSeconds = 2.4;
inline constexpr std::size_t kUtteranceSamples = 38400;
inline constexpr double kMinAngularVelocity = 8.0;
inline constexpr double kMaxAngularVelocity = 15.0;
inline constexpr std::size_t kCrossfadeSamples = 80; // 5 ms at 16 kHz

struct TrajectoryStep {
    double startTime = 0.0; // seconds
    int azimuthDeg = 0;

    bool operator==(const TrajectoryStep&) const = default;
};

/// A talker stepping along the frontal 5 degree grid at constant angular speed, reversing at +-90.
struct Trajectory {
    int startAzimuth = 0;
    int direction = 1; // +1 counter-clockwise (toward the left), -1 clockwise
    double angularVelocity = 10.0; // deg/s
    std::vector<TrajectoryStep> steps;
    double duration = kUtteranceSeconds;

    double dwell() const noexcept { return 5.0 / angularVelocity; }
    /// Throws InvalidInput when a structural invariant does not hold.
    void validate() const;

    bool operator==(const Trajectory&) const = default;
};

Trajectory make_trajectory(int startAzimuth, int direction, double angularVelocity,
                           double duration = kUtteranceSeconds);

Trajectory sample_trajectory(dsp::Rng& rng);

/// A single-step trajectory that never moves.
Trajectory static_trajectory(int azimuthDeg, double duration = kUtteranceSeconds);

int trajectory_at(const Trajectory& trajectory, double t);

/// Sample index at which each step takes over.
std::vector<std::size_t> step_boundaries(const Trajectory& trajectory, double rate);

/// Each step's output comes from the dry signal filtered by that step's BRIR. Adjacent steps are
/// joined by an 80-sample crossfade that starts at the step boundary, and the result is truncated
/// to the dry length.
dsp::BinauralBuffer render_moving_source(const dsp::AudioBuffer& dry, const Trajectory& trajectory,
                                         const binaural::BrirBank& bank);

void to_json(nlohmann::json& j, const Trajectory& t);
void from_json(const nlohmann::json& j, Trajectory& t);

} // namespace classroom::motion
