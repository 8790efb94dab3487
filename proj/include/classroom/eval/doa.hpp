//
//  doa.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <classroom/dsp/audio_buffer.hpp>
#include <classroom/motion/trajectory.hpp>

#include <vector>

namespace classroom::eval {

struct DoaOptions {
    double headRadius = 0.07;
    double frameSeconds = 0.05;
    double hopSeconds = 0.025;
    /// Frames quieter than this fraction of the loudest frame inherit the previous estimate.
    double energyGate = 1e-3;
};

struct DoaTrajectoryEstimate {
    std::vector<int> azimuthDeg; // per frame, on the frontal 5 degree grid
    double frameSeconds = 0.05;
    double hopSeconds = 0.025;

    std::size_t size() const noexcept { return azimuthDeg.size(); }
    double frame_center(std::size_t i) const noexcept { return static_cast<double>(i) * hopSeconds + frameSeconds / 2; }
};

/// Azimuth in degrees whose Woodworth ITD equals `itdSeconds`, clamped to +-90.
double invert_woodworth(double itdSeconds, double headRadius);

/// Frame-wise GCC-PHAT interaural delay mapped to azimuth through the spherical-head model.
DoaTrajectoryEstimate doa_estimate(const dsp::BinauralBuffer& signal, const DoaOptions& options = {});

/// Mean over frames of |estimate - truth at the frame centre|.
double doa_error(const DoaTrajectoryEstimate& estimate, const motion::Trajectory& truth);

} // namespace classroom::eval
