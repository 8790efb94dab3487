//
//  sdm.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <classroom/room/room.hpp>

#include <cstddef>
#include <optional>
#include <vector>

namespace classroom::binaural {

inline constexpr std::size_t kSdmWindow = 32;
inline constexpr int kSdmMaxLag = 4;
inline constexpr double kSdmDiffuseFloor = 1e-4;

/// Per-sample direction of arrival of a multichannel RIR. An empty entry marks a diffuse sample.
struct DoaTrack {
    std::vector<std::optional<double>> azimuthDeg;
    std::vector<double> confidence;

    std::size_t size() const noexcept { return azimuthDeg.size(); }
    bool diffuse(std::size_t n) const { return !azimuthDeg[n].has_value(); }
    /// Grid label of sample n; throws InvalidInput for a diffuse sample.
    int snapped(std::size_t n) const;
    /// Every azimuth negated.
    DoaTrack mirrored() const;
};

DoaTrack sdm_analyze(const room::MultiChannelRir& rir, const room::MicArray& array);

} // namespace classroom::binaural
