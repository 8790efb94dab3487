//
//  azimuth.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <array>
#include <string>

namespace classroom::binaural {

inline constexpr int kGridStepDeg = 5;
inline constexpr int kFrontalCount = 37;

/// The frontal grid -90, -85, ..., 90.
constexpr std::array<int, kFrontalCount> frontal_azimuths() {
    std::array<int, kFrontalCount> a{};
    for (int i = 0; i < kFrontalCount; ++i) a[i] = -90 + kGridStepDeg * i;
    return a;
}

constexpr bool is_frontal_grid(int azimuthDeg) {
    return azimuthDeg >= -90 && azimuthDeg <= 90 && azimuthDeg % kGridStepDeg == 0;
}

/// Class index 0..36 of a frontal grid azimuth; throws InvalidInput off-grid.
int frontal_index(int azimuthDeg);

/// Folds to (-180, 180], rounds to the 5 degree grid and clamps rear directions to the nearest of +-90.
/// Directions that round to the rear midline keep the side of the unrounded angle; exactly 180 maps to 0.
int snap_azimuth(double azimuthDeg);

/// "az+045", "az-005", "az+000".
std::string azimuth_tag(int azimuthDeg);

} // namespace classroom::binaural
