//
//  azimuth.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include <classroom/binaural/azimuth.hpp>
#include <classroom/errors.hpp>

#include <cmath>
#include <cstdio>

namespace classroom::binaural {

int frontal_index(int azimuthDeg) {
    if (!is_frontal_grid(azimuthDeg)) {
        throw InvalidInput("azimuth " + std::to_string(azimuthDeg) + " is not on the frontal 5 degree grid");
    }
    return (azimuthDeg + 90) / kGridStepDeg;
}

int snap_azimuth(double azimuthDeg) {
    double a = std::fmod(azimuthDeg, 360.0);
    if (a > 180.0) a -= 360.0;
    if (a <= -180.0) a += 360.0;
    // Both edges tie at the rear midline; the midline label keeps mirrored tracks mirrored.
    if (a == 180.0) return 0;
    const int g = kGridStepDeg * static_cast<int>(std::lround(a / kGridStepDeg));
    if (g > 90) return 90;
    if (g < -90) return a < 0.0 ? -90 : 90;
    return g;
}

std::string azimuth_tag(int azimuthDeg) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "az%c%03d", azimuthDeg < 0 ? '-' : '+', std::abs(azimuthDeg));
    return buf;
}

} // namespace classroom::binaural
