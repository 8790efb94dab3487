//
//  room.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include <classroom/errors.hpp>
#include <classroom/room/room.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

namespace classroom::room {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::string describe(Point3 p) { return "(" + fmt(p.x) + ", " + fmt(p.y) + ", " + fmt(p.z) + ")"; }

// Coordinate of image n along one axis of extent `extent` for a source at `s`.
double image_coordinate(int n, double s, double extent) {
    return (n % 2 == 0) ? n * extent + s : (n + 1) * extent - s;
}

} // namespace

bool RoomSpec::contains(Point3 p) const noexcept {
    return p.x > 0.0 && p.x < length && p.y > 0.0 && p.y < width && p.z > 0.0 && p.z < height;
}

bool is_allowed_t60(double t60) noexcept {
    return std::any_of(kT60Values.begin(), kT60Values.end(),
                       [&](double v) { return std::abs(v - t60) < 1e-9; });
}

bool is_ring_radius(double radius) noexcept {
    return std::any_of(kRingRadii.begin(), kRingRadii.end(),
                       [&](double v) { return std::abs(v - radius) < 1e-9; });
}

void RoomSpec::validate() const {
    auto inRange = [](double v, double lo, double hi) { return v >= lo - 1e-12 && v <= hi + 1e-12; };
    if (!inRange(length, kMinFloorSide, kMaxFloorSide)) throw ConfigError("room length " + fmt(length) + " outside [8.5, 10]");
    if (!inRange(width, kMinFloorSide, kMaxFloorSide)) throw ConfigError("room width " + fmt(width) + " outside [8.5, 10]");
    if (!inRange(height, kMinHeight, kMaxHeight)) throw ConfigError("room height " + fmt(height) + " outside [3, 3.5]");
    if (!is_allowed_t60(t60)) throw ConfigError("t60 " + fmt(t60) + " is not one of 0.2, 0.3, ..., 0.7");
}

RoomSpec sample_room(dsp::Rng& rng, int roomId) {
    RoomSpec r;
    r.roomId = roomId;
    r.length = rng.uniform(kMinFloorSide, kMaxFloorSide);
    r.width = rng.uniform(kMinFloorSide, kMaxFloorSide);
    r.height = rng.uniform(kMinHeight, kMaxHeight);
    r.t60 = kT60Values[rng.below(kT60Values.size())];
    return r;
}

std::vector<Point3> listener_grid(const RoomSpec& room, double clearance) {
    std::vector<Point3> grid;
    const auto xFirst = static_cast<int>(std::ceil(clearance - 1e-9));
    const auto xLast = static_cast<int>(std::floor(room.length - clearance + 1e-9));
    const auto yFirst = static_cast<int>(std::ceil(clearance - 1e-9));
    const auto yLast = static_cast<int>(std::floor(room.width - clearance + 1e-9));
    for (int x = xFirst; x <= xLast; ++x)
        for (int y = yFirst; y <= yLast; ++y) grid.push_back({double(x), double(y), kEarHeight});
    return grid;
}

Point3 sample_listener_position(const RoomSpec& room, dsp::Rng& rng, double clearance) {
    const auto grid = listener_grid(room, clearance);
    if (grid.empty() || kEarHeight >= room.height) {
        throw ConfigError("room " + std::to_string(room.roomId) + " has no listener grid point with " +
                          fmt(clearance) + " m wall clearance");
    }
    return grid[rng.below(grid.size())];
}

double t60_to_absorption(const RoomSpec& room) {
    if (!(room.t60 > 0.0)) throw InvalidInput("t60 must be positive");
    const double a = 0.161 * room.volume() / (room.surface_area() * room.t60);
    if (a >= 1.0) {
        throw InfeasibleRoomError("t60 " + fmt(room.t60) + " s needs absorption " + fmt(a) +
                                  " >= 1 in a " + fmt(room.volume()) + " m^3 room");
    }
    return a;
}

MicArray MicArray::orthogonal_triad(double radius) {
    MicArray a;
    a.capsules = {Point3{0, 0, 0},       Point3{radius, 0, 0}, Point3{-radius, 0, 0}, Point3{0, radius, 0},
                  Point3{0, -radius, 0}, Point3{0, 0, radius}, Point3{0, 0, -radius}};
    return a;
}

void MicArray::validate() const {
    if (capsules[0] != Point3{}) throw ConfigError("capsule 0 must sit at the array origin");
    // Normal matrix of the outer offsets must be invertible for a 3-D solve.
    double m[3][3] = {};
    for (std::size_t i = 1; i < capsules.size(); ++i) {
        const double v[3] = {capsules[i].x, capsules[i].y, capsules[i].z};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) m[r][c] += v[r] * v[c];
    }
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    const double scale = m[0][0] + m[1][1] + m[2][2];
    if (!(scale > 0.0) || std::abs(det) < 1e-9 * scale * scale * scale) {
        throw ConfigError("microphone array capsules do not span three dimensions");
    }
}

std::vector<ImageSource> image_sources(const RoomSpec& room, Point3 source, int maxOrder, int minOrder) {
    std::vector<ImageSource> images;
    if (maxOrder < 0) return images;
    for (int n1 = -maxOrder; n1 <= maxOrder; ++n1) {
        const int rest1 = maxOrder - std::abs(n1);
        for (int n2 = -rest1; n2 <= rest1; ++n2) {
            const int rest2 = rest1 - std::abs(n2);
            for (int n3 = -rest2; n3 <= rest2; ++n3) {
                const int order = std::abs(n1) + std::abs(n2) + std::abs(n3);
                if (order < minOrder) continue;
                images.push_back({{n1, n2, n3},
                                  {image_coordinate(n1, source.x, room.length),
                                   image_coordinate(n2, source.y, room.width),
                                   image_coordinate(n3, source.z, room.height)},
                                  order});
            }
        }
    }
    return images;
}

MultiChannelRir simulate_rir(const RoomSpec& room, Point3 source, Point3 listener, const MicArray& array,
                             double rate, dsp::Rng& rng, const RirOptions& options) {
    if (!(rate > 0.0)) throw InvalidInput("RIR rate must be positive");
    if (options.maxOrder < 0) throw InvalidInput("image order must be non-negative");
    if (!room.contains(source)) throw InvalidInput("source " + describe(source) + " is outside the room");
    if (!room.contains(listener)) throw InvalidInput("listener " + describe(listener) + " is outside the room");
    if (distance(source, listener) < 1e-6) throw InvalidInput("source coincides with the listener");
    for (const auto& c : array.capsules) {
        if (!room.contains(listener + c)) throw InvalidInput("microphone capsule lies outside the room");
    }

    const double absorption = options.absorption ? *options.absorption : t60_to_absorption(room);
    if (!(absorption > 0.0) || absorption > 1.0) throw InvalidInput("absorption must lie in (0, 1]");
    const double beta = std::sqrt(1.0 - absorption);
    const double seconds = options.lengthSeconds > 0.0 ? options.lengthSeconds : room.t60 + 0.1;
    const auto length = static_cast<std::size_t>(std::ceil(seconds * rate));

    const auto images = image_sources(room, source, beta > 0.0 ? options.maxOrder : 0);
    const bool tail = options.stochasticTail && beta > 0.0;
    const auto nextOrder = tail ? image_sources(room, source, options.maxOrder + 1, options.maxOrder + 1)
                                : std::vector<ImageSource>{};

    MultiChannelRir rir;
    rir.rate = rate;
    rir.sourcePosition = source;
    rir.listenerPosition = listener;
    rir.roomId = room.roomId;
    rir.directSampleIndex =
        static_cast<std::size_t>(std::llround(rate * distance(source, listener) / kSpeedOfSound));

    // Energy decay rate of the tail: 60 dB over t60.
    const double decay = std::log(1e6) / room.t60;
    // Expected per-sample energy of a complete image lattice under 1/d
    // spreading: 4 pi c / (V rate), times 2/3 for the two-tap split.
    const double latticeEnergy = (2.0 / 3.0) * 4.0 * std::numbers::pi * kSpeedOfSound / (room.volume() * rate);

    for (std::size_t ci = 0; ci < array.capsules.size(); ++ci) {
        const Point3 mic = listener + array.capsules[ci];
        std::vector<double> h(length, 0.0);
        for (const auto& img : images) {
            const double d = distance(img.position, mic);
            const double t = d / kSpeedOfSound * rate;
            const auto i = static_cast<std::size_t>(std::floor(t));
            const double frac = t - std::floor(t);
            const double amp = std::pow(beta, img.order) / d;
            if (i < length) h[i] += amp * (1.0 - frac);
            if (i + 1 < length) h[i + 1] += amp * frac;
        }
        if (tail) {
            double first = std::numeric_limits<double>::infinity();
            for (const auto& img : nextOrder) first = std::min(first, distance(img.position, mic));
            const auto start = static_cast<std::size_t>(std::floor(first / kSpeedOfSound * rate));
            dsp::Rng noise = rng.stream("tail", ci);
            for (std::size_t n = start; n < length; ++n) {
                const double t = static_cast<double>(n) / rate;
                h[n] = std::sqrt(latticeEnergy * std::exp(-decay * t)) * noise.normal();
            }
        }
        rir.channels.emplace_back(rate, std::move(h));
    }
    return rir;
}

std::vector<RingPosition> talker_ring_positions(const RoomSpec& room, Point3 listener, double radius) {
    if (!is_ring_radius(radius)) throw InvalidInput("ring radius " + fmt(radius) + " is not 1.0, 1.5 or 2.0");
    std::vector<RingPosition> ring;
    ring.reserve(kRingDirections);
    for (int k = 0; k < kRingDirections; ++k) {
        const int az = k * kRingStepDeg;
        const double phi = az * std::numbers::pi / 180.0;
        RingPosition p;
        p.azimuthDeg = az;
        p.position = listener + radius * Point3{std::cos(phi), std::sin(phi), 0.0};
        p.insideRoom = room.contains(p.position);
        ring.push_back(p);
    }
    return ring;
}

} // namespace classroom::room
