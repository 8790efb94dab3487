//
//  room.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <classroom/dsp/audio_buffer.hpp>
#include <classroom/dsp/rng.hpp>
#include <classroom/room/geometry.hpp>

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

namespace classroom::room {

inline constexpr std::array<double, 6> kT60Values{0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
inline constexpr double kMinFloorSide = 8.5;
inline constexpr double kMaxFloorSide = 10.0;
inline constexpr double kMinHeight = 3.0;
inline constexpr double kMaxHeight = 3.5;
inline constexpr double kWallClearance = 1.0;
inline constexpr std::array<double, 3> kRingRadii{1.0, 1.5, 2.0};
inline constexpr int kRingDirections = 72;
inline constexpr int kRingStepDeg = 5;

/// Shoebox classroom. Walls are the planes x = 0, x = length, y = 0,
/// y = width, z = 0 and z = height.
struct RoomSpec {
    double length = 9.0;
    double width = 9.0;
    double height = 3.0;
    double t60 = 0.5;
    int roomId = 0;

    double volume() const noexcept { return length * width * height; }
    double surface_area() const noexcept { return 2.0 * (length * width + length * height + width * height); }
    bool contains(Point3 p) const noexcept;

    /// Throws ConfigError naming the first field outside the classroom ranges.
    void validate() const;
};

/// True when t60 is one of the six allowed reverberation times.
bool is_allowed_t60(double t60) noexcept;
bool is_ring_radius(double radius) noexcept;

RoomSpec sample_room(dsp::Rng& rng, int roomId = 0);

/// Integer-metre grid points at ear height that keep `clearance` metres from
/// every wall.
std::vector<Point3> listener_grid(const RoomSpec& room, double clearance = kWallClearance);
Point3 sample_listener_position(const RoomSpec& room, dsp::Rng& rng, double clearance = kWallClearance);

/// Sabine inversion with uniform absorption: a = 0.161 V / (S t60).
/// Throws InfeasibleRoomError when a >= 1.
double t60_to_absorption(const RoomSpec& room);

/// Centre capsule plus three orthogonal +- pairs at `radius` metres.
struct MicArray {
    std::array<Point3, 7> capsules{};

    static MicArray orthogonal_triad(double radius = 0.05);
    /// Throws ConfigError when the outer capsules do not span three dimensions.
    void validate() const;
};

struct RirOptions {
    int maxOrder = 12;
    bool stochasticTail = true;
    /// Overrides the Sabine absorption derived from the room's t60.
    std::optional<double> absorption;
    /// 0 selects t60 + 0.1 s.
    double lengthSeconds = 0.0;
};

struct MultiChannelRir {
    std::vector<dsp::AudioBuffer> channels; // capsule order of the MicArray
    double rate = dsp::kCorpusRate;
    Point3 sourcePosition;
    Point3 listenerPosition;
    int roomId = 0;
    std::size_t directSampleIndex = 0;

    const dsp::AudioBuffer& center() const { return channels.front(); }
    std::size_t size() const { return channels.front().size(); }
};

struct ImageSource {
    std::array<int, 3> index{};
    Point3 position;
    int order = 0;
};

/// Mirror images of `source` with reflection order in [minOrder, maxOrder].
std::vector<ImageSource> image_sources(const RoomSpec& room, Point3 source, int maxOrder, int minOrder = 0);

/// Image-source response at each capsule (array offsets are relative to
/// `listener`) plus an exponentially decaying noise tail from the time the
/// image set stops being complete.
MultiChannelRir simulate_rir(const RoomSpec& room, Point3 source, Point3 listener, const MicArray& array,
                             double rate, dsp::Rng& rng, const RirOptions& options = {});

struct RingPosition {
    int azimuthDeg = 0; // 0..355, counter-clockwise from the +x facing direction
    Point3 position;
    bool insideRoom = true;

    /// Azimuth folded to (-180, 180]; frontal positions lie in [-90, 90].
    int signed_azimuth() const noexcept { return azimuthDeg > 180 ? azimuthDeg - 360 : azimuthDeg; }
    bool frontal() const noexcept { return signed_azimuth() >= -90 && signed_azimuth() <= 90; }
};

/// 72 positions at 5 degree steps on a horizontal circle around the listener.
std::vector<RingPosition> talker_ring_positions(const RoomSpec& room, Point3 listener, double radius);

} // namespace classroom::room
