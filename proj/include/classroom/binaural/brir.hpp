//
//  brir.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <classroom/binaural/hrir.hpp>
#include <classroom/binaural/sdm.hpp>
#include <classroom/dsp/rng.hpp>
#include <classroom/room/room.hpp>

#include <filesystem>
#include <map>

namespace classroom::binaural {

struct Brir {
    dsp::BinauralBuffer response;
    int azimuthLabel = 0;
    int roomId = 0;
    double distance = 1.0;

    double rate() const noexcept { return response.rate(); }
};

/// Sum over RIR samples of centre-capsule amplitude times the HRIR of that sample's direction.
/// Diffuse samples take a uniformly drawn grid direction from `rng`.
Brir render_brir(const room::MultiChannelRir& rir, const DoaTrack& track, const HrirSet& hrirs, dsp::Rng& rng);

Brir distance_scale(const Brir& brir, double targetDistance);

/// BRIRs of one (room, listener distance) keyed by frontal grid azimuth.
struct BrirBank {
    int roomId = 0;
    double distance = 1.0;
    std::map<int, Brir> entries;

    /// Throws MissingAzimuthError.
    const Brir& at(int azimuthDeg) const;
    /// Throws MissingAzimuthError naming the first absent frontal azimuth, InvalidInput on uneven shapes.
    void validate() const;
    double rate() const;
};

struct RingRender {
    int azimuthDeg = 0; // ring azimuth 0..355
    room::MultiChannelRir rir;
    std::optional<Brir> brir; // frontal directions only
};

/// Simulates one ring direction around `listener`. Randomness comes from streams of `rng` keyed by the
/// direction, so results do not depend on job order.
RingRender render_ring_direction(const room::RoomSpec& room, room::Point3 listener, double radius, int azimuthDeg,
                                 const HrirSet& hrirs, const room::MicArray& array, const dsp::Rng& rng,
                                 const room::RirOptions& options = {});

/// Renders the 37 frontal ring directions.
BrirBank render_brir_bank(const room::RoomSpec& room, room::Point3 listener, double radius, const HrirSet& hrirs,
                          const room::MicArray& array, const dsp::Rng& rng, const room::RirOptions& options = {},
                          int jobs = 1);

/// `<root>/room_007/d1.5`
std::filesystem::path bank_directory(const std::filesystem::path& root, int roomId, double distance);

void save_brir_bank(const BrirBank& bank, const std::filesystem::path& dir);
BrirBank load_brir_bank(const std::filesystem::path& dir);
bool brir_bank_complete(const std::filesystem::path& dir);

} // namespace classroom::binaural
