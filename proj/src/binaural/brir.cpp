//
//  brir.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include <classroom/binaural/azimuth.hpp>
#include <classroom/binaural/brir.hpp>
#include <classroom/dsp/wav.hpp>
#include <classroom/errors.hpp>
#include <classroom/parallel.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace classroom::binaural {

namespace fs = std::filesystem;
using dsp::AudioBuffer;
using dsp::BinauralBuffer;

Brir render_brir(const room::MultiChannelRir& rir, const DoaTrack& track, const HrirSet& hrirs, dsp::Rng& rng) {
    const auto& centre = rir.center();
    if (track.size() != centre.size()) throw InvalidInput("DoA track length differs from the RIR length");
    if (rir.rate != hrirs.rate()) throw InvalidInput("RIR and HRIR sample rates differ");

    const auto grid = frontal_azimuths();
    const std::size_t hl = hrirs.length();
    BinauralBuffer out(rir.rate, centre.size() + hl - 1);
    auto& left = out.left();
    auto& right = out.right();
    for (std::size_t n = 0; n < centre.size(); ++n) {
        const double a = centre[n];
        if (a == 0.0) continue;
        const int az = track.diffuse(n) ? grid[rng.below(grid.size())] : track.snapped(n);
        const auto& h = hrirs.at(az);
        for (std::size_t k = 0; k < hl; ++k) {
            left[n + k] += a * h.left()[k];
            right[n + k] += a * h.right()[k];
        }
    }

    const room::Point3 offset = rir.sourcePosition - rir.listenerPosition;
    Brir brir;
    brir.response = std::move(out);
    brir.azimuthLabel = snap_azimuth(std::atan2(offset.y, offset.x) * 180.0 / std::numbers::pi);
    brir.roomId = rir.roomId;
    brir.distance = room::norm(offset);
    return brir;
}

Brir distance_scale(const Brir& brir, double targetDistance) {
    if (!(brir.distance > 0.0) || !(targetDistance > 0.0)) throw InvalidInput("distances must be positive");
    Brir scaled = brir;
    scaled.response.scale(brir.distance / targetDistance);
    scaled.distance = targetDistance;
    return scaled;
}

const Brir& BrirBank::at(int azimuthDeg) const {
    const auto it = entries.find(azimuthDeg);
    if (it == entries.end()) {
        throw MissingAzimuthError("BRIR bank of room " + std::to_string(roomId) + " has no azimuth " +
                                      std::to_string(azimuthDeg),
                                  azimuthDeg);
    }
    return it->second;
}

void BrirBank::validate() const {
    for (int az : frontal_azimuths()) at(az);
    const auto& first = entries.begin()->second.response;
    for (const auto& [az, b] : entries) {
        if (b.response.size() != first.size() || b.rate() != first.rate()) {
            throw InvalidInput("BRIR bank entries differ in length or rate");
        }
    }
}

double BrirBank::rate() const {
    if (entries.empty()) throw InvalidInput("BRIR bank is empty");
    return entries.begin()->second.rate();
}

RingRender render_ring_direction(const room::RoomSpec& room, room::Point3 listener, double radius, int azimuthDeg,
                                 const HrirSet& hrirs, const room::MicArray& array, const dsp::Rng& rng,
                                 const room::RirOptions& options) {
    if (azimuthDeg < 0 || azimuthDeg >= 360 || azimuthDeg % room::kRingStepDeg != 0) {
        throw InvalidInput("ring azimuth " + std::to_string(azimuthDeg) + " is not on the ring");
    }
    const auto ring = room::talker_ring_positions(room, listener, radius);
    const auto& pos = ring[static_cast<std::size_t>(azimuthDeg / room::kRingStepDeg)];
    const auto streams = rng.stream("ring", static_cast<std::uint64_t>(azimuthDeg));
    auto rirRng = streams.stream("rir");
    auto diffuseRng = streams.stream("diffuse");

    RingRender out;
    out.azimuthDeg = azimuthDeg;
    out.rir = room::simulate_rir(room, pos.position, listener, array, hrirs.rate(), rirRng, options);
    if (pos.frontal()) out.brir = render_brir(out.rir, sdm_analyze(out.rir, array), hrirs, diffuseRng);
    return out;
}

BrirBank render_brir_bank(const room::RoomSpec& room, room::Point3 listener, double radius, const HrirSet& hrirs,
                          const room::MicArray& array, const dsp::Rng& rng, const room::RirOptions& options,
                          int jobs) {
    const auto grid = frontal_azimuths();
    std::vector<Brir> rendered(grid.size());
    parallel_for(grid.size(), static_cast<std::size_t>(std::max(jobs, 1)), [&](std::size_t i) {
        const int ringAz = (grid[i] + 360) % 360;
        rendered[i] = *render_ring_direction(room, listener, radius, ringAz, hrirs, array, rng, options).brir;
    });
    BrirBank bank;
    bank.roomId = room.roomId;
    bank.distance = radius;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        rendered[i].azimuthLabel = grid[i];
        rendered[i].distance = radius;
        bank.entries.emplace(grid[i], std::move(rendered[i]));
    }
    return bank;
}

fs::path bank_directory(const fs::path& root, int roomId, double distance) {
    char room[32], dist[32];
    std::snprintf(room, sizeof room, "room_%03d", roomId);
    std::snprintf(dist, sizeof dist, "d%.1f", distance);
    return root / room / dist;
}

void save_brir_bank(const BrirBank& bank, const fs::path& dir) {
    bank.validate();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    for (const auto& [az, b] : bank.entries) dsp::write_wav(dir / (azimuth_tag(az) + ".wav"), b.response);
    // Written last so an interrupted save never looks complete.
    nlohmann::json j{{"roomId", bank.roomId},
                     {"distance", bank.distance},
                     {"rate", bank.rate()},
                     {"length", bank.entries.begin()->second.response.size()}};
    const auto tmp = dir / "bank.json.tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << j.dump(2) << '\n';
    }
    fs::rename(tmp, dir / "bank.json", ec);
    if (ec) throw IoError("cannot finalise " + (dir / "bank.json").string() + ": " + ec.message());
}

BrirBank load_brir_bank(const fs::path& dir) {
    std::ifstream in(dir / "bank.json");
    if (!in) throw IoError("no BRIR bank at " + dir.string());
    nlohmann::json j;
    BrirBank bank;
    try {
        in >> j;
        bank.roomId = j.at("roomId").get<int>();
        bank.distance = j.at("distance").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed bank.json in " + dir.string() + ": " + e.what());
    }
    for (int az : frontal_azimuths()) {
        const auto path = dir / (azimuth_tag(az) + ".wav");
        if (!fs::exists(path)) {
            throw MissingAzimuthError("BRIR bank " + dir.string() + " has no azimuth " + std::to_string(az), az);
        }
        Brir b;
        b.response = dsp::read_binaural_wav(path);
        b.azimuthLabel = az;
        b.roomId = bank.roomId;
        b.distance = bank.distance;
        bank.entries.emplace(az, std::move(b));
    }
    bank.validate();
    return bank;
}

bool brir_bank_complete(const fs::path& dir) {
    if (!fs::exists(dir / "bank.json")) return false;
    for (int az : frontal_azimuths())
        if (!fs::exists(dir / (azimuth_tag(az) + ".wav"))) return false;
    return true;
}

} // namespace classroom::binaural
