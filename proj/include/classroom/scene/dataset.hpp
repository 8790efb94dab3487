//
//  dataset.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <classroom/binaural/hrir.hpp>
#include <classroom/scene/scene.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace classroom::scene {

inline constexpr int kSpecVersion = 1;

struct SplitSpec {
    std::string name;
    std::size_t count = 0;
    std::vector<double> distances{1.0};
};

struct DatasetSpec {
    int version = kSpecVersion;
    std::uint64_t seed = 1;
    int rooms = 30;
    /// When non-empty these rooms are used in order instead of sampled ones.
    std::vector<room::RoomSpec> roomSpecs;
    std::vector<SplitSpec> splits;
    std::map<PairType, double> pairWeights{
        {PairType::ChildChild, 1.0}, {PairType::ChildAdult, 1.0}, {PairType::AdultAdult, 1.0}};
    Range snrRangeDb{0.0, 5.0};
    Range babbleSnrRangeDb{-2.5, 15.0};
    int babbleMinSources = 3;
    int babbleMaxSources = 8;
    double babbleFraction = 0.5;
    BabbleReference babbleReference = BabbleReference::BothTalkers;
    std::filesystem::path corpusManifest;
    /// "synthetic" or the path of an HRIR pack directory.
    std::string hrir = "synthetic";
    double headRadius = binaural::kDefaultHeadRadius;
    int maxOrder = 12;
    std::filesystem::path bankRoot = "banks";
    std::filesystem::path output = "dataset";

    /// 40,000 / 10,000 / 6,000 scenes over 30 rooms; test scenes span 1.0, 1.5 and 2.0 m.
    static DatasetSpec full_scale();

    /// Throws ConfigError naming the offending field.
    void validate() const;
    const SplitSpec& split(const std::string& name) const;
    /// Sorted union of the distances of every split.
    std::vector<double> all_distances() const;
};

/// Relative paths in the file are resolved against the file's directory.
DatasetSpec load_dataset_spec(const std::filesystem::path& path);
DatasetSpec parse_dataset_spec(const nlohmann::json& j, const std::filesystem::path& baseDir = {});
nlohmann::json dataset_spec_json(const DatasetSpec& spec);

struct JobPlan {
    int rooms = 0;
    std::vector<double> distances;
    std::size_t rirJobsPerDistance = 0;
    std::size_t brirsPerDistance = 0;
    std::size_t totalRirJobs = 0;
    std::size_t totalBrirs = 0;
    std::map<std::string, std::size_t> scenesPerSplit;
    std::size_t totalScenes = 0;
};

/// Counts the work a spec implies without doing any of it.
JobPlan plan_jobs(const DatasetSpec& spec);

struct RoomPlan {
    room::RoomSpec room;
    room::Point3 listener;
};

/// Listeners keep enough clearance for the widest talker ring to stay inside the room.
double listener_clearance(const DatasetSpec& spec);
std::vector<RoomPlan> plan_rooms(const DatasetSpec& spec);

struct ScenePlan {
    std::string sceneId;
    std::string split;
    int roomId = 0;
    double distance = 1.0;
    PairType pairType = PairType::ChildChild;
    bool babble = false;
    std::uint64_t seed = 0;
};

std::vector<ScenePlan> plan_scenes(const DatasetSpec& spec);
SceneConfig scene_config(const DatasetSpec& spec, const ScenePlan& plan);

binaural::HrirSet resolve_hrirs(const DatasetSpec& spec);

using Logger = std::function<void(const std::string&)>;

struct RoomsResult {
    std::size_t rirJobs = 0;
    std::size_t brirsWritten = 0;
    std::size_t banksSkipped = 0;
};

/// Renders the RIR and BRIR caches for every room and distance. Complete banks are left alone.
RoomsResult render_room_caches(const DatasetSpec& spec, const binaural::HrirSet& hrirs, int jobs,
                               bool writeRirs = true, const Logger& log = {});

struct DatasetResult {
    std::size_t written = 0;
    std::size_t skipped = 0;
    std::map<std::string, std::size_t> perSplit;
    double meanMixtureSnrDb = 0.0;
    double meanBabbleSnrDb = 0.0;
    std::string indexHash;
};

/// Writes `<output>/<split>/<sceneId>/{mixture,ref1,ref2,babble?}.wav` plus `manifest.json`, then
/// `index.json` and per-split SNR histograms. Scenes whose manifest already exists are skipped.
DatasetResult generate_dataset(const DatasetSpec& spec, int jobs, const Logger& log = {});

/// Same as above with pools supplied by the caller instead of the corpus manifest.
DatasetResult generate_dataset(const DatasetSpec& spec, const std::map<std::string, UtterancePool>& pools, int jobs,
                               const Logger& log = {});

std::map<std::string, UtterancePool> pools_from_corpus(const DatasetSpec& spec, const Logger& log = {});

SceneBundle load_scene(const std::filesystem::path& sceneDir);

std::string sha256_hex(std::span<const std::uint8_t> bytes);

} // namespace classroom::scene
