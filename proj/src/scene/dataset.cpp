//
//  dataset.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include <classroom/binaural/azimuth.hpp>
#include <classroom/dsp/wav.hpp>
#include <classroom/errors.hpp>
#include <classroom/parallel.hpp>
#include <classroom/scene/dataset.hpp>

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>

namespace classroom::scene {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text_atomic(const fs::path& path, const std::string& text) {
    const auto tmp = fs::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << text;
        if (!out) throw IoError("failed writing " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot finalise " + path.string() + ": " + ec.message());
}

void create_dirs(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw IoError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

Range parse_range(const json& j, const char* field) {
    if (!j.is_array() || j.size() != 2) throw ConfigError(std::string(field) + " must be a two-element array");
    return {j[0].get<double>(), j[1].get<double>()};
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() || base.empty() ? p : base / p; }

std::string scene_id(const std::string& split, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%06zu", index);
    return split + buf;
}

} // namespace

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw PipelineError("SHA-256 computation failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

DatasetSpec DatasetSpec::full_scale() {
    DatasetSpec s;
    s.splits = {{"train", 40000, {1.0}}, {"val", 10000, {1.0}}, {"test", 6000, {1.0, 1.5, 2.0}}};
    return s;
}

void DatasetSpec::validate() const {
    if (version != kSpecVersion) throw ConfigError("version: unsupported spec version " + std::to_string(version));
    if (rooms < 1) throw ConfigError("rooms: at least one room is required");
    if (!roomSpecs.empty() && static_cast<int>(roomSpecs.size()) != rooms) {
        throw ConfigError("roomSpecs: expected " + std::to_string(rooms) + " entries");
    }
    for (const auto& r : roomSpecs) r.validate();
    if (splits.empty()) throw ConfigError("splits: at least one split is required");
    std::set<std::string> names;
    for (const auto& s : splits) {
        if (s.name.empty() || !names.insert(s.name).second) throw ConfigError("splits: names must be unique and non-empty");
        if (s.distances.empty()) throw ConfigError("splits." + s.name + ".distances: must not be empty");
        for (double d : s.distances)
            if (!room::is_ring_radius(d)) throw ConfigError("splits." + s.name + ".distances: must be 1.0, 1.5 or 2.0");
    }
    double weight = 0.0;
    for (const auto& [p, w] : pairWeights) {
        if (!(w >= 0.0)) throw ConfigError("pairWeights: weights must be non-negative");
        weight += w;
    }
    if (!(weight > 0.0)) throw ConfigError("pairWeights: at least one weight must be positive");
    SceneConfig probe;
    probe.snrRangeDb = snrRangeDb;
    probe.babbleSnrRangeDb = babbleSnrRangeDb;
    probe.babbleMinSources = babbleMinSources;
    probe.babbleMaxSources = babbleMaxSources;
    probe.validate();
    if (!(babbleFraction >= 0.0 && babbleFraction <= 1.0)) throw ConfigError("babbleFraction: must lie in [0, 1]");
    if (!(headRadius >= 0.05 && headRadius <= 0.12)) throw ConfigError("headRadius: must lie in [0.05, 0.12] m");
    if (maxOrder < 0 || maxOrder > 40) throw ConfigError("maxOrder: must lie in [0, 40]");
    if (hrir.empty()) throw ConfigError("hrir: give an HRIR pack directory or 'synthetic'");
    if (hrir != "synthetic" && !fs::exists(fs::path(hrir) / "manifest.json")) {
        throw ConfigError("hrir: no HRIR pack at '" + hrir + "'");
    }
}

const SplitSpec& DatasetSpec::split(const std::string& name) const {
    for (const auto& s : splits)
        if (s.name == name) return s;
    throw ConfigError("unknown split '" + name + "'");
}

std::vector<double> DatasetSpec::all_distances() const {
    std::set<double> d;
    for (const auto& s : splits) d.insert(s.distances.begin(), s.distances.end());
    return {d.begin(), d.end()};
}

DatasetSpec parse_dataset_spec(const json& j, const fs::path& baseDir) {
    static const std::set<std::string> known{
        "version", "seed", "rooms", "roomSpecs", "splits", "pairWeights", "snrRangeDb", "babbleSnrRangeDb",
        "babbleSources", "babbleFraction", "babbleReference", "corpus", "hrir", "headRadius", "maxOrder", "bankRoot", "output"};
    if (!j.is_object()) throw ConfigError("dataset spec must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!known.contains(key)) throw ConfigError(key + ": unknown field");

    DatasetSpec s = DatasetSpec::full_scale();
    try {
        s.version = j.value("version", kSpecVersion);
        s.seed = j.value("seed", s.seed);
        s.rooms = j.value("rooms", s.rooms);
        if (j.contains("roomSpecs")) {
            for (const auto& r : j.at("roomSpecs")) {
                room::RoomSpec spec;
                spec.length = r.at("length").get<double>();
                spec.width = r.at("width").get<double>();
                spec.height = r.at("height").get<double>();
                spec.t60 = r.at("t60").get<double>();
                spec.roomId = static_cast<int>(s.roomSpecs.size());
                s.roomSpecs.push_back(spec);
            }
            if (!j.contains("rooms")) s.rooms = static_cast<int>(s.roomSpecs.size());
        }
        if (j.contains("splits")) {
            s.splits.clear();
            for (const auto& e : j.at("splits")) {
                SplitSpec split;
                split.name = e.at("name").get<std::string>();
                split.count = e.at("count").get<std::size_t>();
                split.distances = e.value("distances", std::vector<double>{1.0});
                s.splits.push_back(std::move(split));
            }
        }
        if (j.contains("pairWeights")) {
            s.pairWeights.clear();
            for (const auto& [name, w] : j.at("pairWeights").items()) s.pairWeights[parse_pair_type(name)] = w.get<double>();
        }
        if (j.contains("snrRangeDb")) s.snrRangeDb = parse_range(j.at("snrRangeDb"), "snrRangeDb");
        if (j.contains("babbleSnrRangeDb")) s.babbleSnrRangeDb = parse_range(j.at("babbleSnrRangeDb"), "babbleSnrRangeDb");
        if (j.contains("babbleSources")) {
            const auto r = parse_range(j.at("babbleSources"), "babbleSources");
            s.babbleMinSources = static_cast<int>(r.lo);
            s.babbleMaxSources = static_cast<int>(r.hi);
        }
        s.babbleFraction = j.value("babbleFraction", s.babbleFraction);
        if (j.contains("babbleReference")) {
            s.babbleReference = parse_babble_reference(j.at("babbleReference").get<std::string>());
        }
        if (j.contains("corpus")) s.corpusManifest = resolve(baseDir, j.at("corpus").get<std::string>());
        s.hrir = j.value("hrir", s.hrir);
        if (s.hrir != "synthetic" && !s.hrir.empty()) s.hrir = resolve(baseDir, s.hrir).string();
        s.headRadius = j.value("headRadius", s.headRadius);
        s.maxOrder = j.value("maxOrder", s.maxOrder);
        s.bankRoot = resolve(baseDir, j.value("bankRoot", s.bankRoot.string()));
        s.output = resolve(baseDir, j.value("output", s.output.string()));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed dataset spec: ") + e.what());
    }
    return s;
}

DatasetSpec load_dataset_spec(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("malformed config " + path.string() + ": " + e.what());
    }
    return parse_dataset_spec(j, path.parent_path());
}

json dataset_spec_json(const DatasetSpec& s) {
    json splits = json::array();
    for (const auto& split : s.splits) {
        splits.push_back({{"name", split.name}, {"count", split.count}, {"distances", split.distances}});
    }
    json weights = json::object();
    for (const auto& [p, w] : s.pairWeights) weights[to_string(p)] = w;
    json j{{"version", s.version},
           {"seed", s.seed},
           {"rooms", s.rooms},
           {"splits", splits},
           {"pairWeights", weights},
           {"snrRangeDb", {s.snrRangeDb.lo, s.snrRangeDb.hi}},
           {"babbleSnrRangeDb", {s.babbleSnrRangeDb.lo, s.babbleSnrRangeDb.hi}},
           {"babbleSources", {s.babbleMinSources, s.babbleMaxSources}},
           {"babbleFraction", s.babbleFraction},
           {"babbleReference", to_string(s.babbleReference)},
           {"corpus", s.corpusManifest.string()},
           {"hrir", s.hrir},
           {"headRadius", s.headRadius},
           {"maxOrder", s.maxOrder},
           {"bankRoot", s.bankRoot.string()},
           {"output", s.output.string()}};
    if (!s.roomSpecs.empty()) {
        json rooms = json::array();
        for (const auto& r : s.roomSpecs)
            rooms.push_back({{"length", r.length}, {"width", r.width}, {"height", r.height}, {"t60", r.t60}});
        j["roomSpecs"] = rooms;
    }
    return j;
}

JobPlan plan_jobs(const DatasetSpec& spec) {
    spec.validate();
    JobPlan plan;
    plan.rooms = spec.rooms;
    plan.distances = spec.all_distances();
    plan.rirJobsPerDistance = static_cast<std::size_t>(spec.rooms) * room::kRingDirections;
    plan.brirsPerDistance = static_cast<std::size_t>(spec.rooms) * binaural::kFrontalCount;
    plan.totalRirJobs = plan.rirJobsPerDistance * plan.distances.size();
    plan.totalBrirs = plan.brirsPerDistance * plan.distances.size();
    for (const auto& s : spec.splits) {
        plan.scenesPerSplit[s.name] = s.count;
        plan.totalScenes += s.count;
    }
    return plan;
}

double listener_clearance(const DatasetSpec& spec) {
    const auto d = spec.all_distances();
    return std::max(room::kWallClearance, d.back() + 0.05);
}

std::vector<RoomPlan> plan_rooms(const DatasetSpec& spec) {
    spec.validate();
    const dsp::Rng master(spec.seed);
    const double clearance = listener_clearance(spec);
    std::vector<RoomPlan> plans;
    for (int i = 0; i < spec.rooms; ++i) {
        RoomPlan p;
        if (spec.roomSpecs.empty()) {
            auto r = master.stream("room", static_cast<std::uint64_t>(i));
            p.room = room::sample_room(r, i);
        } else {
            p.room = spec.roomSpecs[static_cast<std::size_t>(i)];
            p.room.roomId = i;
        }
        auto l = master.stream("listener", static_cast<std::uint64_t>(i));
        p.listener = room::sample_listener_position(p.room, l, clearance);
        plans.push_back(p);
    }
    return plans;
}

std::vector<ScenePlan> plan_scenes(const DatasetSpec& spec) {
    spec.validate();
    const auto plan = dsp::Rng(spec.seed).stream("plan");
    double total = 0.0;
    for (const auto& [p, w] : spec.pairWeights) total += w;
    std::vector<ScenePlan> out;
    for (const auto& split : spec.splits) {
        for (std::size_t i = 0; i < split.count; ++i) {
            auto r = plan.stream(split.name, i);
            ScenePlan s;
            s.sceneId = scene_id(split.name, i);
            s.split = split.name;
            s.roomId = static_cast<int>(r.below(static_cast<std::uint64_t>(spec.rooms)));
            s.distance = split.distances[r.below(split.distances.size())];
            double u = r.uniform() * total;
            s.pairType = spec.pairWeights.rbegin()->first;
            for (const auto& [p, w] : spec.pairWeights) {
                if (w > 0.0 && u < w) {
                    s.pairType = p;
                    break;
                }
                u -= w;
            }
            s.babble = r.uniform() < spec.babbleFraction;
            s.seed = r.next_u64();
            out.push_back(std::move(s));
        }
    }
    return out;
}

SceneConfig scene_config(const DatasetSpec& spec, const ScenePlan& plan) {
    SceneConfig c;
    c.pairType = plan.pairType;
    c.snrRangeDb = spec.snrRangeDb;
    c.babble = plan.babble;
    c.babbleSnrRangeDb = spec.babbleSnrRangeDb;
    c.babbleMinSources = spec.babbleMinSources;
    c.babbleMaxSources = spec.babbleMaxSources;
    c.babbleReference = spec.babbleReference;
    c.distance = plan.distance;
    c.seed = plan.seed;
    return c;
}

binaural::HrirSet resolve_hrirs(const DatasetSpec& spec) {
    if (spec.hrir == "synthetic") return binaural::synthetic_hrir_set(spec.headRadius);
    if (!fs::exists(fs::path(spec.hrir) / "manifest.json")) throw ConfigError("hrir: no HRIR pack at '" + spec.hrir + "'");
    return binaural::load_hrir_pack(spec.hrir);
}

RoomsResult render_room_caches(const DatasetSpec& spec, const binaural::HrirSet& hrirs, int jobs, bool writeRirs,
                               const Logger& log) {
    const auto rooms = plan_rooms(spec);
    const auto distances = spec.all_distances();
    const auto array = room::MicArray::orthogonal_triad();
    room::RirOptions options;
    options.maxOrder = spec.maxOrder;
    const dsp::Rng master = dsp::Rng(spec.seed).stream("banks");

    RoomsResult result;
    for (const auto& plan : rooms) {
        const auto roomDir = binaural::bank_directory(spec.bankRoot, plan.room.roomId, 1.0).parent_path();
        create_dirs(roomDir);
        json info{{"roomId", plan.room.roomId},
                  {"length", plan.room.length},
                  {"width", plan.room.width},
                  {"height", plan.room.height},
                  {"t60", plan.room.t60},
                  {"listener", {plan.listener.x, plan.listener.y, plan.listener.z}}};
        write_text_atomic(roomDir / "room.json", info.dump(2) + "\n");

        for (double d : distances) {
            const auto dir = binaural::bank_directory(spec.bankRoot, plan.room.roomId, d);
            if (binaural::brir_bank_complete(dir)) {
                ++result.banksSkipped;
                continue;
            }
            const auto rng = master.stream("room", static_cast<std::uint64_t>(plan.room.roomId))
                                 .stream("distance", static_cast<std::uint64_t>(std::lround(d * 10)));
            if (writeRirs) create_dirs(dir / "rir");
            std::vector<std::optional<binaural::Brir>> brirs(room::kRingDirections);
            parallel_for(brirs.size(), static_cast<std::size_t>(std::max(jobs, 1)), [&](std::size_t k) {
                const int az = static_cast<int>(k) * room::kRingStepDeg;
                auto ring = binaural::render_ring_direction(plan.room, plan.listener, d, az, hrirs, array, rng, options);
                if (writeRirs) {
                    char name[32];
                    std::snprintf(name, sizeof name, "ring%03d.wav", az);
                    dsp::write_wav(dir / "rir" / name, ring.rir.channels);
                }
                brirs[k] = std::move(ring.brir);
            });
            binaural::BrirBank bank;
            bank.roomId = plan.room.roomId;
            bank.distance = d;
            for (auto& b : brirs) {
                if (!b) continue;
                b->distance = d;
                bank.entries.emplace(b->azimuthLabel, std::move(*b));
            }
            if (bank.entries.size() != binaural::kFrontalCount) {
                throw PipelineError("room " + std::to_string(plan.room.roomId) + " produced " +
                                    std::to_string(bank.entries.size()) + " distinct frontal labels");
            }
            binaural::save_brir_bank(bank, dir);
            result.rirJobs += room::kRingDirections;
            result.brirsWritten += bank.entries.size();
            if (log) log("rendered " + dir.string());
        }
    }
    return result;
}

std::map<std::string, UtterancePool> pools_from_corpus(const DatasetSpec& spec, const Logger& log) {
    if (spec.corpusManifest.empty()) throw ConfigError("corpus: no corpus manifest given");
    const auto report = ingest_corpus(spec.corpusManifest);
    if (log) {
        log("ingested " + std::to_string(report.accepted.size()) + " utterances, rejected " +
            std::to_string(report.rejected.size()));
    }
    std::map<std::string, std::vector<UtteranceRef>> bySplit;
    for (const auto& r : report.accepted) bySplit[r.split].push_back(r);
    std::map<std::string, UtterancePool> pools;
    for (auto& [name, refs] : bySplit) pools.emplace(name, UtterancePool(std::move(refs)));
    return pools;
}

DatasetResult generate_dataset(const DatasetSpec& spec, int jobs, const Logger& log) {
    return generate_dataset(spec, pools_from_corpus(spec, log), jobs, log);
}

namespace {

void write_scene(const SceneBundle& bundle, const fs::path& dir) {
    create_dirs(dir);
    SceneManifest manifest = bundle.manifest;
    auto put = [&](const std::string& name, const dsp::BinauralBuffer& b) {
        const auto bytes = dsp::encode_wav({b.left(), b.right()}, dsp::SampleFormat::Float32);
        manifest.files[name] = sha256_hex(bytes);
        std::ofstream out(dir / name, std::ios::binary);
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("failed writing " + (dir / name).string());
    };
    put("mixture.wav", bundle.mixture);
    put("ref1.wav", bundle.references[0]);
    put("ref2.wav", bundle.references[1]);
    if (bundle.babble) put("babble.wav", *bundle.babble);
    // The manifest goes last; its presence marks a finished scene.
    write_text_atomic(dir / "manifest.json", json(manifest).dump(2) + "\n");
}

void write_histograms(const fs::path& path, const std::vector<double>& mixture, const std::vector<double>& babble,
                      const DatasetSpec& spec) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "quantity,binLow,binHigh,count\n";
    auto emit = [&](const char* name, const std::vector<double>& values, Range r) {
        constexpr int kBins = 10;
        const double width = (r.hi - r.lo) / kBins;
        std::vector<std::size_t> counts(kBins, 0);
        for (double v : values) {
            int b = width > 0 ? static_cast<int>(std::floor((v - r.lo) / width)) : 0;
            counts[static_cast<std::size_t>(std::clamp(b, 0, kBins - 1))]++;
        }
        for (int b = 0; b < kBins; ++b) {
            out << name << ',' << r.lo + b * width << ',' << r.lo + (b + 1) * width << ',' << counts[b] << '\n';
        }
    };
    emit("mixtureSnrDb", mixture, spec.snrRangeDb);
    emit("babbleSnrDb", babble, spec.babbleSnrRangeDb);
}

} // namespace

DatasetResult generate_dataset(const DatasetSpec& spec, const std::map<std::string, UtterancePool>& pools, int jobs,
                               const Logger& log) {
    const auto plans = plan_scenes(spec);
    const auto rooms = plan_rooms(spec);
    std::vector<UtteranceRef> everyone;
    for (const auto& s : spec.splits) {
        const auto it = pools.find(s.name);
        if (s.count > 0 && (it == pools.end() || it->second.size() == 0)) {
            throw ConfigError("corpus: no utterances for split '" + s.name + "'");
        }
        if (it != pools.end()) {
            for (auto r : it->second.refs()) {
                r.split = s.name;
                everyone.push_back(std::move(r));
            }
        }
    }
    check_speaker_disjointness(everyone);

    std::mutex bankMutex;
    std::map<std::pair<int, long>, std::shared_ptr<const binaural::BrirBank>> banks;
    auto bank_for = [&](int roomId, double distance) {
        const std::pair<int, long> key{roomId, std::lround(distance * 10)};
        {
            std::lock_guard lock(bankMutex);
            if (auto it = banks.find(key); it != banks.end()) return it->second;
        }
        const auto dir = binaural::bank_directory(spec.bankRoot, roomId, distance);
        if (!binaural::brir_bank_complete(dir)) {
            throw ConfigError("no complete BRIR bank at " + dir.string() + "; run the rooms command first");
        }
        auto loaded = std::make_shared<const binaural::BrirBank>(binaural::load_brir_bank(dir));
        std::lock_guard lock(bankMutex);
        return banks.emplace(key, loaded).first->second;
    };

    std::atomic<std::size_t> written{0}, skipped{0};
    parallel_for(plans.size(), static_cast<std::size_t>(std::max(jobs, 1)), [&](std::size_t i) {
        const auto& plan = plans[i];
        const auto dir = spec.output / plan.split / plan.sceneId;
        if (fs::exists(dir / "manifest.json")) {
            ++skipped;
            return;
        }
        const auto& roomPlan = rooms[static_cast<std::size_t>(plan.roomId)];
        SceneContext context{plan.sceneId, plan.split, plan.roomId, roomPlan.listener};
        try {
            const auto bundle = synth_scene(scene_config(spec, plan), pools.at(plan.split),
                                            *bank_for(plan.roomId, plan.distance), context);
            write_scene(bundle, dir);
        } catch (const PoolExhaustedError& e) {
            throw PoolExhaustedError(std::string(e.what()) + " (scene " + plan.sceneId + ")", plan.sceneId);
        }
        if (++written % 100 == 0 && log) log("wrote " + std::to_string(written.load()) + " scenes");
    });

    DatasetResult result;
    result.written = written;
    result.skipped = skipped;
    json scenes = json::array();
    std::map<std::string, std::vector<double>> mixSnr, babbleSnr;
    double mixTotal = 0.0, babbleTotal = 0.0;
    std::size_t babbleCount = 0;
    for (const auto& plan : plans) {
        const auto m = read_json(spec.output / plan.split / plan.sceneId / "manifest.json").get<SceneManifest>();
        result.perSplit[plan.split]++;
        mixSnr[plan.split].push_back(m.mixtureSnrDb);
        mixTotal += m.mixtureSnrDb;
        if (m.babble) {
            babbleSnr[plan.split].push_back(m.babbleSnrDb);
            babbleTotal += m.babbleSnrDb;
            ++babbleCount;
        }
        scenes.push_back({{"sceneId", m.sceneId},
                          {"split", m.split},
                          {"path", (fs::path(plan.split) / plan.sceneId).generic_string()},
                          {"roomId", m.roomId},
                          {"distance", m.distance},
                          {"pairType", to_string(m.pairType)},
                          {"babble", m.babble},
                          {"mixtureSnrDb", m.mixtureSnrDb},
                          {"babbleSnrDb", m.babbleSnrDb},
                          {"seed", m.seed},
                          {"files", m.files}});
    }
    const std::string canonical = scenes.dump();
    result.indexHash = sha256_hex({reinterpret_cast<const std::uint8_t*>(canonical.data()), canonical.size()});
    if (!plans.empty()) result.meanMixtureSnrDb = mixTotal / static_cast<double>(plans.size());
    if (babbleCount) result.meanBabbleSnrDb = babbleTotal / static_cast<double>(babbleCount);

    create_dirs(spec.output);
    json index{{"version", kPipelineVersion},
               {"spec", dataset_spec_json(spec)},
               {"sceneCount", plans.size()},
               {"hash", result.indexHash},
               {"scenes", scenes}};
    write_text_atomic(spec.output / "index.json", index.dump(2) + "\n");
    for (const auto& s : spec.splits) {
        if (s.count == 0) continue;
        write_histograms(spec.output / s.name / "snr_histogram.csv", mixSnr[s.name], babbleSnr[s.name], spec);
    }
    return result;
}

SceneBundle load_scene(const fs::path& sceneDir) {
    SceneBundle b;
    try {
        b.manifest = read_json(sceneDir / "manifest.json").get<SceneManifest>();
    } catch (const json::exception& e) {
        throw IoError("malformed scene manifest in " + sceneDir.string() + ": " + e.what());
    }
    b.mixture = dsp::read_binaural_wav(sceneDir / "mixture.wav");
    b.references = {dsp::read_binaural_wav(sceneDir / "ref1.wav"), dsp::read_binaural_wav(sceneDir / "ref2.wav")};
    if (b.manifest.babble) b.babble = dsp::read_binaural_wav(sceneDir / "babble.wav");
    return b;
}

} // namespace classroom::scene
