#include <classroom/binaural/azimuth.hpp>
#include <classroom/binaural/hrir.hpp>
#include <classroom/dsp/wav.hpp>
#include <classroom/errors.hpp>
#include <classroom/scene/dataset.hpp>
#include <classroom/scene/demo_corpus.hpp>

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>

using namespace classroom;
using namespace classroom::scene;
using classroom::dsp::AudioBuffer;
using classroom::dsp::BinauralBuffer;
using classroom::dsp::Rng;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("classroom_scene_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

double pooled_power(const BinauralBuffer& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) acc += b.left()[i] * b.left()[i] + b.right()[i] * b.right()[i];
    return acc / (2.0 * static_cast<double>(b.size()));
}

double measured_snr(const BinauralBuffer& ref, const BinauralBuffer& interferer) {
    return 10.0 * std::log10(pooled_power(ref) / pooled_power(interferer));
}

BinauralBuffer noise(std::uint64_t seed, std::size_t n, double scale = 1.0) {
    Rng rng(seed);
    BinauralBuffer b(16000.0, n);
    for (std::size_t i = 0; i < n; ++i) {
        b.left()[i] = scale * rng.normal();
        b.right()[i] = scale * rng.normal();
    }
    return b;
}

// Anechoic, reverberation-free stand-in for a room: BRIR k is the synthetic HRIR at k.
binaural::BrirBank hrir_bank() {
    const auto hrirs = binaural::synthetic_hrir_set(binaural::kDefaultHeadRadius);
    binaural::BrirBank bank;
    for (const auto& [az, h] : hrirs.responses()) bank.entries.emplace(az, binaural::Brir{h, az, 0, 1.0});
    return bank;
}

DemoCorpusOptions small_corpus() {
    DemoCorpusOptions o;
    o.speakersPerGroup = 4;
    o.utterancesPerSpeaker = 5;
    return o;
}

double max_abs_diff(const BinauralBuffer& a, const BinauralBuffer& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a.left()[i] - b.left()[i]));
        m = std::max(m, std::abs(a.right()[i] - b.right()[i]));
    }
    return m;
}

std::vector<std::uint8_t> bytes_of(const BinauralBuffer& b) {
    return dsp::encode_wav({b.left(), b.right()}, dsp::SampleFormat::Float32);
}

} // namespace

TEST_CASE("ingest keeps long utterances and reports short ones") {
    auto opts = small_corpus();
    opts.splits = {"train", "test"};
    opts.speakersPerGroup = 2;
    opts.utterancesPerSpeaker = 2;
    opts.shortPerSpeaker = 1;
    const auto dir = scratch("ingest");
    const auto manifest = write_demo_corpus(dir, opts);
    const auto report = ingest_corpus(manifest);
    const std::size_t rows = 2 * 2 * 2 * 3;
    const std::size_t shortRows = 2 * 2 * 2;
    CHECK(report.accepted.size() == rows - shortRows);
    CHECK(report.rejected.size() == shortRows);
    for (const auto& r : report.accepted) CHECK(r.durationSeconds >= 2.4);
    for (const auto& r : report.accepted) CHECK((r.split == "train" || r.split == "test"));
    CHECK(report.accepted.front().split == "train");
}

TEST_CASE("a speaker in two splits is named in the error") {
    const auto dir = scratch("disjoint");
    dsp::write_wav(dir / "a.wav", std::vector<AudioBuffer>{AudioBuffer(16000.0, std::vector<double>(48000, 0.1))});
    std::ofstream(dir / "manifest.json") << R"([
        {"path": "a.wav", "speakerId": "X", "ageGroup": "child", "split": "train"},
        {"path": "a.wav", "speakerId": "Y", "ageGroup": "adult", "split": "train"},
        {"path": "a.wav", "speakerId": "X", "ageGroup": "child", "split": "test"}])";
    try {
        ingest_corpus(dir / "manifest.json");
        FAIL("expected a disjointness error");
    } catch (const DisjointnessError& e) {
        CHECK(e.speaker() == "X");
        CHECK(std::string(e.what()).find("'X'") != std::string::npos);
    }
}

TEST_CASE("crop draws a uniform offset and normalizes to the target RMS") {
    Rng src(3);
    AudioBuffer five(16000.0, 80000);
    for (std::size_t i = 0; i < five.size(); ++i) five[i] = src.normal() * (1.0 + 0.5 * std::sin(i * 1e-3));

    std::size_t lo = five.size(), hi = 0;
    for (int k = 0; k < 400; ++k) {
        Rng rng(100 + k);
        std::size_t offset = 0;
        const auto c = crop_and_normalize(five, rng, &offset);
        REQUIRE(c.size() == 38400);
        CHECK(std::abs(c.rms() - 0.05) < 1e-6);
        CHECK(offset <= 41600);
        CHECK(c[0] == doctest::Approx(five[offset] * 0.05 / five.slice(offset, offset + 38400).rms()));
        lo = std::min(lo, offset);
        hi = std::max(hi, offset);
    }
    CHECK(lo < 2000);
    CHECK(hi > 39600);

    Rng a(9), b(9);
    std::size_t oa = 0, ob = 0;
    const auto ca = crop_and_normalize(five, a, &oa);
    const auto cb = crop_and_normalize(five, b, &ob);
    CHECK(oa == ob);
    CHECK(ca == cb);

    Rng r(1);
    CHECK_THROWS_AS(crop_and_normalize(AudioBuffer(16000.0, std::vector<double>(38000, 0.1)), r), InvalidInput);
}

TEST_CASE("mix_at_snr gains match the closed form") {
    const auto ref = noise(1, 16000);
    auto same = ref;
    // Equal power, different content: swap ears.
    same = same.swapped();
    CHECK(mix_at_snr(ref, same, 0.0).gain == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mix_at_snr(ref, same, 5.0).gain == doctest::Approx(std::pow(10.0, -0.25)).epsilon(1e-12));
    auto doubled = same;
    doubled.scale(2.0);
    CHECK(mix_at_snr(ref, doubled, 0.0).gain == doctest::Approx(0.5).epsilon(1e-12));

    for (double snr : {-2.5, 0.0, 1.7, 5.0, 15.0}) {
        const auto other = noise(7, 16000, 0.3);
        const auto mixed = mix_at_snr(ref, other, snr);
        CHECK(std::abs(measured_snr(ref, mixed.scaled) - snr) < 0.01);
        CHECK(pooled_snr_db(ref, mixed.scaled) == doctest::Approx(snr).epsilon(1e-9));
    }
    CHECK_THROWS_AS(mix_at_snr(ref, BinauralBuffer(16000.0, 16000), 0.0), InvalidInput);
    CHECK_THROWS_AS(mix_at_snr(BinauralBuffer(16000.0, 16000), ref, 0.0), InvalidInput);
    CHECK_THROWS_AS(mix_at_snr(ref, noise(2, 100), 0.0), InvalidInput);
}

TEST_CASE("babble source count is uniform over 3..8") {
    Rng rng(11);
    std::map<int, int> counts;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) counts[sample_babble_count(rng)]++;
    CHECK(counts.size() == 6);
    for (const auto& [n, c] : counts) {
        CHECK(n >= 3);
        CHECK(n <= 8);
        CHECK(std::abs(static_cast<double>(c) / draws - 1.0 / 6.0) <= 0.02);
    }
}

TEST_CASE("babble utterances start after 30% of the previous one") {
    const auto starts = babble_start_times(std::vector<double>(20, 1.0), 2.4);
    REQUIRE(starts.size() >= 3);
    CHECK(starts[0] == 0.0);
    CHECK(starts[1] == doctest::Approx(0.3));
    CHECK(starts[2] == doctest::Approx(0.6));
    CHECK(starts.size() == 8);
    CHECK(starts.back() < 2.4);

    const auto mixed = babble_start_times({2.0, 1.0, 3.0, 3.0}, 2.4);
    REQUIRE(mixed.size() == 4);
    CHECK(mixed[1] == doctest::Approx(0.6));
    CHECK(mixed[2] == doctest::Approx(0.9));
    CHECK(mixed[3] == doctest::Approx(1.8));
}

TEST_CASE("babble field draws distinct locations and utterances") {
    const auto bank = hrir_bank();
    const auto pools = demo_pools(small_corpus());
    const auto& pool = pools.at("train");
    Rng rng(5);
    const std::vector<std::string> excluded{pool.ref(0).speakerId, pool.ref(20).speakerId};
    const auto field = build_babble_field(pool, bank, rng, 6, excluded);
    CHECK(field.sources.size() == 6);
    CHECK(field.signal.size() == 38400);
    std::set<int> ring;
    std::set<std::size_t> used;
    std::size_t total = 0;
    for (const auto& s : field.sources) {
        ring.insert(s.ringAzimuth);
        CHECK(s.ringAzimuth % 5 == 0);
        CHECK(s.renderAzimuth == binaural::snap_azimuth(s.ringAzimuth));
        CHECK(s.startSeconds.front() == 0.0);
        for (std::size_t k = 0; k + 1 < s.utterances.size(); ++k) {
            CHECK(s.startSeconds[k + 1] - s.startSeconds[k] ==
                  doctest::Approx(0.3 * pool.ref(s.utterances[k]).durationSeconds).epsilon(1e-3));
        }
        for (auto u : s.utterances) {
            used.insert(u);
            ++total;
            CHECK(std::find(excluded.begin(), excluded.end(), pool.ref(u).speakerId) == excluded.end());
        }
    }
    CHECK(ring.size() == 6);
    CHECK(used.size() == total);
    CHECK(pooled_power(field.signal) > 0.0);

    Rng again(5);
    CHECK(max_abs_diff(build_babble_field(pool, bank, again, 6, excluded).signal, field.signal) == 0.0);
}

TEST_CASE("babble pool edge cases") {
    const auto bank = hrir_bank();
    UtteranceRef silent{"silent.wav", "S", AgeGroup::Child, "train", 3.0};
    UtterancePool silentPool({silent}, {AudioBuffer(16000.0, 48000)});
    Rng rng(1);
    CHECK_THROWS_AS(build_babble_field(silentPool, bank, rng, 3), InvalidInput);

    auto opts = small_corpus();
    opts.speakersPerGroup = 1;
    opts.utterancesPerSpeaker = 2;
    const auto tiny = demo_pools(opts).at("train");
    Rng r2(1);
    CHECK_THROWS_AS(build_babble_field(tiny, bank, r2, 8), PoolExhaustedError);
}

TEST_CASE("synth_scene composition, SNRs and determinism") {
    const auto bank = hrir_bank();
    const auto pools = demo_pools(small_corpus());
    const auto& pool = pools.at("train");
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        SceneConfig cfg;
        cfg.pairType = static_cast<PairType>(seed % 3);
        cfg.babble = seed % 2 == 0;
        cfg.seed = seed;
        const auto b = synth_scene(cfg, pool, bank, {"s", "train", 0, {}});
        const auto& m = b.manifest;
        REQUIRE(b.mixture.size() == 38400);
        CHECK(b.mixture.rate() == 16000.0);
        CHECK(m.talkers[0].speakerId != m.talkers[1].speakerId);
        const auto groups = age_groups(cfg.pairType);
        std::multiset<AgeGroup> want(groups.begin(), groups.end());
        std::multiset<AgeGroup> got{m.talkers[0].ageGroup, m.talkers[1].ageGroup};
        CHECK(want == got);

        auto sum = b.references[0] + b.references[1];
        if (b.babble) sum += *b.babble;
        CHECK(max_abs_diff(b.mixture, sum) <= 1e-6);
        CHECK(b.babble.has_value() == cfg.babble);
        if (!cfg.babble) CHECK(max_abs_diff(b.mixture, b.references[0] + b.references[1]) == 0.0);

        CHECK(m.mixtureSnrDb >= 0.0);
        CHECK(m.mixtureSnrDb <= 5.0);
        CHECK(std::abs(measured_snr(b.references[0], b.references[1]) - m.mixtureSnrDb) < 0.01);
        if (cfg.babble) {
            CHECK(m.babbleSources.size() >= 3);
            CHECK(m.babbleSources.size() <= 8);
            CHECK(m.babbleSnrDb >= -2.5);
            CHECK(m.babbleSnrDb <= 15.0);
            CHECK(std::abs(measured_snr(b.references[0] + b.references[1], *b.babble) - m.babbleSnrDb) < 0.01);
            for (const auto& s : m.babbleSources)
                for (auto u : s.utterances) {
                    CHECK(pool.ref(u).speakerId != m.talkers[0].speakerId);
                    CHECK(pool.ref(u).speakerId != m.talkers[1].speakerId);
                }
        }
        CHECK(b.mixture.peak() <= 1.0);
        for (const auto& t : m.talkers) t.trajectory.validate();

        const auto again = synth_scene(cfg, pool, bank, {"s", "train", 0, {}});
        CHECK(bytes_of(again.mixture) == bytes_of(b.mixture));
        CHECK(bytes_of(again.references[1]) == bytes_of(b.references[1]));
        CHECK(nlohmann::json(again.manifest) == nlohmann::json(m));
        CHECK(nlohmann::json(m).get<SceneManifest>().seed == seed);
    }
}

TEST_CASE("babble SNR can be referenced to the first talker") {
    const auto bank = hrir_bank();
    const auto pools = demo_pools(small_corpus());
    SceneConfig cfg;
    cfg.babble = true;
    cfg.babbleReference = BabbleReference::FirstTalker;
    cfg.seed = 77;
    const auto b = synth_scene(cfg, pools.at("train"), bank);
    CHECK(std::abs(measured_snr(b.references[0], *b.babble) - b.manifest.babbleSnrDb) < 0.01);
    CHECK(nlohmann::json(b.manifest).get<SceneManifest>().babbleReference == BabbleReference::FirstTalker);
}

TEST_CASE("loud scenes are peak-normalized with the gain recorded") {
    auto bank = hrir_bank();
    for (auto& [az, brir] : bank.entries) brir.response.scale(60.0);
    const auto pools = demo_pools(small_corpus());
    SceneConfig cfg;
    cfg.seed = 4;
    const auto b = synth_scene(cfg, pools.at("train"), bank);
    CHECK(b.manifest.peakGain < 1.0);
    CHECK(b.mixture.peak() == doctest::Approx(0.99).epsilon(1e-9));
    CHECK(std::abs(measured_snr(b.references[0], b.references[1]) - b.manifest.mixtureSnrDb) < 0.01);
}

TEST_CASE("scene config validation names the field") {
    SceneConfig cfg;
    cfg.distance = 1.2;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("distance"), ConfigError);
    cfg = {};
    cfg.snrRangeDb = {5.0, 0.0};
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("snrRangeDb"), ConfigError);
}

TEST_CASE("full-scale dataset plan") {
    const auto spec = DatasetSpec::full_scale();
    const auto jobs = plan_jobs(spec);
    CHECK(jobs.totalScenes == 56000);
    CHECK(jobs.scenesPerSplit.at("train") == 40000);
    CHECK(jobs.scenesPerSplit.at("val") == 10000);
    CHECK(jobs.scenesPerSplit.at("test") == 6000);
    CHECK(jobs.rirJobsPerDistance == 2160);
    CHECK(jobs.brirsPerDistance == 30 * 37);
    CHECK(jobs.distances == std::vector<double>{1.0, 1.5, 2.0});

    const auto scenes = plan_scenes(spec);
    REQUIRE(scenes.size() == 56000);
    std::map<std::string, std::set<double>> distances;
    std::map<PairType, int> pairs;
    int babble = 0;
    for (const auto& s : scenes) {
        distances[s.split].insert(s.distance);
        pairs[s.pairType]++;
        babble += s.babble;
        CHECK(s.roomId >= 0);
        CHECK(s.roomId < 30);
    }
    CHECK(distances["train"] == std::set<double>{1.0});
    CHECK(distances["val"] == std::set<double>{1.0});
    CHECK(distances["test"] == std::set<double>{1.0, 1.5, 2.0});
    for (const auto& [p, n] : pairs) CHECK(std::abs(n / 56000.0 - 1.0 / 3.0) < 0.01);
    CHECK(std::abs(babble / 56000.0 - 0.5) < 0.01);
    CHECK(scenes.front().sceneId == "train_000000");
    CHECK(scenes.back().sceneId == "test_005999");

    const auto rooms = plan_rooms(spec);
    REQUIRE(rooms.size() == 30);
    for (const auto& r : rooms) {
        CHECK(r.listener.x >= 2.05);
        CHECK(r.listener.x <= r.room.length - 2.05);
        CHECK(r.listener.y >= 2.05);
        CHECK(r.listener.y <= r.room.width - 2.05);
    }
}

TEST_CASE("dataset spec parsing") {
    const auto dir = scratch("spec");
    const auto spec = parse_dataset_spec(nlohmann::json::parse(R"({
        "seed": 9, "rooms": 2,
        "splits": [{"name": "train", "count": 4}, {"name": "test", "count": 2, "distances": [1.0, 2.0]}],
        "pairWeights": {"child-child": 1, "adult-adult": 0},
        "babbleSources": [4, 5], "corpus": "corpus/manifest.json", "output": "out"})"),
                                         dir);
    CHECK(spec.seed == 9);
    CHECK(spec.splits.size() == 2);
    CHECK(spec.split("test").distances == std::vector<double>{1.0, 2.0});
    CHECK(spec.babbleMinSources == 4);
    CHECK(spec.corpusManifest == dir / "corpus/manifest.json");
    CHECK(spec.output == dir / "out");
    CHECK_NOTHROW(spec.validate());
    for (const auto& s : plan_scenes(spec)) CHECK(s.pairType == PairType::ChildChild);
    const auto round = parse_dataset_spec(dataset_spec_json(spec));
    CHECK(round.seed == spec.seed);
    CHECK(round.output == spec.output);

    auto bad = [&](const char* text) { return parse_dataset_spec(nlohmann::json::parse(text), dir); };
    CHECK_THROWS_WITH_AS(bad(R"({"sede": 1})"), doctest::Contains("sede"), ConfigError);
    CHECK_THROWS_WITH_AS(bad(R"({"splits": [{"name": "a", "count": 1, "distances": [1.2]}]})").validate(),
                         doctest::Contains("distances"), ConfigError);
    CHECK_THROWS_WITH_AS(bad(R"({"hrir": "nowhere"})").validate(), doctest::Contains("hrir"), ConfigError);
    CHECK_THROWS_WITH_AS(bad(R"({"roomSpecs": [{"length": 9, "width": 9, "height": 3, "t60": 0.25}]})").validate(),
                         doctest::Contains("t60"), ConfigError);
    CHECK_THROWS_WITH_AS(bad(R"({"babbleFraction": 2})").validate(), doctest::Contains("babbleFraction"),
                         ConfigError);
    CHECK_THROWS_AS(load_dataset_spec(dir / "missing.json"), IoError);
}

TEST_CASE("desk-scale dataset run") {
    const auto dir = scratch("desk");
    DatasetSpec spec;
    spec.seed = 21;
    spec.rooms = 2;
    spec.roomSpecs = {{9.0, 9.0, 3.0, 0.2}, {9.5, 8.5, 3.2, 0.3}};
    spec.splits = {{"train", 20, {1.0}}, {"val", 5, {1.0}}, {"test", 5, {1.0, 1.5}}};
    spec.maxOrder = 4;
    spec.bankRoot = dir / "banks";
    spec.output = dir / "dataset";
    const auto hrirs = resolve_hrirs(spec);

    const auto rooms = render_room_caches(spec, hrirs, 2, false);
    CHECK(rooms.rirJobs == 2 * 72 * 2);
    CHECK(rooms.brirsWritten == 2 * 37 * 2);
    CHECK(render_room_caches(spec, hrirs, 2, false).banksSkipped == 4);

    const auto pools = demo_pools(small_corpus());
    const auto first = generate_dataset(spec, pools, 2);
    CHECK(first.written == 30);
    CHECK(first.perSplit.at("train") == 20);
    CHECK(first.indexHash.size() == 64);
    CHECK(fs::exists(spec.output / "train" / "snr_histogram.csv"));

    const auto index = nlohmann::json::parse(std::ifstream(spec.output / "index.json"));
    REQUIRE(index.at("scenes").size() == 30);
    for (const auto& entry : index.at("scenes")) {
        const auto sceneDir = spec.output / entry.at("path").get<std::string>();
        const auto b = load_scene(sceneDir);
        auto sum = b.references[0] + b.references[1];
        if (b.babble) sum += *b.babble;
        CHECK(max_abs_diff(b.mixture, sum) <= 1e-6);
        CHECK(std::abs(measured_snr(b.references[0], b.references[1]) - b.manifest.mixtureSnrDb) < 0.01);
        if (b.babble) {
            CHECK(std::abs(measured_snr(b.references[0] + b.references[1], *b.babble) - b.manifest.babbleSnrDb) <
                  0.01);
        }
        if (b.manifest.split != "test") CHECK(b.manifest.distance == 1.0);
        std::ifstream in(sceneDir / "mixture.wav", std::ios::binary);
        std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(in)), {});
        CHECK(sha256_hex(raw) == b.manifest.files.at("mixture.wav").get<std::string>());
    }

    const auto second = generate_dataset(spec, pools, 1);
    CHECK(second.written == 0);
    CHECK(second.skipped == 30);
    CHECK(second.indexHash == first.indexHash);

    fs::remove_all(spec.output / "val" / "val_000003");
    const auto resumed = generate_dataset(spec, pools, 1);
    CHECK(resumed.written == 1);
    CHECK(resumed.indexHash == first.indexHash);

    auto other = spec;
    other.output = dir / "fresh";
    CHECK(generate_dataset(other, pools, 2).indexHash == first.indexHash);
}

TEST_CASE("dataset generation errors") {
    const auto dir = scratch("errors");
    DatasetSpec spec;
    spec.rooms = 1;
    spec.roomSpecs = {{9.0, 9.0, 3.0, 0.2}};
    spec.splits = {{"train", 3, {1.0}}};
    spec.maxOrder = 2;
    spec.babbleFraction = 1.0;
    spec.bankRoot = dir / "banks";
    spec.output = dir / "dataset";
    const auto pools = demo_pools(small_corpus());
    CHECK_THROWS_WITH_AS(generate_dataset(spec, pools, 1), doctest::Contains("rooms command"), ConfigError);

    render_room_caches(spec, resolve_hrirs(spec), 1, true);
    CHECK(fs::exists(binaural::bank_directory(spec.bankRoot, 0, 1.0) / "rir" / "ring355.wav"));
    CHECK(dsp::read_wav(binaural::bank_directory(spec.bankRoot, 0, 1.0) / "rir" / "ring000.wav").size() == 7);

    auto opts = small_corpus();
    opts.speakersPerGroup = 2;
    opts.utterancesPerSpeaker = 1;
    try {
        generate_dataset(spec, demo_pools(opts), 1);
        FAIL("expected pool exhaustion");
    } catch (const PoolExhaustedError& e) {
        CHECK(e.resume_token().rfind("train_", 0) == 0);
    }

    std::map<std::string, UtterancePool> leaky = pools;
    leaky["val"] = pools.at("train");
    spec.splits.push_back({"val", 1, {1.0}});
    CHECK_THROWS_AS(generate_dataset(spec, leaky, 1), DisjointnessError);
}
