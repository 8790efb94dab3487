#include <classroom/binaural/hrir.hpp>
#include <classroom/errors.hpp>
#include <classroom/eval/report.hpp>
#include <classroom/scene/dataset.hpp>
#include <classroom/scene/demo_corpus.hpp>

#include <doctest.h>

#include <cmath>
#include <fstream>

using namespace classroom;
using namespace classroom::eval;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("classroom_eval_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

binaural::BrirBank hrir_bank() {
    const auto hrirs = binaural::synthetic_hrir_set(binaural::kDefaultHeadRadius);
    binaural::BrirBank bank;
    for (const auto& [az, h] : hrirs.responses()) bank.entries.emplace(az, binaural::Brir{h, az, 0, 1.0});
    return bank;
}

const std::map<std::string, scene::UtterancePool>& pools() {
    static const auto p = [] {
        scene::DemoCorpusOptions o;
        o.speakersPerGroup = 4;
        o.utterancesPerSpeaker = 5;
        return scene::demo_pools(o);
    }();
    return p;
}

scene::SceneBundle anechoic_scene(std::uint64_t seed, bool babble = false) {
    scene::SceneConfig cfg;
    cfg.pairType = static_cast<scene::PairType>(seed % 3);
    cfg.babble = babble;
    cfg.seed = seed;
    return scene::synth_scene(cfg, pools().at("train"), hrir_bank(), {"s" + std::to_string(seed), "test", 0, {}});
}

MetricsRecord record(const std::string& id, double snri, double doa, bool babble, const std::string& pair = "child-child") {
    MetricsRecord r;
    r.sceneId = id;
    r.snriDb = snri;
    r.snrDb = snri;
    r.doaErrorDeg = doa;
    r.babble = babble;
    r.pairType = pair;
    r.ageGroup = "child";
    return r;
}

} // namespace

TEST_CASE("passthrough estimates score exactly zero improvement") {
    const auto b = anechoic_scene(3);
    const auto recs = evaluate_scene(b, {b.mixture, b.mixture});
    for (const auto& r : recs) {
        CHECK(r.snriDb == 0.0);
        CHECK(std::isfinite(r.snrDb));
    }
    CHECK(recs[0].talker == 0);
    CHECK(recs[1].talker == 1);
}

TEST_CASE("oracle estimates hit the sentinel and localise within 5 degrees") {
    double doaSum = 0.0;
    int n = 0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto b = anechoic_scene(seed);
        const auto recs = evaluate_scene(b, {b.references[1], b.references[0]});
        for (const auto& r : recs) {
            CHECK(finite_db(r.snriDb) == kSentinelDb);
            CHECK(r.estimate == 1 - r.talker);
            CHECK(r.permutation == kSwapped);
            REQUIRE(std::isfinite(r.doaErrorDeg));
            doaSum += r.doaErrorDeg;
            ++n;
        }
        CHECK(recs[0].ageGroup == scene::to_string(b.manifest.talkers[0].ageGroup));
    }
    CHECK(doaSum / n < 5.0);
}

TEST_CASE("silent estimates get no DoA and mismatched shapes are rejected") {
    const auto b = anechoic_scene(5);
    dsp::BinauralBuffer silent(b.mixture.rate(), b.mixture.size());
    const auto recs = evaluate_scene(b, {b.references[0], silent});
    CHECK(std::isnan(recs[1].doaErrorDeg));
    CHECK(std::isfinite(recs[0].doaErrorDeg));
    dsp::BinauralBuffer shortEst(b.mixture.rate(), 100);
    CHECK_THROWS_AS(evaluate_scene(b, {shortEst, shortEst}), InvalidInput);
}

TEST_CASE("metrics CSV round trip keeps infinities and NaN") {
    const auto dir = scratch("csv");
    std::vector<MetricsRecord> in{record("a", 3.25, 12.5, false), record("b", INFINITY, NAN, true, "adult-adult")};
    in[1].permutation = kSwapped;
    in[1].distance = 1.5;
    in[1].roomId = 7;
    in[1].talker = 1;
    write_metrics_csv(dir / "m.csv", in);
    const auto out = read_metrics_csv(dir / "m.csv");
    REQUIRE(out.size() == 2);
    CHECK(out[0].snriDb == doctest::Approx(3.25));
    CHECK(std::isinf(out[1].snriDb));
    CHECK(std::isnan(out[1].doaErrorDeg));
    CHECK(out[1].permutation == kSwapped);
    CHECK(out[1].babble);
    CHECK(out[1].distance == 1.5);
    CHECK(out[1].roomId == 7);
    CHECK(out[1].pairType == "adult-adult");
    std::ofstream(dir / "bad.csv") << "nope\n";
    CHECK_THROWS_AS(read_metrics_csv(dir / "bad.csv"), IoError);
    CHECK_THROWS_AS(read_metrics_csv(dir / "none.csv"), IoError);
}

TEST_CASE("summary groups, sentinel and contrasts") {
    CHECK_THROWS_AS(summarize({}, default_contrasts()), PipelineError);

    std::vector<MetricsRecord> recs;
    for (int i = 0; i < 10; ++i) {
        recs.push_back(record("c" + std::to_string(i), i, i, false));
        recs.push_back(record("b" + std::to_string(i), i, i, true));
    }
    recs.push_back(record("z", INFINITY, NAN, false, "adult-adult"));
    const auto s = summarize(recs, default_contrasts());
    CHECK(s.at("records") == 21);
    CHECK(s.at("complete").get<bool>());
    CHECK(s["groups"]["babble"]["clean"]["snri"]["n"] == 11);
    CHECK(s["groups"]["babble"]["clean"]["doa"]["n"] == 10);
    CHECK(s["groups"]["pairType"]["adult-adult"]["snri"]["mean"].get<double>() == kSentinelDb);
    CHECK(s["groups"]["pairType"]["child-adult"]["snri"]["n"] == 0);

    bool sawClean = false;
    for (const auto& c : s.at("contrasts")) {
        if (c.at("name") == "clean vs babble" && c.at("metric") == "doa") {
            sawClean = true;
            CHECK(c.at("p").get<double>() == doctest::Approx(1.0));
            CHECK(c.contains("pAdjusted"));
        }
        if (c.at("name") == "child-adult vs adult-adult") CHECK(c.contains("skipped"));
    }
    CHECK(sawClean);

    const auto withFailure = summarize(recs, default_contrasts(), {{"x", "missing estimate"}});
    CHECK_FALSE(withFailure.at("complete").get<bool>());
    CHECK(withFailure.at("failures").size() == 1);
}

TEST_CASE("dataset evaluation with baselines and a missing estimate") {
    const auto dir = scratch("dataset");
    scene::DatasetSpec spec;
    spec.seed = 4;
    spec.rooms = 1;
    spec.roomSpecs = {{9.0, 9.0, 3.0, 0.2}};
    spec.splits = {{"test", 4, {1.0}}};
    spec.maxOrder = 2;
    spec.bankRoot = dir / "banks";
    spec.output = dir / "dataset";
    scene::render_room_caches(spec, scene::resolve_hrirs(spec), 1, false);
    scene::generate_dataset(spec, pools(), 1);

    write_baseline_estimates(spec.output, "test", dir / "pass", BaselineKind::Passthrough);
    const auto pass = evaluate_dataset(spec.output, "test", dir / "pass", 2);
    CHECK(pass.complete());
    REQUIRE(pass.records.size() == 8);
    for (const auto& r : pass.records) CHECK(std::abs(r.snriDb) < 1e-9);
    CHECK(pass.records.front().sceneId == "test_000000");

    write_baseline_estimates(spec.output, "test", dir / "oracle", BaselineKind::Oracle);
    const auto oracle = evaluate_dataset(spec.output, "test", dir / "oracle", 1);
    for (const auto& r : oracle.records) CHECK(finite_db(r.snriDb) == kSentinelDb);

    fs::remove(estimate_path(dir / "oracle", "test_000002", 1));
    const auto partial = evaluate_dataset(spec.output, "test", dir / "oracle", 1);
    CHECK_FALSE(partial.complete());
    REQUIRE(partial.failures.size() == 1);
    CHECK(partial.failures[0].sceneId == "test_000002");
    CHECK(partial.records.size() == 6);

    const auto summary = write_report(dir / "report", partial.records, partial.failures);
    CHECK(fs::exists(dir / "report" / "summary.json"));
    CHECK(fs::exists(dir / "report" / "plots" / "snri_by_condition.csv"));
    CHECK(fs::exists(dir / "report" / "plots" / "doa_by_distance.csv"));
    CHECK_FALSE(summary.at("complete").get<bool>());
    CHECK_THROWS_AS(split_scenes(dir / "nowhere", "test"), IoError);
}
