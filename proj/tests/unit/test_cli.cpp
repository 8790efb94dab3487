#include "cli.hpp"

#include <classroom/errors.hpp>

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace classroom;
using namespace classroom::cli;

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "classroom");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

json desk_config() {
    return json::parse(R"({
      "version": 1,
      "seed": 11,
      "logLevel": "info",
      "dataset": {
        "version": 1,
        "rooms": 2,
        "roomSpecs": [{"length": 9.0, "width": 9.0, "height": 3.0, "t60": 0.2},
                      {"length": 9.5, "width": 8.5, "height": 3.2, "t60": 0.3}],
        "splits": [{"name": "train", "count": 20, "distances": [1.0]},
                   {"name": "val", "count": 5, "distances": [1.0]},
                   {"name": "test", "count": 5, "distances": [1.0]}],
        "pairWeights": {"child-child": 1, "child-adult": 1, "adult-adult": 0},
        "maxOrder": 4,
        "corpus": "corpus/manifest.json",
        "bankRoot": "banks",
        "output": "dataset"
      },
      "train": {"model": "tiny", "epochs": 1, "maxSteps": 2, "out": "run"},
      "eval": {"estimates": "passthrough"}
    })");
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& j) {
    std::ofstream(dir / name) << j.dump(2);
    return dir / name;
}

std::string hash_line(const std::string& out) {
    const auto at = out.find("index hash ");
    return at == std::string::npos ? std::string{} : out.substr(at + 11, 64);
}

} // namespace

TEST_CASE("run config parsing") {
    const auto dir = fs::temp_directory_path() / "classroom_cli_parse";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto c = parse_run_config(desk_config(), dir);
    CHECK(c.seed == 11);
    CHECK(c.dataset.seed == 11);
    CHECK(c.train.out == dir / "run");
    CHECK(c.dataset.output == dir / "dataset");
    CHECK(c.train.finetuneFraction == 0.5);

    auto j = desk_config();
    j["colour"] = "blue";
    CHECK_THROWS_WITH_AS(parse_run_config(j), doctest::Contains("colour"), ConfigError);
    j = desk_config();
    j["version"] = 2;
    CHECK_THROWS_WITH_AS(parse_run_config(j), doctest::Contains("version"), ConfigError);
    j = desk_config();
    j["train"]["strategy"] = "magic";
    CHECK_THROWS_WITH_AS(parse_run_config(j), doctest::Contains("strategy"), ConfigError);
    j = desk_config();
    j["train"]["finetuneFraction"] = 0.0;
    CHECK_THROWS_WITH_AS(parse_run_config(j), doctest::Contains("finetuneFraction"), ConfigError);
    j = desk_config();
    j.erase("dataset");
    CHECK_THROWS_AS(parse_run_config(j), ConfigError);
}

TEST_CASE("command line pipeline and exit codes") {
    const auto dir = fs::temp_directory_path() / "classroom_cli_pipeline";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto config = write_config(dir, "run.json", desk_config()).string();
    const auto path = [&](const std::string& p) { return (dir / p).string(); };

    CHECK(run({"demo-corpus", "--out", path("corpus"), "--speakers", "4", "--utterances", "5"}).code == kOk);

    const auto rooms = run({"rooms", "--config", config, "--jobs", "2"});
    REQUIRE(rooms.code == kOk);
    CHECK(rooms.out.find("144 RIR jobs, 74 BRIRs written") != std::string::npos);
    const auto again = run({"rooms", "--config", config});
    CHECK(again.code == kOk);
    CHECK(again.out.find("0 RIR jobs, 0 BRIRs written, 2 complete banks skipped") != std::string::npos);

    const auto synth = run({"synth", "--config", config, "--jobs", "2"});
    REQUIRE(synth.code == kOk);
    CHECK(synth.out.find("30 scenes written") != std::string::npos);
    const auto resynth = run({"synth", "--config", config, "--jobs", "1", "--out", path("dataset2")});
    CHECK(resynth.code == kOk);
    CHECK(hash_line(synth.out).size() == 64);
    CHECK(hash_line(resynth.out) == hash_line(synth.out));
    int sceneDirs = 0;
    for (const auto& split : {"train", "val", "test"})
        for (const auto& e : fs::directory_iterator(dir / "dataset" / split)) sceneDirs += e.is_directory();
    CHECK(sceneDirs == 30);

    const auto full = run({"train", "--config", config});
    REQUIRE(full.code == kOk);
    CHECK(full.err.find("training on 20 of 20 classroom scenes") != std::string::npos);
    CHECK(fs::exists(dir / "run" / "checkpoint.bin"));
    CHECK(fs::exists(dir / "run" / "history.csv"));
    CHECK(run({"train", "--config", config}).out.find("already complete") != std::string::npos);

    CHECK(run({"train", "--config", config, "--strategy", "finetune", "--out", path("ft")}).code == kConfigError);
    const auto ft = run({"train", "--config", config, "--strategy", "finetune", "--checkpoint",
                         path("run/checkpoint.bin"), "--out", path("ft")});
    REQUIRE(ft.code == kOk);
    CHECK(ft.err.find("training on 10 of 20 classroom scenes") != std::string::npos);
    CHECK(json::parse(std::ifstream(dir / "ft" / "train.json")).at("decayEvery") == 5);
    CHECK(run({"train", "--config", config, "--strategy", "adult", "--out", path("adult")}).code == kConfigError);

    const auto ev = run({"eval", "--config", config});
    REQUIRE(ev.code == kOk);
    CHECK(ev.out.find("mean SNRi 0.00 dB") != std::string::npos);
    const auto rep = run({"report", "--config", config});
    REQUIRE(rep.code == kOk);
    CHECK(rep.out.find("mean SNRi 0.00 dB") != std::string::npos);
    CHECK(fs::exists(dir / "report" / "summary.json"));
    CHECK(fs::exists(dir / "report" / "plots" / "snri_by_condition.csv"));

    const auto model = run({"eval", "--config", config, "--estimates", "model", "--checkpoint",
                            path("ft/checkpoint.bin"), "--out", path("eval_model")});
    CHECK(model.code == kOk);
    CHECK(fs::exists(dir / "eval_model" / "estimates" / "model" / "test_000000" / "est2.wav"));

    CHECK(run({"eval", "--config", config, "--estimates", "model", "--out", path("eval_none")}).code == kConfigError);

    std::ofstream(dir / "empty.csv")
        << "sceneId,talker,estimate,ageGroup,pairType,babble,distance,roomId,permutation,snriDb,snrDb,doaErrorDeg\n";
    const auto empty = run({"report", "--metrics", path("empty.csv"), "--out", path("r2")});
    CHECK(empty.code == kPipelineError);
    CHECK(empty.err.find("no records") != std::string::npos);
    CHECK(run({"report", "--metrics", path("missing.csv")}).code == kIoError);

    auto bad = desk_config();
    bad["dataset"]["roomSpecs"][0]["t60"] = 0.25;
    const auto badRooms = run({"rooms", "--config", write_config(dir, "bad.json", bad).string()});
    CHECK(badRooms.code == kConfigError);
    CHECK(badRooms.err.find("t60") != std::string::npos);
    CHECK(run({"synth", "--config", config, "--hrir", path("no_pack")}).code == kConfigError);
    CHECK(run({"rooms", "--config", config, "--distance", "1.2"}).code == kConfigError);
    CHECK(run({"nonsense"}).code == kConfigError);
}

TEST_CASE("full-scale plan is enumerated without running it") {
    const auto dir = fs::temp_directory_path() / "classroom_cli_plan";
    fs::remove_all(dir);
    fs::create_directories(dir);
    json j{{"version", 1}, {"dataset", json::parse(R"({"version": 1, "rooms": 30,
        "splits": [{"name": "train", "count": 40000, "distances": [1.0]},
                   {"name": "val", "count": 10000, "distances": [1.0]},
                   {"name": "test", "count": 6000, "distances": [1.0, 1.5, 2.0]}]})")}};
    const auto r = run({"plan", "--config", write_config(dir, "full.json", j).string()});
    REQUIRE(r.code == kOk);
    CHECK(r.out.find("2160 RIR jobs and 1110 BRIRs per distance (6480 and 3330 in total), 56000 scenes") !=
          std::string::npos);
}
