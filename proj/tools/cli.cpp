//
//  cli.cpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#include "cli.hpp"

#include <classroom/dsp/rng.hpp>
#include <classroom/dsp/wav.hpp>
#include <classroom/errors.hpp>
#include <classroom/eval/report.hpp>
#include <classroom/parallel.hpp>
#include <classroom/room/room.hpp>
#include <classroom/scene/demo_corpus.hpp>
#include <classroom/sep/train.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

namespace classroom::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Strategy s) {
    switch (s) {
    case Strategy::Adult: return "adult";
    case Strategy::Classroom: return "classroom";
    case Strategy::Finetune: return "finetune";
    }
    return "classroom";
}

Strategy parse_strategy(const std::string& s) {
    if (s == "adult") return Strategy::Adult;
    if (s == "classroom") return Strategy::Classroom;
    if (s == "finetune") return Strategy::Finetune;
    throw ConfigError("strategy: expected adult, classroom or finetune, got '" + s + "'");
}

namespace {

LogLevel parse_log_level(const std::string& s) {
    if (s == "quiet") return LogLevel::Quiet;
    if (s == "info") return LogLevel::Info;
    if (s == "debug") return LogLevel::Debug;
    throw ConfigError("logLevel: expected quiet, info or debug, got '" + s + "'");
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> known) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) == known.end()) {
            throw ConfigError(where + key + ": unknown field");
        }
    }
}

template <typename T>
void read_field(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + key + ": wrong type");
    }
}

TrainSection parse_train(const json& j, const fs::path& base) {
    check_keys(j, "train.", {"strategy", "finetuneFraction", "checkpoint", "model", "epochs", "batchSize",
                             "learningRate", "maxSteps", "doaEpochs", "maxScenes", "maxValScenes", "out"});
    TrainSection t;
    std::string s = to_string(t.strategy), checkpoint, out = t.out.string();
    read_field(j, "strategy", s, "train.");
    t.strategy = parse_strategy(s);
    read_field(j, "finetuneFraction", t.finetuneFraction, "train.");
    read_field(j, "checkpoint", checkpoint, "train.");
    if (!checkpoint.empty()) t.checkpoint = resolve(base, checkpoint);
    read_field(j, "model", t.model, "train.");
    read_field(j, "epochs", t.epochs, "train.");
    read_field(j, "batchSize", t.batchSize, "train.");
    read_field(j, "learningRate", t.learningRate, "train.");
    read_field(j, "maxSteps", t.maxSteps, "train.");
    read_field(j, "doaEpochs", t.doaEpochs, "train.");
    read_field(j, "maxScenes", t.maxScenes, "train.");
    read_field(j, "maxValScenes", t.maxValScenes, "train.");
    read_field(j, "out", out, "train.");
    t.out = resolve(base, out);
    return t;
}

EvalSection parse_eval(const json& j, const fs::path& base) {
    check_keys(j, "eval.", {"split", "estimates", "checkpoint", "out"});
    EvalSection e;
    std::string checkpoint, out = e.out.string();
    read_field(j, "split", e.split, "eval.");
    read_field(j, "estimates", e.estimates, "eval.");
    read_field(j, "checkpoint", checkpoint, "eval.");
    if (!checkpoint.empty()) e.checkpoint = resolve(base, checkpoint);
    read_field(j, "out", out, "eval.");
    e.out = resolve(base, out);
    return e;
}

ReportSection parse_report(const json& j, const fs::path& base) {
    check_keys(j, "report.", {"metrics", "out"});
    ReportSection r;
    std::string metrics, out = r.out.string();
    read_field(j, "metrics", metrics, "report.");
    if (!metrics.empty()) r.metrics = resolve(base, metrics);
    read_field(j, "out", out, "report.");
    r.out = resolve(base, out);
    return r;
}

void validate_sections(const RunConfig& c) {
    if (c.jobs < 1) throw ConfigError("jobs: must be at least 1");
    const auto& t = c.train;
    if (!(t.finetuneFraction > 0.0 && t.finetuneFraction <= 1.0)) throw ConfigError("train.finetuneFraction: must be in (0, 1]");
    if (t.model != "default" && t.model != "tiny") throw ConfigError("train.model: expected default or tiny");
    if (t.epochs < 1) throw ConfigError("train.epochs: must be at least 1");
    if (t.batchSize < 1) throw ConfigError("train.batchSize: must be at least 1");
    if (!(t.learningRate > 0.0)) throw ConfigError("train.learningRate: must be positive");
    if (t.maxSteps < 0 || t.doaEpochs < 0) throw ConfigError("train.maxSteps: must not be negative");
    const auto& e = c.eval.estimates;
    if (e != "model" && e != "passthrough" && e != "oracle") {
        throw ConfigError("eval.estimates: expected model, passthrough or oracle");
    }
}

} // namespace

RunConfig parse_run_config(const json& j, const fs::path& baseDir) {
    check_keys(j, "", {"version", "seed", "jobs", "logLevel", "dataset", "train", "eval", "report"});
    RunConfig c;
    read_field(j, "version", c.version, "");
    if (c.version != kRunConfigVersion) {
        throw ConfigError("version: unsupported run config version " + std::to_string(c.version));
    }
    if (!j.contains("dataset")) throw ConfigError("dataset: missing");
    const auto& d = j.at("dataset");
    if (d.is_string()) {
        c.dataset = scene::load_dataset_spec(resolve(baseDir, d.get<std::string>()));
    } else {
        c.dataset = scene::parse_dataset_spec(d, baseDir);
    }
    c.seed = c.dataset.seed;
    if (j.contains("seed")) {
        read_field(j, "seed", c.seed, "");
        c.dataset.seed = c.seed;
    }
    read_field(j, "jobs", c.jobs, "");
    std::string level = "info";
    read_field(j, "logLevel", level, "");
    c.logLevel = parse_log_level(level);
    if (j.contains("train")) c.train = parse_train(j.at("train"), baseDir);
    else c.train.out = resolve(baseDir, c.train.out.string());
    if (j.contains("eval")) c.eval = parse_eval(j.at("eval"), baseDir);
    else c.eval.out = resolve(baseDir, c.eval.out.string());
    if (j.contains("report")) c.report = parse_report(j.at("report"), baseDir);
    else c.report.out = resolve(baseDir, c.report.out.string());
    validate_sections(c);
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": malformed JSON: " + e.what());
    }
    return parse_run_config(j, path.parent_path());
}

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::string out;
    std::string hrir;
    std::string logLevel;
    std::optional<double> distance;
    std::string strategy;
    std::optional<double> finetuneFraction;
    std::string checkpoint;
    std::string estimates;
    std::string split;
    std::string metrics;
    int speakers = 6;
    int utterances = 4;
};

class Log {
public:
    Log(std::ostream& err, LogLevel level) : err_(err), level_(level) {}
    void info(const std::string& m) const {
        if (level_ != LogLevel::Quiet) err_ << "[info] " << m << '\n';
    }
    void debug(const std::string& m) const {
        if (level_ == LogLevel::Debug) err_ << "[debug] " << m << '\n';
    }
    std::function<void(const std::string&)> sink() const {
        return [this](const std::string& m) { info(m); };
    }

private:
    std::ostream& err_;
    LogLevel level_;
};

RunConfig apply_flags(const Flags& f) {
    auto c = load_run_config(f.config);
    if (f.seed) {
        c.seed = *f.seed;
        c.dataset.seed = *f.seed;
    }
    if (f.jobs) {
        if (*f.jobs < 1) throw ConfigError("jobs: must be at least 1");
        c.jobs = *f.jobs;
    }
    if (!f.hrir.empty()) c.dataset.hrir = f.hrir;
    if (!f.logLevel.empty()) c.logLevel = parse_log_level(f.logLevel);
    if (!f.strategy.empty()) c.train.strategy = parse_strategy(f.strategy);
    if (f.finetuneFraction) c.train.finetuneFraction = *f.finetuneFraction;
    if (!f.estimates.empty()) c.eval.estimates = f.estimates;
    if (!f.split.empty()) c.eval.split = f.split;
    if (!f.metrics.empty()) c.report.metrics = f.metrics;
    if (f.distance && !room::is_ring_radius(*f.distance)) throw ConfigError("distance: must be 1.0, 1.5 or 2.0");
    validate_sections(c);
    c.dataset.validate();
    return c;
}

std::string fixed(double v, int digits = 2) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void restrict_distance(scene::DatasetSpec& spec, const std::optional<double>& distance) {
    if (!distance) return;
    for (auto& s : spec.splits) s.distances = {*distance};
}

int cmd_rooms(const Flags& f, std::ostream& out, std::ostream& err) {
    auto c = apply_flags(f);
    Log log(err, c.logLevel);
    if (!f.out.empty()) c.dataset.bankRoot = f.out;
    restrict_distance(c.dataset, f.distance);
    const auto plan = scene::plan_jobs(c.dataset);
    log.info("rendering " + std::to_string(plan.rooms) + " rooms at " + std::to_string(plan.distances.size()) +
             " distance(s) with " + std::to_string(c.jobs) + " job(s)");
    const auto r = scene::render_room_caches(c.dataset, scene::resolve_hrirs(c.dataset), c.jobs, true, log.sink());
    out << "rooms: " << r.rirJobs << " RIR jobs, " << r.brirsWritten << " BRIRs written, " << r.banksSkipped
        << " complete banks skipped\n";
    return kOk;
}

int cmd_synth(const Flags& f, std::ostream& out, std::ostream& err) {
    auto c = apply_flags(f);
    Log log(err, c.logLevel);
    if (!f.out.empty()) c.dataset.output = f.out;
    restrict_distance(c.dataset, f.distance);
    if (c.dataset.corpusManifest.empty()) throw ConfigError("corpus: a corpus manifest is required for synth");
    const auto r = scene::generate_dataset(c.dataset, c.jobs, log.sink());
    out << "synth: " << r.written << " scenes written, " << r.skipped << " skipped";
    for (const auto& [split, n] : r.perSplit) out << ", " << split << " " << n;
    out << "; mean pair SNR " << fixed(r.meanMixtureSnrDb) << " dB, mean babble SNR " << fixed(r.meanBabbleSnrDb)
        << " dB\nindex hash " << r.indexHash << '\n';
    return kOk;
}

int cmd_plan(const Flags& f, std::ostream& out, std::ostream& /*err*/) {
    auto c = apply_flags(f);
    restrict_distance(c.dataset, f.distance);
    const auto p = scene::plan_jobs(c.dataset);
    out << "plan: " << p.rooms << " rooms, " << p.distances.size() << " distance(s), " << p.rirJobsPerDistance
        << " RIR jobs and " << p.brirsPerDistance << " BRIRs per distance (" << p.totalRirJobs << " and "
        << p.totalBrirs << " in total), " << p.totalScenes << " scenes";
    for (const auto& [split, n] : p.scenesPerSplit) out << ", " << split << " " << n;
    out << '\n';
    return kOk;
}

std::vector<fs::path> strategy_scenes(const RunConfig& c, const std::string& split, Strategy strategy) {
    std::vector<fs::path> out;
    for (const auto& dir : eval::split_scenes(c.dataset.output, split)) {
        std::ifstream in(dir / "manifest.json");
        if (!in) throw IoError("missing manifest in " + dir.string());
        const auto m = json::parse(in).get<scene::SceneManifest>();
        const bool adultPair = m.pairType == scene::PairType::AdultAdult;
        if ((strategy == Strategy::Adult) == adultPair) out.push_back(dir);
    }
    return out;
}

std::vector<sep::Example> load_examples(const std::vector<fs::path>& dirs, int jobs) {
    std::vector<sep::Example> out(dirs.size());
    parallel_for(dirs.size(), static_cast<std::size_t>(jobs),
                 [&](std::size_t i) { out[i] = sep::example_from_scene(scene::load_scene(dirs[i])); });
    return out;
}

void write_json_atomic(const fs::path& path, const json& j) {
    const auto tmp = fs::path(path.string() + ".tmp");
    {
        std::ofstream o(tmp);
        if (!o) throw IoError("cannot write " + tmp.string());
        o << j.dump(2) << '\n';
    }
    fs::rename(tmp, path);
}

int cmd_train(const Flags& f, std::ostream& out, std::ostream& err) {
    auto c = apply_flags(f);
    Log log(err, c.logLevel);
    const auto& t = c.train;
    const fs::path dir = f.out.empty() ? t.out : fs::path(f.out);
    fs::path checkpoint = f.checkpoint.empty() ? t.checkpoint : fs::path(f.checkpoint);
    if (t.strategy == Strategy::Finetune) {
        if (checkpoint.empty()) throw ConfigError("checkpoint: the finetune strategy needs a checkpoint to start from");
        if (!fs::exists(checkpoint)) throw ConfigError("checkpoint: " + checkpoint.string() + " does not exist");
    }
    if (fs::exists(dir / "train.json") && fs::exists(dir / "checkpoint.bin")) {
        out << "train: " << dir.string() << " is already complete\n";
        return kOk;
    }

    auto trainDirs = strategy_scenes(c, "train", t.strategy);
    if (t.maxScenes > 0 && trainDirs.size() > t.maxScenes) trainDirs.resize(t.maxScenes);
    const std::size_t full = trainDirs.size();
    if (t.strategy == Strategy::Finetune) {
        auto rng = dsp::Rng(c.seed).stream("finetune-subset");
        for (std::size_t i = trainDirs.size(); i > 1; --i) std::swap(trainDirs[i - 1], trainDirs[rng.below(i)]);
        trainDirs.resize(static_cast<std::size_t>(std::llround(t.finetuneFraction * static_cast<double>(full))));
        std::sort(trainDirs.begin(), trainDirs.end());
    }
    if (trainDirs.empty()) {
        throw ConfigError("train: the dataset has no training scenes for the " + to_string(t.strategy) + " strategy");
    }
    auto valDirs = strategy_scenes(c, "val", t.strategy == Strategy::Adult ? Strategy::Adult : Strategy::Classroom);
    if (t.maxValScenes > 0 && valDirs.size() > t.maxValScenes) valDirs.resize(t.maxValScenes);
    log.info("training on " + std::to_string(trainDirs.size()) + " of " + std::to_string(full) + " " +
             (t.strategy == Strategy::Adult ? "adult" : "classroom") + " scenes (" + to_string(t.strategy) +
             " strategy), validating on " + std::to_string(valDirs.size()));

    const auto train = load_examples(trainDirs, c.jobs);
    const auto val = load_examples(valDirs, c.jobs);

    sep::TrainConfig tc = t.strategy == Strategy::Finetune ? sep::TrainConfig::finetune() : sep::TrainConfig{};
    tc.epochs = t.epochs;
    tc.batchSize = t.batchSize;
    tc.learningRate = t.learningRate;
    tc.maxSteps = t.maxSteps;
    tc.doaEpochs = t.doaEpochs;
    tc.seed = c.seed;
    tc.jobs = c.jobs;

    sep::ModelParams init;
    if (t.strategy == Strategy::Finetune) {
        init = sep::load_checkpoint(checkpoint);
    } else {
        auto cfg = t.model == "tiny" ? sep::ModelConfig::tiny() : sep::ModelConfig{};
        auto rng = dsp::Rng(c.seed).stream("init");
        init = sep::init_params(cfg, rng);
    }
    const auto result = sep::train_micro(std::move(init), train, val, tc, log.sink());

    fs::create_directories(dir);
    sep::write_history_csv(dir / "history.csv", result.history);
    sep::save_checkpoint(dir / "checkpoint.bin", result.params);
    json summary{{"strategy", to_string(t.strategy)}, {"trainScenes", train.size()}, {"fullScenes", full},
                 {"valScenes", val.size()}, {"steps", result.steps}, {"diverged", result.diverged},
                 {"seed", c.seed}, {"decayEvery", tc.decayEvery}};
    if (!result.history.empty()) summary["finalValLoss"] = result.history.back().valLoss;
    write_json_atomic(dir / "train.json", summary);
    out << "train: " << result.steps << " steps on " << train.size() << " scenes, checkpoint "
        << (dir / "checkpoint.bin").string() << '\n';
    if (result.diverged) throw PipelineError("training diverged; the last finite parameters were saved");
    return kOk;
}

void write_model_estimates(const RunConfig& c, const fs::path& checkpoint, const fs::path& estimatesDir,
                           const std::string& split, const Log& log) {
    if (checkpoint.empty()) throw ConfigError("checkpoint: model estimates need a checkpoint");
    if (!fs::exists(checkpoint)) throw ConfigError("checkpoint: " + checkpoint.string() + " does not exist");
    const auto params = sep::load_checkpoint(checkpoint);
    const auto scenes = eval::split_scenes(c.dataset.output, split);
    std::atomic<std::size_t> written{0};
    parallel_for(scenes.size(), static_cast<std::size_t>(c.jobs), [&](std::size_t i) {
        const auto id = scenes[i].filename().string();
        if (fs::exists(eval::estimate_path(estimatesDir, id, 1))) return;
        const auto bundle = scene::load_scene(scenes[i]);
        const auto result = sep::forward(params, bundle.mixture);
        fs::create_directories(estimatesDir / id);
        for (int k = 0; k < 2; ++k) {
            const auto path = eval::estimate_path(estimatesDir, id, k);
            const auto tmp = fs::path(path.string() + ".tmp");
            dsp::write_wav(tmp, result.outputs()[static_cast<std::size_t>(k)]);
            fs::rename(tmp, path);
        }
        ++written;
    });
    log.info("separated " + std::to_string(written.load()) + " scenes");
}

int cmd_eval(const Flags& f, std::ostream& out, std::ostream& err) {
    auto c = apply_flags(f);
    Log log(err, c.logLevel);
    const fs::path dir = f.out.empty() ? c.eval.out : fs::path(f.out);
    const auto estimatesDir = dir / "estimates" / c.eval.estimates;
    const auto& kind = c.eval.estimates;
    if (kind == "model") {
        write_model_estimates(c, f.checkpoint.empty() ? c.eval.checkpoint : fs::path(f.checkpoint), estimatesDir,
                              c.eval.split, log);
    } else {
        eval::write_baseline_estimates(c.dataset.output, c.eval.split, estimatesDir,
                                       kind == "oracle" ? eval::BaselineKind::Oracle : eval::BaselineKind::Passthrough);
    }
    eval::DoaOptions doa;
    doa.headRadius = c.dataset.headRadius;
    auto result = eval::evaluate_dataset(c.dataset.output, c.eval.split, estimatesDir, c.jobs, doa);
    if (f.distance) {
        std::erase_if(result.records, [&](const eval::MetricsRecord& r) { return std::abs(r.distance - *f.distance) > 1e-9; });
    }
    fs::create_directories(dir);
    eval::write_metrics_csv(dir / "metrics.csv", result.records);
    json failures = json::array();
    for (const auto& fl : result.failures) failures.push_back({{"sceneId", fl.sceneId}, {"message", fl.message}});
    write_json_atomic(dir / "failures.json", failures);

    double snriSum = 0.0;
    for (const auto& r : result.records) snriSum += eval::finite_db(r.snriDb);
    const double mean = result.records.empty() ? 0.0 : snriSum / static_cast<double>(result.records.size());
    out << "eval: " << result.records.size() / 2 << " scenes scored, mean SNRi " << fixed(mean) << " dB, metrics "
        << (dir / "metrics.csv").string() << '\n';
    if (!result.complete()) {
        for (const auto& fl : result.failures) log.info("failed " + fl.sceneId + ": " + fl.message);
        throw PipelineError(std::to_string(result.failures.size()) + " scene(s) could not be evaluated");
    }
    return kOk;
}

int cmd_report(const Flags& f, std::ostream& out, std::ostream& /*err*/) {
    fs::path metrics = f.metrics;
    fs::path dir = f.out;
    if (!f.config.empty()) {
        const auto c = apply_flags(f);
        if (metrics.empty()) metrics = c.report.metrics.empty() ? c.eval.out / "metrics.csv" : c.report.metrics;
        if (dir.empty()) dir = c.report.out;
    }
    if (metrics.empty()) throw ConfigError("metrics: give --metrics or a config");
    if (dir.empty()) dir = "report";
    const auto records = eval::read_metrics_csv(metrics);
    if (records.empty()) throw PipelineError("report: " + metrics.string() + " holds no records; run eval first");
    std::vector<eval::SceneFailure> failures;
    if (const auto fpath = metrics.parent_path() / "failures.json"; fs::exists(fpath)) {
        std::ifstream in(fpath);
        for (const auto& fl : json::parse(in)) failures.push_back({fl.at("sceneId"), fl.at("message")});
    }
    const auto summary = eval::write_report(dir, records, failures);
    const auto& snri = summary["overall"]["snri"];
    out << "report: " << summary["scenes"].get<std::size_t>() << " scenes, mean SNRi "
        << fixed(snri["mean"].get<double>()) << " dB, summary " << (dir / "summary.json").string() << '\n';
    return kOk;
}

int cmd_demo_corpus(const Flags& f, std::ostream& out, std::ostream& /*err*/) {
    scene::DemoCorpusOptions o;
    if (f.seed) o.seed = *f.seed;
    o.speakersPerGroup = f.speakers;
    o.utterancesPerSpeaker = f.utterances;
    const auto manifest = scene::write_demo_corpus(f.out, o);
    out << "demo corpus: " << manifest.string() << '\n';
    return kOk;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Classroom speech simulation, separation training and evaluation"};
    app.require_subcommand(1);
    Flags f;

    auto add_common = [&](CLI::App* sub, bool needConfig) {
        auto* opt = sub->add_option("--config", f.config, "Run config (JSON)");
        if (needConfig) opt->required();
        opt->check(CLI::ExistingFile);
        sub->add_option("--seed", f.seed, "Seed overriding the config");
        sub->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--out", f.out, "Output root for this command");
        sub->add_option("--log-level", f.logLevel, "quiet, info or debug");
    };

    auto* rooms = app.add_subcommand("rooms", "Render RIR and BRIR caches");
    add_common(rooms, true);
    rooms->add_option("--hrir", f.hrir, "HRIR pack directory or 'synthetic'");
    rooms->add_option("--distance", f.distance, "Only this ring radius (1.0, 1.5 or 2.0)");

    auto* synth = app.add_subcommand("synth", "Synthesise the scene dataset");
    add_common(synth, true);
    synth->add_option("--hrir", f.hrir, "HRIR pack directory or 'synthetic'");
    synth->add_option("--distance", f.distance, "Put every scene at this ring radius");

    auto* plan = app.add_subcommand("plan", "Validate a config and count the work without running it");
    add_common(plan, true);
    plan->add_option("--distance", f.distance, "Only this ring radius");

    auto* train = app.add_subcommand("train", "Train the separation model");
    add_common(train, true);
    train->add_option("--strategy", f.strategy, "adult, classroom or finetune");
    train->add_option("--finetune-fraction", f.finetuneFraction, "Share of classroom scenes used for finetuning");
    train->add_option("--checkpoint", f.checkpoint, "Checkpoint to finetune from");

    auto* ev = app.add_subcommand("eval", "Separate and score a split");
    add_common(ev, true);
    ev->add_option("--estimates", f.estimates, "model, passthrough or oracle");
    ev->add_option("--checkpoint", f.checkpoint, "Model checkpoint");
    ev->add_option("--split", f.split, "Split to score");
    ev->add_option("--distance", f.distance, "Only score scenes at this ring radius");

    auto* report = app.add_subcommand("report", "Summarise metrics with grouped statistics");
    add_common(report, false);
    report->add_option("--metrics", f.metrics, "metrics.csv written by eval");

    auto* demo = app.add_subcommand("demo-corpus", "Write a synthetic demo speech corpus");
    demo->add_option("--out", f.out, "Corpus directory")->required();
    demo->add_option("--seed", f.seed, "Seed");
    demo->add_option("--speakers", f.speakers, "Speakers per age group and split")->check(CLI::PositiveNumber);
    demo->add_option("--utterances", f.utterances, "Utterances per speaker")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        if (rooms->parsed()) return cmd_rooms(f, out, err);
        if (synth->parsed()) return cmd_synth(f, out, err);
        if (plan->parsed()) return cmd_plan(f, out, err);
        if (train->parsed()) return cmd_train(f, out, err);
        if (ev->parsed()) return cmd_eval(f, out, err);
        if (report->parsed()) return cmd_report(f, out, err);
        if (demo->parsed()) return cmd_demo_corpus(f, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const InvalidInput& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kIoError;
    } catch (const fs::filesystem_error& e) {
        err << "i/o error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::exception& e) {
        err << "pipeline error: " << e.what() << '\n';
        return kPipelineError;
    }
    return kConfigError;
}

} // namespace classroom::cli
