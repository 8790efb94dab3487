//
//  cli.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <classroom/scene/dataset.hpp>

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace classroom::cli {

inline constexpr int kRunConfigVersion = 1;

enum ExitCode : int { kOk = 0, kConfigError = 2, kIoError = 3, kPipelineError = 4 };

enum class LogLevel { Quiet, Info, Debug };

enum class Strategy { Adult, Classroom, Finetune };
std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& s);

struct TrainSection {
    Strategy strategy = Strategy::Classroom;
    double finetuneFraction = 0.5;
    std::filesystem::path checkpoint;
    std::string model = "default"; // or "tiny"
    int epochs = 100;
    std::size_t batchSize = 4;
    double learningRate = 1e-3;
    int maxSteps = 0;
    int doaEpochs = 0;
    /// Caps the number of training scenes; 0 keeps all.
    std::size_t maxScenes = 0;
    std::size_t maxValScenes = 0;
    std::filesystem::path out = "run";
};

struct EvalSection {
    std::string split = "test";
    std::string estimates = "model"; // model, passthrough or oracle
    std::filesystem::path checkpoint;
    std::filesystem::path out = "eval";
};

struct ReportSection {
    std::filesystem::path metrics;
    std::filesystem::path out = "report";
};

struct RunConfig {
    int version = kRunConfigVersion;
    std::uint64_t seed = 1;
    int jobs = 1;
    LogLevel logLevel = LogLevel::Info;
    scene::DatasetSpec dataset;
    TrainSection train;
    EvalSection eval;
    ReportSection report;
};

/// Relative paths resolve against `baseDir`. Unknown keys are rejected.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& baseDir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Runs one command line and returns the process exit code. Output goes to `out`, logs and errors to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace classroom::cli
