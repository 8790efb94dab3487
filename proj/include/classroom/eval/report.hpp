//
//  report.hpp
//  classroom
//
//  Distributed under the Apache License, Version 2.0.
//  See the accompanying file LICENSE or http://www.apache.org/licenses/LICENSE-2.0.html
//

#pragma once

#include <classroom/eval/doa.hpp>
#include <classroom/eval/metrics.hpp>
#include <classroom/eval/stats.hpp>
#include <classroom/scene/scene.hpp>

#include <json.hpp>

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace classroom::eval {

/// One talker of one scene. SNR values are raw; +infinity marks perfect reconstruction.
struct MetricsRecord {
    std::string sceneId;
    int talker = 0;   // reference index
    int estimate = 0; // estimate matched to it
    std::string ageGroup;
    double snriDb = 0.0;
    double snrDb = 0.0;
    double doaErrorDeg = 0.0; // NaN when the estimate is too quiet to localise
    Permutation permutation = kIdentity;
    std::string pairType;
    bool babble = false;
    double distance = 1.0;
    int roomId = 0;
};

/// Scores both talkers of one scene under a single PIT permutation.
std::array<MetricsRecord, 2> evaluate_scene(const scene::SceneBundle& scene,
                                            const std::array<dsp::BinauralBuffer, 2>& estimates,
                                            const DoaOptions& doa = {});

struct SceneFailure {
    std::string sceneId;
    std::string message;
};

struct EvaluationResult {
    std::vector<MetricsRecord> records; // sorted by sceneId, then talker
    std::vector<SceneFailure> failures;
    std::size_t scenes = 0;
    bool complete() const noexcept { return failures.empty(); }
};

/// Estimates live in `<estimatesDir>/<sceneId>/est1.wav` and `est2.wav`.
std::filesystem::path estimate_path(const std::filesystem::path& estimatesDir, const std::string& sceneId, int index);

/// Scene directories of one split, in index order, read from the dataset's index.json.
std::vector<std::filesystem::path> split_scenes(const std::filesystem::path& datasetRoot, const std::string& split);

EvaluationResult evaluate_dataset(const std::filesystem::path& datasetRoot, const std::string& split,
                                  const std::filesystem::path& estimatesDir, int jobs = 1, const DoaOptions& doa = {});

/// Writes copies of the mixture (passthrough) or of the references (oracle) as estimates.
enum class BaselineKind { Passthrough, Oracle };
void write_baseline_estimates(const std::filesystem::path& datasetRoot, const std::string& split,
                              const std::filesystem::path& estimatesDir, BaselineKind kind);

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path);

/// Two groups of records to compare with a Mann-Whitney test.
struct Contrast {
    std::string name;
    std::string metric; // "snri" or "doa"
    std::function<bool(const MetricsRecord&)> first;
    std::function<bool(const MetricsRecord&)> second;
};

/// Babble on/off, every pair of pair types and every pair of distances, for both metrics.
std::vector<Contrast> default_contrasts();

/// Grouped mean and SEM (infinite SNRi counted as the 60 dB sentinel) plus the contrasts with
/// Benjamini-Hochberg adjusted p-values. Throws PipelineError when there are no records.
nlohmann::json summarize(const std::vector<MetricsRecord>& records, const std::vector<Contrast>& contrasts,
                         const std::vector<SceneFailure>& failures = {});

/// Bar-chart tables: condition x pair type for SNRi and DoA error, and distance x pair type.
void write_plot_tables(const std::filesystem::path& dir, const std::vector<MetricsRecord>& records);

/// summary.json and plots/ under `outDir`.
nlohmann::json write_report(const std::filesystem::path& outDir, const std::vector<MetricsRecord>& records,
                            const std::vector<SceneFailure>& failures = {});

} // namespace classroom::eval
