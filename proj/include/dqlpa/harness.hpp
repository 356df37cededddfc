#pragma once

#include "dqlpa/agent.hpp"
#include "dqlpa/config.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dqlpa {

struct ExperimentSpec {
    std::string scenario = "scenario1";
    RunConfig config = preset("scenario1");
    std::filesystem::path output_dir = "out";
    /// Skip training and evaluate this checkpoint instead.
    std::optional<std::filesystem::path> checkpoint;
    int threads = 1;
    bool train = true;
    bool evaluate = true;
};

inline constexpr const char* kMethods[] = {"dql", "ga", "wmmse", "max_power", "random"};
inline constexpr int kNumMethods = 5;

struct NormalizedRow {
    int sample = 0;
    std::uint64_t channel_seed = 0;
    std::array<double, kNumMethods> normalized{};
};

struct ComparisonReport {
    std::vector<NormalizedRow> rows;
    std::array<double, kNumMethods> mean{};
    std::vector<int> excluded_samples;  // GA throughput was not positive
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    double wall_seconds = 0;

    double mean_of(const std::string& method) const;
};

std::array<double, kNumMethods> throughputs(const TestRecord& r);

/// Each method's throughput over GA's on the same sample, and per-method means.
/// Samples with non-positive GA throughput are excluded (with a warning on stderr).
/// Throws std::invalid_argument when nothing remains.
ComparisonReport normalized_throughput(const std::vector<TestRecord>& records);

void write_results_csv(std::ostream& out, const std::vector<TestRecord>& records,
                       const ComparisonReport& report);
void write_training_log_csv(std::ostream& out, const std::vector<TrainLogRow>& log);
std::string report_json(const ComparisonReport& report, const ExperimentSpec& spec,
                        const Environment& env);

struct ExperimentOutcome {
    std::vector<TestRecord> records;
    ComparisonReport report;
    std::vector<TrainLogRow> training_log;
};

/// Train (or load), test against every baseline, and write into spec.output_dir:
///   config.txt, training_log.csv, checkpoint.bin, results.csv, report.json.
/// On failure the files written so far are removed and the error rethrown.
ExperimentOutcome run_experiment(const ExperimentSpec& spec);

struct SweepPoint {
    int hidden_units = 0;
    double learning_rate = 0;
    std::array<double, kNumMethods> mean{};
};

/// One experiment per (hidden_units, learning_rate) pair, each in its own
/// subdirectory "h<units>_lr<rate>" of spec.output_dir, plus a sweep.csv summary.
std::vector<SweepPoint> run_sweep(const ExperimentSpec& spec, const std::vector<int>& hidden_units,
                                  const std::vector<double>& learning_rates);

/// Writes the checkpoint, reads it back and checks that the sizes match.
Checkpoint checkpoint_roundtrip(const std::filesystem::path& path, const Mlp& net,
                                const RmsProp& opt);

}  // namespace dqlpa
