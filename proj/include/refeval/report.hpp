#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "refeval/analysis.hpp"
#include "refeval/compile.hpp"
#include "refeval/language.hpp"
#include "refeval/metrics.hpp"

namespace refeval::report {

/// All measurements for one generated candidate.
struct MetricRecord {
    std::string sample_id;
    LanguageId language = LanguageId::C;
    int shot_n = 0;
    int candidate_index = 0;
    compiler::CompileVerdict compile;
    analysis::SizeReport size;
    analysis::ComplexityReport complexity;
    metrics::DistanceResult distance;
    double similarity = 0.0;  // ratio in [0, 1]
    bool similarity_degenerate = false;
    std::optional<bool> correct;  // nullopt when no verdict (tool missing)
    std::string correct_source;   // compile | heuristic | script | override
};

struct AggregateCell {
    double mean = 0.0;
    double std_dev = 0.0;
    double min = 0.0;
    double max = 0.0;
    long count = 0;
};

/// shot_n == -1 marks language-only grouping. Ordering follows the report
/// row order: C, C++, C#, Python, Java, then ascending shots.
struct GroupKey {
    LanguageId language = LanguageId::C;
    int shot_n = -1;

    auto operator<=>(const GroupKey&) const = default;
};

enum class GroupBy { LanguageShot, Language };

struct AggregateOptions {
    bool sample_std = false;    // population std by default
    bool compiled_only = false; // restrict metrics to compiling candidates
};

/// Metric name -> cell. Names: cc, chars, compilability, distance,
/// similarity, sloc, tokens. Similarity is aggregated as a percentage;
/// compilability comes from verdict tallies via P/(P+E)*100, never averaged
/// per candidate (ToolMissing candidates stay out of the denominator).
using MetricCells = std::map<std::string, AggregateCell>;

std::map<GroupKey, MetricCells> aggregate(
    const std::vector<MetricRecord>& records, GroupBy group_by,
    const AggregateOptions& opts = {},
    std::vector<std::string>* warnings = nullptr);

/// Per-sample correctness tallies (n = labeled candidates of one sample at
/// one shot), grouped per (language, shot).
std::map<GroupKey, std::vector<metrics::CorrectnessTally>> correctness_tallies(
    const std::vector<MetricRecord>& records);

/// Mean of correct_at_k over every tally and every k in ks. Throws when the
/// tallies disagree on n.
double mean_correct_at_k(const std::vector<metrics::CorrectnessTally>& tallies,
                         const std::vector<int>& ks);

struct CorrectnessTable {
    std::vector<int> shots;
    std::vector<LanguageId> languages;
    std::map<GroupKey, double> cells;  // averaged Correct@k percentage
};

CorrectnessTable correctness_table(
    const std::map<GroupKey, std::vector<metrics::CorrectnessTally>>& tallies,
    const std::vector<int>& ks);

/// Mean over samples of pass_at_k(n, c, k) per group, for each k in ks.
std::map<GroupKey, std::map<int, double>> pass_at_k_table(
    const std::vector<MetricRecord>& records, const std::vector<int>& ks);

/// Writes aggregates.csv, aggregates.json, correctness.csv, one
/// heatmap_<metric>.csv per metric, and records.jsonl into `dir`.
/// Deterministic bytes for identical inputs. Returns the files written.
std::vector<std::filesystem::path> emit(
    const std::map<GroupKey, MetricCells>& aggregates,
    const CorrectnessTable& correctness,
    const std::map<GroupKey, std::map<int, double>>& pass_k,
    const std::vector<MetricRecord>& records,
    const std::filesystem::path& dir);

void write_records(const std::vector<MetricRecord>& records,
                   const std::filesystem::path& path);

std::vector<MetricRecord> read_records(const std::filesystem::path& path);

}  // namespace refeval::report
