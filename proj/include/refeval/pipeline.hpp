#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "refeval/config.hpp"
#include "refeval/gateway.hpp"
#include "refeval/report.hpp"

namespace refeval::cli {

struct PrepareOutcome {
    std::filesystem::path jsonl_path;
    int accepted = 0;
    std::vector<std::pair<std::string, std::string>> rejects;  // id/row, reason
};

/// Algorithm: load corpus, convert to chat records, validate against the
/// token budget, write the accepted records as one JSONL file.
PrepareOutcome run_prepare(const RunConfig& cfg);

struct GenerateOutcome {
    std::filesystem::path candidates_path;
    std::filesystem::path recording_path;
    int sets_written = 0;
    int cache_hits = 0;
    int clamped_sets = 0;  // shots clamped to the available example count
    std::vector<std::string> failures;
};

/// Full shot x sample sweep. An existing recording at the output path acts
/// as a resume cache: completed digests are never re-queried.
GenerateOutcome run_generate(const RunConfig& cfg);

struct EvaluateOutcome {
    std::filesystem::path records_path;
    int records_written = 0;
    std::map<LanguageId, int> tool_missing;
    std::vector<std::string> notes;
};

EvaluateOutcome run_evaluate(const RunConfig& cfg,
                             const std::filesystem::path& candidates_path);

struct ReportOutcome {
    std::filesystem::path report_dir;
    std::vector<std::filesystem::path> files;
    std::vector<std::string> warnings;
};

ReportOutcome run_report(const RunConfig& cfg,
                         const std::filesystem::path& records_path);

/// Serialized candidate sets (candidates.jsonl) I/O.
void write_candidates(const std::vector<gateway::CandidateSet>& sets,
                      const std::filesystem::path& path);
std::vector<gateway::CandidateSet> read_candidates(
    const std::filesystem::path& path);

/// JSON report of the size/complexity analyzers for one file.
std::string analyze_file_json(const std::filesystem::path& file, LanguageId lang,
                              bool strict_paper_cc);

}  // namespace refeval::cli
