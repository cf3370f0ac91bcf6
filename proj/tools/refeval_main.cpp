#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "refeval/config.hpp"
#include "refeval/pipeline.hpp"

namespace {

using refeval::cli::ConfigError;
using refeval::cli::RunConfig;

struct CliOverrides {
    std::string config_file;
    std::string corpus;
    std::string output_dir;
    std::vector<int> shots;
    std::string model;
    double temperature = 0.0;
    int k = 0;
    std::string provider_type;
    std::string endpoint;
    std::string recording;
    std::string prompt_dump_dir;
    std::string override_file;
    std::string correctness_script;
    long token_cap = 0;
    std::uint64_t seed = 0;
    int gen_parallel = 0;
    int compile_parallel = 0;
    bool skip_compile = false;
    bool strict_cc = false;
    bool sample_std = false;
    bool compiled_only = false;
};

void add_common_options(CLI::App* cmd, CliOverrides& o) {
    cmd->add_option("--config", o.config_file, "Run configuration file (JSON)");
    cmd->add_option("--corpus", o.corpus, "Corpus CSV path");
    cmd->add_option("--output-dir", o.output_dir, "Output directory");
    cmd->add_option("--shots", o.shots, "Shot counts to sweep")
        ->delimiter(',');
    cmd->add_option("--model", o.model, "Model name sent to the provider");
    cmd->add_option("--temperature", o.temperature, "Sampling temperature");
    cmd->add_option("--k", o.k, "Candidates per prompt");
    cmd->add_option("--provider", o.provider_type, "Provider type: live|replay");
    cmd->add_option("--endpoint", o.endpoint, "Live provider URL");
    cmd->add_option("--recording", o.recording, "Replay recording path");
    cmd->add_option("--prompt-dump-dir", o.prompt_dump_dir,
                    "Write rendered prompts here for audit");
    cmd->add_option("--override-file", o.override_file,
                    "Manual correctness overrides (JSON id->bool)");
    cmd->add_option("--correctness-script", o.correctness_script,
                    "Per-candidate functional check script");
    cmd->add_option("--token-cap", o.token_cap, "JSONL token budget");
    cmd->add_option("--seed", o.seed, "Selection seed");
    cmd->add_option("--gen-parallel", o.gen_parallel, "Generation workers");
    cmd->add_option("--compile-parallel", o.compile_parallel,
                    "Compile workers (0 = CPU count)");
    cmd->add_flag("--skip-compile", o.skip_compile,
                  "Use the lexical wellformedness heuristic instead of "
                  "toolchains");
    cmd->add_flag("--strict-cc", o.strict_cc,
                  "Do not count case/catch clauses as decision points");
    cmd->add_flag("--sample-std", o.sample_std,
                  "Sample standard deviation instead of population");
    cmd->add_flag("--compiled-only", o.compiled_only,
                  "Aggregate only compiling candidates");
}

RunConfig build_config(const CLI::App* cmd, const CliOverrides& o) {
    RunConfig cfg;
    if (!o.config_file.empty()) {
        cfg = refeval::cli::load_config(o.config_file);
    }
    const auto given = [&](const std::string& name) {
        return cmd->count(name) > 0;
    };
    if (given("--corpus")) cfg.corpus_path = o.corpus;
    if (given("--output-dir")) cfg.output_dir = o.output_dir;
    if (given("--shots")) cfg.shot_list = o.shots;
    if (given("--model")) cfg.generation.model_name = o.model;
    if (given("--temperature")) cfg.generation.temperature = o.temperature;
    if (given("--k")) cfg.generation.k = o.k;
    if (given("--provider")) cfg.provider.type = o.provider_type;
    if (given("--endpoint")) cfg.provider.endpoint = o.endpoint;
    if (given("--recording")) cfg.provider.recording_path = o.recording;
    if (given("--prompt-dump-dir")) cfg.prompt_dump_dir = o.prompt_dump_dir;
    if (given("--override-file")) cfg.override_file = o.override_file;
    if (given("--correctness-script")) {
        cfg.correctness_script = o.correctness_script;
    }
    if (given("--token-cap")) cfg.token_cap = static_cast<std::size_t>(o.token_cap);
    if (given("--seed")) cfg.seed = o.seed;
    if (given("--gen-parallel")) cfg.gen_parallel = o.gen_parallel;
    if (given("--compile-parallel")) cfg.compile_parallel = o.compile_parallel;
    if (given("--skip-compile")) cfg.skip_compile = o.skip_compile;
    if (given("--strict-cc")) cfg.cc_strict_paper = o.strict_cc;
    if (given("--sample-std")) cfg.sample_std = o.sample_std;
    if (given("--compiled-only")) cfg.compiled_only = o.compiled_only;
    return cfg;
}

int exit_code_for(const std::vector<std::string>& failures) {
    return failures.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"refeval: multilingual LLM code-refactoring evaluation harness"};
    app.require_subcommand(1);

    CliOverrides o;
    std::string candidates_path;
    std::string records_path;
    std::string analyze_file;
    std::string analyze_lang;

    auto* prepare = app.add_subcommand(
        "prepare", "Convert the corpus CSV to validated chat JSONL");
    add_common_options(prepare, o);

    auto* generate = app.add_subcommand(
        "generate", "Sweep shots x samples and collect candidate sets");
    add_common_options(generate, o);

    auto* evaluate = app.add_subcommand(
        "evaluate", "Score every candidate: compile, size, CC, distance");
    add_common_options(evaluate, o);
    evaluate->add_option("--candidates", candidates_path,
                         "Candidates file (default <output>/candidates.jsonl)");

    auto* report = app.add_subcommand("report",
                                      "Aggregate records into report tables");
    add_common_options(report, o);
    report->add_option("--records", records_path,
                       "Records file (default <output>/records.jsonl)");

    auto* analyze = app.add_subcommand(
        "analyze", "Print size/complexity analysis of one file as JSON");
    analyze->add_option("file", analyze_file, "Source file")->required();
    analyze->add_option("--lang", analyze_lang,
                        "Language (default: from file extension)");
    analyze->add_flag("--strict-cc", o.strict_cc,
                      "Do not count case/catch clauses as decision points");

    CLI11_PARSE(app, argc, argv);

    try {
        if (prepare->parsed()) {
            const auto cfg = build_config(prepare, o);
            const auto outcome = refeval::cli::run_prepare(cfg);
            std::printf("accepted: %d\nrejected: %zu\n", outcome.accepted,
                        outcome.rejects.size());
            for (const auto& [id, reason] : outcome.rejects) {
                std::printf("  reject %s: %s\n", id.c_str(), reason.c_str());
            }
            std::printf("wrote %s\n", outcome.jsonl_path.string().c_str());
            return 0;
        }
        if (generate->parsed()) {
            const auto cfg = build_config(generate, o);
            const auto outcome = refeval::cli::run_generate(cfg);
            std::printf("candidate sets: %d (cache hits %d, clamped %d)\n",
                        outcome.sets_written, outcome.cache_hits,
                        outcome.clamped_sets);
            for (const auto& failure : outcome.failures) {
                std::printf("  failed %s\n", failure.c_str());
            }
            std::printf("wrote %s\nwrote %s\n",
                        outcome.candidates_path.string().c_str(),
                        outcome.recording_path.string().c_str());
            return exit_code_for(outcome.failures);
        }
        if (evaluate->parsed()) {
            const auto cfg = build_config(evaluate, o);
            const auto path = candidates_path.empty()
                                  ? (std::filesystem::path(cfg.output_dir) /
                                     "candidates.jsonl")
                                  : std::filesystem::path(candidates_path);
            const auto outcome = refeval::cli::run_evaluate(cfg, path);
            std::printf("records: %d\n", outcome.records_written);
            for (const auto& [lang, count] : outcome.tool_missing) {
                std::printf("  tool missing for %s: %d candidates\n",
                            std::string(refeval::language_name(lang)).c_str(),
                            count);
            }
            for (const auto& note : outcome.notes) {
                std::printf("  note: %s\n", note.c_str());
            }
            std::printf("wrote %s\n", outcome.records_path.string().c_str());
            return exit_code_for(outcome.notes);
        }
        if (report->parsed()) {
            const auto cfg = build_config(report, o);
            const auto path = records_path.empty()
                                  ? (std::filesystem::path(cfg.output_dir) /
                                     "records.jsonl")
                                  : std::filesystem::path(records_path);
            const auto outcome = refeval::cli::run_report(cfg, path);
            std::printf("report dir: %s\n",
                        outcome.report_dir.string().c_str());
            for (const auto& file : outcome.files) {
                std::printf("  %s\n", file.filename().string().c_str());
            }
            for (const auto& warning : outcome.warnings) {
                std::printf("  warning: %s\n", warning.c_str());
            }
            return 0;
        }
        if (analyze->parsed()) {
            refeval::LanguageId lang;
            if (!analyze_lang.empty()) {
                const auto parsed = refeval::parse_language(analyze_lang);
                if (!parsed) throw ConfigError("unknown language: " + analyze_lang);
                lang = *parsed;
            } else {
                const auto ext =
                    std::filesystem::path(analyze_file).extension().string();
                const auto by_ext = [&]() -> std::optional<refeval::LanguageId> {
                    for (const auto l : refeval::kAllLanguages) {
                        if (ext == refeval::source_extension(l)) return l;
                    }
                    if (ext == ".cc" || ext == ".cxx" || ext == ".hpp") {
                        return refeval::LanguageId::Cpp;
                    }
                    if (ext == ".h") return refeval::LanguageId::C;
                    return std::nullopt;
                }();
                if (!by_ext) {
                    throw ConfigError(
                        "cannot infer language from extension '" + ext +
                        "'; pass --lang");
                }
                lang = *by_ext;
            }
            std::fputs(refeval::cli::analyze_file_json(analyze_file, lang,
                                                       o.strict_cc)
                           .c_str(),
                       stdout);
            return 0;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
