#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "refeval/language.hpp"

namespace refeval::compiler {

/// External toolchain invocation: argv template with exactly one "{src}"
/// placeholder, run in a fresh temp dir per candidate.
struct ToolchainSpec {
    LanguageId language = LanguageId::C;
    std::vector<std::string> command;
    double timeout_s = 10.0;
};

enum class CompileStatus { Pass, Fail, Timeout, ToolMissing };

std::string_view compile_status_name(CompileStatus status);
std::optional<CompileStatus> parse_compile_status(std::string_view name);

struct CompileVerdict {
    CompileStatus status = CompileStatus::Fail;
    std::string stderr_excerpt;  // first 2048 bytes, temp paths scrubbed
    long duration_ms = 0;
    bool heuristic = false;
};

struct CompileJob {
    std::string id;
    std::string code;
    LanguageId language = LanguageId::C;
};

/// Compile-only check; never executes the candidate. Every failure mode maps
/// to a verdict, nothing escapes as an exception except a malformed spec.
CompileVerdict compile_one(const std::string& code, LanguageId lang,
                           const ToolchainSpec& spec);

/// Bounded worker pool; verdicts are a pure function of (code, spec) and
/// independent of batch composition or schedule.
std::map<std::string, CompileVerdict> compile_batch(
    const std::vector<CompileJob>& jobs,
    const std::map<LanguageId, ToolchainSpec>& specs, int parallelism);

std::map<LanguageId, ToolchainSpec> default_toolchains();

/// Lexical wellformedness stand-in for toolchain-free environments: balanced
/// brackets, terminated literals, non-empty token stream.
CompileVerdict heuristic_verdict(const std::string& code, LanguageId lang);

/// javac requires the file name to match the first public top-level type;
/// falls back to Main.java.
std::string java_source_filename(const std::string& code);

}  // namespace refeval::compiler
