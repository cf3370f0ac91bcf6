#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "refeval/compile.hpp"
#include "refeval/gateway.hpp"
#include "refeval/language.hpp"

namespace refeval::cli {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ProviderConfig {
    std::string type = "replay";  // "live" | "replay"
    std::string endpoint;         // live: full chat-completions URL
    std::string recording_path;   // replay: recording JSONL
    std::string api_key_env = "LLM_API_KEY";
    bool multi_choice = true;
    int max_attempts = 5;
    double backoff_base_s = 1.0;
    double backoff_factor = 2.0;
    int max_inflight = 4;
};

struct RunConfig {
    std::string corpus_path;
    std::string output_dir = "out";
    std::vector<int> shot_list = {0, 2, 4, 6, 8, 10};
    std::uint64_t seed = 0;
    std::string system_instruction;  // empty = built-in default
    std::size_t token_cap = 4096;
    std::size_t role_overhead = 4;
    gateway::GenerationConfig generation;
    ProviderConfig provider;
    std::map<LanguageId, compiler::ToolchainSpec> toolchains =
        compiler::default_toolchains();
    bool skip_compile = false;
    int gen_parallel = 4;
    int compile_parallel = 0;  // 0 = hardware concurrency
    std::string example_policy = "same-language-first";
    bool cc_strict_paper = false;
    bool sample_std = false;
    bool compiled_only = false;
    std::string prompt_dump_dir;
    std::string correctness_script;
    std::string override_file;

    void validate() const;

    /// Canonical JSON (sorted keys) for run-id hashing; excludes credentials
    /// by construction (only the env var name is part of the config).
    nlohmann::json to_json() const;
};

RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& file);

/// Content hash of (effective config, corpus bytes); keys the report tree.
std::string run_id(const RunConfig& cfg);

}  // namespace refeval::cli
