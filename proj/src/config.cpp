#include "refeval/config.hpp"

#include <fstream>
#include <sstream>

#include "refeval/textutil.hpp"

namespace refeval::cli {

void RunConfig::validate() const {
    if (corpus_path.empty()) throw ConfigError("corpus path is required");
    if (shot_list.empty()) throw ConfigError("shot list must not be empty");
    for (const int n : shot_list) {
        if (n < 0 || n > 10) {
            throw ConfigError("shot counts must be within [0, 10], got " +
                              std::to_string(n));
        }
    }
    try {
        generation.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (provider.type != "live" && provider.type != "replay") {
        throw ConfigError("provider type must be 'live' or 'replay'");
    }
    if (provider.type == "live" && provider.endpoint.empty()) {
        throw ConfigError("live provider requires an endpoint URL");
    }
    if (provider.type == "replay" && provider.recording_path.empty()) {
        throw ConfigError("replay provider requires a recording path");
    }
    if (gen_parallel < 1) throw ConfigError("gen_parallel must be >= 1");
    if (compile_parallel < 0) throw ConfigError("compile_parallel must be >= 0");
    for (const auto& [lang, spec] : toolchains) {
        int placeholders = 0;
        for (const auto& arg : spec.command) {
            if (arg == "{src}") ++placeholders;
        }
        if (spec.command.empty() || placeholders != 1) {
            throw ConfigError("toolchain for " +
                              std::string(language_name(lang)) +
                              " must contain exactly one {src}");
        }
        if (spec.timeout_s <= 0) {
            throw ConfigError("toolchain timeout must be positive");
        }
    }
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["corpus"] = corpus_path;
    j["output_dir"] = output_dir;
    j["shots"] = shot_list;
    j["seed"] = seed;
    j["system_instruction"] = system_instruction;
    j["token_cap"] = token_cap;
    j["role_overhead"] = role_overhead;
    j["generation"] = {{"model_name", generation.model_name},
                       {"temperature", generation.temperature},
                       {"max_output_tokens", generation.max_output_tokens},
                       {"k", generation.k}};
    j["provider"] = {{"type", provider.type},
                     {"endpoint", provider.endpoint},
                     {"recording", provider.recording_path},
                     {"api_key_env", provider.api_key_env},
                     {"multi_choice", provider.multi_choice},
                     {"max_attempts", provider.max_attempts},
                     {"backoff_base_s", provider.backoff_base_s},
                     {"backoff_factor", provider.backoff_factor},
                     {"max_inflight", provider.max_inflight}};
    nlohmann::json tools;
    for (const auto& [lang, spec] : toolchains) {
        tools[std::string(fence_tag(lang))] = {{"command", spec.command},
                                               {"timeout_s", spec.timeout_s}};
    }
    j["toolchains"] = std::move(tools);
    j["skip_compile"] = skip_compile;
    j["gen_parallel"] = gen_parallel;
    j["compile_parallel"] = compile_parallel;
    j["example_policy"] = example_policy;
    j["cc_strict_paper"] = cc_strict_paper;
    j["sample_std"] = sample_std;
    j["compiled_only"] = compiled_only;
    j["prompt_dump_dir"] = prompt_dump_dir;
    j["correctness_script"] = correctness_script;
    j["override_file"] = override_file;
    return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    cfg.corpus_path = j.value("corpus", cfg.corpus_path);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    if (j.contains("shots")) cfg.shot_list = j["shots"].get<std::vector<int>>();
    cfg.seed = j.value("seed", cfg.seed);
    cfg.system_instruction = j.value("system_instruction", cfg.system_instruction);
    cfg.token_cap = j.value("token_cap", cfg.token_cap);
    cfg.role_overhead = j.value("role_overhead", cfg.role_overhead);
    if (j.contains("generation")) {
        const auto& g = j["generation"];
        cfg.generation.model_name = g.value("model_name", std::string());
        cfg.generation.temperature = g.value("temperature", 0.3);
        cfg.generation.max_output_tokens = g.value("max_output_tokens", 2048);
        cfg.generation.k = g.value("k", 5);
    }
    if (j.contains("provider")) {
        const auto& p = j["provider"];
        cfg.provider.type = p.value("type", cfg.provider.type);
        cfg.provider.endpoint = p.value("endpoint", std::string());
        cfg.provider.recording_path = p.value("recording", std::string());
        cfg.provider.api_key_env = p.value("api_key_env", cfg.provider.api_key_env);
        cfg.provider.multi_choice = p.value("multi_choice", true);
        cfg.provider.max_attempts = p.value("max_attempts", 5);
        cfg.provider.backoff_base_s = p.value("backoff_base_s", 1.0);
        cfg.provider.backoff_factor = p.value("backoff_factor", 2.0);
        cfg.provider.max_inflight = p.value("max_inflight", 4);
    }
    if (j.contains("toolchains")) {
        for (const auto& [name, value] : j["toolchains"].items()) {
            const auto lang = parse_language(name);
            if (!lang) throw ConfigError("unknown toolchain language: " + name);
            compiler::ToolchainSpec spec;
            spec.language = *lang;
            spec.command = value.at("command").get<std::vector<std::string>>();
            spec.timeout_s = value.value("timeout_s", 10.0);
            cfg.toolchains[*lang] = std::move(spec);
        }
    }
    cfg.skip_compile = j.value("skip_compile", cfg.skip_compile);
    cfg.gen_parallel = j.value("gen_parallel", cfg.gen_parallel);
    cfg.compile_parallel = j.value("compile_parallel", cfg.compile_parallel);
    cfg.example_policy = j.value("example_policy", cfg.example_policy);
    cfg.cc_strict_paper = j.value("cc_strict_paper", cfg.cc_strict_paper);
    cfg.sample_std = j.value("sample_std", cfg.sample_std);
    cfg.compiled_only = j.value("compiled_only", cfg.compiled_only);
    cfg.prompt_dump_dir = j.value("prompt_dump_dir", cfg.prompt_dump_dir);
    cfg.correctness_script = j.value("correctness_script", cfg.correctness_script);
    cfg.override_file = j.value("override_file", cfg.override_file);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("cannot open config file: " + file.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config parse error in " + file.string() + ": " +
                          e.what());
    }
    return config_from_json(j);
}

std::string run_id(const RunConfig& cfg) {
    // The run's identity is its parameters plus the corpus bytes; where the
    // inputs live on disk is not part of it.
    nlohmann::json j = cfg.to_json();
    j.erase("corpus");
    j.erase("output_dir");
    j["provider"].erase("recording");
    std::uint64_t h = text::fnv1a64(j.dump());
    std::ifstream in(cfg.corpus_path, std::ios::binary);
    if (in) {
        std::ostringstream buf;
        buf << in.rdbuf();
        h = text::fnv1a64(buf.str(), h);
    }
    return text::hex64(h);
}

}  // namespace refeval::cli
