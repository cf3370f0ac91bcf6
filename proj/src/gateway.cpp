#include "refeval/gateway.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "refeval/textutil.hpp"

namespace refeval::gateway {

namespace {

std::string canonical_config(const GenerationConfig& cfg) {
    char temp[32];
    std::snprintf(temp, sizeof temp, "%.6g", cfg.temperature);
    return "model=" + cfg.model_name + ";temp=" + temp +
           ";max_tokens=" + std::to_string(cfg.max_output_tokens) +
           ";k=" + std::to_string(cfg.k);
}

}  // namespace

void GenerationConfig::validate() const {
    if (temperature < 0.1 || temperature > 1.5) {
        throw std::invalid_argument(
            "generation temperature must be within [0.1, 1.5]");
    }
    if (k < 1) throw std::invalid_argument("candidate count k must be >= 1");
    if (max_output_tokens < 1) {
        throw std::invalid_argument("max_output_tokens must be >= 1");
    }
}

std::string_view gateway_error_kind_name(GatewayErrorKind kind) {
    switch (kind) {
        case GatewayErrorKind::Auth: return "AuthError";
        case GatewayErrorKind::RateLimited: return "RateLimited";
        case GatewayErrorKind::ShortResponse: return "ShortResponse";
        case GatewayErrorKind::ReplayMiss: return "ReplayMiss";
        case GatewayErrorKind::Transport: return "TransportError";
        case GatewayErrorKind::Fatal: return "FatalError";
        case GatewayErrorKind::Corrupt: return "CorruptRecording";
    }
    return "?";
}

std::string prompt_digest(const chat::MessageList& messages,
                          const GenerationConfig& cfg) {
    std::uint64_t h = text::fnv1a64("");
    for (const chat::Message& m : messages) {
        h = text::fnv1a64(chat::role_name(m.role), h);
        h = text::fnv1a64("\x1f", h);
        h = text::fnv1a64(m.content, h);
        h = text::fnv1a64("\x1e", h);
    }
    h = text::fnv1a64("\x1d", h);
    h = text::fnv1a64(canonical_config(cfg), h);
    return text::hex64(h);
}

CandidateSet generate(const prompt::Prompt& p, const GenerationConfig& cfg,
                      Provider& provider, std::string sample_id,
                      std::optional<int> shot_n) {
    cfg.validate();
    const chat::MessageList messages = prompt::render(p);
    CompletionResult result = provider.complete(messages, cfg);
    if (static_cast<int>(result.outputs.size()) < cfg.k) {
        throw GatewayError(
            GatewayErrorKind::ShortResponse,
            "provider returned " + std::to_string(result.outputs.size()) +
                " outputs, expected " + std::to_string(cfg.k));
    }
    result.outputs.resize(static_cast<std::size_t>(cfg.k));

    CandidateSet set;
    set.sample_id = std::move(sample_id);
    set.shot_n = shot_n.value_or(static_cast<int>(p.examples.size()));
    set.effective_examples = static_cast<int>(p.examples.size());
    set.raw_outputs = std::move(result.outputs);
    set.meta = std::move(result.meta);
    set.prompt_digest = prompt_digest(messages, cfg);
    set.config = cfg;
    return set;
}

namespace {

struct Fence {
    std::string tag;   // first word of the info string, lowercased
    std::string body;  // fence interior without markers
};

std::vector<Fence> parse_fences(std::string_view raw) {
    std::vector<Fence> fences;
    std::size_t i = 0;
    while (true) {
        const auto open = raw.find("```", i);
        if (open == std::string_view::npos) break;
        std::size_t cursor = open + 3;
        const auto eol = raw.find('\n', cursor);
        std::string info;
        std::size_t body_begin;
        if (eol == std::string_view::npos) {
            info = std::string(raw.substr(cursor));
            body_begin = raw.size();
        } else {
            info = std::string(raw.substr(cursor, eol - cursor));
            body_begin = eol + 1;
        }
        Fence fence;
        const std::string_view trimmed = text::trim(info);
        const auto space = trimmed.find_first_of(" \t");
        std::string tag(space == std::string_view::npos ? trimmed
                                                        : trimmed.substr(0, space));
        for (char& c : tag) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        fence.tag = std::move(tag);

        const auto close = raw.find("```", body_begin);
        std::string_view body;
        if (close == std::string_view::npos) {
            body = raw.substr(body_begin);
            i = raw.size();
        } else {
            body = raw.substr(body_begin, close - body_begin);
            i = close + 3;
        }
        if (!body.empty() && body.back() == '\n') body.remove_suffix(1);
        if (!body.empty() && body.back() == '\r') body.remove_suffix(1);
        fence.body = std::string(body);
        fences.push_back(std::move(fence));
        if (i >= raw.size()) break;
    }
    return fences;
}

}  // namespace

std::string extract_code(std::string_view raw, LanguageId lang) {
    const std::vector<Fence> fences = parse_fences(raw);
    for (const Fence& f : fences) {
        if (f.tag.empty() || fence_tag_matches(f.tag, lang)) {
            return f.body;
        }
    }
    if (!fences.empty()) return fences.front().body;
    return std::string(text::trim(raw));
}

CompletionResult ReplayProvider::complete(const chat::MessageList& messages,
                                          const GenerationConfig& cfg) {
    const std::string digest = prompt_digest(messages, cfg);
    const Entry* entry = find(digest);
    if (entry == nullptr) {
        throw GatewayError(GatewayErrorKind::ReplayMiss,
                           "no recording for prompt digest " + digest);
    }
    if (static_cast<int>(entry->outputs.size()) < cfg.k) {
        throw GatewayError(
            GatewayErrorKind::ShortResponse,
            "recording for digest " + digest + " holds " +
                std::to_string(entry->outputs.size()) + " outputs, need " +
                std::to_string(cfg.k));
    }
    CompletionResult result;
    result.outputs.assign(entry->outputs.begin(),
                          entry->outputs.begin() + cfg.k);
    result.meta.request_id = "replay:" + digest;
    result.meta.latency_ms = 0;
    result.meta.multi_choice = true;
    return result;
}

bool ReplayProvider::contains(const std::string& digest) const {
    return entries_.count(digest) > 0;
}

const ReplayProvider::Entry* ReplayProvider::find(const std::string& digest) const {
    const auto it = entries_.find(digest);
    return it == entries_.end() ? nullptr : &it->second;
}

void ReplayProvider::add(const std::string& digest, Entry entry) {
    const auto it = entries_.find(digest);
    if (it != entries_.end()) {
        if (it->second.outputs != entry.outputs) {
            throw GatewayError(GatewayErrorKind::Corrupt,
                               "digest collision in recording: " + digest);
        }
        return;
    }
    entries_.emplace(digest, std::move(entry));
}

namespace {

nlohmann::ordered_json config_to_json(const GenerationConfig& cfg) {
    nlohmann::ordered_json j;
    j["model_name"] = cfg.model_name;
    j["temperature"] = cfg.temperature;
    j["max_output_tokens"] = cfg.max_output_tokens;
    j["k"] = cfg.k;
    return j;
}

GenerationConfig config_from_json(const nlohmann::json& j) {
    GenerationConfig cfg;
    cfg.model_name = j.value("model_name", std::string());
    cfg.temperature = j.value("temperature", 0.3);
    cfg.max_output_tokens = j.value("max_output_tokens", 2048);
    cfg.k = j.value("k", 5);
    return cfg;
}

}  // namespace

std::size_t record_session(const std::vector<CandidateSet>& sets,
                           const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw GatewayError(GatewayErrorKind::Fatal,
                           "cannot write recording: " + path.string());
    }
    std::map<std::string, const CandidateSet*> seen;
    std::size_t written = 0;
    for (const CandidateSet& set : sets) {
        const auto it = seen.find(set.prompt_digest);
        if (it != seen.end()) {
            if (it->second->raw_outputs != set.raw_outputs) {
                throw GatewayError(GatewayErrorKind::Corrupt,
                                   "digest collision while recording: " +
                                       set.prompt_digest);
            }
            continue;
        }
        seen.emplace(set.prompt_digest, &set);
        nlohmann::ordered_json j;
        j["digest"] = set.prompt_digest;
        j["config"] = config_to_json(set.config);
        j["outputs"] = set.raw_outputs;
        out << j.dump() << '\n';
        ++written;
    }
    out.flush();
    if (!out) {
        throw GatewayError(GatewayErrorKind::Fatal,
                           "short write to recording: " + path.string());
    }
    return written;
}

ReplayProvider replay_load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw GatewayError(GatewayErrorKind::Fatal,
                           "cannot open recording: " + path.string());
    }
    ReplayProvider provider;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw GatewayError(GatewayErrorKind::Corrupt,
                               path.string() + ":" + std::to_string(line_no) +
                                   ": " + e.what());
        }
        if (!j.contains("digest") || !j.contains("outputs")) {
            throw GatewayError(GatewayErrorKind::Corrupt,
                               path.string() + ":" + std::to_string(line_no) +
                                   ": missing digest/outputs");
        }
        ReplayProvider::Entry entry;
        if (j.contains("config")) entry.config = config_from_json(j["config"]);
        entry.outputs = j["outputs"].get<std::vector<std::string>>();
        provider.add(j["digest"].get<std::string>(), std::move(entry));
    }
    return provider;
}

}  // namespace refeval::gateway
