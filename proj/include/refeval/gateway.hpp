#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "refeval/chat.hpp"
#include "refeval/language.hpp"
#include "refeval/prompt.hpp"

namespace refeval::gateway {

struct GenerationConfig {
    double temperature = 0.3;
    int max_output_tokens = 2048;
    int k = 5;
    std::string model_name;

    /// Throws std::invalid_argument outside temperature [0.1, 1.5], k < 1,
    /// or max_output_tokens < 1.
    void validate() const;
};

struct ProviderMeta {
    std::string request_id;
    long latency_ms = 0;
    bool multi_choice = true;  // k from one call vs k sequential calls
};

struct CandidateSet {
    std::string sample_id;
    int shot_n = 0;            // requested shot count
    int effective_examples = 0;
    std::vector<std::string> raw_outputs;  // exactly config.k entries
    ProviderMeta meta;
    std::string prompt_digest;
    GenerationConfig config;
};

enum class GatewayErrorKind {
    Auth,
    RateLimited,
    ShortResponse,
    ReplayMiss,
    Transport,
    Fatal,
    Corrupt,
};

std::string_view gateway_error_kind_name(GatewayErrorKind kind);

class GatewayError : public std::runtime_error {
  public:
    GatewayError(GatewayErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    GatewayErrorKind kind() const { return kind_; }

  private:
    GatewayErrorKind kind_;
};

struct CompletionResult {
    std::vector<std::string> outputs;
    ProviderMeta meta;
};

class Provider {
  public:
    virtual ~Provider() = default;
    virtual CompletionResult complete(const chat::MessageList& messages,
                                      const GenerationConfig& cfg) = 0;
    virtual std::string_view name() const = 0;
};

/// Stable content hash of the rendered prompt bytes plus the generation
/// config; keys recordings and resume caches.
std::string prompt_digest(const chat::MessageList& messages,
                          const GenerationConfig& cfg);

/// Obtains k raw outputs for the prompt. Output order is the provider's;
/// a short provider response surfaces as GatewayError(ShortResponse).
CandidateSet generate(const prompt::Prompt& p, const GenerationConfig& cfg,
                      Provider& provider, std::string sample_id = {},
                      std::optional<int> shot_n = std::nullopt);

/// Returns the body of the first triple-backtick fence whose tag matches
/// `lang` or is untagged; falls back to the first fence of any tag, then to
/// the trimmed input. Never returns fence markers.
std::string extract_code(std::string_view raw, LanguageId lang);

/// Deterministic offline provider answering from a recorded session.
class ReplayProvider final : public Provider {
  public:
    struct Entry {
        GenerationConfig config;
        std::vector<std::string> outputs;
    };

    CompletionResult complete(const chat::MessageList& messages,
                              const GenerationConfig& cfg) override;
    std::string_view name() const override { return "replay"; }

    bool contains(const std::string& digest) const;
    const Entry* find(const std::string& digest) const;
    /// Reports a corrupt recording when the digest is already present with
    /// different outputs (collision or mixed recordings).
    void add(const std::string& digest, Entry entry);
    std::size_t size() const { return entries_.size(); }

  private:
    std::map<std::string, Entry> entries_;
};

/// JSONL of {digest, config, outputs[...]}. Returns the number of entries
/// written. Recordings never contain credentials.
std::size_t record_session(const std::vector<CandidateSet>& sets,
                           const std::filesystem::path& path);

ReplayProvider replay_load(const std::filesystem::path& path);

struct HttpProviderOptions {
    std::string endpoint;  // full URL of a chat-completions style route
    std::string api_key;   // sent as a bearer token, never logged or recorded
    bool multi_choice = true;
    int max_attempts = 5;
    double backoff_base_s = 1.0;
    double backoff_factor = 2.0;
    int max_inflight = 4;
};

/// Chat-completions HTTP client: 429/5xx and transport failures retry with
/// exponential backoff, 401/403 raise Auth, other 4xx are fatal.
std::unique_ptr<Provider> make_http_provider(HttpProviderOptions options);

}  // namespace refeval::gateway
