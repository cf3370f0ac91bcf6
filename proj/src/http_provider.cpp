#include <chrono>
#include <condition_variable>
#include <mutex>
#include <thread>

#if defined(REFEVAL_HTTPS) && !defined(CPPHTTPLIB_OPENSSL_SUPPORT)
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <json.hpp>

#include "refeval/gateway.hpp"

namespace refeval::gateway {

namespace {

// Counting semaphore over mutex/cv; bounds in-flight requests.
class InflightGate {
  public:
    explicit InflightGate(int limit) : available_(limit > 0 ? limit : 1) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return available_ > 0; });
        --available_;
    }

    void release() {
        {
            std::lock_guard lock(mutex_);
            ++available_;
        }
        cv_.notify_one();
    }

  private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int available_;
};

struct ParsedUrl {
    std::string base;  // scheme://host[:port]
    std::string path;  // /v1/chat/completions
};

ParsedUrl parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw GatewayError(GatewayErrorKind::Fatal,
                           "endpoint is not an http(s) URL: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

bool transient_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

class HttpProvider final : public Provider {
  public:
    explicit HttpProvider(HttpProviderOptions options)
        : options_(std::move(options)),
          url_(parse_url(options_.endpoint)),
          gate_(options_.max_inflight) {}

    CompletionResult complete(const chat::MessageList& messages,
                              const GenerationConfig& cfg) override {
        const auto start = std::chrono::steady_clock::now();
        CompletionResult result;
        if (options_.multi_choice) {
            auto [outputs, request_id] = request_choices(messages, cfg, cfg.k);
            result.outputs = std::move(outputs);
            result.meta.request_id = std::move(request_id);
            result.meta.multi_choice = true;
        } else {
            result.meta.multi_choice = false;
            for (int i = 0; i < cfg.k; ++i) {
                auto [outputs, request_id] = request_choices(messages, cfg, 1);
                if (outputs.empty()) {
                    throw GatewayError(GatewayErrorKind::ShortResponse,
                                       "provider returned no choices");
                }
                result.outputs.push_back(std::move(outputs.front()));
                if (result.meta.request_id.empty()) {
                    result.meta.request_id = std::move(request_id);
                }
            }
        }
        result.meta.latency_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start)
                .count();
        return result;
    }

    std::string_view name() const override { return "http"; }

  private:
    std::pair<std::vector<std::string>, std::string> request_choices(
        const chat::MessageList& messages, const GenerationConfig& cfg,
        int n_choices) {
        nlohmann::ordered_json body;
        body["model"] = cfg.model_name;
        auto& msgs = body["messages"] = nlohmann::ordered_json::array();
        for (const chat::Message& m : messages) {
            msgs.push_back({{"role", std::string(chat::role_name(m.role))},
                            {"content", m.content}});
        }
        body["temperature"] = cfg.temperature;
        body["max_tokens"] = cfg.max_output_tokens;
        body["n"] = n_choices;
        const std::string payload = body.dump();

        httplib::Headers headers;
        if (!options_.api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + options_.api_key);
        }

        double delay_s = options_.backoff_base_s;
        int last_status = 0;
        for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
            gate_.acquire();
            httplib::Client client(url_.base);
            client.set_read_timeout(120, 0);
            client.set_connection_timeout(10, 0);
            auto res = client.Post(url_.path, headers, payload, "application/json");
            gate_.release();

            if (res) {
                last_status = res->status;
                if (res->status == 200) return parse_response(res->body);
                if (res->status == 401 || res->status == 403) {
                    throw GatewayError(GatewayErrorKind::Auth,
                                       "authentication rejected (HTTP " +
                                           std::to_string(res->status) + ")");
                }
                if (!transient_status(res->status)) {
                    throw GatewayError(GatewayErrorKind::Fatal,
                                       "provider error HTTP " +
                                           std::to_string(res->status));
                }
            }
            if (attempt < options_.max_attempts) {
                std::this_thread::sleep_for(
                    std::chrono::duration<double>(delay_s));
                delay_s *= options_.backoff_factor;
            }
        }
        if (last_status == 429) {
            throw GatewayError(GatewayErrorKind::RateLimited,
                               "rate limited after " +
                                   std::to_string(options_.max_attempts) +
                                   " attempts");
        }
        throw GatewayError(GatewayErrorKind::Transport,
                           "transport failure after " +
                               std::to_string(options_.max_attempts) +
                               " attempts (last status " +
                               std::to_string(last_status) + ")");
    }

    std::pair<std::vector<std::string>, std::string> parse_response(
        const std::string& body) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw GatewayError(GatewayErrorKind::Fatal,
                               std::string("unparseable provider response: ") +
                                   e.what());
        }
        std::vector<std::string> outputs;
        for (const auto& choice : j.value("choices", nlohmann::json::array())) {
            if (choice.contains("message") && choice["message"].contains("content")) {
                outputs.push_back(choice["message"]["content"].get<std::string>());
            } else if (choice.contains("text")) {
                outputs.push_back(choice["text"].get<std::string>());
            }
        }
        return {std::move(outputs), j.value("id", std::string())};
    }

    HttpProviderOptions options_;
    ParsedUrl url_;
    InflightGate gate_;
};

}  // namespace

std::unique_ptr<Provider> make_http_provider(HttpProviderOptions options) {
    return std::make_unique<HttpProvider>(std::move(options));
}

}  // namespace refeval::gateway
