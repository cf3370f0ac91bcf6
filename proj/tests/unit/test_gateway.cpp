#include <doctest.h>

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "refeval/gateway.hpp"
#include "refeval/prompt.hpp"

using namespace refeval;
namespace fs = std::filesystem;

namespace {

corpus::Sample test_sample() {
    return {"python-1", LanguageId::Python, "Refactor this.",
            "def f(x):\n    return x + x\n", "def f(x):\n    return 2 * x\n"};
}

prompt::Prompt test_prompt() {
    return prompt::build_prompt(test_sample(), {},
                                prompt::default_system_instruction());
}

gateway::GenerationConfig test_config(int k = 5) {
    gateway::GenerationConfig cfg;
    cfg.model_name = "test-model";
    cfg.k = k;
    return cfg;
}

class MockProvider final : public gateway::Provider {
  public:
    explicit MockProvider(int outputs) : outputs_(outputs) {}

    gateway::CompletionResult complete(const chat::MessageList&,
                                       const gateway::GenerationConfig&) override {
        ++calls;
        gateway::CompletionResult result;
        for (int i = 0; i < outputs_; ++i) {
            result.outputs.push_back("output-" + std::to_string(i));
        }
        result.meta.request_id = "mock";
        return result;
    }

    std::string_view name() const override { return "mock"; }

    int calls = 0;

  private:
    int outputs_;
};

struct TempPath {
    fs::path path;

    explicit TempPath(const std::string& name) {
        path = fs::temp_directory_path() /
               (name + "-" + std::to_string(::getpid()) + ".jsonl");
    }
    ~TempPath() {
        std::error_code ec;
        fs::remove(path, ec);
    }
};

}  // namespace

TEST_CASE("GenerationConfig validation enforces the documented ranges") {
    gateway::GenerationConfig cfg = test_config();
    CHECK_NOTHROW(cfg.validate());
    cfg.temperature = 0.05;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.temperature = 1.6;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = test_config();
    cfg.k = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = test_config();
    cfg.max_output_tokens = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("extract_code: single tagged fence") {
    CHECK(gateway::extract_code("Here: ```python\nprint(1)\n``` done",
                                LanguageId::Python) == "print(1)");
}

TEST_CASE("extract_code: first matching fence wins") {
    const std::string raw =
        "```java\nclass A {}\n```\nand\n```python\nprint(2)\n```\n";
    CHECK(gateway::extract_code(raw, LanguageId::Java) == "class A {}");
    CHECK(gateway::extract_code(raw, LanguageId::Python) == "print(2)");
}

TEST_CASE("extract_code: untagged fences match any language") {
    CHECK(gateway::extract_code("```\nx = 1\n```", LanguageId::Python) ==
          "x = 1");
}

TEST_CASE("extract_code: tag aliases are honored") {
    CHECK(gateway::extract_code("```c++\nint x;\n```", LanguageId::Cpp) ==
          "int x;");
    CHECK(gateway::extract_code("```cs\nint x;\n```", LanguageId::CSharp) ==
          "int x;");
}

TEST_CASE("extract_code: no matching tag falls back to the first fence") {
    const std::string raw = "```java\nclass B {}\n```";
    CHECK(gateway::extract_code(raw, LanguageId::Python) == "class B {}");
}

TEST_CASE("extract_code: no fence returns trimmed input") {
    CHECK(gateway::extract_code("  just some text  ", LanguageId::C) ==
          "just some text");
}

TEST_CASE("extract_code: unterminated fence is lenient") {
    CHECK(gateway::extract_code("```python\nprint(3)", LanguageId::Python) ==
          "print(3)");
}

TEST_CASE("extract_code never returns fence markers") {
    const std::string raw = "```python\nprint(1)\n```\n```\nprint(2)\n```";
    const auto code = gateway::extract_code(raw, LanguageId::Python);
    CHECK(code.find("```") == std::string::npos);
}

TEST_CASE("prompt digest is stable and input-sensitive") {
    const auto messages = prompt::render(test_prompt());
    const auto cfg = test_config();
    const auto d1 = gateway::prompt_digest(messages, cfg);
    CHECK(d1 == gateway::prompt_digest(messages, cfg));
    CHECK(d1.size() == 16);

    auto other = messages;
    other.back().content += " ";
    CHECK(gateway::prompt_digest(other, cfg) != d1);

    auto cfg2 = cfg;
    cfg2.k = 3;
    CHECK(gateway::prompt_digest(messages, cfg2) != d1);
}

TEST_CASE("generate returns exactly k outputs in provider order") {
    MockProvider provider(5);
    const auto set = gateway::generate(test_prompt(), test_config(), provider,
                                       "python-1", 0);
    CHECK(set.sample_id == "python-1");
    CHECK(set.shot_n == 0);
    REQUIRE(set.raw_outputs.size() == 5);
    CHECK(set.raw_outputs[0] == "output-0");
    CHECK(set.raw_outputs[4] == "output-4");
    CHECK_FALSE(set.prompt_digest.empty());
}

TEST_CASE("generate surfaces a short provider response as ShortResponse") {
    MockProvider provider(3);
    try {
        gateway::generate(test_prompt(), test_config(5), provider);
        FAIL("expected GatewayError");
    } catch (const gateway::GatewayError& e) {
        CHECK(e.kind() == gateway::GatewayErrorKind::ShortResponse);
    }
}

TEST_CASE("record then replay reproduces candidate sets bit-exactly") {
    MockProvider provider(5);
    const auto cfg = test_config();
    auto set = gateway::generate(test_prompt(), cfg, provider, "python-1", 0);

    TempPath recording("refeval-recording");
    CHECK(gateway::record_session({set}, recording.path) == 1);

    auto replay = gateway::replay_load(recording.path);
    CHECK(replay.size() == 1);
    CHECK(replay.contains(set.prompt_digest));
    const auto replayed =
        gateway::generate(test_prompt(), cfg, replay, "python-1", 0);
    CHECK(replayed.raw_outputs == set.raw_outputs);
    CHECK(replayed.prompt_digest == set.prompt_digest);
}

TEST_CASE("replay: unseen prompt raises ReplayMiss") {
    gateway::ReplayProvider replay;
    try {
        gateway::generate(test_prompt(), test_config(), replay);
        FAIL("expected GatewayError");
    } catch (const gateway::GatewayError& e) {
        CHECK(e.kind() == gateway::GatewayErrorKind::ReplayMiss);
    }
}

TEST_CASE("replay: k=1 against five recorded outputs takes the first") {
    MockProvider provider(5);
    const auto cfg5 = test_config(5);
    auto set = gateway::generate(test_prompt(), cfg5, provider);

    // Re-key the recorded entry under the k=1 digest to emulate a provider
    // recording made with the same prompt but smaller k.
    auto cfg1 = test_config(1);
    const auto messages = prompt::render(test_prompt());
    gateway::ReplayProvider replay;
    replay.add(gateway::prompt_digest(messages, cfg1),
               {cfg1, set.raw_outputs});
    const auto replayed = gateway::generate(test_prompt(), cfg1, replay);
    REQUIRE(replayed.raw_outputs.size() == 1);
    CHECK(replayed.raw_outputs[0] == "output-0");
}

TEST_CASE("replay: a short recording raises ShortResponse") {
    const auto cfg = test_config(5);
    const auto messages = prompt::render(test_prompt());
    gateway::ReplayProvider replay;
    replay.add(gateway::prompt_digest(messages, cfg),
               {cfg, {"one", "two", "three"}});
    try {
        gateway::generate(test_prompt(), cfg, replay);
        FAIL("expected GatewayError");
    } catch (const gateway::GatewayError& e) {
        CHECK(e.kind() == gateway::GatewayErrorKind::ShortResponse);
    }
}

TEST_CASE("record_session reports digest collisions") {
    MockProvider provider(5);
    auto a = gateway::generate(test_prompt(), test_config(), provider);
    auto b = a;
    b.raw_outputs[0] = "different";
    TempPath recording("refeval-collision");
    try {
        gateway::record_session({a, b}, recording.path);
        FAIL("expected GatewayError");
    } catch (const gateway::GatewayError& e) {
        CHECK(e.kind() == gateway::GatewayErrorKind::Corrupt);
    }
}

TEST_CASE("recording of n distinct sets counts n") {
    MockProvider provider(5);
    const auto cfg = test_config();
    std::vector<gateway::CandidateSet> sets;
    auto sample = test_sample();
    for (int i = 0; i < 4; ++i) {
        sample.complex_code = "def f():\n    return " + std::to_string(i) + "\n";
        const auto p = prompt::build_prompt(
            sample, {}, prompt::default_system_instruction());
        sets.push_back(gateway::generate(p, cfg, provider, sample.id, 0));
    }
    TempPath recording("refeval-counts");
    CHECK(gateway::record_session(sets, recording.path) == 4);
    CHECK(gateway::replay_load(recording.path).size() == 4);
}

// ---------------------------------------------------------------------------
// Live-provider contract against a local chat-completions server.

namespace {

struct LocalServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> requests{0};

    ~LocalServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }

    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    std::string endpoint() const {
        return "http://127.0.0.1:" + std::to_string(port) +
               "/v1/chat/completions";
    }
};

gateway::HttpProviderOptions fast_options(const std::string& endpoint) {
    gateway::HttpProviderOptions options;
    options.endpoint = endpoint;
    options.api_key = "test-key-SECRET";
    options.backoff_base_s = 0.005;
    options.max_attempts = 5;
    return options;
}

std::string choices_body(int n) {
    nlohmann::json body;
    body["id"] = "req-123";
    auto choices = nlohmann::json::array();
    for (int i = 0; i < n; ++i) {
        choices.push_back(
            {{"message",
              {{"role", "assistant"},
               {"content", "```python\nx = " + std::to_string(i) + "\n```"}}}});
    }
    body["choices"] = choices;
    return body.dump();
}

}  // namespace

TEST_CASE("http provider: multi-choice call carries n=k and bearer auth") {
    LocalServer local;
    std::string seen_auth;
    int seen_n = 0;
    local.server.Post("/v1/chat/completions",
                      [&](const httplib::Request& req, httplib::Response& res) {
                          local.requests++;
                          seen_auth = req.get_header_value("Authorization");
                          seen_n = nlohmann::json::parse(req.body)["n"];
                          res.set_content(choices_body(5), "application/json");
                      });
    local.start();

    auto provider = gateway::make_http_provider(fast_options(local.endpoint()));
    const auto set =
        gateway::generate(test_prompt(), test_config(5), *provider);
    CHECK(local.requests == 1);
    CHECK(seen_auth == "Bearer test-key-SECRET");
    CHECK(seen_n == 5);
    REQUIRE(set.raw_outputs.size() == 5);
    CHECK(set.raw_outputs[2] == "```python\nx = 2\n```");
    CHECK(set.meta.multi_choice);
}

TEST_CASE("http provider: sequential mode issues k single-choice calls") {
    LocalServer local;
    local.server.Post("/v1/chat/completions",
                      [&](const httplib::Request& req, httplib::Response& res) {
                          local.requests++;
                          CHECK(nlohmann::json::parse(req.body)["n"] == 1);
                          res.set_content(choices_body(1), "application/json");
                      });
    local.start();

    auto options = fast_options(local.endpoint());
    options.multi_choice = false;
    auto provider = gateway::make_http_provider(std::move(options));
    const auto set =
        gateway::generate(test_prompt(), test_config(3), *provider);
    CHECK(local.requests == 3);
    CHECK(set.raw_outputs.size() == 3);
    CHECK_FALSE(set.meta.multi_choice);
}

TEST_CASE("http provider: 429 retries with backoff then succeeds") {
    LocalServer local;
    local.server.Post("/v1/chat/completions",
                      [&](const httplib::Request&, httplib::Response& res) {
                          const int n = ++local.requests;
                          if (n <= 2) {
                              res.status = 429;
                              res.set_content("slow down", "text/plain");
                          } else {
                              res.set_content(choices_body(5),
                                              "application/json");
                          }
                      });
    local.start();

    auto provider = gateway::make_http_provider(fast_options(local.endpoint()));
    const auto set =
        gateway::generate(test_prompt(), test_config(5), *provider);
    CHECK(local.requests == 3);
    CHECK(set.raw_outputs.size() == 5);
}

TEST_CASE("http provider: persistent 429 exhausts into RateLimited") {
    LocalServer local;
    local.server.Post("/v1/chat/completions",
                      [&](const httplib::Request&, httplib::Response& res) {
                          local.requests++;
                          res.status = 429;
                      });
    local.start();

    auto options = fast_options(local.endpoint());
    options.max_attempts = 3;
    auto provider = gateway::make_http_provider(std::move(options));
    try {
        gateway::generate(test_prompt(), test_config(), *provider);
        FAIL("expected GatewayError");
    } catch (const gateway::GatewayError& e) {
        CHECK(e.kind() == gateway::GatewayErrorKind::RateLimited);
        CHECK(local.requests == 3);
    }
}

TEST_CASE("http provider: auth and fatal status taxonomy") {
    LocalServer local;
    int status = 401;
    local.server.Post("/v1/chat/completions",
                      [&](const httplib::Request&, httplib::Response& res) {
                          local.requests++;
                          res.status = status;
                      });
    local.start();

    auto provider = gateway::make_http_provider(fast_options(local.endpoint()));
    try {
        gateway::generate(test_prompt(), test_config(), *provider);
        FAIL("expected GatewayError");
    } catch (const gateway::GatewayError& e) {
        CHECK(e.kind() == gateway::GatewayErrorKind::Auth);
        CHECK(local.requests == 1);  // fatal: no retries
    }

    status = 400;
    try {
        gateway::generate(test_prompt(), test_config(), *provider);
        FAIL("expected GatewayError");
    } catch (const gateway::GatewayError& e) {
        CHECK(e.kind() == gateway::GatewayErrorKind::Fatal);
    }
}

TEST_CASE("http provider: short multi-choice response raises ShortResponse") {
    LocalServer local;
    local.server.Post("/v1/chat/completions",
                      [&](const httplib::Request&, httplib::Response& res) {
                          res.set_content(choices_body(3), "application/json");
                      });
    local.start();

    auto provider = gateway::make_http_provider(fast_options(local.endpoint()));
    try {
        gateway::generate(test_prompt(), test_config(5), *provider);
        FAIL("expected GatewayError");
    } catch (const gateway::GatewayError& e) {
        CHECK(e.kind() == gateway::GatewayErrorKind::ShortResponse);
    }
}

TEST_CASE("credentials never appear in recordings") {
    LocalServer local;
    local.server.Post("/v1/chat/completions",
                      [&](const httplib::Request&, httplib::Response& res) {
                          res.set_content(choices_body(5), "application/json");
                      });
    local.start();

    auto provider = gateway::make_http_provider(fast_options(local.endpoint()));
    const auto set = gateway::generate(test_prompt(), test_config(5),
                                       *provider, "python-1", 0);
    TempPath recording("refeval-scrub");
    gateway::record_session({set}, recording.path);

    std::ifstream in(recording.path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str().find("SECRET") == std::string::npos);
    CHECK(buf.str().find("Bearer") == std::string::npos);
}
