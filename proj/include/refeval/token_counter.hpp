#pragma once

#include <cstddef>
#include <string_view>

namespace refeval {

/// Pluggable token counter used for the JSONL token-budget check. The
/// provider's real tokenizer can be injected; the default below is a
/// whitespace+punctuation approximation that needs no vendor dependency.
class TokenCounter {
  public:
    virtual ~TokenCounter() = default;
    virtual std::size_t count(std::string_view content) const = 0;
};

/// Approximate counter: each run of word characters ([A-Za-z0-9_] plus any
/// non-ASCII byte) is one token, every other non-space character is one
/// token on its own.
class ApproxTokenCounter final : public TokenCounter {
  public:
    std::size_t count(std::string_view content) const override;
};

}  // namespace refeval
