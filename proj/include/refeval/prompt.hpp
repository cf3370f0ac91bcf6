#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "refeval/chat.hpp"
#include "refeval/corpus.hpp"
#include "refeval/language.hpp"

namespace refeval::prompt {

/// One worked example embedded in a few-shot prompt: a complex snippet and
/// its reference refactoring, drawn from the corpus (never from the target).
struct ExamplePair {
    std::string complex_code;
    std::string refactored_code;
    LanguageId language;
};

struct SystemInstruction {
    std::string text;
};

/// The unified directive used for every prompt in a run.
const SystemInstruction& default_system_instruction();

enum class SelectionPolicy { SameLanguageFirst, CorpusOrder };

SelectionPolicy parse_selection_policy(std::string_view name);

class SelectionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Picks exactly n example pairs, excluding the target sample. The
/// same-language-first policy exhausts same-language samples (in corpus
/// order) before borrowing cross-language ones, also in corpus order. The
/// result is deterministic; `seed` is reserved for randomized policies and
/// has no effect on the two deterministic ones. Throws SelectionError naming
/// the shortfall when n exceeds the available examples.
std::vector<ExamplePair> select_examples(const std::vector<corpus::Sample>& corpus,
                                         const corpus::Sample& target, int n,
                                         SelectionPolicy policy,
                                         std::uint64_t seed = 0);

struct Prompt {
    std::string system_instruction;
    std::vector<ExamplePair> examples;
    std::string target_instruction;
    std::string target_code;
    LanguageId language;
};

Prompt build_prompt(const corpus::Sample& target, std::vector<ExamplePair> examples,
                    const SystemInstruction& sys);

/// Deterministic, byte-stable rendering: system turn, then each example as a
/// user/assistant pair, then the target instruction + fenced code as the
/// final user turn. Every code region is fenced with the language tag.
chat::MessageList render(const Prompt& p);

/// Flat text form of render(), used for prompt dumps and digesting.
std::string render_text(const Prompt& p);

std::string fence_block(std::string_view code, LanguageId lang);

}  // namespace refeval::prompt
