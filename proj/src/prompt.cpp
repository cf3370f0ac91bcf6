#include "refeval/prompt.hpp"

namespace refeval::prompt {

const SystemInstruction& default_system_instruction() {
    static const SystemInstruction instruction{
        "You are a code refactoring assistant. Refactor the given program to "
        "be shorter, more readable, efficient, and maintainable without "
        "changing its behavior. Produce multiple distinct refactoring "
        "variants when asked for more than one. Keep formatting clean with "
        "proper indentation and descriptive names. Separate the main function "
        "from helper functions for modularity. Judge each refactoring on "
        "correctness, usability, quality, and efficiency. After the code, "
        "summarize the key improvements in one or two sentences. Return code "
        "inside a triple-backtick block tagged with the language."};
    return instruction;
}

SelectionPolicy parse_selection_policy(std::string_view name) {
    if (name == "same-language-first") return SelectionPolicy::SameLanguageFirst;
    if (name == "corpus-order") return SelectionPolicy::CorpusOrder;
    throw SelectionError("unknown example selection policy: " + std::string(name));
}

std::vector<ExamplePair> select_examples(const std::vector<corpus::Sample>& corpus,
                                         const corpus::Sample& target, int n,
                                         SelectionPolicy policy,
                                         std::uint64_t /*seed*/) {
    if (n < 0) throw SelectionError("example count must be non-negative");
    std::vector<const corpus::Sample*> pool;
    pool.reserve(corpus.size());
    if (policy == SelectionPolicy::SameLanguageFirst) {
        for (const auto& s : corpus) {
            if (s.id != target.id && s.language == target.language) {
                pool.push_back(&s);
            }
        }
        for (const auto& s : corpus) {
            if (s.id != target.id && s.language != target.language) {
                pool.push_back(&s);
            }
        }
    } else {
        for (const auto& s : corpus) {
            if (s.id != target.id) pool.push_back(&s);
        }
    }
    if (static_cast<std::size_t>(n) > pool.size()) {
        throw SelectionError(
            "requested " + std::to_string(n) + " examples but only " +
            std::to_string(pool.size()) + " are available (short by " +
            std::to_string(n - static_cast<int>(pool.size())) + ")");
    }
    std::vector<ExamplePair> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const corpus::Sample& s = *pool[static_cast<std::size_t>(i)];
        out.push_back({s.complex_code, s.refactored_code, s.language});
    }
    return out;
}

Prompt build_prompt(const corpus::Sample& target, std::vector<ExamplePair> examples,
                    const SystemInstruction& sys) {
    Prompt p;
    p.system_instruction = sys.text;
    p.examples = std::move(examples);
    p.target_instruction = target.instruction;
    p.target_code = target.complex_code;
    p.language = target.language;
    return p;
}

std::string fence_block(std::string_view code, LanguageId lang) {
    std::string out = "```";
    out += fence_tag(lang);
    out += '\n';
    out += code;
    if (out.empty() || out.back() != '\n') out += '\n';
    out += "```";
    return out;
}

chat::MessageList render(const Prompt& p) {
    chat::MessageList turns;
    turns.push_back({chat::Role::System, p.system_instruction});
    for (const ExamplePair& ex : p.examples) {
        turns.push_back({chat::Role::User, fence_block(ex.complex_code, ex.language)});
        turns.push_back(
            {chat::Role::Assistant, fence_block(ex.refactored_code, ex.language)});
    }
    turns.push_back({chat::Role::User, p.target_instruction + "\n\n" +
                                           fence_block(p.target_code, p.language)});
    return turns;
}

std::string render_text(const Prompt& p) {
    std::string out;
    for (const chat::Message& m : render(p)) {
        out += chat::role_name(m.role);
        out += ":\n";
        out += m.content;
        out += "\n\n";
    }
    return out;
}

}  // namespace refeval::prompt
