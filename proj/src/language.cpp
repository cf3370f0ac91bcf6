#include "refeval/language.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace refeval {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::string_view language_name(LanguageId lang) {
    switch (lang) {
        case LanguageId::C: return "C";
        case LanguageId::Cpp: return "C++";
        case LanguageId::CSharp: return "C#";
        case LanguageId::Python: return "Python";
        case LanguageId::Java: return "Java";
    }
    return "?";
}

std::string_view fence_tag(LanguageId lang) {
    switch (lang) {
        case LanguageId::C: return "c";
        case LanguageId::Cpp: return "cpp";
        case LanguageId::CSharp: return "csharp";
        case LanguageId::Python: return "python";
        case LanguageId::Java: return "java";
    }
    return "?";
}

std::string_view source_extension(LanguageId lang) {
    switch (lang) {
        case LanguageId::C: return ".c";
        case LanguageId::Cpp: return ".cpp";
        case LanguageId::CSharp: return ".cs";
        case LanguageId::Python: return ".py";
        case LanguageId::Java: return ".java";
    }
    return ".txt";
}

std::optional<LanguageId> parse_language(std::string_view text) {
    const std::string t = lower(text);
    if (t == "c") return LanguageId::C;
    if (t == "c++" || t == "cpp" || t == "cxx" || t == "cc") return LanguageId::Cpp;
    if (t == "c#" || t == "csharp" || t == "cs") return LanguageId::CSharp;
    if (t == "python" || t == "py" || t == "python3") return LanguageId::Python;
    if (t == "java") return LanguageId::Java;
    return std::nullopt;
}

bool fence_tag_matches(std::string_view tag, LanguageId lang) {
    const auto parsed = parse_language(tag);
    return parsed.has_value() && *parsed == lang;
}

}  // namespace refeval
