#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace refeval {

/// The five subject languages. Parsing any other name is an error.
enum class LanguageId { C, Cpp, CSharp, Python, Java };

inline constexpr std::array<LanguageId, 5> kAllLanguages = {
    LanguageId::C, LanguageId::Cpp, LanguageId::CSharp, LanguageId::Python,
    LanguageId::Java};

/// Display name as used in report tables: "C", "C++", "C#", "Python", "Java".
std::string_view language_name(LanguageId lang);

/// Lowercase tag used in code fences and machine-readable output:
/// "c", "cpp", "csharp", "python", "java".
std::string_view fence_tag(LanguageId lang);

/// Conventional source file extension, with the dot.
std::string_view source_extension(LanguageId lang);

/// Lenient parse: accepts display names, fence tags, and common aliases
/// ("c++", "cs", "py", ...), case-insensitive.
std::optional<LanguageId> parse_language(std::string_view text);

/// True when `tag` (a fence info string) names `lang`.
bool fence_tag_matches(std::string_view tag, LanguageId lang);

}  // namespace refeval
