#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "refeval/language.hpp"

namespace refeval::analysis {

struct LexWarning {
    int line = 0;  // 1-based line in the scanned text
    std::string message;
};

/// Code after normalization: no comments, every string/char literal reduced
/// to a single-space interior, horizontal whitespace runs collapsed to one
/// space, blank lines dropped. Normalization is idempotent on `text`.
struct NormalizedCode {
    std::string text;
    int removed_comments = 0;
    int collapsed_literals = 0;
    std::vector<int> line_origin;  // original 1-based line per output line
    std::vector<LexWarning> warnings;
};

enum class TokenKind { Identifier, Keyword, Number, String, Operator, Punctuation };

std::string_view token_kind_name(TokenKind kind);

struct Token {
    TokenKind kind;
    std::string lexeme;
    int line = 0;
};

struct TokenStream {
    std::vector<Token> tokens;
    std::vector<LexWarning> warnings;
};

struct DecisionPoint {
    std::string kind;  // if, elif, while, for, foreach, case, catch, except, ternary
    int line = 0;      // original source line
};

/// cc is always 1 + decision_points.size().
struct ComplexityReport {
    int cc = 1;
    std::vector<DecisionPoint> decision_points;
};

struct SizeReport {
    int sloc = 0;
    long chars = 0;
    int token_count = 0;
};

struct AnalysisOptions {
    /// Paper-enumeration mode: case labels and catch/except clauses are not
    /// counted as decision points.
    bool strict_paper_cc = false;
};

/// Lenient: unterminated comments or literals consume to end of line/file
/// and produce a warning instead of failing.
NormalizedCode normalize(std::string_view code, LanguageId lang);

/// Comments (and Python docstring statements) blanked to spaces, newlines and
/// everything else kept. Used for SLOC counting.
std::string strip_comments(std::string_view code, LanguageId lang);

/// Maximal-munch lexing. Expects input already passed through normalize();
/// characters matching no class become single-char punctuation with a warning.
TokenStream tokenize(std::string_view code, LanguageId lang);

/// Physical lines that are non-empty after comment stripping and trimming
/// and are not composed solely of braces/brackets/parens and semicolons.
int count_sloc(std::string_view code, LanguageId lang);

/// Unicode scalar count of normalize(code).text excluding line breaks.
long count_chars(std::string_view code, LanguageId lang);

ComplexityReport cyclomatic_complexity(std::string_view code, LanguageId lang,
                                       const AnalysisOptions& opts = {});

struct AnalysisResult {
    SizeReport size;
    ComplexityReport complexity;
    std::vector<LexWarning> warnings;
};

/// Bundles the four analyzers over one shared normalization pass.
AnalysisResult analyze(std::string_view code, LanguageId lang,
                       const AnalysisOptions& opts = {});

}  // namespace refeval::analysis
