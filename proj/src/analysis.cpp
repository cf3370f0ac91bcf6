#include "refeval/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "refeval/textutil.hpp"

namespace refeval::analysis {

namespace {

bool is_ident_start(unsigned char c) {
    return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80;
}

bool is_ident_char(unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80;
}

bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

bool is_hspace(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
}

bool is_c_family(LanguageId lang) { return lang != LanguageId::Python; }

// ---------------------------------------------------------------------------
// Scanner: locates comment and literal spans. Shared by normalize(),
// strip_comments() and count_sloc().

enum class SpanKind { Comment, Literal };

struct Span {
    SpanKind kind;
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive
    char quote = '"';     // literals only
};

struct ScanResult {
    std::vector<Span> spans;
    std::vector<LexWarning> warnings;
};

class Scanner {
  public:
    Scanner(std::string_view src, LanguageId lang) : src_(src), lang_(lang) {}

    ScanResult run() {
        while (pos_ < src_.size()) {
            const char c = at();
            if (c == '\n') {
                ++line_;
                ++pos_;
                continue;
            }
            if (is_c_family(lang_)) {
                if (c == '/' && at(1) == '/') {
                    scan_line_comment();
                    continue;
                }
                if (c == '/' && at(1) == '*') {
                    scan_block_comment();
                    continue;
                }
            } else if (c == '#') {
                scan_line_comment();
                continue;
            }
            if (lang_ == LanguageId::CSharp && (c == '@' || c == '$')) {
                if (scan_csharp_prefixed()) continue;
                ++pos_;
                continue;
            }
            if (c == '"' || c == '\'') {
                scan_string(pos_);
                continue;
            }
            if (is_ident_start(static_cast<unsigned char>(c))) {
                scan_identifier_maybe_prefix();
                continue;
            }
            if (is_digit(static_cast<unsigned char>(c)) ||
                (c == '.' && is_digit(static_cast<unsigned char>(at(1))))) {
                skip_number();
                continue;
            }
            ++pos_;
        }
        return std::move(out_);
    }

  private:
    char at(std::size_t off = 0) const {
        return pos_ + off < src_.size() ? src_[pos_ + off] : '\0';
    }

    bool starts_with(std::string_view s, std::size_t from) const {
        return src_.substr(from, s.size()) == s;
    }

    void warn(const std::string& msg) { out_.warnings.push_back({line_, msg}); }

    void count_lines(std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            if (src_[i] == '\n') ++line_;
        }
    }

    void scan_line_comment() {
        const std::size_t begin = pos_;
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        out_.spans.push_back({SpanKind::Comment, begin, pos_, '"'});
    }

    void scan_block_comment() {
        const std::size_t begin = pos_;
        pos_ += 2;
        const auto close = src_.find("*/", pos_);
        if (close == std::string_view::npos) {
            warn("unterminated block comment");
            count_lines(begin, src_.size());
            pos_ = src_.size();
        } else {
            count_lines(begin, close + 2);
            pos_ = close + 2;
        }
        out_.spans.push_back({SpanKind::Comment, begin, pos_, '"'});
    }

    // Scans a quote-delimited literal with backslash escapes; single-line
    // forms end leniently at the line break.
    void scan_string(std::size_t begin) {
        const char quote = at();
        if (lang_ == LanguageId::Python && starts_with_triple(pos_)) {
            scan_python_triple(begin);
            return;
        }
        if (lang_ == LanguageId::Java && quote == '"' && starts_with_triple(pos_)) {
            scan_delimited_multiline(begin, "\"\"\"", '"',
                                     "unterminated text block");
            return;
        }
        ++pos_;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '\\' && pos_ + 1 < src_.size()) {
                pos_ += 2;
                continue;
            }
            if (c == quote) {
                ++pos_;
                out_.spans.push_back({SpanKind::Literal, begin, pos_, quote});
                return;
            }
            if (c == '\n') break;
            ++pos_;
        }
        warn("unterminated string literal");
        out_.spans.push_back({SpanKind::Literal, begin, pos_, quote});
    }

    bool starts_with_triple(std::size_t from) const {
        const char q = src_[from];
        return from + 2 < src_.size() && src_[from + 1] == q && src_[from + 2] == q;
    }

    void scan_delimited_multiline(std::size_t begin, std::string_view close,
                                  char quote, const char* warn_msg,
                                  SpanKind kind = SpanKind::Literal) {
        pos_ += close.size();
        while (pos_ < src_.size()) {
            if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) {
                if (src_[pos_ + 1] == '\n') ++line_;
                pos_ += 2;
                continue;
            }
            if (starts_with(close, pos_)) {
                pos_ += close.size();
                out_.spans.push_back({kind, begin, pos_, quote});
                return;
            }
            if (src_[pos_] == '\n') ++line_;
            ++pos_;
        }
        warn(warn_msg);
        pos_ = src_.size();
        out_.spans.push_back({kind, begin, pos_, quote});
    }

    bool at_statement_start(std::size_t begin) const {
        std::size_t i = begin;
        while (i > 0) {
            const char c = src_[i - 1];
            if (c == '\n') return true;
            if (!is_hspace(static_cast<unsigned char>(c))) return false;
            --i;
        }
        return true;  // start of file
    }

    void scan_python_triple(std::size_t begin) {
        const char q = src_[pos_];
        const std::string close(3, q);
        const bool docstring = at_statement_start(begin);
        scan_delimited_multiline(begin, close, q,
                                 "unterminated triple-quoted string",
                                 docstring ? SpanKind::Comment : SpanKind::Literal);
    }

    // C# @"...", $"...", @$"..." / $@"...". Returns false when '@'/'$' does
    // not introduce a string (e.g. @identifier).
    bool scan_csharp_prefixed() {
        const std::size_t begin = pos_;
        std::size_t i = pos_;
        bool verbatim = false;
        while (i < src_.size() && (src_[i] == '@' || src_[i] == '$')) {
            if (src_[i] == '@') verbatim = true;
            ++i;
        }
        if (i >= src_.size() || src_[i] != '"') return false;
        if (!verbatim) {
            pos_ = i;
            scan_string(begin);
            return true;
        }
        pos_ = i + 1;
        while (pos_ < src_.size()) {
            if (src_[pos_] == '"') {
                if (at(1) == '"') {
                    pos_ += 2;  // doubled quote escape
                    continue;
                }
                ++pos_;
                out_.spans.push_back({SpanKind::Literal, begin, pos_, '"'});
                return true;
            }
            if (src_[pos_] == '\n') ++line_;
            ++pos_;
        }
        warn("unterminated verbatim string");
        out_.spans.push_back({SpanKind::Literal, begin, pos_, '"'});
        return true;
    }

    void scan_cpp_raw(std::size_t begin) {
        // R"delim( ... )delim"
        ++pos_;  // past the quote
        std::string delim;
        while (pos_ < src_.size() && src_[pos_] != '(' && src_[pos_] != '\n' &&
               delim.size() <= 16) {
            delim += src_[pos_++];
        }
        if (pos_ >= src_.size() || src_[pos_] != '(') {
            warn("malformed raw string literal");
            out_.spans.push_back({SpanKind::Literal, begin, pos_, '"'});
            return;
        }
        const std::string close = ")" + delim + "\"";
        const auto end = src_.find(close, pos_);
        if (end == std::string_view::npos) {
            warn("unterminated raw string literal");
            count_lines(begin, src_.size());
            pos_ = src_.size();
        } else {
            count_lines(begin, end + close.size());
            pos_ = end + close.size();
        }
        out_.spans.push_back({SpanKind::Literal, begin, pos_, '"'});
    }

    bool is_string_prefix(std::string_view ident) const {
        switch (lang_) {
            case LanguageId::C:
                return ident == "L" || ident == "u" || ident == "U" || ident == "u8";
            case LanguageId::Cpp:
                return ident == "L" || ident == "u" || ident == "U" ||
                       ident == "u8" || ident == "R" || ident == "LR" ||
                       ident == "uR" || ident == "UR" || ident == "u8R";
            case LanguageId::Python: {
                if (ident.empty() || ident.size() > 2) return false;
                return std::all_of(ident.begin(), ident.end(), [](char c) {
                    const char l = static_cast<char>(std::tolower(
                        static_cast<unsigned char>(c)));
                    return l == 'r' || l == 'b' || l == 'u' || l == 'f';
                });
            }
            default:
                return false;
        }
    }

    void scan_identifier_maybe_prefix() {
        const std::size_t begin = pos_;
        while (pos_ < src_.size() &&
               is_ident_char(static_cast<unsigned char>(src_[pos_]))) {
            ++pos_;
        }
        const std::string_view ident = src_.substr(begin, pos_ - begin);
        const char next = at();
        if ((next == '"' || next == '\'') && is_string_prefix(ident)) {
            if (lang_ == LanguageId::Cpp && ident.back() == 'R' && next == '"') {
                scan_cpp_raw(begin);
                return;
            }
            if (lang_ == LanguageId::Python && starts_with_triple(pos_)) {
                // Prefixed docstrings are rare; position decides as usual.
                scan_python_triple(begin);
                return;
            }
            scan_string_with_prefix(begin, next);
        }
    }

    void scan_string_with_prefix(std::size_t begin, char quote) {
        ++pos_;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '\\' && pos_ + 1 < src_.size()) {
                pos_ += 2;
                continue;
            }
            if (c == quote) {
                ++pos_;
                out_.spans.push_back({SpanKind::Literal, begin, pos_, quote});
                return;
            }
            if (c == '\n') break;
            ++pos_;
        }
        warn("unterminated string literal");
        out_.spans.push_back({SpanKind::Literal, begin, pos_, quote});
    }

    // Numbers are skipped so C++ digit separators (1'000) and suffixes never
    // look like literal openers.
    void skip_number() {
        bool seen_exp = false;
        ++pos_;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
                if (!seen_exp && (c == 'e' || c == 'E' || c == 'p' || c == 'P') &&
                    (at(1) == '+' || at(1) == '-')) {
                    seen_exp = true;
                    pos_ += 2;
                    continue;
                }
                ++pos_;
                continue;
            }
            if (c == '.' && is_digit(static_cast<unsigned char>(at(1)))) {
                ++pos_;
                continue;
            }
            if (c == '\'' && is_c_family(lang_) && lang_ != LanguageId::Java &&
                lang_ != LanguageId::CSharp &&
                std::isalnum(static_cast<unsigned char>(at(1)))) {
                pos_ += 2;  // C/C++ digit separator
                continue;
            }
            break;
        }
    }

    std::string_view src_;
    LanguageId lang_;
    std::size_t pos_ = 0;
    int line_ = 1;
    ScanResult out_;
};

ScanResult scan(std::string_view code, LanguageId lang) {
    return Scanner(code, lang).run();
}

// ---------------------------------------------------------------------------
// Keyword and operator tables.

using StringSet = std::unordered_set<std::string_view>;

const StringSet& keywords(LanguageId lang) {
    static const StringSet c = {
        "auto", "break", "case", "char", "const", "continue", "default", "do",
        "double", "else", "enum", "extern", "float", "for", "goto", "if",
        "inline", "int", "long", "register", "restrict", "return", "short",
        "signed", "sizeof", "static", "struct", "switch", "typedef", "union",
        "unsigned", "void", "volatile", "while", "_Bool", "_Complex",
        "_Generic", "_Noreturn", "_Static_assert", "_Thread_local",
        "_Alignas", "_Alignof", "_Atomic"};
    static const StringSet cpp = [] {
        StringSet s = c;
        for (const char* k :
             {"alignas", "alignof", "and", "and_eq", "asm", "bitand", "bitor",
              "bool", "catch", "char8_t", "char16_t", "char32_t", "class",
              "compl", "concept", "consteval", "constexpr", "constinit",
              "const_cast", "co_await", "co_return", "co_yield", "decltype",
              "delete", "dynamic_cast", "explicit", "export", "false",
              "friend", "mutable", "namespace", "new", "noexcept", "not",
              "not_eq", "nullptr", "operator", "or", "or_eq", "private",
              "protected", "public", "reinterpret_cast", "requires",
              "static_assert", "static_cast", "template", "this",
              "thread_local", "throw", "true", "try", "typeid", "typename",
              "using", "virtual", "wchar_t", "xor", "xor_eq"}) {
            s.insert(k);
        }
        return s;
    }();
    static const StringSet csharp = {
        "abstract", "as", "base", "bool", "break", "byte", "case", "catch",
        "char", "checked", "class", "const", "continue", "decimal", "default",
        "delegate", "do", "double", "else", "enum", "event", "explicit",
        "extern", "false", "finally", "fixed", "float", "for", "foreach",
        "goto", "if", "implicit", "in", "int", "interface", "internal", "is",
        "lock", "long", "namespace", "new", "null", "object", "operator",
        "out", "override", "params", "private", "protected", "public",
        "readonly", "ref", "return", "sbyte", "sealed", "short", "sizeof",
        "stackalloc", "static", "string", "struct", "switch", "this", "throw",
        "true", "try", "typeof", "uint", "ulong", "unchecked", "unsafe",
        "ushort", "using", "virtual", "void", "volatile", "while"};
    static const StringSet python = {
        "False", "None", "True", "and", "as", "assert", "async", "await",
        "break", "class", "continue", "def", "del", "elif", "else", "except",
        "finally", "for", "from", "global", "if", "import", "in", "is",
        "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try",
        "while", "with", "yield"};
    static const StringSet java = {
        "abstract", "assert", "boolean", "break", "byte", "case", "catch",
        "char", "class", "const", "continue", "default", "do", "double",
        "else", "enum", "extends", "final", "finally", "float", "for", "goto",
        "if", "implements", "import", "instanceof", "int", "interface",
        "long", "native", "new", "package", "private", "protected", "public",
        "return", "short", "static", "strictfp", "super", "switch",
        "synchronized", "this", "throw", "throws", "transient", "try", "void",
        "volatile", "while", "true", "false", "null"};
    switch (lang) {
        case LanguageId::C: return c;
        case LanguageId::Cpp: return cpp;
        case LanguageId::CSharp: return csharp;
        case LanguageId::Python: return python;
        case LanguageId::Java: return java;
    }
    return c;
}

const std::vector<std::string_view>& operator_table(LanguageId lang) {
    // Longest first so maximal munch falls out of a linear probe.
    static const std::vector<std::string_view> c = {
        ">>=", "<<=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==",
        "!=", "&&", "||", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
        "##"};
    static const std::vector<std::string_view> cpp = {
        "<=>", ">>=", "<<=", "...", "->*", "::", "->", "++", "--", "<<",
        ">>", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=", "/=",
        "%=", "&=", "|=", "^=", ".*", "##"};
    static const std::vector<std::string_view> csharp = {
        "?\?=", ">>=", "<<=", "=>", "?\?", "?.", "::", "->", "++", "--", "<<",
        ">>", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=", "/=",
        "%=", "&=", "|=", "^="};
    static const std::vector<std::string_view> python = {
        "**=", "//=", ">>=", "<<=", "**", "//", "<<", ">>", "<=", ">=",
        "==", "!=", "->", ":=", "+=", "-=", "*=", "/=", "%=", "&=", "|=",
        "^=", "@="};
    static const std::vector<std::string_view> java = {
        ">>>=", ">>=", "<<=", ">>>", "::", "->", "++", "--", "<<", ">>",
        "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=", "/=", "%=",
        "&=", "|=", "^="};
    switch (lang) {
        case LanguageId::C: return c;
        case LanguageId::Cpp: return cpp;
        case LanguageId::CSharp: return csharp;
        case LanguageId::Python: return python;
        case LanguageId::Java: return java;
    }
    return c;
}

constexpr std::string_view kPunctChars = "()[]{},;:.";
constexpr std::string_view kOperatorChars = "+-*/%<>=!&|^~?@#\\";

}  // namespace

std::string_view token_kind_name(TokenKind kind) {
    switch (kind) {
        case TokenKind::Identifier: return "identifier";
        case TokenKind::Keyword: return "keyword";
        case TokenKind::Number: return "number";
        case TokenKind::String: return "string";
        case TokenKind::Operator: return "operator";
        case TokenKind::Punctuation: return "punctuation";
    }
    return "?";
}

NormalizedCode normalize(std::string_view code, LanguageId lang) {
    ScanResult scanned = scan(code, lang);
    NormalizedCode out;
    out.warnings = scanned.warnings;

    std::string pending;       // current output line before collapsing
    int pending_origin = 0;    // input line where the output line started
    int input_line = 1;
    std::size_t span_idx = 0;

    const auto flush_line = [&] {
        // Collapse whitespace runs to one space, drop trailing whitespace.
        std::string collapsed;
        collapsed.reserve(pending.size());
        bool in_run = false;
        for (const char c : pending) {
            if (is_hspace(static_cast<unsigned char>(c))) {
                in_run = true;
                continue;
            }
            if (in_run) collapsed += ' ';
            in_run = false;
            collapsed += c;
        }
        pending.clear();
        if (!collapsed.empty() &&
            collapsed.find_first_not_of(' ') != std::string::npos) {
            out.text += collapsed;
            out.text += '\n';
            out.line_origin.push_back(pending_origin);
        }
        pending_origin = 0;
    };

    std::size_t i = 0;
    while (i < code.size()) {
        if (span_idx < scanned.spans.size() && scanned.spans[span_idx].begin == i) {
            const Span& span = scanned.spans[span_idx];
            if (span.kind == SpanKind::Comment) {
                ++out.removed_comments;
                // Keep the comment's newlines so line structure survives.
                for (std::size_t j = span.begin; j < span.end; ++j) {
                    if (code[j] == '\n') {
                        flush_line();
                        ++input_line;
                    }
                }
            } else {
                const std::string replacement = std::string(1, span.quote) + " " +
                                                std::string(1, span.quote);
                const std::string_view original =
                    code.substr(span.begin, span.end - span.begin);
                if (original != replacement) ++out.collapsed_literals;
                if (pending_origin == 0) pending_origin = input_line;
                pending += replacement;
                for (std::size_t j = span.begin; j < span.end; ++j) {
                    if (code[j] == '\n') ++input_line;
                }
            }
            i = span.end;
            ++span_idx;
            continue;
        }
        const char c = code[i];
        if (c == '\n') {
            flush_line();
            ++input_line;
        } else {
            if (pending_origin == 0 && !is_hspace(static_cast<unsigned char>(c))) {
                pending_origin = input_line;
            }
            pending += c;
        }
        ++i;
    }
    flush_line();
    return out;
}

std::string strip_comments(std::string_view code, LanguageId lang) {
    ScanResult scanned = scan(code, lang);
    std::string out(code);
    for (const Span& span : scanned.spans) {
        if (span.kind != SpanKind::Comment) continue;
        for (std::size_t i = span.begin; i < span.end; ++i) {
            if (out[i] != '\n') out[i] = ' ';
        }
    }
    return out;
}

TokenStream tokenize(std::string_view code, LanguageId lang) {
    TokenStream out;
    const auto& kw = keywords(lang);
    const auto& ops = operator_table(lang);
    std::size_t i = 0;
    int line = 1;

    const auto push = [&](TokenKind kind, std::size_t begin, std::size_t end) {
        out.tokens.push_back({kind, std::string(code.substr(begin, end - begin)), line});
    };

    while (i < code.size()) {
        const char c = code[i];
        if (c == '\n') {
            ++line;
            ++i;
            continue;
        }
        if (is_hspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (is_ident_start(static_cast<unsigned char>(c))) {
            const std::size_t begin = i;
            while (i < code.size() &&
                   is_ident_char(static_cast<unsigned char>(code[i]))) {
                ++i;
            }
            const std::string_view lexeme = code.substr(begin, i - begin);
            push(kw.count(lexeme) ? TokenKind::Keyword : TokenKind::Identifier,
                 begin, i);
            continue;
        }
        if (is_digit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < code.size() &&
             is_digit(static_cast<unsigned char>(code[i + 1])))) {
            const std::size_t begin = i;
            ++i;
            bool is_hex = false;
            if (c == '0' && i < code.size() &&
                (code[i] == 'x' || code[i] == 'X' || code[i] == 'b' ||
                 code[i] == 'B' || code[i] == 'o' || code[i] == 'O')) {
                is_hex = (code[i] == 'x' || code[i] == 'X');
                ++i;
            }
            const auto digit_ok = [&](char d) {
                if (is_digit(static_cast<unsigned char>(d)) || d == '_') return true;
                if (is_hex) return std::isxdigit(static_cast<unsigned char>(d)) != 0;
                return false;
            };
            while (i < code.size()) {
                const char d = code[i];
                if (digit_ok(d)) {
                    ++i;
                    continue;
                }
                if (d == '.' && i + 1 < code.size() &&
                    is_digit(static_cast<unsigned char>(code[i + 1]))) {
                    ++i;
                    continue;
                }
                if (d == '\'' &&
                    (lang == LanguageId::C || lang == LanguageId::Cpp) &&
                    i + 1 < code.size() &&
                    std::isalnum(static_cast<unsigned char>(code[i + 1]))) {
                    ++i;  // digit separator
                    continue;
                }
                if ((d == 'e' || d == 'E' || (is_hex && (d == 'p' || d == 'P'))) &&
                    i + 1 < code.size() &&
                    (is_digit(static_cast<unsigned char>(code[i + 1])) ||
                     ((code[i + 1] == '+' || code[i + 1] == '-') &&
                      i + 2 < code.size() &&
                      is_digit(static_cast<unsigned char>(code[i + 2]))))) {
                    i += (code[i + 1] == '+' || code[i + 1] == '-') ? 2 : 1;
                    continue;
                }
                break;
            }
            // Numeric suffixes (u, l, f, d, m, j and combinations).
            int suffix = 0;
            while (i < code.size() && suffix < 3) {
                const char d = static_cast<char>(
                    std::tolower(static_cast<unsigned char>(code[i])));
                if (d == 'u' || d == 'l' || d == 'f' || d == 'd' || d == 'm' ||
                    d == 'j') {
                    ++i;
                    ++suffix;
                } else {
                    break;
                }
            }
            push(TokenKind::Number, begin, i);
            continue;
        }
        if (c == '"' || c == '\'') {
            const std::size_t begin = i;
            ++i;
            bool closed = false;
            while (i < code.size()) {
                if (code[i] == '\\' && i + 1 < code.size()) {
                    i += 2;
                    continue;
                }
                if (code[i] == c) {
                    ++i;
                    closed = true;
                    break;
                }
                if (code[i] == '\n') break;
                ++i;
            }
            if (!closed) {
                out.warnings.push_back({line, "unterminated string token"});
            }
            push(TokenKind::String, begin, i);
            continue;
        }
        bool matched = false;
        for (const std::string_view op : ops) {
            if (code.substr(i, op.size()) == op) {
                push(op == "..." ? TokenKind::Punctuation : TokenKind::Operator,
                     i, i + op.size());
                i += op.size();
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (kPunctChars.find(c) != std::string_view::npos) {
            push(TokenKind::Punctuation, i, i + 1);
        } else if (kOperatorChars.find(c) != std::string_view::npos) {
            push(TokenKind::Operator, i, i + 1);
        } else {
            out.warnings.push_back(
                {line, std::string("unrecognized character '") + c + "'"});
            push(TokenKind::Punctuation, i, i + 1);
        }
        ++i;
    }
    return out;
}

int count_sloc(std::string_view code, LanguageId lang) {
    const std::string stripped = strip_comments(code, lang);
    int sloc = 0;
    for (const std::string_view raw_line : text::split_lines(stripped)) {
        const std::string_view line = text::trim(raw_line);
        if (line.empty()) continue;
        const bool structural_only =
            line.find_first_not_of("{}[](); \t") == std::string_view::npos;
        if (!structural_only) ++sloc;
    }
    return sloc;
}

long count_chars(std::string_view code, LanguageId lang) {
    const NormalizedCode norm = normalize(code, lang);
    long chars = 0;
    for (const std::string_view line : text::split_lines(norm.text)) {
        chars += static_cast<long>(text::utf8_scalar_count(line));
    }
    return chars;
}

namespace {

// Decision-point extraction over a token stream of normalized code.
std::vector<DecisionPoint> decision_points(const TokenStream& ts,
                                           const NormalizedCode& norm,
                                           LanguageId lang,
                                           const AnalysisOptions& opts) {
    std::vector<DecisionPoint> points;
    const auto origin_line = [&](int norm_line) {
        const std::size_t idx = static_cast<std::size_t>(norm_line) - 1;
        return idx < norm.line_origin.size() ? norm.line_origin[idx] : norm_line;
    };
    for (const Token& tok : ts.tokens) {
        std::string kind;
        if (tok.kind == TokenKind::Keyword) {
            const std::string& k = tok.lexeme;
            if (lang == LanguageId::Python) {
                if (k == "if" || k == "elif" || k == "while" || k == "for") {
                    kind = k;
                } else if (k == "except" && !opts.strict_paper_cc) {
                    kind = k;
                }
            } else {
                if (k == "if" || k == "while" || k == "for") {
                    kind = k;
                } else if (k == "foreach" && lang == LanguageId::CSharp) {
                    kind = k;
                } else if ((k == "case" || k == "catch") && !opts.strict_paper_cc) {
                    kind = k;
                }
            }
        } else if (tok.kind == TokenKind::Operator && tok.lexeme == "?" &&
                   lang != LanguageId::Python) {
            kind = "ternary";
        }
        if (!kind.empty()) {
            points.push_back({kind, origin_line(tok.line)});
        }
    }
    return points;
}

}  // namespace

ComplexityReport cyclomatic_complexity(std::string_view code, LanguageId lang,
                                       const AnalysisOptions& opts) {
    const NormalizedCode norm = normalize(code, lang);
    const TokenStream ts = tokenize(norm.text, lang);
    ComplexityReport report;
    report.decision_points = decision_points(ts, norm, lang, opts);
    report.cc = 1 + static_cast<int>(report.decision_points.size());
    return report;
}

AnalysisResult analyze(std::string_view code, LanguageId lang,
                       const AnalysisOptions& opts) {
    AnalysisResult result;
    const NormalizedCode norm = normalize(code, lang);
    const TokenStream ts = tokenize(norm.text, lang);

    result.size.sloc = count_sloc(code, lang);
    long chars = 0;
    for (const std::string_view line : text::split_lines(norm.text)) {
        chars += static_cast<long>(text::utf8_scalar_count(line));
    }
    result.size.chars = chars;
    result.size.token_count = static_cast<int>(ts.tokens.size());

    result.complexity.decision_points = decision_points(ts, norm, lang, opts);
    result.complexity.cc =
        1 + static_cast<int>(result.complexity.decision_points.size());

    result.warnings = norm.warnings;
    result.warnings.insert(result.warnings.end(), ts.warnings.begin(),
                           ts.warnings.end());
    return result;
}

}  // namespace refeval::analysis
