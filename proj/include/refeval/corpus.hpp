#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "refeval/chat.hpp"
#include "refeval/language.hpp"
#include "refeval/token_counter.hpp"

namespace refeval::corpus {

/// One corpus row: an instruction, the complex snippet, and its reference
/// refactoring. All three texts are non-empty after trimming.
struct Sample {
    std::string id;
    LanguageId language;
    std::string instruction;
    std::string complex_code;
    std::string refactored_code;
};

/// A fine-tuning style chat record: system, user, assistant, in that order.
struct ChatRecord {
    chat::MessageList messages;

    bool operator==(const ChatRecord&) const = default;
};

enum class RejectReason { None, TooLong, MissingField, BadRoleOrder };

std::string_view reject_reason_name(RejectReason reason);

struct ValidationVerdict {
    bool ok = false;
    RejectReason reason = RejectReason::None;

    static ValidationVerdict accept() { return {true, RejectReason::None}; }
    static ValidationVerdict reject(RejectReason r) { return {false, r}; }
};

enum class CorpusErrorKind {
    MissingFile,
    EmptyFile,
    MissingColumn,
    BadRow,
    WriteFailed,
    ParseFailed,
};

class CorpusError : public std::runtime_error {
  public:
    CorpusError(CorpusErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    CorpusErrorKind kind() const { return kind_; }

  private:
    CorpusErrorKind kind_;
};

/// Required CSV columns: language, instruction, complex_code, refactored_code.
/// An `id` column is optional; absent or empty ids become "<tag>-<row>" with
/// the 1-based data row number. Throws CorpusError; a structurally bad row
/// (unknown language, empty text field) aborts the strict load.
std::vector<Sample> load_corpus(const std::filesystem::path& path);

struct RowReject {
    int row = 0;  // 1-based data row
    std::string reason;
};

struct LenientLoadResult {
    std::vector<Sample> samples;
    std::vector<RowReject> rejects;
};

/// Like load_corpus but collects bad rows instead of throwing on them.
/// File-level problems (missing file, missing column, empty file) still throw.
LenientLoadResult load_corpus_lenient(const std::filesystem::path& path);

/// system = the run's unified instruction, user = instruction plus the
/// fenced complex snippet, assistant = the fenced reference refactoring.
ChatRecord to_chat_record(const Sample& s, const std::string& system_instruction);

/// Token total = sum of per-content counts plus `role_overhead` per message.
ValidationVerdict validate_record(const ChatRecord& r, const TokenCounter& counter,
                                  std::size_t cap = 4096,
                                  std::size_t role_overhead = 4);

/// One JSON object per line, UTF-8, newline-terminated, key order
/// messages -> role -> content. Returns the number of lines written.
std::size_t write_jsonl(const std::vector<ChatRecord>& records,
                        const std::filesystem::path& path);

std::vector<ChatRecord> read_jsonl(const std::filesystem::path& path);

}  // namespace refeval::corpus
