#include "refeval/corpus.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "refeval/csv.hpp"
#include "refeval/textutil.hpp"

namespace refeval::corpus {

namespace {

constexpr const char* kRequiredColumns[] = {"language", "instruction",
                                            "complex_code", "refactored_code"};

struct Header {
    std::map<std::string, std::size_t> index;

    std::size_t at(const std::string& name) const { return index.at(name); }
    bool has(const std::string& name) const { return index.count(name) > 0; }
};

Header read_header(const std::vector<std::string>& row,
                   const std::filesystem::path& path) {
    Header header;
    for (std::size_t i = 0; i < row.size(); ++i) {
        header.index.emplace(std::string(text::trim(row[i])), i);
    }
    for (const char* col : kRequiredColumns) {
        if (!header.has(col)) {
            throw CorpusError(CorpusErrorKind::MissingColumn,
                              "corpus " + path.string() +
                                  ": missing required column '" + col + "'");
        }
    }
    return header;
}

std::string cell(const std::vector<std::string>& row, std::size_t idx) {
    return idx < row.size() ? row[idx] : std::string();
}

std::string fenced(std::string_view code, LanguageId lang) {
    std::string out = "```";
    out += fence_tag(lang);
    out += '\n';
    out += code;
    if (out.empty() || out.back() != '\n') out += '\n';
    out += "```";
    return out;
}

// Builds a Sample from one data row or explains why it cannot.
struct RowOutcome {
    bool ok = false;
    Sample sample;
    std::string error;
};

RowOutcome make_sample(const Header& header, const std::vector<std::string>& row,
                       int data_row) {
    RowOutcome out;
    const std::string lang_text = cell(row, header.at("language"));
    const auto lang = parse_language(text::trim(lang_text));
    if (!lang) {
        out.error = "unknown language '" + lang_text + "'";
        return out;
    }
    Sample s;
    s.language = *lang;
    s.instruction = cell(row, header.at("instruction"));
    s.complex_code = cell(row, header.at("complex_code"));
    s.refactored_code = cell(row, header.at("refactored_code"));
    for (const auto& [name, value] :
         std::initializer_list<std::pair<const char*, const std::string*>>{
             {"instruction", &s.instruction},
             {"complex_code", &s.complex_code},
             {"refactored_code", &s.refactored_code}}) {
        if (text::trim(*value).empty()) {
            out.error = std::string(name) + " is empty";
            return out;
        }
    }
    if (header.has("id")) s.id = std::string(text::trim(cell(row, header.at("id"))));
    if (s.id.empty()) {
        s.id = std::string(fence_tag(*lang)) + "-" + std::to_string(data_row);
    }
    out.ok = true;
    out.sample = std::move(s);
    return out;
}

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) {
        throw CorpusError(CorpusErrorKind::MissingFile,
                          "corpus file not found: " + path.string());
    }
    auto rows = csv::parse_file(path);
    if (rows.empty()) {
        throw CorpusError(CorpusErrorKind::EmptyFile,
                          "corpus file is empty: " + path.string());
    }
    return rows;
}

}  // namespace

std::string_view reject_reason_name(RejectReason reason) {
    switch (reason) {
        case RejectReason::None: return "None";
        case RejectReason::TooLong: return "TooLong";
        case RejectReason::MissingField: return "MissingField";
        case RejectReason::BadRoleOrder: return "BadRoleOrder";
    }
    return "?";
}

std::vector<Sample> load_corpus(const std::filesystem::path& path) {
    const auto rows = read_rows(path);
    const Header header = read_header(rows[0], path);
    std::vector<Sample> samples;
    samples.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const int data_row = static_cast<int>(r);
        auto outcome = make_sample(header, rows[r], data_row);
        if (!outcome.ok) {
            throw CorpusError(CorpusErrorKind::BadRow,
                              "corpus row " + std::to_string(data_row) + ": " +
                                  outcome.error);
        }
        samples.push_back(std::move(outcome.sample));
    }
    return samples;
}

LenientLoadResult load_corpus_lenient(const std::filesystem::path& path) {
    const auto rows = read_rows(path);
    const Header header = read_header(rows[0], path);
    LenientLoadResult result;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const int data_row = static_cast<int>(r);
        auto outcome = make_sample(header, rows[r], data_row);
        if (outcome.ok) {
            result.samples.push_back(std::move(outcome.sample));
        } else {
            result.rejects.push_back({data_row, std::move(outcome.error)});
        }
    }
    return result;
}

ChatRecord to_chat_record(const Sample& s, const std::string& system_instruction) {
    ChatRecord record;
    record.messages.push_back({chat::Role::System, system_instruction});
    record.messages.push_back(
        {chat::Role::User, s.instruction + "\n\n" + fenced(s.complex_code, s.language)});
    record.messages.push_back(
        {chat::Role::Assistant, fenced(s.refactored_code, s.language)});
    return record;
}

ValidationVerdict validate_record(const ChatRecord& r, const TokenCounter& counter,
                                  std::size_t cap, std::size_t role_overhead) {
    constexpr chat::Role expected[] = {chat::Role::System, chat::Role::User,
                                       chat::Role::Assistant};
    if (r.messages.size() != 3) {
        return ValidationVerdict::reject(RejectReason::BadRoleOrder);
    }
    for (std::size_t i = 0; i < 3; ++i) {
        if (r.messages[i].role != expected[i]) {
            return ValidationVerdict::reject(RejectReason::BadRoleOrder);
        }
    }
    for (const auto& m : r.messages) {
        if (text::trim(m.content).empty()) {
            return ValidationVerdict::reject(RejectReason::MissingField);
        }
    }
    std::size_t total = role_overhead * r.messages.size();
    for (const auto& m : r.messages) total += counter.count(m.content);
    if (total > cap) {
        return ValidationVerdict::reject(RejectReason::TooLong);
    }
    return ValidationVerdict::accept();
}

std::size_t write_jsonl(const std::vector<ChatRecord>& records,
                        const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw CorpusError(CorpusErrorKind::WriteFailed,
                          "cannot write JSONL file: " + path.string());
    }
    for (const auto& record : records) {
        nlohmann::ordered_json obj;
        auto& messages = obj["messages"] = nlohmann::ordered_json::array();
        for (const auto& m : record.messages) {
            nlohmann::ordered_json msg;
            msg["role"] = std::string(chat::role_name(m.role));
            msg["content"] = m.content;
            messages.push_back(std::move(msg));
        }
        out << obj.dump() << '\n';
    }
    out.flush();
    if (!out) {
        throw CorpusError(CorpusErrorKind::WriteFailed,
                          "short write to JSONL file: " + path.string());
    }
    return records.size();
}

std::vector<ChatRecord> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CorpusError(CorpusErrorKind::MissingFile,
                          "cannot open JSONL file: " + path.string());
    }
    std::vector<ChatRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw CorpusError(CorpusErrorKind::ParseFailed,
                              path.string() + ":" + std::to_string(line_no) +
                                  ": " + e.what());
        }
        ChatRecord record;
        for (const auto& msg : obj.at("messages")) {
            const auto role = chat::parse_role(msg.at("role").get<std::string>());
            if (!role) {
                throw CorpusError(CorpusErrorKind::ParseFailed,
                                  path.string() + ":" + std::to_string(line_no) +
                                      ": unknown role");
            }
            record.messages.push_back({*role, msg.at("content").get<std::string>()});
        }
        records.push_back(std::move(record));
    }
    return records;
}

}  // namespace refeval::corpus
