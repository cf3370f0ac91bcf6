#include "refeval/csv.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace refeval::csv {

std::vector<std::vector<std::string>> parse(std::string_view content) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    bool row_started = false;

    const auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    const auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
        row_started = false;
    };

    std::size_t i = 0;
    while (i < content.size()) {
        const char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field += '"';
                    i += 2;
                    continue;
                }
                in_quotes = false;
                ++i;
                continue;
            }
            field += c;
            ++i;
            continue;
        }
        switch (c) {
            case '"':
                if (!field_started || field.empty()) {
                    in_quotes = true;
                    field_started = true;
                    row_started = true;
                } else {
                    field += c;  // stray quote mid-field, keep it
                }
                ++i;
                break;
            case ',':
                end_field();
                row_started = true;
                ++i;
                break;
            case '\r':
                if (i + 1 < content.size() && content[i + 1] == '\n') ++i;
                [[fallthrough]];
            case '\n':
                end_row();
                ++i;
                break;
            default:
                field += c;
                field_started = true;
                row_started = true;
                ++i;
                break;
        }
    }
    if (in_quotes) {
        // Unterminated quoted field: take what we have (lenient).
        end_row();
    } else if (row_started || field_started || !row.empty()) {
        end_row();
    }
    return rows;
}

std::vector<std::vector<std::string>> parse_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open CSV file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string escape_field(std::string_view field) {
    const bool needs_quotes =
        field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs_quotes) return std::string(field);
    std::string out;
    out.reserve(field.size() + 2);
    out += '"';
    for (const char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string format_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += escape_field(fields[i]);
    }
    out += '\n';
    return out;
}

}  // namespace refeval::csv
