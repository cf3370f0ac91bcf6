#include "refeval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "refeval/csv.hpp"
#include "refeval/textutil.hpp"

namespace refeval::report {

namespace {

std::string fmt2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

const std::vector<std::string>& metric_names() {
    // Alphabetical; fixed column order in aggregates.csv.
    static const std::vector<std::string> names = {
        "cc", "chars", "compilability", "distance", "similarity", "sloc",
        "tokens"};
    return names;
}

AggregateCell make_cell(const std::vector<double>& values, bool sample_std) {
    AggregateCell cell;
    cell.count = static_cast<long>(values.size());
    double sum = 0.0;
    cell.min = values.front();
    cell.max = values.front();
    for (const double v : values) {
        sum += v;
        cell.min = std::min(cell.min, v);
        cell.max = std::max(cell.max, v);
    }
    cell.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (const double v : values) sq += (v - cell.mean) * (v - cell.mean);
    const auto denom = sample_std ? values.size() - 1 : values.size();
    cell.std_dev = denom > 0 ? std::sqrt(sq / static_cast<double>(denom)) : 0.0;
    return cell;
}

GroupKey key_of(const MetricRecord& r, GroupBy group_by) {
    return {r.language, group_by == GroupBy::LanguageShot ? r.shot_n : -1};
}

}  // namespace

std::map<GroupKey, MetricCells> aggregate(const std::vector<MetricRecord>& records,
                                          GroupBy group_by,
                                          const AggregateOptions& opts,
                                          std::vector<std::string>* warnings) {
    struct Bucket {
        std::map<std::string, std::vector<double>> values;
        long pass = 0;
        long fail = 0;
    };
    std::map<GroupKey, Bucket> buckets;
    for (const MetricRecord& r : records) {
        Bucket& b = buckets[key_of(r, group_by)];
        switch (r.compile.status) {
            case compiler::CompileStatus::Pass: ++b.pass; break;
            case compiler::CompileStatus::Fail:
            case compiler::CompileStatus::Timeout: ++b.fail; break;
            case compiler::CompileStatus::ToolMissing: break;
        }
        if (opts.compiled_only &&
            r.compile.status != compiler::CompileStatus::Pass) {
            continue;
        }
        b.values["cc"].push_back(static_cast<double>(r.complexity.cc));
        b.values["chars"].push_back(static_cast<double>(r.size.chars));
        b.values["distance"].push_back(static_cast<double>(r.distance.distance));
        b.values["similarity"].push_back(r.similarity * 100.0);
        b.values["sloc"].push_back(static_cast<double>(r.size.sloc));
        b.values["tokens"].push_back(static_cast<double>(r.size.token_count));
    }

    std::map<GroupKey, MetricCells> out;
    for (const auto& [key, bucket] : buckets) {
        MetricCells cells;
        for (const auto& [name, values] : bucket.values) {
            if (!values.empty()) cells[name] = make_cell(values, opts.sample_std);
        }
        if (bucket.pass + bucket.fail > 0) {
            const double pct =
                metrics::compilability(bucket.pass, bucket.fail);
            cells["compilability"] =
                {pct, 0.0, pct, pct, bucket.pass + bucket.fail};
        }
        if (cells.empty()) {
            if (warnings != nullptr) {
                warnings->push_back(
                    "group " + std::string(language_name(key.language)) +
                    "/shot " + std::to_string(key.shot_n) +
                    " has no usable records; omitted");
            }
            continue;
        }
        out.emplace(key, std::move(cells));
    }
    return out;
}

std::map<GroupKey, std::vector<metrics::CorrectnessTally>> correctness_tallies(
    const std::vector<MetricRecord>& records) {
    std::map<GroupKey, std::map<std::string, metrics::CorrectnessTally>> per_sample;
    for (const MetricRecord& r : records) {
        if (!r.correct.has_value()) continue;
        auto& tally = per_sample[{r.language, r.shot_n}][r.sample_id];
        ++tally.n;
        if (*r.correct) {
            ++tally.c;
        } else {
            ++tally.e;
        }
    }
    std::map<GroupKey, std::vector<metrics::CorrectnessTally>> out;
    for (const auto& [key, samples] : per_sample) {
        for (const auto& [sample_id, tally] : samples) {
            out[key].push_back(tally);
        }
    }
    return out;
}

double mean_correct_at_k(const std::vector<metrics::CorrectnessTally>& tallies,
                         const std::vector<int>& ks) {
    if (tallies.empty() || ks.empty()) {
        throw std::invalid_argument("mean_correct_at_k: nothing to average");
    }
    const int n = tallies.front().n;
    double sum = 0.0;
    long terms = 0;
    for (const auto& tally : tallies) {
        if (tally.n != n) {
            throw std::invalid_argument(
                "inconsistent candidate count across tallies: " +
                std::to_string(tally.n) + " vs " + std::to_string(n));
        }
        for (const int k : ks) {
            sum += metrics::correct_at_k(tally.n, tally.e, k);
            ++terms;
        }
    }
    return sum / static_cast<double>(terms);
}

CorrectnessTable correctness_table(
    const std::map<GroupKey, std::vector<metrics::CorrectnessTally>>& tallies,
    const std::vector<int>& ks) {
    CorrectnessTable table;
    std::set<int> shots;
    std::set<LanguageId> languages;
    int n = -1;
    for (const auto& [key, group] : tallies) {
        shots.insert(key.shot_n);
        languages.insert(key.language);
        for (const auto& tally : group) {
            if (n == -1) n = tally.n;
            if (tally.n != n) {
                throw std::invalid_argument(
                    "inconsistent candidate count across tallies: " +
                    std::to_string(tally.n) + " vs " + std::to_string(n));
            }
        }
    }
    table.shots.assign(shots.begin(), shots.end());
    table.languages.assign(languages.begin(), languages.end());
    for (const auto& [key, group] : tallies) {
        if (!group.empty()) {
            table.cells[key] = mean_correct_at_k(group, ks);
        }
    }
    return table;
}

std::map<GroupKey, std::map<int, double>> pass_at_k_table(
    const std::vector<MetricRecord>& records, const std::vector<int>& ks) {
    const auto tallies = correctness_tallies(records);
    std::map<GroupKey, std::map<int, double>> out;
    for (const auto& [key, group] : tallies) {
        for (const int k : ks) {
            double sum = 0.0;
            long count = 0;
            for (const auto& tally : group) {
                if (k > tally.n) continue;
                sum += metrics::pass_at_k(tally.n, tally.c, k);
                ++count;
            }
            if (count > 0) out[key][k] = sum / static_cast<double>(count);
        }
    }
    return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write report file: " + path.string());
    }
    out << content;
    out.flush();
    if (!out) {
        throw std::runtime_error("short write: " + path.string());
    }
}

std::string shot_label(int shot_n) {
    return shot_n < 0 ? "all" : std::to_string(shot_n);
}

nlohmann::ordered_json record_to_json(const MetricRecord& r) {
    nlohmann::ordered_json j;
    j["sample_id"] = r.sample_id;
    j["language"] = std::string(fence_tag(r.language));
    j["shot_n"] = r.shot_n;
    j["candidate_index"] = r.candidate_index;
    nlohmann::ordered_json compile;
    compile["status"] = std::string(compiler::compile_status_name(r.compile.status));
    compile["heuristic"] = r.compile.heuristic;
    compile["stderr_excerpt"] = r.compile.stderr_excerpt;
    j["compile"] = std::move(compile);
    j["size"] = {{"sloc", r.size.sloc},
                 {"chars", r.size.chars},
                 {"tokens", r.size.token_count}};
    nlohmann::ordered_json cc;
    cc["cc"] = r.complexity.cc;
    auto& dps = cc["decision_points"] = nlohmann::ordered_json::array();
    for (const auto& dp : r.complexity.decision_points) {
        dps.push_back({{"kind", dp.kind}, {"line", dp.line}});
    }
    j["cc"] = std::move(cc);
    j["distance"] = {{"distance", r.distance.distance},
                     {"len_a", r.distance.len_a},
                     {"len_b", r.distance.len_b}};
    j["similarity"] = r.similarity;
    j["similarity_degenerate"] = r.similarity_degenerate;
    if (r.correct.has_value()) {
        j["correct"] = *r.correct;
    } else {
        j["correct"] = nullptr;
    }
    j["correct_source"] = r.correct_source;
    return j;
}

MetricRecord record_from_json(const nlohmann::json& j) {
    MetricRecord r;
    r.sample_id = j.at("sample_id").get<std::string>();
    const auto lang = parse_language(j.at("language").get<std::string>());
    if (!lang) throw std::runtime_error("records.jsonl: unknown language");
    r.language = *lang;
    r.shot_n = j.at("shot_n").get<int>();
    r.candidate_index = j.at("candidate_index").get<int>();
    const auto& compile = j.at("compile");
    const auto status =
        compiler::parse_compile_status(compile.at("status").get<std::string>());
    if (!status) throw std::runtime_error("records.jsonl: unknown compile status");
    r.compile.status = *status;
    r.compile.heuristic = compile.value("heuristic", false);
    r.compile.stderr_excerpt = compile.value("stderr_excerpt", std::string());
    const auto& size = j.at("size");
    r.size.sloc = size.at("sloc").get<int>();
    r.size.chars = size.at("chars").get<long>();
    r.size.token_count = size.at("tokens").get<int>();
    const auto& cc = j.at("cc");
    r.complexity.cc = cc.at("cc").get<int>();
    for (const auto& dp : cc.value("decision_points", nlohmann::json::array())) {
        r.complexity.decision_points.push_back(
            {dp.at("kind").get<std::string>(), dp.at("line").get<int>()});
    }
    const auto& dist = j.at("distance");
    r.distance.distance = dist.at("distance").get<long>();
    r.distance.len_a = dist.at("len_a").get<long>();
    r.distance.len_b = dist.at("len_b").get<long>();
    r.similarity = j.at("similarity").get<double>();
    r.similarity_degenerate = j.value("similarity_degenerate", false);
    if (j.contains("correct") && !j.at("correct").is_null()) {
        r.correct = j.at("correct").get<bool>();
    }
    r.correct_source = j.value("correct_source", std::string());
    return r;
}

}  // namespace

void write_records(const std::vector<MetricRecord>& records,
                   const std::filesystem::path& path) {
    std::string content;
    for (const MetricRecord& r : records) {
        content += record_to_json(r).dump();
        content += '\n';
    }
    write_file(path, content);
}

std::vector<MetricRecord> read_records(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open records file: " + path.string());
    }
    std::vector<MetricRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            records.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + ":" +
                                     std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

std::vector<std::filesystem::path> emit(
    const std::map<GroupKey, MetricCells>& aggregates,
    const CorrectnessTable& correctness,
    const std::map<GroupKey, std::map<int, double>>& pass_k,
    const std::vector<MetricRecord>& records,
    const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> files;

    // aggregates.csv: group keys, then metrics alphabetically as
    // mean,std,min,max.
    {
        std::string content;
        std::vector<std::string> header = {"language", "shot"};
        for (const auto& name : metric_names()) {
            header.push_back(name + "_mean");
            header.push_back(name + "_std");
            header.push_back(name + "_min");
            header.push_back(name + "_max");
        }
        content += csv::format_row(header);
        for (const auto& [key, cells] : aggregates) {
            std::vector<std::string> row = {std::string(language_name(key.language)),
                                            shot_label(key.shot_n)};
            for (const auto& name : metric_names()) {
                const auto it = cells.find(name);
                if (it == cells.end()) {
                    row.insert(row.end(), {"", "", "", ""});
                } else {
                    row.push_back(fmt2(it->second.mean));
                    row.push_back(fmt2(it->second.std_dev));
                    row.push_back(fmt2(it->second.min));
                    row.push_back(fmt2(it->second.max));
                }
            }
            content += csv::format_row(row);
        }
        const auto path = dir / "aggregates.csv";
        write_file(path, content);
        files.push_back(path);
    }

    // aggregates.json: same cells plus the pass@k sweep.
    {
        nlohmann::ordered_json root;
        auto& groups = root["groups"] = nlohmann::ordered_json::array();
        for (const auto& [key, cells] : aggregates) {
            nlohmann::ordered_json g;
            g["language"] = std::string(language_name(key.language));
            g["shot"] = key.shot_n;
            nlohmann::ordered_json metrics_json;
            for (const auto& name : metric_names()) {
                const auto it = cells.find(name);
                if (it == cells.end()) continue;
                metrics_json[name] = {{"mean", round2(it->second.mean)},
                                      {"std", round2(it->second.std_dev)},
                                      {"min", round2(it->second.min)},
                                      {"max", round2(it->second.max)},
                                      {"count", it->second.count}};
            }
            g["metrics"] = std::move(metrics_json);
            const auto pk = pass_k.find(key);
            if (pk != pass_k.end()) {
                nlohmann::ordered_json pk_json;
                for (const auto& [k, v] : pk->second) {
                    pk_json[std::to_string(k)] = round2(v * 100.0);
                }
                g["pass_at_k"] = std::move(pk_json);
            }
            groups.push_back(std::move(g));
        }
        const auto path = dir / "aggregates.json";
        write_file(path, root.dump(2) + "\n");
        files.push_back(path);
    }

    // correctness.csv: rows = shots, columns = languages.
    {
        std::string content;
        std::vector<std::string> header = {"shot"};
        for (const LanguageId lang : correctness.languages) {
            header.push_back(std::string(language_name(lang)));
        }
        content += csv::format_row(header);
        for (const int shot : correctness.shots) {
            std::vector<std::string> row = {shot_label(shot)};
            for (const LanguageId lang : correctness.languages) {
                const auto it = correctness.cells.find({lang, shot});
                row.push_back(it == correctness.cells.end() ? ""
                                                            : fmt2(it->second));
            }
            content += csv::format_row(row);
        }
        const auto path = dir / "correctness.csv";
        write_file(path, content);
        files.push_back(path);
    }

    // heatmap_<metric>.csv: rows = languages, columns = shots.
    {
        std::set<int> shot_set;
        std::set<LanguageId> lang_set;
        for (const auto& [key, cells] : aggregates) {
            if (key.shot_n >= 0) shot_set.insert(key.shot_n);
            lang_set.insert(key.language);
        }
        for (const auto& name : metric_names()) {
            std::string content;
            std::vector<std::string> header = {"language"};
            for (const int shot : shot_set) {
                header.push_back("shot_" + std::to_string(shot));
            }
            content += csv::format_row(header);
            for (const LanguageId lang : lang_set) {
                std::vector<std::string> row = {std::string(language_name(lang))};
                for (const int shot : shot_set) {
                    const auto git = aggregates.find({lang, shot});
                    std::string value;
                    if (git != aggregates.end()) {
                        const auto it = git->second.find(name);
                        if (it != git->second.end()) value = fmt2(it->second.mean);
                    }
                    row.push_back(std::move(value));
                }
                content += csv::format_row(row);
            }
            const auto path = dir / ("heatmap_" + name + ".csv");
            write_file(path, content);
            files.push_back(path);
        }
    }

    {
        const auto path = dir / "records.jsonl";
        write_records(records, path);
        files.push_back(path);
    }
    return files;
}

}  // namespace refeval::report
