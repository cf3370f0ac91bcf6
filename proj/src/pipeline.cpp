#include "refeval/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "refeval/analysis.hpp"
#include "refeval/corpus.hpp"
#include "refeval/csv.hpp"
#include "refeval/metrics.hpp"
#include "refeval/prompt.hpp"
#include "refeval/textutil.hpp"

namespace refeval::cli {

namespace fs = std::filesystem;

namespace {

std::string effective_system_instruction(const RunConfig& cfg) {
    return cfg.system_instruction.empty()
               ? prompt::default_system_instruction().text
               : cfg.system_instruction;
}

std::vector<corpus::Sample> load_samples(const RunConfig& cfg,
                                         std::vector<corpus::RowReject>* rejects) {
    auto loaded = corpus::load_corpus_lenient(cfg.corpus_path);
    if (rejects != nullptr) *rejects = std::move(loaded.rejects);
    return std::move(loaded.samples);
}

std::string candidate_id(const std::string& sample_id, int shot, int index) {
    return sample_id + ":" + std::to_string(shot) + ":" + std::to_string(index);
}

}  // namespace

PrepareOutcome run_prepare(const RunConfig& cfg) {
    cfg.validate();
    fs::create_directories(cfg.output_dir);

    std::vector<corpus::RowReject> row_rejects;
    const auto samples = load_samples(cfg, &row_rejects);

    PrepareOutcome outcome;
    for (const auto& reject : row_rejects) {
        outcome.rejects.emplace_back("row " + std::to_string(reject.row),
                                     reject.reason);
    }

    const std::string sys = effective_system_instruction(cfg);
    const ApproxTokenCounter counter;
    std::vector<corpus::ChatRecord> accepted;
    for (const auto& sample : samples) {
        const auto record = corpus::to_chat_record(sample, sys);
        const auto verdict = corpus::validate_record(record, counter,
                                                     cfg.token_cap,
                                                     cfg.role_overhead);
        if (verdict.ok) {
            accepted.push_back(record);
        } else {
            outcome.rejects.emplace_back(
                sample.id, std::string(corpus::reject_reason_name(verdict.reason)));
        }
    }
    outcome.jsonl_path = fs::path(cfg.output_dir) / "dataset.jsonl";
    outcome.accepted =
        static_cast<int>(corpus::write_jsonl(accepted, outcome.jsonl_path));
    return outcome;
}

// ---------------------------------------------------------------------------
// generate

namespace {

nlohmann::ordered_json meta_to_json(const gateway::ProviderMeta& meta) {
    nlohmann::ordered_json j;
    j["request_id"] = meta.request_id;
    j["latency_ms"] = meta.latency_ms;
    j["multi_choice"] = meta.multi_choice;
    return j;
}

}  // namespace

void write_candidates(const std::vector<gateway::CandidateSet>& sets,
                      const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write candidates file: " + path.string());
    }
    for (const auto& set : sets) {
        nlohmann::ordered_json j;
        j["sample_id"] = set.sample_id;
        j["shot_n"] = set.shot_n;
        j["effective_examples"] = set.effective_examples;
        j["digest"] = set.prompt_digest;
        j["config"] = {{"model_name", set.config.model_name},
                       {"temperature", set.config.temperature},
                       {"max_output_tokens", set.config.max_output_tokens},
                       {"k", set.config.k}};
        j["meta"] = meta_to_json(set.meta);
        j["outputs"] = set.raw_outputs;
        out << j.dump() << '\n';
    }
    out.flush();
    if (!out) {
        throw std::runtime_error("short write: " + path.string());
    }
}

std::vector<gateway::CandidateSet> read_candidates(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open candidates file: " + path.string());
    }
    std::vector<gateway::CandidateSet> sets;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(path.string() + ":" +
                                     std::to_string(line_no) + ": " + e.what());
        }
        gateway::CandidateSet set;
        set.sample_id = j.at("sample_id").get<std::string>();
        set.shot_n = j.at("shot_n").get<int>();
        set.effective_examples = j.value("effective_examples", set.shot_n);
        set.prompt_digest = j.value("digest", std::string());
        if (j.contains("config")) {
            const auto& g = j["config"];
            set.config.model_name = g.value("model_name", std::string());
            set.config.temperature = g.value("temperature", 0.3);
            set.config.max_output_tokens = g.value("max_output_tokens", 2048);
            set.config.k = g.value("k", 5);
        }
        if (j.contains("meta")) {
            const auto& m = j["meta"];
            set.meta.request_id = m.value("request_id", std::string());
            set.meta.latency_ms = m.value("latency_ms", 0L);
            set.meta.multi_choice = m.value("multi_choice", true);
        }
        set.raw_outputs = j.at("outputs").get<std::vector<std::string>>();
        sets.push_back(std::move(set));
    }
    return sets;
}

GenerateOutcome run_generate(const RunConfig& cfg) {
    cfg.validate();
    fs::create_directories(cfg.output_dir);

    const auto samples = load_samples(cfg, nullptr);
    if (samples.empty()) {
        throw ConfigError("corpus has no usable samples: " + cfg.corpus_path);
    }

    std::unique_ptr<gateway::Provider> owned_provider;
    gateway::ReplayProvider replay_provider;
    gateway::Provider* provider = nullptr;
    if (cfg.provider.type == "replay") {
        replay_provider = gateway::replay_load(cfg.provider.recording_path);
        provider = &replay_provider;
    } else {
        gateway::HttpProviderOptions options;
        options.endpoint = cfg.provider.endpoint;
        if (const char* key = std::getenv(cfg.provider.api_key_env.c_str())) {
            options.api_key = key;
        }
        options.multi_choice = cfg.provider.multi_choice;
        options.max_attempts = cfg.provider.max_attempts;
        options.backoff_base_s = cfg.provider.backoff_base_s;
        options.backoff_factor = cfg.provider.backoff_factor;
        options.max_inflight = cfg.provider.max_inflight;
        owned_provider = gateway::make_http_provider(std::move(options));
        provider = owned_provider.get();
    }

    GenerateOutcome outcome;
    outcome.candidates_path = fs::path(cfg.output_dir) / "candidates.jsonl";
    outcome.recording_path = fs::path(cfg.output_dir) / "recording.jsonl";

    // Resume cache: completed digests from a previous interrupted run.
    gateway::ReplayProvider cache;
    if (fs::exists(outcome.recording_path)) {
        cache = gateway::replay_load(outcome.recording_path);
    }

    const auto policy = prompt::parse_selection_policy(cfg.example_policy);
    const prompt::SystemInstruction sys{effective_system_instruction(cfg)};

    struct Task {
        const corpus::Sample* sample;
        int shot;
    };
    std::vector<Task> tasks;
    for (const auto& sample : samples) {
        for (const int shot : cfg.shot_list) {
            tasks.push_back({&sample, shot});
        }
    }

    std::vector<std::optional<gateway::CandidateSet>> slots(tasks.size());
    std::vector<std::string> failures(tasks.size());
    std::atomic<std::size_t> next{0};
    std::atomic<int> cache_hits{0};
    std::atomic<int> clamped{0};
    std::mutex append_mutex;
    std::ofstream append_stream(outcome.recording_path,
                                std::ios::binary | std::ios::app);

    const int available = static_cast<int>(samples.size()) - 1;

    const auto worker = [&] {
        while (true) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= tasks.size()) return;
            const Task& task = tasks[idx];
            try {
                const int effective = std::min(task.shot, available);
                if (effective < task.shot) clamped.fetch_add(1);
                auto examples = prompt::select_examples(samples, *task.sample,
                                                        effective, policy,
                                                        cfg.seed);
                const auto p = prompt::build_prompt(*task.sample,
                                                    std::move(examples), sys);
                const auto messages = prompt::render(p);
                const std::string digest =
                    gateway::prompt_digest(messages, cfg.generation);

                gateway::CandidateSet set;
                if (const auto* entry = cache.find(digest)) {
                    if (static_cast<int>(entry->outputs.size()) <
                        cfg.generation.k) {
                        throw gateway::GatewayError(
                            gateway::GatewayErrorKind::ShortResponse,
                            "cached entry too short for digest " + digest);
                    }
                    set.sample_id = task.sample->id;
                    set.shot_n = task.shot;
                    set.effective_examples = static_cast<int>(p.examples.size());
                    set.raw_outputs.assign(
                        entry->outputs.begin(),
                        entry->outputs.begin() + cfg.generation.k);
                    set.meta.request_id = "cache:" + digest;
                    set.meta.latency_ms = 0;
                    set.prompt_digest = digest;
                    set.config = cfg.generation;
                    cache_hits.fetch_add(1);
                } else {
                    set = gateway::generate(p, cfg.generation, *provider,
                                            task.sample->id, task.shot);
                    // Write-through so an interrupted sweep can resume.
                    nlohmann::ordered_json j;
                    j["digest"] = set.prompt_digest;
                    j["config"] = {{"model_name", set.config.model_name},
                                   {"temperature", set.config.temperature},
                                   {"max_output_tokens",
                                    set.config.max_output_tokens},
                                   {"k", set.config.k}};
                    j["outputs"] = set.raw_outputs;
                    std::lock_guard lock(append_mutex);
                    append_stream << j.dump() << '\n';
                    append_stream.flush();
                }
                if (!cfg.prompt_dump_dir.empty()) {
                    fs::create_directories(cfg.prompt_dump_dir);
                    const auto dump = fs::path(cfg.prompt_dump_dir) /
                                      (task.sample->id + "_shot" +
                                       std::to_string(task.shot) + ".txt");
                    std::ofstream out(dump, std::ios::binary);
                    out << prompt::render_text(p);
                }
                slots[idx] = std::move(set);
            } catch (const std::exception& e) {
                failures[idx] = task.sample->id + " shot " +
                                std::to_string(task.shot) + ": " + e.what();
            }
        }
    };

    const int workers = std::max(
        1, std::min<int>(cfg.gen_parallel, static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    append_stream.close();

    std::vector<gateway::CandidateSet> sets;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].has_value()) {
            sets.push_back(std::move(*slots[i]));
        } else if (!failures[i].empty()) {
            outcome.failures.push_back(failures[i]);
        }
    }
    write_candidates(sets, outcome.candidates_path);
    gateway::record_session(sets, outcome.recording_path);
    outcome.sets_written = static_cast<int>(sets.size());
    outcome.cache_hits = cache_hits.load();
    outcome.clamped_sets = clamped.load();
    return outcome;
}

// ---------------------------------------------------------------------------
// evaluate

namespace {

std::map<std::string, bool> load_overrides(const std::string& path) {
    std::map<std::string, bool> overrides;
    if (path.empty()) return overrides;
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open override file: " + path);
    }
    nlohmann::json j;
    in >> j;
    for (const auto& [id, value] : j.items()) {
        overrides[id] = value.get<bool>();
    }
    return overrides;
}

}  // namespace

EvaluateOutcome run_evaluate(const RunConfig& cfg,
                             const fs::path& candidates_path) {
    cfg.validate();
    fs::create_directories(cfg.output_dir);

    const auto samples = load_samples(cfg, nullptr);
    std::map<std::string, const corpus::Sample*> by_id;
    for (const auto& s : samples) by_id.emplace(s.id, &s);

    const auto sets = read_candidates(candidates_path);
    const auto overrides = load_overrides(cfg.override_file);

    struct Item {
        const gateway::CandidateSet* set;
        const corpus::Sample* sample;
        int index;
        std::string code;  // extracted candidate code
    };
    std::vector<Item> items;
    EvaluateOutcome outcome;
    for (const auto& set : sets) {
        const auto it = by_id.find(set.sample_id);
        if (it == by_id.end()) {
            outcome.notes.push_back("candidate set for unknown sample " +
                                    set.sample_id + "; skipped");
            continue;
        }
        for (std::size_t i = 0; i < set.raw_outputs.size(); ++i) {
            Item item{&set, it->second, static_cast<int>(i),
                      gateway::extract_code(set.raw_outputs[i],
                                            it->second->language)};
            items.push_back(std::move(item));
        }
    }

    // Compile leg: real toolchains or the lexical heuristic.
    std::map<std::string, compiler::CompileVerdict> verdicts;
    if (cfg.skip_compile) {
        for (const auto& item : items) {
            verdicts.emplace(
                candidate_id(item.set->sample_id, item.set->shot_n, item.index),
                compiler::heuristic_verdict(item.code, item.sample->language));
        }
    } else {
        std::vector<compiler::CompileJob> jobs;
        jobs.reserve(items.size());
        for (const auto& item : items) {
            jobs.push_back({candidate_id(item.set->sample_id, item.set->shot_n,
                                         item.index),
                            item.code, item.sample->language});
        }
        const int parallelism =
            cfg.compile_parallel > 0
                ? cfg.compile_parallel
                : std::max(1, static_cast<int>(
                                  std::thread::hardware_concurrency()));
        verdicts = compiler::compile_batch(jobs, cfg.toolchains, parallelism);
    }

    const analysis::AnalysisOptions analysis_opts{cfg.cc_strict_paper};
    std::vector<report::MetricRecord> records;
    records.reserve(items.size());
    for (const auto& item : items) {
        const std::string id =
            candidate_id(item.set->sample_id, item.set->shot_n, item.index);
        report::MetricRecord r;
        r.sample_id = item.set->sample_id;
        r.language = item.sample->language;
        r.shot_n = item.set->shot_n;
        r.candidate_index = item.index;
        r.compile = verdicts.at(id);

        const auto analysis_result =
            analysis::analyze(item.code, item.sample->language, analysis_opts);
        r.size = analysis_result.size;
        r.complexity = analysis_result.complexity;

        r.distance = metrics::levenshtein(item.sample->complex_code, item.code);
        const auto sim = metrics::similarity_from_distance(r.distance);
        r.similarity = sim.value;
        r.similarity_degenerate = sim.degenerate;

        // Correctness label: override > script > compile verdict.
        const auto ov = overrides.find(id);
        if (ov != overrides.end()) {
            r.correct = ov->second;
            r.correct_source = "override";
        } else if (!cfg.correctness_script.empty()) {
            compiler::ToolchainSpec script_spec{
                item.sample->language,
                {cfg.correctness_script, std::string(fence_tag(r.language)),
                 r.sample_id, "{src}"},
                30.0};
            const auto verdict =
                compiler::compile_one(item.code, r.language, script_spec);
            if (verdict.status == compiler::CompileStatus::ToolMissing) {
                r.correct = std::nullopt;
                r.correct_source = "script";
            } else {
                r.correct = verdict.status == compiler::CompileStatus::Pass;
                r.correct_source = "script";
            }
        } else {
            switch (r.compile.status) {
                case compiler::CompileStatus::Pass:
                    r.correct = true;
                    break;
                case compiler::CompileStatus::Fail:
                case compiler::CompileStatus::Timeout:
                    r.correct = false;
                    break;
                case compiler::CompileStatus::ToolMissing:
                    r.correct = std::nullopt;
                    break;
            }
            r.correct_source = r.compile.heuristic ? "heuristic" : "compile";
        }
        if (r.compile.status == compiler::CompileStatus::ToolMissing) {
            ++outcome.tool_missing[r.language];
        }
        records.push_back(std::move(r));
    }

    outcome.records_path = fs::path(cfg.output_dir) / "records.jsonl";
    report::write_records(records, outcome.records_path);
    outcome.records_written = static_cast<int>(records.size());
    return outcome;
}

ReportOutcome run_report(const RunConfig& cfg, const fs::path& records_path) {
    cfg.validate();
    const auto records = report::read_records(records_path);
    if (records.empty()) {
        throw std::runtime_error("no records to report: " +
                                 records_path.string());
    }

    ReportOutcome outcome;
    const report::AggregateOptions opts{cfg.sample_std, cfg.compiled_only};
    const auto aggregates = report::aggregate(records, report::GroupBy::LanguageShot,
                                              opts, &outcome.warnings);

    std::vector<int> ks;
    for (int k = 1; k <= cfg.generation.k; ++k) ks.push_back(k);
    const auto tallies = report::correctness_tallies(records);
    const auto table = report::correctness_table(tallies, ks);
    const auto pass_k = report::pass_at_k_table(records, ks);

    outcome.report_dir =
        fs::path(cfg.output_dir) / "reports" / run_id(cfg);
    outcome.files =
        report::emit(aggregates, table, pass_k, records, outcome.report_dir);
    return outcome;
}

std::string analyze_file_json(const fs::path& file, LanguageId lang,
                              bool strict_paper_cc) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open file: " + file.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const auto result = analysis::analyze(buf.str(), lang,
                                          {strict_paper_cc});
    nlohmann::ordered_json j;
    j["file"] = file.string();
    j["language"] = std::string(fence_tag(lang));
    j["size"] = {{"sloc", result.size.sloc},
                 {"chars", result.size.chars},
                 {"tokens", result.size.token_count}};
    nlohmann::ordered_json cc;
    cc["cc"] = result.complexity.cc;
    auto& dps = cc["decision_points"] = nlohmann::ordered_json::array();
    for (const auto& dp : result.complexity.decision_points) {
        dps.push_back({{"kind", dp.kind}, {"line", dp.line}});
    }
    j["cc"] = std::move(cc);
    auto& warnings = j["warnings"] = nlohmann::ordered_json::array();
    for (const auto& w : result.warnings) {
        warnings.push_back({{"line", w.line}, {"message", w.message}});
    }
    return j.dump(2) + "\n";
}

}  // namespace refeval::cli
