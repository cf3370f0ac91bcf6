// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Criterion 10 drives the installed CLI binary end to end
// over the checked-in replay fixture.

#include <unistd.h>

#include <bit>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../support/minilex.hpp"
#include "refeval/analysis.hpp"
#include "refeval/compile.hpp"
#include "refeval/corpus.hpp"
#include "refeval/csv.hpp"
#include "refeval/gateway.hpp"
#include "refeval/metrics.hpp"
#include "refeval/prompt.hpp"
#include "refeval/token_counter.hpp"

namespace fs = std::filesystem;
using namespace refeval;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
    std::printf("%s: %2d. %s\n", ok ? "PASS" : "FAIL", criterion,
                detail.c_str());
    if (!ok) ++g_failures;
}

const fs::path kSource = fs::path(REFEVAL_SOURCE_DIR);
const fs::path kFixtures = kSource / "tests" / "fixtures";
const fs::path kE2e = kFixtures / "e2e";

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// --------------------------------------------------------------- criterion 1

double pass_oracle(int n, int c, int k) {
    long total = 0;
    long hit = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) != k) continue;
        ++total;
        if ((mask & ((1u << c) - 1u)) != 0) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(total);
}

void criterion_pass_at_k() {
    const auto start = std::chrono::steady_clock::now();
    long checked = 0;
    double worst = 0.0;
    for (int n = 1; n <= 12; ++n) {
        for (int c = 0; c <= n; ++c) {
            for (int k = 1; k <= n; ++k) {
                const double got = metrics::pass_at_k(n, c, k);
                const double want = pass_oracle(n, c, k);
                worst = std::max(worst, std::abs(got - want));
                ++checked;
            }
        }
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "pass@k oracle equivalence: %ld grid points, max error "
                  "%.2e, %.2fs",
                  checked, worst, secs);
    report(1, worst <= 1e-12 && secs < 5.0, buf);
}

// --------------------------------------------------------------- criterion 2

void criterion_correct_at_k() {
    bool exact = true;
    for (int n = 1; n <= 10; ++n) {
        for (int e = 0; e <= n; ++e) {
            for (int k = 1; k <= n; ++k) {
                const double got = metrics::correct_at_k(n, e, k);
                const double want =
                    k <= n - e ? 100.0
                               : 100.0 * static_cast<double>(n - e) /
                                     static_cast<double>(k);
                if (got != want) exact = false;
                // Rational cross-check: got * k == 100 * (n - e) on the
                // ratio branch.
                if (k > n - e &&
                    std::abs(got * k - 100.0 * (n - e)) > 1e-9) {
                    exact = false;
                }
            }
        }
    }
    double sweep = 0.0;
    for (int k = 1; k <= 5; ++k) sweep += metrics::correct_at_k(5, 2, k);
    const bool avg_ok = sweep / 5.0 == 87.0;
    report(2, exact && avg_ok,
           "correct@k exact over the n<=10 grid; (n=5,e=2) sweep averages "
           "87.0");
}

// --------------------------------------------------------------- criterion 3

long lev_oracle(const std::string& a, const std::string& b) {
    std::vector<std::vector<long>> d(a.size() + 1,
                                     std::vector<long>(b.size() + 1, 0));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<long>(i);
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<long>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const long cost = a[i - 1] == b[j - 1] ? 0 : 1;
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                                d[i - 1][j - 1] + cost});
        }
    }
    return d[a.size()][b.size()];
}

std::string random_string(std::mt19937& rng, int max_len) {
    std::uniform_int_distribution<int> len(0, max_len);
    std::uniform_int_distribution<int> ch('a', 'h');
    std::string s;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) s += static_cast<char>(ch(rng));
    return s;
}

void criterion_levenshtein() {
    std::mt19937 rng(1729);
    bool dp_ok = true;
    for (int i = 0; i < 1000; ++i) {
        const std::string a = random_string(rng, 64);
        const std::string b = random_string(rng, 64);
        if (metrics::levenshtein(a, b).distance != lev_oracle(a, b)) {
            dp_ok = false;
        }
    }
    bool axioms_ok = true;
    for (int i = 0; i < 10000; ++i) {
        const std::string a = random_string(rng, 20);
        const std::string b = random_string(rng, 20);
        const std::string c = random_string(rng, 20);
        const long ab = metrics::levenshtein(a, b).distance;
        const long ba = metrics::levenshtein(b, a).distance;
        const long bc = metrics::levenshtein(b, c).distance;
        const long ac = metrics::levenshtein(a, c).distance;
        if (ab != ba) axioms_ok = false;
        if (ac > ab + bc) axioms_ok = false;
        if (metrics::levenshtein(a, a).distance != 0) axioms_ok = false;
        if (ab == 0 && a != b) axioms_ok = false;
    }
    const bool paper_ok =
        metrics::levenshtein("int x+y+z", "int y-z").distance == 3;
    report(3, dp_ok && axioms_ok && paper_ok,
           "levenshtein: 1000-pair DP oracle, 10000-triple axioms, worked "
           "pair = 3");
}

// --------------------------------------------------------------- criterion 4

void criterion_similarity() {
    const auto worked = metrics::similarity("int x+y+z", "int y-z");
    const bool worked_ok = std::abs(worked.value - 0.6667) <= 1e-4;
    std::mt19937 rng(42);
    bool range_ok = true;
    for (int i = 0; i < 2000; ++i) {
        const auto r = metrics::similarity(random_string(rng, 48),
                                           random_string(rng, 48));
        if (r.value < 0.0 || r.value > 1.0) range_ok = false;
    }
    report(4, worked_ok && range_ok,
           "similarity: worked pair = 0.6667 +- 1e-4, fuzzed range within "
           "[0,1]");
}

// --------------------------------------------------------------- criterion 5

struct NormFile {
    fs::path path;
    LanguageId lang;
};

std::vector<NormFile> norm_corpus() {
    const std::map<std::string, LanguageId> dirs = {
        {"c", LanguageId::C},
        {"cpp", LanguageId::Cpp},
        {"csharp", LanguageId::CSharp},
        {"python", LanguageId::Python},
        {"java", LanguageId::Java}};
    std::vector<NormFile> files;
    for (const auto& [dir, lang] : dirs) {
        for (const auto& entry :
             fs::directory_iterator(kFixtures / "normcorpus" / dir)) {
            files.push_back({entry.path(), lang});
        }
    }
    return files;
}

void criterion_normalization() {
    const auto files = norm_corpus();
    bool count_ok = files.size() == 50;
    bool idempotent = true;
    bool invariant = true;
    for (const auto& file : files) {
        const std::string code = slurp(file.path);
        const auto once = analysis::normalize(code, file.lang);
        const auto twice = analysis::normalize(once.text, file.lang);
        if (twice.text != once.text) {
            idempotent = false;
            std::fprintf(stderr, "  not idempotent: %s\n",
                         file.path.string().c_str());
        }

        const long chars = analysis::count_chars(code, file.lang);
        const auto tokens =
            analysis::tokenize(once.text, file.lang).tokens.size();
        const bool python = file.lang == LanguageId::Python;
        for (const std::string& mutated :
             {minilex::insert_comments(code, python),
              minilex::mutate_literals(code, python)}) {
            const long m_chars = analysis::count_chars(mutated, file.lang);
            const auto m_tokens =
                analysis::tokenize(
                    analysis::normalize(mutated, file.lang).text, file.lang)
                    .tokens.size();
            if (m_chars != chars || m_tokens != tokens) {
                invariant = false;
                std::fprintf(stderr,
                             "  count drift: %s (chars %ld->%ld, tokens "
                             "%zu->%zu)\n",
                             file.path.string().c_str(), chars, m_chars,
                             tokens, m_tokens);
            }
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "normalization: idempotent on %zu-file corpus; counts "
                  "invariant under comment/literal mutation",
                  files.size());
    report(5, count_ok && idempotent && invariant, buf);
}

// --------------------------------------------------------------- criterion 6

void criterion_cc_fixtures() {
    const bool straight =
        analysis::cyclomatic_complexity("int f(int x) { return x + 1; }",
                                        LanguageId::C)
            .cc == 1;
    const bool one_if =
        analysis::cyclomatic_complexity(
            "int f(int x) { if (x) return 1; return 0; }", LanguageId::C)
            .cc == 2;
    const std::string mixed =
        "int f(int x) {\n"
        "    if (x > 0) { x--; }\n"
        "    for (int i = 0; i < x; i++) {\n"
        "        switch (i) {\n"
        "            case 0: x += 1; break;\n"
        "            case 1: x += 2; break;\n"
        "            default: break;\n"
        "        }\n"
        "    }\n"
        "    return x;\n"
        "}\n";
    const bool four_points =
        analysis::cyclomatic_complexity(mixed, LanguageId::C).cc == 5;
    const bool in_string =
        analysis::cyclomatic_complexity(
            "const char* s = \"if (x) while (y)\";", LanguageId::C)
            .cc == 1;
    report(6, straight && one_if && four_points && in_string,
           "cc fixtures: straight-line 1, one-if 2, if+for+2case 5, "
           "keyword-in-string uncounted");
}

// --------------------------------------------------------------- criterion 7

void criterion_compilability() {
    const std::string good = "int main(void) { return 0; }\n";
    const std::string bad = "int main(void) { return 0 }\n";
    std::vector<compiler::CompileJob> jobs;
    for (int i = 0; i < 9; ++i) {
        jobs.push_back({"good-" + std::to_string(i), good, LanguageId::C});
    }
    jobs.push_back({"bad", bad, LanguageId::C});
    const std::map<LanguageId, compiler::ToolchainSpec> specs = {
        {LanguageId::C,
         {LanguageId::C, {"cc", "-fsyntax-only", "{src}"}, 10.0}}};

    const auto serial = compiler::compile_batch(jobs, specs, 1);
    const auto parallel = compiler::compile_batch(jobs, specs, 8);
    long pass = 0;
    long fail = 0;
    bool identical = serial.size() == parallel.size();
    for (const auto& [id, v] : serial) {
        if (v.status == compiler::CompileStatus::Pass) ++pass;
        if (v.status == compiler::CompileStatus::Fail) ++fail;
        const auto it = parallel.find(id);
        if (it == parallel.end() || it->second.status != v.status ||
            it->second.stderr_excerpt != v.stderr_excerpt) {
            identical = false;
        }
    }
    bool eq3_ok = false;
    if (pass + fail == 10) {
        eq3_ok = metrics::compilability(pass, fail) == 90.0;
    }

    // Timeout bound: a stalling toolchain is killed within timeout + 1s.
    const compiler::ToolchainSpec stall{
        LanguageId::C, {"sh", "-c", "sleep 30", "{src}"}, 1.0};
    const auto t0 = std::chrono::steady_clock::now();
    const auto verdict = compiler::compile_one(good, LanguageId::C, stall);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    const bool timeout_ok =
        verdict.status == compiler::CompileStatus::Timeout && elapsed <= 2.0;

    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "compilability: 9/1 batch = %.1f%%, parallelism-invariant "
                  "verdicts, timeout wall %.2fs <= 2s",
                  pass + fail > 0 ? metrics::compilability(pass, fail) : -1.0,
                  elapsed);
    report(7, eq3_ok && identical && timeout_ok, buf);
}

// --------------------------------------------------------------- criterion 8

std::size_t count_occurrences(const std::string& haystack,
                              const std::string& needle) {
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

void criterion_prompt_structure() {
    // A 12-sample synthetic corpus so the 10-shot prompt is exact.
    std::vector<corpus::Sample> corpus;
    for (int i = 0; i < 12; ++i) {
        corpus.push_back(
            {"py-" + std::to_string(i), LanguageId::Python,
             "Refactor sample " + std::to_string(i) + ".",
             "def f" + std::to_string(i) + "(x):\n    return x + " +
                 std::to_string(i) + "\n",
             "def f" + std::to_string(i) + "(x):\n    return " +
                 std::to_string(i) + " + x\n"});
    }
    const auto sys = prompt::default_system_instruction();
    bool fences_ok = true;
    bool pairs_ok = true;
    bool zero_ok = true;
    for (const int n : {0, 2, 4, 6, 8, 10}) {
        const auto examples = prompt::select_examples(
            corpus, corpus[0], n, prompt::SelectionPolicy::SameLanguageFirst);
        const auto p = prompt::build_prompt(corpus[0], examples, sys);
        if (static_cast<int>(p.examples.size()) != n) pairs_ok = false;
        std::string rendered;
        for (const auto& m : prompt::render(p)) rendered += m.content;
        if (count_occurrences(rendered, "```") !=
            static_cast<std::size_t>(2 * (1 + 2 * n))) {
            fences_ok = false;
        }
        // Zero-shot must be byte-identical to few-shot minus examples.
        auto turns = prompt::render(p);
        turns.erase(turns.begin() + 1, turns.begin() + 1 + 2 * n);
        const auto zero = prompt::render(prompt::build_prompt(corpus[0], {}, sys));
        if (turns.size() != zero.size()) {
            zero_ok = false;
        } else {
            for (std::size_t i = 0; i < turns.size(); ++i) {
                if (turns[i].role != zero[i].role ||
                    turns[i].content != zero[i].content) {
                    zero_ok = false;
                }
            }
        }
    }

    // No-self-leak over the checked-in corpus at every swept shot count
    // (clamped to the available examples, as the pipeline does).
    const auto real = corpus::load_corpus(kE2e / "corpus.csv");
    bool leak_free = true;
    const int available = static_cast<int>(real.size()) - 1;
    for (const auto& target : real) {
        for (const int n : {0, 2, 4, 6, 8, 10}) {
            const auto examples = prompt::select_examples(
                real, target, std::min(n, available),
                prompt::SelectionPolicy::SameLanguageFirst);
            const auto p = prompt::build_prompt(target, examples, sys);
            std::string rendered;
            for (const auto& m : prompt::render(p)) rendered += m.content;
            if (rendered.find(target.refactored_code) != std::string::npos) {
                leak_free = false;
            }
        }
    }
    report(8, fences_ok && pairs_ok && zero_ok && leak_free,
           "prompt structure: 1+2n fences and n pairs for n in {0,2,...,10}; "
           "zero-shot identity; no self-leak");
}

// --------------------------------------------------------------- criterion 9

void criterion_jsonl_validation() {
    corpus::Sample s{"c-1", LanguageId::C, "Refactor.", "int x;", "int y;"};
    auto record = corpus::to_chat_record(
        s, prompt::default_system_instruction().text);
    std::string filler;
    for (int i = 0; i < 5000; ++i) filler += "tok ";
    record.messages[1].content += "\n" + filler;

    const ApproxTokenCounter counter;
    const auto at_4096 = corpus::validate_record(record, counter, 4096);
    const auto at_8192 = corpus::validate_record(record, counter, 8192);
    const bool ok = !at_4096.ok &&
                    at_4096.reason == corpus::RejectReason::TooLong &&
                    at_8192.ok;
    report(9, ok,
           "jsonl validation: over-cap record rejected TooLong at 4096, "
           "accepted at 8192");
}

// -------------------------------------------------------------- criterion 10

int run_cli(const std::string& args) {
    const char* bin = std::getenv("REFEVAL_BIN");
    const std::string command =
        std::string(bin != nullptr ? bin : "./refeval") + " " + args +
        " > /dev/null";
    return std::system(command.c_str());
}

bool run_pipeline(const fs::path& outdir) {
    const std::string common =
        "--config " + (kE2e / "config.json").string() + " --corpus " +
        (kE2e / "corpus.csv").string() + " --recording " +
        (kE2e / "recording.jsonl").string() + " --output-dir " +
        outdir.string();
    if (run_cli("prepare " + common) != 0) return false;
    if (run_cli("generate " + common) != 0) return false;
    if (run_cli("evaluate " + common) != 0) return false;
    if (run_cli("report " + common) != 0) return false;
    return true;
}

// Relative path -> file bytes for every file under reports/.
std::map<std::string, std::string> report_tree(const fs::path& outdir) {
    std::map<std::string, std::string> tree;
    const fs::path root = outdir / "reports";
    if (!fs::exists(root)) return tree;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file()) {
            tree[fs::relative(entry.path(), root).string()] =
                slurp(entry.path());
        }
    }
    return tree;
}

void criterion_end_to_end() {
    const fs::path base =
        fs::temp_directory_path() /
        ("refeval-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(base);
    const fs::path out_a = base / "run-a";
    const fs::path out_b = base / "run-b";
    fs::create_directories(out_a);
    fs::create_directories(out_b);

    const auto start = std::chrono::steady_clock::now();
    const bool ran = run_pipeline(out_a) && run_pipeline(out_b);
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();

    bool identical = false;
    bool shape_ok = false;
    if (ran) {
        const auto tree_a = report_tree(out_a);
        const auto tree_b = report_tree(out_b);
        identical = !tree_a.empty() && tree_a == tree_b;

        // Table shapes: 5 languages x 6 shots, Correct@1-5 sweep, four
        // stats per metric, 300 records.
        const fs::path report_dir =
            out_a / "reports" /
            tree_a.begin()->first.substr(0, tree_a.begin()->first.find('/'));
        const auto aggregates =
            csv::parse(slurp(report_dir / "aggregates.csv"));
        const auto correctness =
            csv::parse(slurp(report_dir / "correctness.csv"));
        const auto heatmap =
            csv::parse(slurp(report_dir / "heatmap_compilability.csv"));
        int record_lines = 0;
        {
            std::ifstream in(report_dir / "records.jsonl");
            std::string line;
            while (std::getline(in, line)) ++record_lines;
        }
        const bool agg_shape = aggregates.size() == 31 &&  // header + 5x6
                               aggregates[0].size() == 2 + 7 * 4;
        bool stats_cols = true;
        for (const char* col : {"cc_mean", "cc_std", "cc_min", "cc_max"}) {
            bool found = false;
            for (const auto& h : aggregates[0]) found = found || h == col;
            stats_cols = stats_cols && found;
        }
        const bool corr_shape =
            correctness.size() == 7 && correctness[0].size() == 6;
        const bool heat_shape = heatmap.size() == 6 && heatmap[0].size() == 7;
        shape_ok = agg_shape && stats_cols && corr_shape && heat_shape &&
                   record_lines == 300;
    }

    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "end-to-end replay: two runs byte-identical=%s, table "
                  "shapes 5x6/@1-5/mean-std-min-max=%s, 300 records, %.1fs "
                  "offline",
                  identical ? "yes" : "no", shape_ok ? "yes" : "no", secs);
    report(10, ran && identical && shape_ok && secs < 60.0, buf);
    fs::remove_all(base);
}

}  // namespace

int main() {
    std::printf("refeval acceptance suite\n");
    criterion_pass_at_k();
    criterion_correct_at_k();
    criterion_levenshtein();
    criterion_similarity();
    criterion_normalization();
    criterion_cc_fixtures();
    criterion_compilability();
    criterion_prompt_structure();
    criterion_jsonl_validation();
    criterion_end_to_end();
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
