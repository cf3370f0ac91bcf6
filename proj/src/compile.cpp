#include "refeval/compile.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <regex>
#include <stdexcept>
#include <thread>

#include "refeval/analysis.hpp"
#include "refeval/textutil.hpp"

namespace refeval::compiler {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kStderrExcerptBytes = 2048;

struct TempDir {
    fs::path path;

    TempDir() {
        std::string tmpl =
            (fs::temp_directory_path() / "refeval-XXXXXX").string();
        if (::mkdtemp(tmpl.data()) == nullptr) {
            throw std::runtime_error("mkdtemp failed: " +
                                     std::string(std::strerror(errno)));
        }
        path = tmpl;
    }

    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }

    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

bool executable_resolvable(const std::string& argv0) {
    if (argv0.find('/') != std::string::npos) {
        return ::access(argv0.c_str(), X_OK) == 0;
    }
    const char* path_env = std::getenv("PATH");
    if (path_env == nullptr) return false;
    std::string_view path(path_env);
    std::size_t start = 0;
    while (start <= path.size()) {
        const auto sep = path.find(':', start);
        const std::string_view dir =
            path.substr(start, sep == std::string_view::npos ? std::string_view::npos
                                                             : sep - start);
        if (!dir.empty()) {
            const std::string candidate = std::string(dir) + "/" + argv0;
            if (::access(candidate.c_str(), X_OK) == 0) return true;
        }
        if (sep == std::string_view::npos) break;
        start = sep + 1;
    }
    return false;
}

std::string scrub_paths(std::string excerpt, const std::string& tmpdir) {
    const std::string needle = tmpdir + "/";
    std::size_t pos = 0;
    while ((pos = excerpt.find(needle, pos)) != std::string::npos) {
        excerpt.erase(pos, needle.size());
    }
    // A bare mention of the dir itself (no trailing slash).
    pos = 0;
    while ((pos = excerpt.find(tmpdir, pos)) != std::string::npos) {
        excerpt.erase(pos, tmpdir.size());
    }
    return excerpt;
}

struct RunResult {
    bool timed_out = false;
    bool exec_failed = false;
    int exec_errno = 0;
    int exit_code = -1;
    std::string stderr_data;
};

RunResult run_with_timeout(const std::vector<std::string>& argv,
                           const fs::path& workdir, double timeout_s) {
    RunResult result;

    int err_pipe[2];
    int exec_pipe[2];
    if (::pipe(err_pipe) != 0 || ::pipe2(exec_pipe, O_CLOEXEC) != 0) {
        throw std::runtime_error("pipe failed");
    }

    const pid_t pid = ::fork();
    if (pid < 0) {
        throw std::runtime_error("fork failed");
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        ::close(err_pipe[0]);
        ::close(exec_pipe[0]);
        const int devnull = ::open("/dev/null", O_RDWR);
        if (devnull >= 0) {
            ::dup2(devnull, STDIN_FILENO);
            ::dup2(devnull, STDOUT_FILENO);
        }
        ::dup2(err_pipe[1], STDERR_FILENO);
        if (::chdir(workdir.c_str()) != 0) _exit(126);

        std::vector<char*> cargv;
        cargv.reserve(argv.size() + 1);
        for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
        cargv.push_back(nullptr);
        ::execvp(cargv[0], cargv.data());
        const int err = errno;
        (void)!::write(exec_pipe[1], &err, sizeof err);
        _exit(127);
    }

    ::close(err_pipe[1]);
    ::close(exec_pipe[1]);

    const auto deadline =
        std::chrono::steady_clock::now() +
        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(timeout_s));

    std::string stderr_data;
    char buf[4096];
    bool pipe_open = true;
    while (pipe_open) {
        const auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            result.timed_out = true;
            break;
        }
        const int remaining_ms = static_cast<int>(
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now)
                .count());
        struct pollfd pfd{err_pipe[0], POLLIN, 0};
        const int rc = ::poll(&pfd, 1, std::max(1, remaining_ms));
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (rc == 0) {
            result.timed_out = true;
            break;
        }
        const ssize_t n = ::read(err_pipe[0], buf, sizeof buf);
        if (n <= 0) {
            pipe_open = false;
        } else if (stderr_data.size() < std::size_t{64} * 1024) {
            stderr_data.append(buf, static_cast<std::size_t>(n));
        }
    }
    ::close(err_pipe[0]);

    if (result.timed_out) {
        ::kill(-pid, SIGKILL);
        ::kill(pid, SIGKILL);
    }

    int status = 0;
    ::waitpid(pid, &status, 0);

    int exec_errno = 0;
    if (::read(exec_pipe[0], &exec_errno, sizeof exec_errno) ==
        static_cast<ssize_t>(sizeof exec_errno)) {
        result.exec_failed = true;
        result.exec_errno = exec_errno;
    }
    ::close(exec_pipe[0]);

    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else {
        result.exit_code = -1;
    }
    result.stderr_data = std::move(stderr_data);
    return result;
}

}  // namespace

std::string_view compile_status_name(CompileStatus status) {
    switch (status) {
        case CompileStatus::Pass: return "pass";
        case CompileStatus::Fail: return "fail";
        case CompileStatus::Timeout: return "timeout";
        case CompileStatus::ToolMissing: return "tool_missing";
    }
    return "?";
}

std::optional<CompileStatus> parse_compile_status(std::string_view name) {
    if (name == "pass") return CompileStatus::Pass;
    if (name == "fail") return CompileStatus::Fail;
    if (name == "timeout") return CompileStatus::Timeout;
    if (name == "tool_missing") return CompileStatus::ToolMissing;
    return std::nullopt;
}

std::string java_source_filename(const std::string& code) {
    const std::string stripped = analysis::strip_comments(code, LanguageId::Java);
    static const std::regex public_type(
        R"(\bpublic\s+(?:final\s+|abstract\s+|strictfp\s+|sealed\s+)*(?:class|interface|enum|record)\s+([A-Za-z_$][A-Za-z0-9_$]*))");
    std::smatch m;
    if (std::regex_search(stripped, m, public_type)) {
        return m[1].str() + ".java";
    }
    return "Main.java";
}

CompileVerdict compile_one(const std::string& code, LanguageId lang,
                           const ToolchainSpec& spec) {
    int placeholders = 0;
    for (const auto& arg : spec.command) {
        if (arg == "{src}") ++placeholders;
    }
    if (spec.command.empty() || placeholders != 1) {
        throw std::invalid_argument(
            "toolchain command must contain exactly one {src} placeholder");
    }
    if (spec.timeout_s <= 0) {
        throw std::invalid_argument("toolchain timeout must be positive");
    }

    CompileVerdict verdict;
    const auto start = std::chrono::steady_clock::now();
    const auto finish = [&]() {
        verdict.duration_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start)
                .count();
        return verdict;
    };

    if (!executable_resolvable(spec.command.front())) {
        verdict.status = CompileStatus::ToolMissing;
        verdict.stderr_excerpt = "toolchain not found: " + spec.command.front();
        return finish();
    }

    TempDir dir;
    const std::string filename = lang == LanguageId::Java
                                     ? java_source_filename(code)
                                     : "snippet" + std::string(source_extension(lang));
    const fs::path src = dir.path / filename;
    {
        std::ofstream out(src, std::ios::binary);
        out << code;
        if (!out.flush()) {
            verdict.status = CompileStatus::Fail;
            verdict.stderr_excerpt = "failed to write source file";
            return finish();
        }
    }

    std::vector<std::string> argv;
    argv.reserve(spec.command.size());
    for (const auto& arg : spec.command) {
        argv.push_back(arg == "{src}" ? src.string() : arg);
    }

    RunResult run = run_with_timeout(argv, dir.path, spec.timeout_s);
    if (run.exec_failed) {
        verdict.status = CompileStatus::ToolMissing;
        verdict.stderr_excerpt =
            "exec failed: " + std::string(std::strerror(run.exec_errno));
        return finish();
    }
    if (run.timed_out) {
        verdict.status = CompileStatus::Timeout;
    } else {
        verdict.status =
            run.exit_code == 0 ? CompileStatus::Pass : CompileStatus::Fail;
    }
    std::string excerpt = scrub_paths(std::move(run.stderr_data), dir.path.string());
    if (excerpt.size() > kStderrExcerptBytes) excerpt.resize(kStderrExcerptBytes);
    verdict.stderr_excerpt = std::move(excerpt);
    return finish();
}

std::map<std::string, CompileVerdict> compile_batch(
    const std::vector<CompileJob>& jobs,
    const std::map<LanguageId, ToolchainSpec>& specs, int parallelism) {
    if (parallelism < 1) {
        throw std::invalid_argument("parallelism must be >= 1");
    }
    std::map<std::string, CompileVerdict> results;
    std::mutex results_mutex;
    std::atomic<std::size_t> next{0};

    const auto worker = [&] {
        while (true) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= jobs.size()) return;
            const CompileJob& job = jobs[idx];
            CompileVerdict verdict;
            const auto it = specs.find(job.language);
            if (it == specs.end()) {
                verdict.status = CompileStatus::ToolMissing;
                verdict.stderr_excerpt =
                    "no toolchain configured for " +
                    std::string(language_name(job.language));
            } else {
                verdict = compile_one(job.code, job.language, it->second);
            }
            std::lock_guard lock(results_mutex);
            results.emplace(job.id, std::move(verdict));
        }
    };

    const int workers =
        std::max(1, std::min<int>(parallelism, static_cast<int>(jobs.size())));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return results;
}

std::map<LanguageId, ToolchainSpec> default_toolchains() {
    std::map<LanguageId, ToolchainSpec> specs;
    specs[LanguageId::C] = {LanguageId::C, {"cc", "-fsyntax-only", "{src}"}, 10.0};
    specs[LanguageId::Cpp] = {LanguageId::Cpp, {"c++", "-fsyntax-only", "{src}"}, 10.0};
    specs[LanguageId::CSharp] =
        {LanguageId::CSharp, {"mcs", "-target:library", "{src}"}, 10.0};
    specs[LanguageId::Python] =
        {LanguageId::Python, {"python3", "-m", "py_compile", "{src}"}, 10.0};
    specs[LanguageId::Java] = {LanguageId::Java, {"javac", "{src}"}, 10.0};
    return specs;
}

CompileVerdict heuristic_verdict(const std::string& code, LanguageId lang) {
    CompileVerdict verdict;
    verdict.heuristic = true;
    verdict.duration_ms = 0;

    const analysis::NormalizedCode norm = analysis::normalize(code, lang);
    if (!norm.warnings.empty()) {
        verdict.status = CompileStatus::Fail;
        verdict.stderr_excerpt = "heuristic: " + norm.warnings.front().message;
        return verdict;
    }
    const analysis::TokenStream ts = analysis::tokenize(norm.text, lang);
    if (ts.tokens.empty()) {
        verdict.status = CompileStatus::Fail;
        verdict.stderr_excerpt = "heuristic: no tokens";
        return verdict;
    }
    std::vector<char> stack;
    for (const auto& tok : ts.tokens) {
        if (tok.kind != analysis::TokenKind::Punctuation || tok.lexeme.size() != 1) {
            continue;
        }
        const char c = tok.lexeme.front();
        if (c == '(' || c == '[' || c == '{') {
            stack.push_back(c);
        } else if (c == ')' || c == ']' || c == '}') {
            const char open = c == ')' ? '(' : c == ']' ? '[' : '{';
            if (stack.empty() || stack.back() != open) {
                verdict.status = CompileStatus::Fail;
                verdict.stderr_excerpt =
                    std::string("heuristic: unbalanced '") + c + "'";
                return verdict;
            }
            stack.pop_back();
        }
    }
    if (!stack.empty()) {
        verdict.status = CompileStatus::Fail;
        verdict.stderr_excerpt =
            std::string("heuristic: unclosed '") + stack.back() + "'";
        return verdict;
    }
    verdict.status = CompileStatus::Pass;
    return verdict;
}

}  // namespace refeval::compiler
