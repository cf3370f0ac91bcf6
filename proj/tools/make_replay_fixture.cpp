// Builds the synthetic replay recording used by the offline end-to-end
// fixture: one entry per (sample, shot) prompt digest, five deterministic
// outputs each, varied enough to exercise extraction, the wellformedness
// heuristic, and every report table.

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "refeval/config.hpp"
#include "refeval/corpus.hpp"
#include "refeval/gateway.hpp"
#include "refeval/prompt.hpp"
#include "refeval/textutil.hpp"

namespace {

using refeval::LanguageId;

std::string extra_statement(LanguageId lang) {
    switch (lang) {
        case LanguageId::C:
        case LanguageId::Cpp: return "static int audit_marker = 0;";
        case LanguageId::CSharp: return "int auditMarker = 0;";
        case LanguageId::Python: return "AUDIT_MARKER = 0";
        case LanguageId::Java: return "int auditMarker = 0;";
    }
    return "";
}

std::string line_comment(LanguageId lang, const std::string& note) {
    return lang == LanguageId::Python ? "# " + note : "// " + note;
}

std::string synth_output(const refeval::corpus::Sample& sample, int shot,
                         int index, const std::string& digest) {
    const std::uint64_t seed =
        refeval::text::fnv1a64(digest + ":" + std::to_string(index));
    const std::string tag(refeval::fence_tag(sample.language));
    const std::string& code = sample.refactored_code;

    switch (index % 5) {
        case 0:
            return "Here is a refactored version:\n```" + tag + "\n" + code +
                   "\n```\nKey improvements: clearer structure and naming.";
        case 1: {
            // Same code, different layout: distance moves, counts do not.
            std::string spaced;
            for (const char c : code) {
                spaced += c;
                if (c == '\n') spaced += '\n';
            }
            return "```\n" + spaced + "\n```";
        }
        case 2:
            return "Refactored for shot " + std::to_string(shot) + ":\n```" +
                   tag + "\n" + code + "\n" +
                   line_comment(sample.language,
                                "variant " + std::to_string(seed % 97)) +
                   "\n" + extra_statement(sample.language) +
                   "\n```\nSummary: extracted a helper and renamed locals.";
        case 3:
            if (seed % 3 == 0) {
                // Deliberately unbalanced candidate.
                return "```" + tag + "\n" + code + "\n(\n```";
            }
            return "```" + tag + "\n\t" + code + "\n```\nMinor cleanup only.";
        default:
            if ((seed >> 8) % 2 == 0) {
                return "Here's the final code without a fence.\n" + code;
            }
            return "The refactored code follows.\n" + code;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"generate a synthetic replay recording for offline runs"};
    std::string corpus_path;
    std::string config_path;
    std::string out_path;
    app.add_option("--corpus", corpus_path, "Corpus CSV")->required();
    app.add_option("--config", config_path, "Run config JSON")->required();
    app.add_option("--out", out_path, "Recording output path")->required();
    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = refeval::cli::load_config(config_path);
        cfg.corpus_path = corpus_path;
        const auto samples = refeval::corpus::load_corpus(corpus_path);
        const auto policy =
            refeval::prompt::parse_selection_policy(cfg.example_policy);
        const refeval::prompt::SystemInstruction sys{
            cfg.system_instruction.empty()
                ? refeval::prompt::default_system_instruction().text
                : cfg.system_instruction};

        const int available = static_cast<int>(samples.size()) - 1;
        std::vector<refeval::gateway::CandidateSet> sets;
        for (const auto& sample : samples) {
            for (const int shot : cfg.shot_list) {
                const int effective = std::min(shot, available);
                auto examples = refeval::prompt::select_examples(
                    samples, sample, effective, policy, cfg.seed);
                const auto p = refeval::prompt::build_prompt(
                    sample, std::move(examples), sys);
                const auto messages = refeval::prompt::render(p);
                const std::string digest =
                    refeval::gateway::prompt_digest(messages, cfg.generation);

                refeval::gateway::CandidateSet set;
                set.sample_id = sample.id;
                set.shot_n = shot;
                set.effective_examples = static_cast<int>(p.examples.size());
                set.prompt_digest = digest;
                set.config = cfg.generation;
                for (int j = 0; j < cfg.generation.k; ++j) {
                    set.raw_outputs.push_back(
                        synth_output(sample, shot, j, digest));
                }
                sets.push_back(std::move(set));
            }
        }
        const auto written = refeval::gateway::record_session(sets, out_path);
        std::printf("wrote %zu entries (%zu sets) to %s\n", written,
                    sets.size(), out_path.c_str());
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
