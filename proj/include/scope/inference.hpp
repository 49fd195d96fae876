#pragma once

// Greedy correction, the constrained iterative correction strategy, and the
// SIGHAN13 de/di/de post-processing rule.

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "scope/error.hpp"
#include "scope/model.hpp"

namespace scope {

struct CICConfig {
    int iterations = 2;
    int window = 3; // odd; 3 = one position either side

    void validate() const {
        if (iterations < 1) throw Error("iterations must be >= 1");
        if (window < 1 || window % 2 == 0) throw Error("window must be a positive odd number");
    }
};

struct Edit {
    std::size_t pos;
    char32_t previous;
    char32_t next;
};

struct CorrectionTrace {
    std::vector<std::vector<Edit>> iterations; // edits applied per round
    std::set<std::size_t> reverted_positions;  // oscillating positions restored
    std::u32string final_output;
};

// A single-pass corrector: maps a sentence to an equal-length correction.
using Corrector = std::function<std::u32string(const std::u32string&)>;

// Per-position argmax of the character decoder over the frozen model.
// PAD/UNK rows never win the argmax so the output is always real text.
// Out-of-vocabulary input characters (punctuation, rare symbols) are copied
// through unchanged: the model has nothing to say about them.
template <typename S>
std::u32string greedy_correct(const std::u32string& sentence, const ModelParameters<S>& params,
                              const ModelConfig& cfg, const Vocabulary& vocab,
                              const SyllableTable& table) {
    std::vector<int> char_ids = vocab.char_ids(sentence);
    std::vector<int> pinyin_ids(sentence.size());
    for (std::size_t i = 0; i < sentence.size(); ++i)
        pinyin_ids[i] = table.contains(sentence[i])
                            ? vocab.syllable_id(table.syllable_of(sentence[i]).text)
                            : Vocabulary::kNoPinyin;
    Mat<S> logits = char_logits(encode(char_ids, pinyin_ids, params, cfg).eval(), params);
    std::u32string out = sentence;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        if (!vocab.knows_char(sentence[k])) continue;
        int best = -1;
        S best_score = S(0);
        for (Eigen::Index v = 0; v < logits.cols(); ++v) {
            if (vocab.is_special(static_cast<int>(v))) continue;
            if (best < 0 || logits(i, v) > best_score) {
                best = static_cast<int>(v);
                best_score = logits(i, v);
            }
        }
        if (best >= 0) out[k] = vocab.char_at(best);
    }
    return out;
}

template <typename S>
Corrector make_greedy_corrector(const ModelParameters<S>& params, const ModelConfig& cfg,
                                const Vocabulary& vocab, const SyllableTable& table) {
    return [&params, &cfg, &vocab, &table](const std::u32string& s) {
        return greedy_correct(s, params, cfg, vocab, table);
    };
}

// Constrained iterative correction. Round 1 applies the corrector
// unconstrained; each later round only accepts edits within the window of a
// previous-round edit position. A position whose character changed in every
// round is restored to the original input character afterwards.
inline std::pair<std::u32string, CorrectionTrace> iterative_correct(const std::u32string& sentence,
                                                                    const Corrector& correct,
                                                                    const CICConfig& cic) {
    cic.validate();
    const std::size_t n = sentence.size();
    const std::size_t radius = static_cast<std::size_t>((cic.window - 1) / 2);

    CorrectionTrace trace;
    std::u32string current = sentence;
    std::vector<std::size_t> prev_edit_positions;

    for (int round = 1; round <= cic.iterations; ++round) {
        std::u32string candidate = correct(current);
        if (candidate.size() != n)
            throw LengthMismatch("corrector changed the sequence length");
        std::vector<Edit> edits;
        std::u32string next = current;
        for (std::size_t p = 0; p < n; ++p) {
            if (candidate[p] == current[p]) continue;
            if (round > 1) {
                bool allowed = false;
                for (std::size_t q : prev_edit_positions) {
                    const std::size_t dist = p > q ? p - q : q - p;
                    if (dist <= radius) {
                        allowed = true;
                        break;
                    }
                }
                if (!allowed) continue;
            }
            edits.push_back({p, current[p], candidate[p]});
            next[p] = candidate[p];
        }
        prev_edit_positions.clear();
        for (const Edit& e : edits) prev_edit_positions.push_back(e.pos);
        trace.iterations.push_back(std::move(edits));
        current = std::move(next);
        if (prev_edit_positions.empty()) break; // nothing left to constrain future rounds
    }

    // Restore positions that changed in every round (only meaningful once
    // there is more than one round to oscillate across).
    if (cic.iterations > 1 && trace.iterations.size() == static_cast<std::size_t>(cic.iterations)) {
        std::set<std::size_t> in_all;
        for (const Edit& e : trace.iterations.front()) in_all.insert(e.pos);
        for (std::size_t r = 1; r < trace.iterations.size() && !in_all.empty(); ++r) {
            std::set<std::size_t> round_positions;
            for (const Edit& e : trace.iterations[r]) round_positions.insert(e.pos);
            std::set<std::size_t> keep;
            for (std::size_t p : in_all)
                if (round_positions.count(p)) keep.insert(p);
            in_all = std::move(keep);
        }
        for (std::size_t p : in_all) {
            current[p] = sentence[p];
            trace.reverted_positions.insert(p);
        }
    }

    trace.final_output = current;
    return {current, trace};
}

template <typename S>
std::pair<std::u32string, CorrectionTrace> iterative_correct(const std::u32string& sentence,
                                                             const ModelParameters<S>& params,
                                                             const ModelConfig& cfg,
                                                             const Vocabulary& vocab,
                                                             const SyllableTable& table,
                                                             const CICConfig& cic) {
    return iterative_correct(sentence, make_greedy_corrector(params, cfg, vocab, table), cic);
}

// SIGHAN13 post-processing: any disagreement involving 的/地/得 on either
// side is reverted to the source character.
inline std::u32string sighan13_postprocess(const std::u32string& source,
                                           const std::u32string& prediction) {
    if (source.size() != prediction.size())
        throw LengthMismatch("sighan13_postprocess: source/prediction lengths differ");
    auto is_de = [](char32_t c) { return c == U'的' || c == U'地' || c == U'得'; };
    std::u32string out = prediction;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (out[i] != source[i] && (is_de(source[i]) || is_de(out[i]))) out[i] = source[i];
    return out;
}

} // namespace scope
