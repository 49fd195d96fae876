#pragma once

// Confusion-set construction and misspelled/correct pair synthesis for
// pre-training.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "scope/dataset.hpp"
#include "scope/error.hpp"
#include "scope/pinyin.hpp"
#include "scope/utf8.hpp"

namespace scope {

// char -> confusable characters, symmetric, self-free. Values are kept sorted
// so uniform index draws are deterministic.
using ConfusionSet = std::unordered_map<char32_t, std::vector<char32_t>>;

struct SynthesisConfig {
    double select_rate = 0.15;
    double confuse_p = 0.8;
    double random_p = 0.1;
    double keep_p = 0.1;
    double freq_top_fraction = 0.4;
    std::uint64_t rng_seed = 0;

    void validate() const {
        auto in01 = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (!in01(select_rate) || !in01(confuse_p) || !in01(random_p) || !in01(keep_p))
            throw Error("synthesis probabilities must lie in [0,1]");
        if (std::abs(confuse_p + random_p + keep_p - 1.0) > 1e-9)
            throw Error("confuse_p + random_p + keep_p must sum to 1");
        if (freq_top_fraction <= 0.0 || freq_top_fraction > 1.0)
            throw Error("freq_top_fraction must lie in (0,1]");
    }
};

// Keeps only pairs whose two characters both rank within `top_fraction` of
// the corpus frequencies (ties at the cutoff included), then closes the
// result symmetrically. Returns an empty set when nothing survives; the
// caller decides whether that warrants a warning.
inline ConfusionSet build_confusion_set(const std::vector<std::pair<char32_t, char32_t>>& pairs,
                                        const std::unordered_map<char32_t, std::int64_t>& freqs,
                                        double top_fraction) {
    if (freqs.empty()) throw Error("corpus frequencies are empty");
    if (top_fraction <= 0.0 || top_fraction > 1.0) throw Error("top_fraction must lie in (0,1]");

    std::vector<std::int64_t> counts;
    counts.reserve(freqs.size());
    for (const auto& [ch, c] : freqs) counts.push_back(c);
    std::sort(counts.begin(), counts.end(), std::greater<>());
    auto rank = static_cast<std::size_t>(std::ceil(top_fraction * static_cast<double>(counts.size())));
    rank = std::min(std::max<std::size_t>(rank, 1), counts.size());
    const std::int64_t threshold = counts[rank - 1];

    auto is_top = [&](char32_t ch) {
        auto it = freqs.find(ch);
        return it != freqs.end() && it->second >= threshold;
    };

    ConfusionSet cs;
    for (const auto& [a, b] : pairs) {
        if (a == b || !is_top(a) || !is_top(b)) continue;
        cs[a].push_back(b);
        cs[b].push_back(a);
    }
    for (auto& [ch, v] : cs) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return cs;
}

// Per-branch draw counters for the statistics tests.
struct SynthesisStats {
    std::size_t positions = 0;
    std::size_t selected = 0;
    std::size_t confuse_branch = 0;
    std::size_t random_branch = 0;
    std::size_t keep_branch = 0;
};

// Corrupts `target` into a source sentence: each position is independently
// selected with probability select_rate; a selected character is replaced by
// a confusable (confuse_p), a random vocabulary character (random_p), or kept
// (keep_p). A selected character with no confusion set falls through to the
// random branch. Unselected positions are copied verbatim.
inline SentencePair synthesize_pair(const std::u32string& target, const ConfusionSet& cs,
                                    const SynthesisConfig& cfg, std::mt19937_64& rng,
                                    const SyllableTable& table,
                                    const std::vector<char32_t>& vocab_chars,
                                    SynthesisStats* stats = nullptr) {
    if (target.empty()) throw LengthMismatch("cannot synthesize from an empty sentence");
    if (vocab_chars.empty()) throw Error("vocabulary character list is empty");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_vocab(0, vocab_chars.size() - 1);

    std::u32string source = target;
    for (std::size_t i = 0; i < target.size(); ++i) {
        if (stats) ++stats->positions;
        if (unit(rng) >= cfg.select_rate) continue;
        if (stats) ++stats->selected;
        double branch = unit(rng);
        if (branch < cfg.confuse_p) {
            if (stats) ++stats->confuse_branch;
            auto it = cs.find(target[i]);
            if (it != cs.end() && !it->second.empty()) {
                std::uniform_int_distribution<std::size_t> pick(0, it->second.size() - 1);
                source[i] = it->second[pick(rng)];
            } else {
                source[i] = vocab_chars[pick_vocab(rng)]; // "(if any)" fallback
            }
        } else if (branch < cfg.confuse_p + cfg.random_p) {
            if (stats) ++stats->random_branch;
            source[i] = vocab_chars[pick_vocab(rng)];
        } else {
            if (stats) ++stats->keep_branch;
            // selected but left unchanged
        }
    }
    return make_pair(source, target, table);
}

// Splits article text into paragraphs on newlines, trimming whitespace and
// keeping only lengths within [min_len, max_len] code points.
inline std::vector<std::u32string> split_paragraphs(const std::string& article_text,
                                                    std::size_t min_len = 2,
                                                    std::size_t max_len = 192) {
    std::vector<std::u32string> out;
    std::u32string text = utf8_decode(article_text);
    auto is_space = [](char32_t c) {
        return c == U' ' || c == U'\t' || c == U'\r' || c == 0x3000;
    };
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i < text.size() && text[i] != U'\n') continue;
        std::size_t lo = start, hi = i;
        while (lo < hi && is_space(text[lo])) ++lo;
        while (hi > lo && is_space(text[hi - 1])) --hi;
        if (hi - lo >= min_len && hi - lo <= max_len)
            out.emplace_back(text.substr(lo, hi - lo));
        start = i + 1;
    }
    return out;
}

// Maximal runs of table-covered characters inside a paragraph. Punctuation
// and unknown characters act as separators; the corruption task is defined
// over characters that carry pinyin.
inline std::vector<std::u32string> hanzi_runs(const std::u32string& paragraph,
                                              const SyllableTable& table,
                                              std::size_t min_len = 2, std::size_t max_len = 192) {
    std::vector<std::u32string> runs;
    std::u32string cur;
    auto flush = [&] {
        if (cur.size() >= min_len && cur.size() <= max_len) runs.push_back(cur);
        cur.clear();
    };
    for (char32_t ch : paragraph) {
        if (table.contains(ch)) cur.push_back(ch);
        else flush();
    }
    flush();
    return runs;
}

inline std::vector<char32_t> table_characters(const SyllableTable& table) {
    std::vector<char32_t> chars;
    chars.reserve(table.char_syllable_ids().size());
    for (const auto& [ch, syl] : table.char_syllable_ids()) chars.push_back(ch);
    std::sort(chars.begin(), chars.end());
    return chars;
}

inline std::unordered_map<char32_t, std::int64_t> count_frequencies(
    const std::vector<std::u32string>& texts) {
    std::unordered_map<char32_t, std::int64_t> freqs;
    for (const auto& t : texts)
        for (char32_t ch : t) ++freqs[ch];
    return freqs;
}

// Synthesizes one pair per target sequence. Each sequence draws from its own
// RNG stream seeded by (cfg.rng_seed, index), so results are independent of
// processing order and safe to parallelize.
inline std::vector<SentencePair> synthesize_corpus(const std::vector<std::u32string>& targets,
                                                   const ConfusionSet& cs,
                                                   const SynthesisConfig& cfg,
                                                   const SyllableTable& table,
                                                   const std::vector<char32_t>& vocab_chars,
                                                   SynthesisStats* stats = nullptr) {
    cfg.validate();
    std::vector<SentencePair> pairs;
    pairs.reserve(targets.size());
    for (std::size_t idx = 0; idx < targets.size(); ++idx) {
        std::seed_seq seq{cfg.rng_seed, static_cast<std::uint64_t>(idx)};
        std::mt19937_64 rng(seq);
        pairs.push_back(synthesize_pair(targets[idx], cs, cfg, rng, table, vocab_chars, stats));
    }
    return pairs;
}

// Confusion-set file: one line per character, `char<TAB>confusables`.
inline void write_confusion_set(const std::filesystem::path& path, const ConfusionSet& cs) {
    std::vector<char32_t> keys;
    keys.reserve(cs.size());
    for (const auto& [ch, v] : cs) keys.push_back(ch);
    std::sort(keys.begin(), keys.end());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (char32_t ch : keys) {
        out << utf8_encode(ch) << '\t';
        for (char32_t c : cs.at(ch)) out << utf8_encode(c);
        out << '\n';
    }
}

inline ConfusionSet read_confusion_set(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    ConfusionSet cs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw IoError("bad confusion line: " + line);
        std::u32string key = utf8_decode(line.substr(0, tab));
        if (key.size() != 1) throw IoError("confusion key must be one character: " + line);
        std::u32string vals = utf8_decode(line.substr(tab + 1));
        auto& v = cs[key[0]];
        for (char32_t c : vals)
            if (c != key[0]) v.push_back(c);
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return cs;
}

} // namespace scope
