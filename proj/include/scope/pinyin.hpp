#pragma once

// Mandarin syllable decomposition into initial / final / tone, plus the
// phonological similarity measures used for task weighting.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "scope/error.hpp"
#include "scope/utf8.hpp"

namespace scope {

// A romanized syllable with a trailing tone digit, e.g. "gao4".
struct Syllable {
    std::string text;

    friend bool operator==(const Syllable&, const Syllable&) = default;
};

// The (initial, final, tone) decomposition of one syllable. A zero-initial
// syllable such as "an1" carries the empty string as its initial; the empty
// initial occupies slot 0 of the in-memory initial vocabulary so that all
// three components stay predictable classes.
struct PinyinTriplet {
    std::string initial;
    std::string final_part;
    int tone = 0; // 1..5, 5 = neutral

    std::string recompose() const {
        return initial + final_part + static_cast<char>('0' + tone);
    }

    friend bool operator==(const PinyinTriplet&, const PinyinTriplet&) = default;
};

namespace detail {

inline std::vector<std::string> read_lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw IoError("cannot open " + p.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

} // namespace detail

// Character -> syllable map plus the initial/final vocabularies. Polyphonic
// characters carry their most common reading only.
class SyllableTable {
public:
    SyllableTable() = default;

    // `initials` must not contain the empty-initial sentinel; it is inserted
    // at slot 0 here.
    static SyllableTable from_entries(const std::vector<std::pair<char32_t, std::string>>& entries,
                                      std::vector<std::string> initials,
                                      std::vector<std::string> finals) {
        SyllableTable t;
        t.initials_.push_back("");
        for (auto& s : initials) t.initials_.push_back(std::move(s));
        t.finals_ = std::move(finals);
        for (std::size_t i = 0; i < t.initials_.size(); ++i) t.initial_id_[t.initials_[i]] = static_cast<int>(i);
        for (std::size_t i = 0; i < t.finals_.size(); ++i) t.final_id_[t.finals_[i]] = static_cast<int>(i);
        if (t.initial_id_.size() != t.initials_.size()) throw IoError("duplicate initial in vocabulary");
        if (t.final_id_.size() != t.finals_.size()) throw IoError("duplicate final in vocabulary");

        std::vector<std::string> syl;
        syl.reserve(entries.size());
        for (const auto& [ch, s] : entries) syl.push_back(s);
        std::sort(syl.begin(), syl.end());
        syl.erase(std::unique(syl.begin(), syl.end()), syl.end());
        t.syllables_ = std::move(syl);
        for (std::size_t i = 0; i < t.syllables_.size(); ++i)
            t.syllable_id_[t.syllables_[i]] = static_cast<int>(i);

        for (const auto& [ch, s] : entries) {
            auto it = t.syllable_id_.find(s);
            t.char_syllable_.emplace(ch, it->second);
        }
        return t;
    }

    // Loads char_pinyin.tsv (char<TAB>syllable), initials.txt, finals.txt
    // from a data directory.
    static SyllableTable load(const std::filesystem::path& dir) {
        std::vector<std::pair<char32_t, std::string>> entries;
        for (const std::string& line : detail::read_lines(dir / "char_pinyin.tsv")) {
            auto tab = line.find('\t');
            if (tab == std::string::npos) throw IoError("bad line in char_pinyin.tsv: " + line);
            std::u32string ch = utf8_decode(line.substr(0, tab));
            if (ch.size() != 1) throw IoError("key is not a single character: " + line);
            entries.emplace_back(ch[0], line.substr(tab + 1));
        }
        return from_entries(entries, detail::read_lines(dir / "initials.txt"),
                            detail::read_lines(dir / "finals.txt"));
    }

    const std::vector<std::string>& initials() const { return initials_; } // [0] == ""
    const std::vector<std::string>& finals() const { return finals_; }
    const std::vector<std::string>& syllables() const { return syllables_; }

    std::size_t size() const { return char_syllable_.size(); }

    bool contains(char32_t ch) const { return char_syllable_.count(ch) != 0; }

    Syllable syllable_of(char32_t ch) const {
        auto it = char_syllable_.find(ch);
        if (it == char_syllable_.end())
            throw UnknownSyllable("no pinyin for character '" + utf8_encode(ch) + "'");
        return Syllable{syllables_[static_cast<std::size_t>(it->second)]};
    }

    int syllable_index(const std::string& s) const {
        auto it = syllable_id_.find(s);
        return it == syllable_id_.end() ? -1 : it->second;
    }

    int initial_index(const std::string& s) const {
        auto it = initial_id_.find(s);
        return it == initial_id_.end() ? -1 : it->second;
    }

    int final_index(const std::string& s) const {
        auto it = final_id_.find(s);
        return it == final_id_.end() ? -1 : it->second;
    }

    const std::unordered_map<char32_t, int>& char_syllable_ids() const { return char_syllable_; }

private:
    std::vector<std::string> initials_;
    std::vector<std::string> finals_;
    std::vector<std::string> syllables_;
    std::unordered_map<std::string, int> initial_id_;
    std::unordered_map<std::string, int> final_id_;
    std::unordered_map<std::string, int> syllable_id_;
    std::unordered_map<char32_t, int> char_syllable_;
};

// Splits a syllable into its letter part and tone digit. Throws
// MalformedSyllable unless the text is lowercase letters followed by exactly
// one digit in 1..5.
inline std::pair<std::string_view, int> split_tone(const Syllable& s) {
    const std::string& t = s.text;
    if (t.size() < 2) throw MalformedSyllable(t);
    char last = t.back();
    if (last < '1' || last > '5') throw MalformedSyllable(t);
    std::string_view letters(t.data(), t.size() - 1);
    for (char c : letters)
        if (c < 'a' || c > 'z') throw MalformedSyllable(t);
    return {letters, last - '0'};
}

// Greedy longest-prefix match of the initial (so "sh" wins over "s"); the
// remainder must be a known final.
inline PinyinTriplet decompose(const Syllable& s, const SyllableTable& table) {
    auto [letters, tone] = split_tone(s);
    const std::string* best = nullptr;
    for (const std::string& ini : table.initials()) {
        if (ini.size() <= letters.size() && letters.substr(0, ini.size()) == ini &&
            (!best || ini.size() > best->size()))
            best = &ini;
    }
    // slot 0 is the empty initial, so `best` always matches at least that
    std::string final_part(letters.substr(best->size()));
    if (table.final_index(final_part) < 0) throw UnknownSyllable(s.text);
    return PinyinTriplet{*best, std::move(final_part), tone};
}

// Fraction of identical components among (initial, final, tone): 0, 1/3, 2/3 or 1.
inline double fine_similarity(const PinyinTriplet& a, const PinyinTriplet& b) {
    int same = 0;
    same += a.initial == b.initial;
    same += a.final_part == b.final_part;
    same += a.tone == b.tone;
    return same / 3.0;
}

// Whole-syllable equality.
inline int coarse_similarity(const Syllable& a, const Syllable& b) {
    return a.text == b.text ? 1 : 0;
}

inline std::size_t levenshtein(std::string_view a, std::string_view b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t up = row[j];
            std::size_t sub = diag + (a[i - 1] != b[j - 1]);
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
            diag = up;
        }
    }
    return row[b.size()];
}

// 1 - Levenshtein(a, b) / max(|a|, |b|), over the full syllable strings
// including the tone digit. Identical strings give 1.
inline double pinyin_edit_weight(const Syllable& a, const Syllable& b) {
    if (a.text == b.text) return 1.0;
    std::size_t d = levenshtein(a.text, b.text);
    std::size_t m = std::max(a.text.size(), b.text.size());
    return 1.0 - static_cast<double>(d) / static_cast<double>(m);
}

} // namespace scope
