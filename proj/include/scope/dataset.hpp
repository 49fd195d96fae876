#pragma once

// Training/eval records and the id spaces shared by the model, the corpus
// synthesizer and the checkpoint format.

#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "scope/error.hpp"
#include "scope/pinyin.hpp"
#include "scope/utf8.hpp"

namespace scope {

// Aligned source/target character sequences of equal length. target_pinyin
// carries the fine-grained supervision for the target side; source_pinyin the
// whole syllables fed to the encoder.
struct SentencePair {
    std::u32string source;
    std::u32string target;
    std::vector<Syllable> source_pinyin;
    std::vector<PinyinTriplet> target_pinyin;
    // Static per-position weights (1 - normalized pinyin edit distance),
    // precomputed at load time for the partially-adaptive scheme.
    std::vector<double> edit_weights;

    std::size_t size() const { return source.size(); }

    void validate() const {
        const std::size_t n = source.size();
        if (n == 0) throw LengthMismatch("empty sentence pair");
        if (target.size() != n || source_pinyin.size() != n || target_pinyin.size() != n)
            throw LengthMismatch("sentence pair field lengths disagree");
    }
};

// Id spaces derived deterministically from a SyllableTable. Character ids 0/1
// are [PAD]/[UNK]; pinyin id 0 is the no-pinyin sentinel used for both.
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kNoPinyin = 0;

    Vocabulary() = default;

    explicit Vocabulary(const SyllableTable& table) {
        std::vector<char32_t> chars;
        chars.reserve(table.char_syllable_ids().size());
        for (const auto& [ch, syl] : table.char_syllable_ids()) chars.push_back(ch);
        std::sort(chars.begin(), chars.end());

        id_to_char_.assign(2, 0); // PAD, UNK placeholders
        char_syllable_.assign(2, kNoPinyin);
        for (char32_t ch : chars) {
            char_to_id_[ch] = static_cast<int>(id_to_char_.size());
            id_to_char_.push_back(ch);
            char_syllable_.push_back(table.char_syllable_ids().at(ch) + 1);
        }
        syllables_.push_back(":none:");
        for (const auto& s : table.syllables()) syllables_.push_back(s);
        for (std::size_t i = 0; i < syllables_.size(); ++i)
            syllable_to_id_[syllables_[i]] = static_cast<int>(i);

        initials_ = table.initials();
        finals_ = table.finals();
        for (std::size_t i = 0; i < initials_.size(); ++i) initial_to_id_[initials_[i]] = static_cast<int>(i);
        for (std::size_t i = 0; i < finals_.size(); ++i) final_to_id_[finals_[i]] = static_cast<int>(i);
    }

    // Rebuild from the flat lists stored in a checkpoint.
    static Vocabulary from_parts(std::u32string chars, std::vector<int> char_syllables,
                                 std::vector<std::string> syllables,
                                 std::vector<std::string> initials,
                                 std::vector<std::string> finals) {
        Vocabulary v;
        v.id_to_char_.assign(2, 0);
        v.char_syllable_.assign(2, kNoPinyin);
        for (std::size_t i = 0; i < chars.size(); ++i) {
            v.char_to_id_[chars[i]] = static_cast<int>(v.id_to_char_.size());
            v.id_to_char_.push_back(chars[i]);
            v.char_syllable_.push_back(char_syllables.at(i));
        }
        v.syllables_ = std::move(syllables);
        v.initials_ = std::move(initials);
        v.finals_ = std::move(finals);
        for (std::size_t i = 0; i < v.syllables_.size(); ++i)
            v.syllable_to_id_[v.syllables_[i]] = static_cast<int>(i);
        for (std::size_t i = 0; i < v.initials_.size(); ++i) v.initial_to_id_[v.initials_[i]] = static_cast<int>(i);
        for (std::size_t i = 0; i < v.finals_.size(); ++i) v.final_to_id_[v.finals_[i]] = static_cast<int>(i);
        return v;
    }

    int char_count() const { return static_cast<int>(id_to_char_.size()); }
    int syllable_count() const { return static_cast<int>(syllables_.size()); }
    int initial_count() const { return static_cast<int>(initials_.size()); } // slot 0 = empty initial
    int final_count() const { return static_cast<int>(finals_.size()); }
    static constexpr int tone_count() { return 5; }

    int char_id(char32_t ch) const {
        auto it = char_to_id_.find(ch);
        return it == char_to_id_.end() ? kUnk : it->second;
    }
    bool knows_char(char32_t ch) const { return char_to_id_.count(ch) != 0; }
    char32_t char_at(int id) const { return id_to_char_.at(static_cast<std::size_t>(id)); }
    bool is_special(int id) const { return id == kPad || id == kUnk; }

    int syllable_id(const std::string& s) const {
        auto it = syllable_to_id_.find(s);
        return it == syllable_to_id_.end() ? kNoPinyin : it->second;
    }
    const std::string& syllable_at(int id) const { return syllables_.at(static_cast<std::size_t>(id)); }
    int syllable_of_char_id(int char_id) const { return char_syllable_.at(static_cast<std::size_t>(char_id)); }

    int initial_id(const std::string& s) const { return initial_to_id_.at(s); }
    int final_id(const std::string& s) const { return final_to_id_.at(s); }
    static int tone_id(int tone) { return tone - 1; }

    struct TripletIds {
        int initial;
        int final_part;
        int tone;
    };
    TripletIds triplet_ids(const PinyinTriplet& t) const {
        return {initial_id(t.initial), final_id(t.final_part), tone_id(t.tone)};
    }

    std::vector<int> char_ids(const std::u32string& s) const {
        std::vector<int> ids(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) ids[i] = char_id(s[i]);
        return ids;
    }
    std::vector<int> syllable_ids(const std::vector<Syllable>& sy) const {
        std::vector<int> ids(sy.size());
        for (std::size_t i = 0; i < sy.size(); ++i) ids[i] = syllable_id(sy[i].text);
        return ids;
    }

    // Flat views for serialization.
    std::u32string chars_flat() const { return std::u32string(id_to_char_.begin() + 2, id_to_char_.end()); }
    std::vector<int> char_syllables_flat() const {
        return std::vector<int>(char_syllable_.begin() + 2, char_syllable_.end());
    }
    const std::vector<std::string>& syllables() const { return syllables_; }
    const std::vector<std::string>& initials() const { return initials_; }
    const std::vector<std::string>& finals() const { return finals_; }

private:
    std::vector<char32_t> id_to_char_;
    std::unordered_map<char32_t, int> char_to_id_;
    std::vector<int> char_syllable_; // per char id -> syllable id
    std::vector<std::string> syllables_;
    std::unordered_map<std::string, int> syllable_to_id_;
    std::vector<std::string> initials_;
    std::unordered_map<std::string, int> initial_to_id_;
    std::vector<std::string> finals_;
    std::unordered_map<std::string, int> final_to_id_;
};

// Builds the aligned pair record for a (source, target) sentence, deriving
// pinyin from the table. Every target character must have a pinyin entry.
inline SentencePair make_pair(const std::u32string& source, const std::u32string& target,
                              const SyllableTable& table) {
    if (source.size() != target.size() || source.empty())
        throw LengthMismatch("source/target must be nonempty and equal length");
    SentencePair p;
    p.source = source;
    p.target = target;
    p.source_pinyin.reserve(source.size());
    p.target_pinyin.reserve(source.size());
    for (std::size_t i = 0; i < source.size(); ++i) {
        p.source_pinyin.push_back(table.syllable_of(source[i]));
        p.target_pinyin.push_back(decompose(table.syllable_of(target[i]), table));
    }
    p.edit_weights.resize(source.size());
    for (std::size_t i = 0; i < source.size(); ++i)
        p.edit_weights[i] =
            pinyin_edit_weight(p.source_pinyin[i], Syllable{p.target_pinyin[i].recompose()});
    return p;
}

inline nlohmann::json pair_to_json(const SentencePair& p) {
    nlohmann::json j;
    j["source"] = utf8_encode(p.source);
    j["target"] = utf8_encode(p.target);
    auto sp = nlohmann::json::array();
    for (const auto& s : p.source_pinyin) sp.push_back(s.text);
    auto tp = nlohmann::json::array();
    for (const auto& t : p.target_pinyin) tp.push_back(t.recompose());
    j["source_pinyin"] = std::move(sp);
    j["target_pinyin"] = std::move(tp);
    return j;
}

inline SentencePair pair_from_json(const nlohmann::json& j, const SyllableTable& table) {
    SentencePair p;
    p.source = utf8_decode(j.at("source").get<std::string>());
    p.target = utf8_decode(j.at("target").get<std::string>());
    for (const auto& s : j.at("source_pinyin")) p.source_pinyin.push_back(Syllable{s.get<std::string>()});
    for (const auto& s : j.at("target_pinyin"))
        p.target_pinyin.push_back(decompose(Syllable{s.get<std::string>()}, table));
    p.validate();
    p.edit_weights.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        p.edit_weights[i] =
            pinyin_edit_weight(p.source_pinyin[i], Syllable{p.target_pinyin[i].recompose()});
    return p;
}

inline void write_dataset(const std::filesystem::path& path, const std::vector<SentencePair>& pairs) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& p : pairs) out << pair_to_json(p).dump() << '\n';
}

inline std::vector<SentencePair> read_dataset(const std::filesystem::path& path,
                                              const SyllableTable& table) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<SentencePair> pairs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            pairs.push_back(pair_from_json(nlohmann::json::parse(line), table));
        } catch (const nlohmann::json::exception& e) {
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return pairs;
}

} // namespace scope
