#include "scope/pinyin.hpp"

#include <gtest/gtest.h>

#include <random>

namespace scope {
namespace {

SyllableTable& shipped_table() {
    static SyllableTable table = SyllableTable::load(SCOPE_TEST_DATA_DIR);
    return table;
}

TEST(Decompose, PaperExamples) {
    const auto& t = shipped_table();
    EXPECT_EQ(decompose(Syllable{"gao1"}, t), (PinyinTriplet{"g", "ao", 1}));
    EXPECT_EQ(decompose(Syllable{"wan2"}, t), (PinyinTriplet{"w", "an", 2}));
}

TEST(Decompose, ZeroInitialUsesEmptySentinel) {
    const auto& t = shipped_table();
    EXPECT_EQ(decompose(Syllable{"an1"}, t), (PinyinTriplet{"", "an", 1}));
}

TEST(Decompose, GreedyLongestPrefix) {
    const auto& t = shipped_table();
    EXPECT_EQ(decompose(Syllable{"shou1"}, t).initial, "sh");
    EXPECT_EQ(decompose(Syllable{"sou1"}, t).initial, "s");
    EXPECT_EQ(decompose(Syllable{"zhan4"}, t).initial, "zh");
    EXPECT_EQ(decompose(Syllable{"zan4"}, t).initial, "z");
}

TEST(Decompose, MalformedSyllables) {
    const auto& t = shipped_table();
    EXPECT_THROW(decompose(Syllable{"gaoX"}, t), MalformedSyllable);
    EXPECT_THROW(decompose(Syllable{"gao0"}, t), MalformedSyllable);
    EXPECT_THROW(decompose(Syllable{"gao6"}, t), MalformedSyllable);
    EXPECT_THROW(decompose(Syllable{"gao"}, t), MalformedSyllable);
    EXPECT_THROW(decompose(Syllable{""}, t), MalformedSyllable);
    EXPECT_THROW(decompose(Syllable{"GAO1"}, t), MalformedSyllable);
}

TEST(Decompose, UnknownFinal) {
    const auto& t = shipped_table();
    EXPECT_THROW(decompose(Syllable{"gqq1"}, t), UnknownSyllable);
    EXPECT_THROW(decompose(Syllable{"zzz3"}, t), UnknownSyllable);
}

TEST(Decompose, RoundTripOverFullTable) {
    const auto& t = shipped_table();
    ASSERT_GE(t.syllables().size(), 400u);
    for (const auto& s : t.syllables()) {
        PinyinTriplet tri = decompose(Syllable{s}, t);
        EXPECT_EQ(tri.recompose(), s) << "round-trip failed for " << s;
        EXPECT_GE(tri.tone, 1);
        EXPECT_LE(tri.tone, 5);
    }
}

TEST(FineSimilarity, PaperTable) {
    const auto& t = shipped_table();
    auto d = [&](const char* s) { return decompose(Syllable{s}, t); };
    EXPECT_DOUBLE_EQ(fine_similarity(d("wan2"), d("wan2")), 1.0);
    EXPECT_DOUBLE_EQ(fine_similarity(d("gao1"), d("gao4")), 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(fine_similarity(d("shou1"), d("zou3")), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(fine_similarity(d("lan2"), d("jian1")), 0.0);
}

TEST(CoarseSimilarity, PaperTable) {
    EXPECT_EQ(coarse_similarity(Syllable{"wan2"}, Syllable{"wan2"}), 1);
    EXPECT_EQ(coarse_similarity(Syllable{"gao1"}, Syllable{"gao4"}), 0);
    EXPECT_EQ(coarse_similarity(Syllable{"lan2"}, Syllable{"jian1"}), 0);
}

TEST(Similarity, SymmetricAndReflexiveOverTable) {
    const auto& t = shipped_table();
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::size_t> pick(0, t.syllables().size() - 1);
    for (int k = 0; k < 500; ++k) {
        Syllable a{t.syllables()[pick(rng)]};
        Syllable b{t.syllables()[pick(rng)]};
        PinyinTriplet ta = decompose(a, t), tb = decompose(b, t);
        EXPECT_DOUBLE_EQ(fine_similarity(ta, tb), fine_similarity(tb, ta));
        EXPECT_EQ(coarse_similarity(a, b), coarse_similarity(b, a));
        EXPECT_DOUBLE_EQ(fine_similarity(ta, ta), 1.0);
        EXPECT_EQ(coarse_similarity(a, a), 1);
        // coarse equality <=> fine equality, since components concatenate
        // back to the syllable
        EXPECT_EQ(coarse_similarity(a, b) == 1, fine_similarity(ta, tb) == 1.0);
    }
}

TEST(EditWeight, KnownValues) {
    EXPECT_DOUBLE_EQ(pinyin_edit_weight(Syllable{"gao1"}, Syllable{"gao1"}), 1.0);
    EXPECT_DOUBLE_EQ(pinyin_edit_weight(Syllable{"gao1"}, Syllable{"gao4"}), 0.75);
    EXPECT_DOUBLE_EQ(pinyin_edit_weight(Syllable{"lan2"}, Syllable{"jian1"}), 0.4);
}

// Plain recursion; exponential but fine for short strings.
std::size_t edit_distance_recursive(std::string_view a, std::string_view b) {
    if (a.empty()) return b.size();
    if (b.empty()) return a.size();
    std::size_t best = edit_distance_recursive(a.substr(1), b.substr(1)) + (a[0] != b[0]);
    best = std::min(best, edit_distance_recursive(a.substr(1), b) + 1);
    best = std::min(best, edit_distance_recursive(a, b.substr(1)) + 1);
    return best;
}

TEST(EditWeight, MatchesRecursiveOracleOnRandomPairs) {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> len(1, 6);
    std::uniform_int_distribution<int> letter(0, 3);
    const char alphabet[] = {'a', 'n', 'g', 'o'};
    for (int k = 0; k < 1000; ++k) {
        std::string a, b;
        for (int i = 0, n = len(rng); i < n; ++i) a.push_back(alphabet[letter(rng)]);
        for (int i = 0, n = len(rng); i < n; ++i) b.push_back(alphabet[letter(rng)]);
        EXPECT_EQ(levenshtein(a, b), edit_distance_recursive(a, b)) << a << " vs " << b;

        Syllable sa{a + "1"}, sb{b + "1"};
        const double w = pinyin_edit_weight(sa, sb);
        EXPECT_GE(w, 0.0);
        EXPECT_LE(w, 1.0);
        EXPECT_EQ(w == 1.0, sa.text == sb.text);
    }
}

TEST(SyllableTable, RejectsDuplicateVocabularyEntries) {
    std::vector<std::pair<char32_t, std::string>> entries = {{U'高', "gao1"}};
    EXPECT_THROW(SyllableTable::from_entries(entries, {"g", "g"}, {"ao"}), IoError);
    EXPECT_THROW(SyllableTable::from_entries(entries, {"g"}, {"ao", "ao"}), IoError);
}

TEST(SyllableTable, LookupAndVocabularies) {
    const auto& t = shipped_table();
    EXPECT_GE(t.size(), 3000u);
    EXPECT_EQ(t.initials().front(), ""); // sentinel occupies slot 0
    EXPECT_EQ(t.initials().size(), 24u); // 23 initials + sentinel
    EXPECT_EQ(t.syllable_of(U'高').text, "gao1"); // 高
    EXPECT_THROW(t.syllable_of(U'A'), UnknownSyllable);
}

} // namespace
} // namespace scope
