#include "scope/inference.hpp"

#include <gtest/gtest.h>

#include <map>

#include "scope/confusion.hpp"
#include "scope/training.hpp"
#include "test_util.hpp"

namespace scope {
namespace {

using testutil::tiny_config;
using testutil::tiny_table;

// A mock corrector that applies staged per-pass rewrites keyed by the current
// sentence, falling back to identity.
Corrector staged_corrector(std::map<std::u32string, std::u32string> stages) {
    return [stages = std::move(stages)](const std::u32string& s) {
        auto it = stages.find(s);
        return it == stages.end() ? s : it->second;
    };
}

TEST(IterativeCorrect, ConsecutiveErrorsNeedTwoIterations) {
    // 我真户秃 -> (pass 1) 我真户涂 -> (pass 2) 我真糊涂
    const std::u32string input = utf8_decode("我真户秃");
    const std::u32string pass1 = utf8_decode("我真户涂");
    const std::u32string fixed = utf8_decode("我真糊涂");
    Corrector model = staged_corrector({{input, pass1}, {pass1, fixed}});

    CICConfig two{2, 3};
    auto [out2, trace2] = iterative_correct(input, model, two);
    EXPECT_EQ(out2, fixed);
    ASSERT_EQ(trace2.iterations.size(), 2u);
    ASSERT_EQ(trace2.iterations[0].size(), 1u);
    EXPECT_EQ(trace2.iterations[0][0].pos, 3u);
    ASSERT_EQ(trace2.iterations[1].size(), 1u);
    EXPECT_EQ(trace2.iterations[1][0].pos, 2u); // adjacent, inside window 3
    EXPECT_TRUE(trace2.reverted_positions.empty());

    CICConfig one{1, 3};
    auto [out1, trace1] = iterative_correct(input, model, one);
    EXPECT_EQ(out1, pass1); // only half corrected
    EXPECT_EQ(trace1.iterations.size(), 1u);
}

TEST(IterativeCorrect, OscillatingPositionRestoredToOriginal) {
    // 他...: pass 1 flips 他->她 (over-correction), pass 2 flips back.
    const std::u32string input = utf8_decode("他再也不会撤扬");
    const std::u32string pass1 = utf8_decode("她再也不会撤样");
    const std::u32string pass2 = utf8_decode("他再也不会这样");
    Corrector model = staged_corrector({{input, pass1}, {pass1, pass2}});

    CICConfig cic{2, 3};
    auto [out, trace] = iterative_correct(input, model, cic);
    // position 0 changed in both rounds -> restored to original 他
    EXPECT_EQ(out[0], input[0]);
    EXPECT_TRUE(trace.reverted_positions.count(0));
    // positions 5/6: edited once each, kept
    EXPECT_EQ(out[6], pass2[6]);
    EXPECT_EQ(trace.final_output, out);
}

TEST(IterativeCorrect, ModelThatNeverEditsGivesIdentityAndEmptyTrace) {
    Corrector identity = [](const std::u32string& s) { return s; };
    const std::u32string input = utf8_decode("我真糊涂");
    auto [out, trace] = iterative_correct(input, identity, CICConfig{2, 3});
    EXPECT_EQ(out, input);
    ASSERT_EQ(trace.iterations.size(), 1u); // round 2 short-circuits: nothing to extend
    EXPECT_TRUE(trace.iterations[0].empty());
    EXPECT_TRUE(trace.reverted_positions.empty());
}

TEST(IterativeCorrect, WindowConstraintBlocksFarEdits) {
    // pass 1 edits position 0; pass 2 wants to edit position 4 (distance 4),
    // which window 3 must reject.
    const std::u32string input = utf8_decode("高走安好完");
    std::u32string pass1 = input;
    pass1[0] = U'告'; // 告
    std::u32string pass2 = pass1;
    pass2[4] = U'玩'; // 玩
    Corrector model = staged_corrector({{input, pass1}, {pass1, pass2}});

    auto [out, trace] = iterative_correct(input, model, CICConfig{2, 3});
    EXPECT_EQ(out, pass1); // far edit rejected
    ASSERT_EQ(trace.iterations.size(), 2u);
    EXPECT_TRUE(trace.iterations[1].empty());

    // window 9 (radius 4) admits it
    auto [out9, trace9] = iterative_correct(input, model, CICConfig{2, 9});
    EXPECT_EQ(out9, pass2);
}

TEST(IterativeCorrect, OneIterationEqualsGreedy) {
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> ch(0, 5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    // randomized deterministic "model": per-position substitution map
    for (int trial = 0; trial < 100; ++trial) {
        const std::uint64_t salt = rng();
        Corrector model = [salt](const std::u32string& s) {
            std::u32string out = s;
            for (std::size_t i = 0; i < s.size(); ++i) {
                std::mt19937_64 h(salt ^ (static_cast<std::uint64_t>(s[i]) << 8) ^ i);
                if (std::uniform_real_distribution<double>(0.0, 1.0)(h) < 0.4)
                    out[i] = static_cast<char32_t>(U'a' + h() % 6);
            }
            return out;
        };
        std::u32string input;
        for (int i = 0, n = 1 + ch(rng); i < n + 3; ++i)
            input.push_back(static_cast<char32_t>(U'a' + ch(rng)));

        auto [iter_out, trace] = iterative_correct(input, model, CICConfig{1, 3});
        EXPECT_EQ(iter_out, model(input));
        EXPECT_TRUE(trace.reverted_positions.empty()); // no reversion at T=1
    }
}

TEST(IterativeCorrect, TraceEditsRespectWindowProperty) {
    std::mt19937_64 rng(29);
    std::uniform_int_distribution<int> ch(0, 4);
    for (int trial = 0; trial < 60; ++trial) {
        const std::uint64_t salt = rng();
        Corrector model = [salt](const std::u32string& s) {
            std::u32string out = s;
            for (std::size_t i = 0; i < s.size(); ++i) {
                std::mt19937_64 h(salt ^ (static_cast<std::uint64_t>(s[i]) * 1315423911u) ^ (i * 7));
                if (std::uniform_real_distribution<double>(0.0, 1.0)(h) < 0.5)
                    out[i] = static_cast<char32_t>(U'a' + h() % 5);
            }
            return out;
        };
        std::u32string input(10, U'a');
        for (auto& c : input) c = static_cast<char32_t>(U'a' + ch(rng));

        CICConfig cic{3, 3};
        auto [out, trace] = iterative_correct(input, model, cic);
        ASSERT_LE(trace.iterations.size(), 3u);
        for (std::size_t r = 1; r < trace.iterations.size(); ++r) {
            for (const Edit& e : trace.iterations[r]) {
                bool near_prev = false;
                for (const Edit& q : trace.iterations[r - 1])
                    near_prev |= (e.pos > q.pos ? e.pos - q.pos : q.pos - e.pos) <= 1;
                EXPECT_TRUE(near_prev) << "round " << r << " pos " << e.pos;
            }
        }
        // reverted positions must be edited in every round
        for (std::size_t p : trace.reverted_positions) {
            EXPECT_EQ(out[p], input[p]);
            for (const auto& round : trace.iterations) {
                bool found = false;
                for (const Edit& e : round) found |= e.pos == p;
                EXPECT_TRUE(found);
            }
        }
        // every edit records an actual change
        for (const auto& round : trace.iterations)
            for (const Edit& e : round) EXPECT_NE(e.previous, e.next);
    }
}

TEST(IterativeCorrect, ConfigValidation) {
    Corrector identity = [](const std::u32string& s) { return s; };
    EXPECT_THROW(iterative_correct(U"ab", identity, CICConfig{0, 3}), Error);
    EXPECT_THROW(iterative_correct(U"ab", identity, CICConfig{2, 4}), Error);
    EXPECT_THROW(iterative_correct(U"ab", identity, CICConfig{2, 0}), Error);
}

TEST(GreedyCorrect, LengthPreservedAndDeterministic) {
    SyllableTable table = tiny_table();
    Vocabulary vocab(table);
    ModelConfig cfg = tiny_config(vocab);
    ModelParameters<float> params = init_parameters<float>(cfg, 17);
    std::mt19937_64 rng(31);
    const auto chars = table_characters(table);
    std::uniform_int_distribution<std::size_t> pick(0, chars.size() - 1);
    for (int trial = 0; trial < 50; ++trial) {
        std::u32string input;
        for (int i = 0, n = 1 + static_cast<int>(rng() % 12); i < n; ++i)
            input.push_back(chars[pick(rng)]);
        std::u32string a = greedy_correct(input, params, cfg, vocab, table);
        std::u32string b = greedy_correct(input, params, cfg, vocab, table);
        EXPECT_EQ(a.size(), input.size());
        EXPECT_EQ(a, b);
        for (char32_t c : a) EXPECT_TRUE(vocab.knows_char(c)); // never PAD/UNK
    }
}

TEST(GreedyCorrect, CscOutputIndependentOfCppHeads) {
    SyllableTable table = tiny_table();
    Vocabulary vocab(table);
    ModelConfig cfg = tiny_config(vocab);
    ModelParameters<float> params = init_parameters<float>(cfg, 23);
    const std::u32string input = utf8_decode("高走安好完收告玩");
    std::u32string base = greedy_correct(input, params, cfg, vocab, table);

    ModelParameters<float> ablated = params;
    ablated.initial_head_w.setConstant(123.0f);
    ablated.final_head_w.setConstant(-55.0f);
    ablated.tone_head_w.setZero();
    ablated.pron_proj_w.setConstant(9.0f);
    ablated.pron_proj_b.setConstant(-2.0f);
    std::u32string after = greedy_correct(input, ablated, cfg, vocab, table);
    EXPECT_EQ(base, after); // bitwise identical prediction path
}

TEST(Sighan13Postprocess, RuleInstances) {
    // source 的, prediction 地 -> reverted to 的
    EXPECT_EQ(sighan13_postprocess(utf8_decode("的"), utf8_decode("地")), utf8_decode("的"));
    // untouched when no 的/地/得 involved
    EXPECT_EQ(sighan13_postprocess(utf8_decode("高走"), utf8_decode("告走")), utf8_decode("告走"));
}

TEST(Sighan13Postprocess, MixedSentenceOnlyRevertsDeEdits) {
    // positions: 0 genuine edit, 2 de->di edit (revert), 4 di->de edit (revert)
    const std::u32string src = utf8_decode("户真的走地好");
    const std::u32string pred = utf8_decode("糊真地走得好");
    const std::u32string want = utf8_decode("糊真的走地好");
    EXPECT_EQ(sighan13_postprocess(src, pred), want);
}

TEST(Sighan13Postprocess, IdempotentOnRandomInputs) {
    std::mt19937_64 rng(41);
    const char32_t pool[] = {U'的', U'地', U'得', U'高', U'走', U'安'};
    std::uniform_int_distribution<int> pick(0, 5);
    for (int trial = 0; trial < 200; ++trial) {
        std::u32string src, pred;
        for (int i = 0; i < 8; ++i) {
            src.push_back(pool[pick(rng)]);
            pred.push_back(pool[pick(rng)]);
        }
        std::u32string once = sighan13_postprocess(src, pred);
        EXPECT_EQ(sighan13_postprocess(src, once), once);
    }
}

TEST(Sighan13Postprocess, LengthMismatchThrows) {
    EXPECT_THROW(sighan13_postprocess(U"ab", U"a"), LengthMismatch);
}

TEST(GreedyOverfit, TrainedModelReproducesTarget) {
    SyllableTable table = tiny_table();
    Vocabulary vocab(table);
    ModelConfig cfg = tiny_config(vocab);
    cfg.embed_dim = 32;
    cfg.ffn_dim = 64;
    ModelParameters<float> params = init_parameters<float>(cfg, 3);
    auto pair = make_pair(utf8_decode("高走安好完"), utf8_decode("告走安好玩"), table);
    AdamState<float> opt = AdamState<float>::init(params);
    for (int step = 0; step < 200; ++step)
        train_step({pair}, params, opt, WeightingScheme::non_adaptive, cfg, vocab, 3e-3f);
    EXPECT_EQ(greedy_correct(pair.source, params, cfg, vocab, table), pair.target);

    // iterative correction with a converged model is stable
    auto [out, trace] = iterative_correct(pair.source, params, cfg, vocab, table, CICConfig{2, 3});
    EXPECT_EQ(out, pair.target);
}

} // namespace
} // namespace scope
