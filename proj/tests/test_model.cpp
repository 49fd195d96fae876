#include "scope/model.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace scope {
namespace {

using testutil::tiny_config;
using testutil::tiny_table;

struct Fixture {
    SyllableTable table = tiny_table();
    Vocabulary vocab{table};
    ModelConfig cfg = tiny_config(vocab);
    ModelParameters<double> params = init_parameters<double>(cfg, 42);

    std::pair<std::vector<int>, std::vector<int>> ids(const std::u32string& s) const {
        std::vector<Syllable> syl;
        for (char32_t c : s) syl.push_back(table.syllable_of(c));
        return {vocab.char_ids(s), vocab.syllable_ids(syl)};
    }
};

TEST(Encode, SingleCharacterGivesOneRow) {
    Fixture f;
    auto [cids, pids] = f.ids(utf8_decode("高"));
    Mat<double> h = encode(cids, pids, f.params, f.cfg);
    EXPECT_EQ(h.rows(), 1);
    EXPECT_EQ(h.cols(), f.cfg.embed_dim);
    EXPECT_TRUE(h.allFinite());
}

TEST(Encode, DeterministicInEvalMode) {
    Fixture f;
    auto [cids, pids] = f.ids(utf8_decode("高告完玩"));
    Mat<double> a = encode(cids, pids, f.params, f.cfg);
    Mat<double> b = encode(cids, pids, f.params, f.cfg);
    EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Encode, PermutingDistinctCharactersChangesRows) {
    Fixture f;
    auto [cids, pids] = f.ids(utf8_decode("高走安好"));
    auto cids2 = cids;
    auto pids2 = pids;
    std::swap(cids2[0], cids2[2]);
    std::swap(pids2[0], pids2[2]);
    Mat<double> a = encode(cids, pids, f.params, f.cfg);
    Mat<double> b = encode(cids2, pids2, f.params, f.cfg);
    EXPECT_GT((a.row(0) - b.row(0)).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_GT((a.row(2) - b.row(2)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Encode, RowCountAlwaysMatchesInputLength) {
    Fixture f;
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> len(1, 16);
    std::uniform_int_distribution<int> cid(2, f.vocab.char_count() - 1);
    for (int k = 0; k < 50; ++k) {
        const int n = len(rng);
        std::vector<int> cids(n), pids(n);
        for (int i = 0; i < n; ++i) {
            cids[i] = cid(rng);
            pids[i] = f.vocab.syllable_of_char_id(cids[i]);
        }
        EXPECT_EQ(encode(cids, pids, f.params, f.cfg).rows(), n);
    }
}

TEST(Encode, RejectsTooLongAndEmpty) {
    Fixture f;
    std::vector<int> cids(f.cfg.max_len + 1, 2), pids(f.cfg.max_len + 1, 1);
    EXPECT_THROW(encode(cids, pids, f.params, f.cfg), SequenceTooLong);
    EXPECT_THROW(encode(std::vector<int>{}, std::vector<int>{}, f.params, f.cfg), LengthMismatch);
}

TEST(Encode, UnknownCharactersMapToUnk) {
    Fixture f;
    std::u32string s = utf8_decode("高X走");
    std::vector<int> cids = f.vocab.char_ids(s);
    EXPECT_EQ(cids[1], Vocabulary::kUnk);
    std::vector<int> pids = {f.vocab.syllable_of_char_id(cids[0]), Vocabulary::kNoPinyin,
                             f.vocab.syllable_of_char_id(cids[2])};
    EXPECT_NO_THROW(encode(cids, pids, f.params, f.cfg));
}

TEST(CharProjection, ZeroWeightsGiveZeroMatrix) {
    Fixture f;
    f.params.char_proj_w.setZero();
    f.params.char_proj_b.setZero();
    Mat<double> h = Mat<double>::Random(3, f.cfg.embed_dim);
    Mat<double> hc = char_projection(h, f.params);
    EXPECT_EQ(hc.rows(), 3);
    EXPECT_EQ(hc.cols(), f.cfg.embed_dim);
    EXPECT_DOUBLE_EQ(hc.cwiseAbs().maxCoeff(), 0.0); // GeLU(0) = 0
}

TEST(PronProjection, ZeroWeightsGiveZeroMatrixAndShapeKept) {
    Fixture f;
    f.params.pron_proj_w.setZero();
    f.params.pron_proj_b.setZero();
    Mat<double> h = Mat<double>::Random(5, f.cfg.embed_dim);
    Mat<double> hp = pron_projection(h, f.params);
    EXPECT_EQ(hp.rows(), 5);
    EXPECT_EQ(hp.cols(), f.cfg.embed_dim);
    EXPECT_DOUBLE_EQ(hp.cwiseAbs().maxCoeff(), 0.0);
}

// Scalar-by-scalar oracle for GeLU(W h + b) on a 2x2 case.
TEST(Projections, HandComputedTwoByTwoMatchesScalarOracle) {
    SyllableTable table = tiny_table();
    Vocabulary vocab(table);
    ModelConfig cfg = ModelConfig::for_vocab(vocab);
    cfg.embed_dim = 2;
    cfg.num_heads = 1;
    cfg.num_layers = 1;
    cfg.max_len = 4;
    ModelParameters<double> params = init_parameters<double>(cfg, 1);
    params.char_proj_w << 0.5, -1.0, 2.0, 0.25;
    params.char_proj_b << 0.1, -0.2;
    params.pron_proj_w = params.char_proj_w;
    params.pron_proj_b = params.char_proj_b;

    Mat<double> h(2, 2);
    h << 1.0, -0.5, 0.3, 2.0;

    Mat<double> got_c = char_projection(h, params);
    Mat<double> got_p = pron_projection(h, params);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double pre = params.char_proj_b(j, 0);
            for (int k = 0; k < 2; ++k) pre += params.char_proj_w(j, k) * h(i, k);
            const double expect = 0.5 * pre * (1.0 + std::erf(pre / std::sqrt(2.0)));
            EXPECT_NEAR(got_c(i, j), expect, 1e-14);
            EXPECT_NEAR(got_p(i, j), expect, 1e-14);
        }
}

TEST(CharLogits, SoftmaxRowsSumToOne) {
    Fixture f;
    auto [cids, pids] = f.ids(utf8_decode("高告完玩收走"));
    Mat<double> logits = char_logits(encode(cids, pids, f.params, f.cfg).eval(), f.params);
    EXPECT_EQ(logits.cols(), f.cfg.vocab_size);
    Mat<double> p = nn::softmax_rows(logits);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-6);
        EXPECT_GE(p.row(i).minCoeff(), 0.0);
    }
}

TEST(PronLogits, FineEmitsThreeDistributionsPerPosition) {
    Fixture f;
    auto [cids, pids] = f.ids(utf8_decode("高告完"));
    Mat<double> hp = pron_projection(encode(cids, pids, f.params, f.cfg).eval(), f.params);
    PronLogits<double> out = pron_logits(hp, f.params, f.cfg);
    EXPECT_EQ(out.initial.rows(), 3);
    EXPECT_EQ(out.initial.cols(), f.cfg.initial_count);
    EXPECT_EQ(out.final_part.cols(), f.cfg.final_count);
    EXPECT_EQ(out.tone.cols(), 5);
    EXPECT_EQ(out.syllable.size(), 0);
    for (const Mat<double>* m : {&out.initial, &out.final_part, &out.tone}) {
        Mat<double> p = nn::softmax_rows(*m);
        for (Eigen::Index i = 0; i < p.rows(); ++i) EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-6);
    }
}

TEST(PronLogits, CoarseEmitsOneSyllableDistribution) {
    SyllableTable table = tiny_table();
    Vocabulary vocab(table);
    ModelConfig cfg = tiny_config(vocab, Granularity::coarse);
    ModelParameters<double> params = init_parameters<double>(cfg, 9);
    std::vector<int> cids = {2, 3, 4, 5};
    std::vector<int> pids = {1, 2, 3, 1};
    Mat<double> hp = pron_projection(encode(cids, pids, params, cfg).eval(), params);
    PronLogits<double> out = pron_logits(hp, params, cfg);
    EXPECT_EQ(out.syllable.rows(), 4);
    EXPECT_EQ(out.syllable.cols(), cfg.syllable_count);
    EXPECT_EQ(out.initial.size(), 0);
    Mat<double> p = nn::softmax_rows(out.syllable);
    for (Eigen::Index i = 0; i < p.rows(); ++i) EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-6);
}

TEST(PronLogits, GranularityMismatchThrows) {
    Fixture f; // fine-grained params
    ModelConfig coarse_cfg = f.cfg;
    coarse_cfg.granularity = Granularity::coarse;
    Mat<double> hp = Mat<double>::Random(2, f.cfg.embed_dim);
    EXPECT_THROW(pron_logits(hp, f.params, coarse_cfg), GranularityMismatch);

    ModelParameters<double> coarse_params = init_parameters<double>(coarse_cfg, 3);
    EXPECT_THROW(pron_logits(hp, coarse_params, f.cfg), GranularityMismatch);
}

TEST(ModelParameters, TensorEnumerationAndInit) {
    Fixture f;
    auto views = tensor_views(f.params);
    EXPECT_GT(views.size(), 20u);
    EXPECT_TRUE(all_finite(f.params));
    EXPECT_GT(parameter_count(f.params), 5000u);
    // deterministic init
    ModelParameters<double> again = init_parameters<double>(f.cfg, 42);
    auto va = tensor_views(f.params);
    auto vb = tensor_views(again);
    for (std::size_t i = 0; i < va.size(); ++i) {
        ASSERT_EQ(va[i].name, vb[i].name);
        EXPECT_EQ((*va[i].tensor - *vb[i].tensor).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(ModelConfig, Validation) {
    Fixture f;
    ModelConfig bad = f.cfg;
    bad.embed_dim = 15; // not divisible by 4 heads
    EXPECT_THROW(bad.validate(), Error);
    ModelConfig unset;
    EXPECT_THROW(unset.validate(), Error);
}

} // namespace
} // namespace scope
