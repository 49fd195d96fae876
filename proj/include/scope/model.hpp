#pragma once

// Shared encoder (fused char/pinyin/glyph embeddings + transformer stack) and
// the two parallel decoders: character prediction and pronunciation
// prediction at fine (initial/final/tone) or coarse (whole syllable)
// granularity. Forward passes cache activations so the training module can
// run exact reverse-mode gradients through the whole stack.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scope/dataset.hpp"
#include "scope/error.hpp"

namespace scope {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

enum class Granularity { fine, coarse };

inline std::string to_string(Granularity g) {
    return g == Granularity::fine ? "fine" : "coarse";
}
inline Granularity granularity_from_string(const std::string& s) {
    if (s == "fine") return Granularity::fine;
    if (s == "coarse") return Granularity::coarse;
    throw Error("unknown granularity: " + s);
}

struct ModelConfig {
    int embed_dim = 64;
    int num_layers = 2;
    int num_heads = 4;
    int ffn_dim = 0; // 0 -> 4 * embed_dim
    int max_len = 192;
    Granularity granularity = Granularity::fine;

    // id-space sizes, normally taken from a Vocabulary
    int vocab_size = 0;     // characters incl. PAD/UNK
    int syllable_count = 0; // pinyin embedding rows; coarse head size
    int initial_count = 0;  // incl. the empty-initial slot
    int final_count = 0;
    int tone_count = 5;

    int ffn() const { return ffn_dim > 0 ? ffn_dim : 4 * embed_dim; }
    int head_dim() const { return embed_dim / num_heads; }

    void validate() const {
        if (embed_dim <= 0 || num_layers <= 0 || num_heads <= 0 || max_len <= 0)
            throw Error("model dimensions must be positive");
        if (embed_dim % num_heads != 0) throw Error("embed_dim must be divisible by num_heads");
        if (vocab_size <= 0 || syllable_count <= 0) throw Error("vocabulary sizes not set");
        if (granularity == Granularity::fine && (initial_count <= 0 || final_count <= 0))
            throw Error("fine granularity requires initial/final vocabularies");
    }

    static ModelConfig for_vocab(const Vocabulary& vocab) {
        ModelConfig cfg;
        cfg.vocab_size = vocab.char_count();
        cfg.syllable_count = vocab.syllable_count();
        cfg.initial_count = vocab.initial_count();
        cfg.final_count = vocab.final_count();
        cfg.tone_count = Vocabulary::tone_count();
        return cfg;
    }
};

namespace nn {

// Exact Gaussian-CDF GeLU: x * Phi(x).
template <typename S>
S gelu(S x) {
    return S(0.5) * x * (S(1) + std::erf(x / S(std::sqrt(2.0))));
}

template <typename S>
S gelu_grad(S x) {
    const S phi = std::exp(S(-0.5) * x * x) / S(std::sqrt(2.0 * M_PI));
    const S cdf = S(0.5) * (S(1) + std::erf(x / S(std::sqrt(2.0))));
    return cdf + x * phi;
}

template <typename S>
Mat<S> gelu(const Mat<S>& x) {
    return x.unaryExpr([](S v) { return gelu<S>(v); });
}

// Row-wise stable softmax.
template <typename S>
Mat<S> softmax_rows(const Mat<S>& logits) {
    Mat<S> out(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const S m = logits.row(i).maxCoeff();
        out.row(i) = (logits.row(i).array() - m).exp();
        out.row(i) /= out.row(i).sum();
    }
    return out;
}

// Row-wise log-softmax.
template <typename S>
Mat<S> log_softmax_rows(const Mat<S>& logits) {
    Mat<S> out(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const S m = logits.row(i).maxCoeff();
        const S lse = std::log((logits.row(i).array() - m).exp().sum()) + m;
        out.row(i) = logits.row(i).array() - lse;
    }
    return out;
}

// d(logits) given softmax output p and d(p), per row: p .* (dp - sum(dp .* p)).
template <typename S>
Mat<S> softmax_backward_rows(const Mat<S>& p, const Mat<S>& dp) {
    Mat<S> out(p.rows(), p.cols());
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        const S dot = p.row(i).dot(dp.row(i));
        out.row(i) = p.row(i).array() * (dp.row(i).array() - dot);
    }
    return out;
}

// out = x * W^T + b (rows are positions).
template <typename S>
Mat<S> affine(const Mat<S>& x, const Mat<S>& w, const Mat<S>& b) {
    return (x * w.transpose()).rowwise() + b.col(0).transpose();
}

// Accumulates dW/db and returns dx for `affine`.
template <typename S>
Mat<S> affine_backward(const Mat<S>& x, const Mat<S>& w, const Mat<S>& dout, Mat<S>& gw, Mat<S>& gb) {
    gw.noalias() += dout.transpose() * x;
    gb.col(0).noalias() += dout.colwise().sum().transpose();
    return dout * w;
}

} // namespace nn

template <typename S>
struct AttentionParams {
    Mat<S> wq, wk, wv, wo; // D x D
    Mat<S> bq, bk, bv, bo; // D x 1
};

template <typename S>
struct LayerParams {
    AttentionParams<S> attn;
    Mat<S> ln1_gamma, ln1_beta; // D x 1
    Mat<S> ffn_w1;              // F x D
    Mat<S> ffn_b1;              // F x 1
    Mat<S> ffn_w2;              // D x F
    Mat<S> ffn_b2;              // D x 1
    Mat<S> ln2_gamma, ln2_beta; // D x 1
};

// All learnable tensors. Fine granularity allocates the initial/final/tone
// heads; coarse allocates the whole-syllable head. Everything else is shared.
template <typename S>
struct ModelParameters {
    Mat<S> char_embedding;   // V x D
    Mat<S> pinyin_embedding; // syllables x D
    Mat<S> glyph_embedding;  // V x D (learned stand-in for rendered glyphs)
    Mat<S> fuse_w;           // D x 3D
    Mat<S> fuse_b;           // D x 1
    Mat<S> pos_embedding;    // max_len x D
    std::vector<LayerParams<S>> layers;

    Mat<S> char_proj_w, char_proj_b; // D x D, D x 1
    Mat<S> char_head_w, char_head_b; // V x D, V x 1
    Mat<S> pron_proj_w, pron_proj_b; // D x D, D x 1

    Mat<S> initial_head_w, initial_head_b;
    Mat<S> final_head_w, final_head_b;
    Mat<S> tone_head_w, tone_head_b;
    Mat<S> syllable_head_w, syllable_head_b;

    bool has_fine_heads() const { return initial_head_w.size() > 0; }
    bool has_coarse_head() const { return syllable_head_w.size() > 0; }
};

template <typename S>
struct TensorView {
    std::string name;
    Mat<S>* tensor;
};

// Stable enumeration of every tensor; ordering defines the checkpoint layout
// and the optimizer state alignment.
template <typename S>
std::vector<TensorView<S>> tensor_views(ModelParameters<S>& p) {
    std::vector<TensorView<S>> v;
    auto add = [&](std::string name, Mat<S>& t) { v.push_back({std::move(name), &t}); };
    add("char_embedding", p.char_embedding);
    add("pinyin_embedding", p.pinyin_embedding);
    add("glyph_embedding", p.glyph_embedding);
    add("fuse_w", p.fuse_w);
    add("fuse_b", p.fuse_b);
    add("pos_embedding", p.pos_embedding);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        auto& lp = p.layers[l];
        const std::string pre = "layer" + std::to_string(l) + ".";
        add(pre + "attn.wq", lp.attn.wq);
        add(pre + "attn.bq", lp.attn.bq);
        add(pre + "attn.wk", lp.attn.wk);
        add(pre + "attn.bk", lp.attn.bk);
        add(pre + "attn.wv", lp.attn.wv);
        add(pre + "attn.bv", lp.attn.bv);
        add(pre + "attn.wo", lp.attn.wo);
        add(pre + "attn.bo", lp.attn.bo);
        add(pre + "ln1.gamma", lp.ln1_gamma);
        add(pre + "ln1.beta", lp.ln1_beta);
        add(pre + "ffn.w1", lp.ffn_w1);
        add(pre + "ffn.b1", lp.ffn_b1);
        add(pre + "ffn.w2", lp.ffn_w2);
        add(pre + "ffn.b2", lp.ffn_b2);
        add(pre + "ln2.gamma", lp.ln2_gamma);
        add(pre + "ln2.beta", lp.ln2_beta);
    }
    add("char_proj_w", p.char_proj_w);
    add("char_proj_b", p.char_proj_b);
    add("char_head_w", p.char_head_w);
    add("char_head_b", p.char_head_b);
    add("pron_proj_w", p.pron_proj_w);
    add("pron_proj_b", p.pron_proj_b);
    if (p.has_fine_heads()) {
        add("initial_head_w", p.initial_head_w);
        add("initial_head_b", p.initial_head_b);
        add("final_head_w", p.final_head_w);
        add("final_head_b", p.final_head_b);
        add("tone_head_w", p.tone_head_w);
        add("tone_head_b", p.tone_head_b);
    }
    if (p.has_coarse_head()) {
        add("syllable_head_w", p.syllable_head_w);
        add("syllable_head_b", p.syllable_head_b);
    }
    return v;
}

template <typename S>
ModelParameters<S> init_parameters(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const int d = cfg.embed_dim;
    const int f = cfg.ffn();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, 0.02);
    auto randm = [&](int rows, int cols) {
        Mat<S> m(rows, cols);
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = static_cast<S>(dist(rng));
        return m;
    };
    auto zerom = [&](int rows, int cols) { return Mat<S>::Zero(rows, cols).eval(); };
    auto onem = [&](int rows, int cols) { return Mat<S>::Ones(rows, cols).eval(); };

    ModelParameters<S> p;
    p.char_embedding = randm(cfg.vocab_size, d);
    p.pinyin_embedding = randm(cfg.syllable_count, d);
    p.glyph_embedding = randm(cfg.vocab_size, d);
    p.fuse_w = randm(d, 3 * d);
    p.fuse_b = zerom(d, 1);
    p.pos_embedding = randm(cfg.max_len, d);
    p.layers.resize(static_cast<std::size_t>(cfg.num_layers));
    for (auto& lp : p.layers) {
        lp.attn.wq = randm(d, d);
        lp.attn.bq = zerom(d, 1);
        lp.attn.wk = randm(d, d);
        lp.attn.bk = zerom(d, 1);
        lp.attn.wv = randm(d, d);
        lp.attn.bv = zerom(d, 1);
        lp.attn.wo = randm(d, d);
        lp.attn.bo = zerom(d, 1);
        lp.ln1_gamma = onem(d, 1);
        lp.ln1_beta = zerom(d, 1);
        lp.ffn_w1 = randm(f, d);
        lp.ffn_b1 = zerom(f, 1);
        lp.ffn_w2 = randm(d, f);
        lp.ffn_b2 = zerom(d, 1);
        lp.ln2_gamma = onem(d, 1);
        lp.ln2_beta = zerom(d, 1);
    }
    p.char_proj_w = randm(d, d);
    p.char_proj_b = zerom(d, 1);
    p.char_head_w = randm(cfg.vocab_size, d);
    p.char_head_b = zerom(cfg.vocab_size, 1);
    p.pron_proj_w = randm(d, d);
    p.pron_proj_b = zerom(d, 1);
    if (cfg.granularity == Granularity::fine) {
        p.initial_head_w = randm(cfg.initial_count, d);
        p.initial_head_b = zerom(cfg.initial_count, 1);
        p.final_head_w = randm(cfg.final_count, d);
        p.final_head_b = zerom(cfg.final_count, 1);
        p.tone_head_w = randm(cfg.tone_count, d);
        p.tone_head_b = zerom(cfg.tone_count, 1);
    } else {
        p.syllable_head_w = randm(cfg.syllable_count, d);
        p.syllable_head_b = zerom(cfg.syllable_count, 1);
    }
    return p;
}

template <typename S>
ModelParameters<S> zeros_like(ModelParameters<S>& p) {
    ModelParameters<S> z = p;
    for (auto& view : tensor_views(z)) view.tensor->setZero();
    return z;
}

template <typename S>
bool all_finite(ModelParameters<S>& p) {
    for (auto& view : tensor_views(p))
        if (!view.tensor->allFinite()) return false;
    return true;
}

template <typename S>
std::size_t parameter_count(ModelParameters<S>& p) {
    std::size_t n = 0;
    for (auto& view : tensor_views(p)) n += static_cast<std::size_t>(view.tensor->size());
    return n;
}

template <typename S, typename Other>
ModelParameters<S> cast_parameters(ModelParameters<Other>& p) {
    ModelParameters<S> out;
    out.char_embedding = p.char_embedding.template cast<S>();
    out.pinyin_embedding = p.pinyin_embedding.template cast<S>();
    out.glyph_embedding = p.glyph_embedding.template cast<S>();
    out.fuse_w = p.fuse_w.template cast<S>();
    out.fuse_b = p.fuse_b.template cast<S>();
    out.pos_embedding = p.pos_embedding.template cast<S>();
    out.layers.resize(p.layers.size());
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        auto& a = p.layers[i];
        auto& b = out.layers[i];
        b.attn.wq = a.attn.wq.template cast<S>();
        b.attn.bq = a.attn.bq.template cast<S>();
        b.attn.wk = a.attn.wk.template cast<S>();
        b.attn.bk = a.attn.bk.template cast<S>();
        b.attn.wv = a.attn.wv.template cast<S>();
        b.attn.bv = a.attn.bv.template cast<S>();
        b.attn.wo = a.attn.wo.template cast<S>();
        b.attn.bo = a.attn.bo.template cast<S>();
        b.ln1_gamma = a.ln1_gamma.template cast<S>();
        b.ln1_beta = a.ln1_beta.template cast<S>();
        b.ffn_w1 = a.ffn_w1.template cast<S>();
        b.ffn_b1 = a.ffn_b1.template cast<S>();
        b.ffn_w2 = a.ffn_w2.template cast<S>();
        b.ffn_b2 = a.ffn_b2.template cast<S>();
        b.ln2_gamma = a.ln2_gamma.template cast<S>();
        b.ln2_beta = a.ln2_beta.template cast<S>();
    }
    out.char_proj_w = p.char_proj_w.template cast<S>();
    out.char_proj_b = p.char_proj_b.template cast<S>();
    out.char_head_w = p.char_head_w.template cast<S>();
    out.char_head_b = p.char_head_b.template cast<S>();
    out.pron_proj_w = p.pron_proj_w.template cast<S>();
    out.pron_proj_b = p.pron_proj_b.template cast<S>();
    out.initial_head_w = p.initial_head_w.template cast<S>();
    out.initial_head_b = p.initial_head_b.template cast<S>();
    out.final_head_w = p.final_head_w.template cast<S>();
    out.final_head_b = p.final_head_b.template cast<S>();
    out.tone_head_w = p.tone_head_w.template cast<S>();
    out.tone_head_b = p.tone_head_b.template cast<S>();
    out.syllable_head_w = p.syllable_head_w.template cast<S>();
    out.syllable_head_b = p.syllable_head_b.template cast<S>();
    return out;
}

// ---------------------------------------------------------------------------
// Forward caches

template <typename S>
struct LayerNormCache {
    Mat<S> xhat;    // n x D
    Vec<S> inv_std; // n
};

template <typename S>
struct LayerCache {
    Mat<S> input;
    Mat<S> q, k, v;
    std::vector<Mat<S>> attn; // per head, n x n
    Mat<S> attn_concat;
    Mat<S> attn_proj;
    Mat<S> res1;
    LayerNormCache<S> ln1;
    Mat<S> ln1_out;
    Mat<S> ffn_pre;
    Mat<S> ffn_out;
    Mat<S> res2;
    LayerNormCache<S> ln2;
};

template <typename S>
struct EncoderCache {
    std::vector<int> char_ids;
    std::vector<int> pinyin_ids;
    Mat<S> concat; // n x 3D
    Mat<S> embed;  // n x D
    std::vector<LayerCache<S>> layers;
    Mat<S> H; // n x D
};

namespace nn {

template <typename S>
Mat<S> layer_norm(const Mat<S>& x, const Mat<S>& gamma, const Mat<S>& beta, LayerNormCache<S>& cache) {
    constexpr S eps = S(1e-5);
    const Eigen::Index n = x.rows(), d = x.cols();
    cache.xhat.resize(n, d);
    cache.inv_std.resize(n);
    Mat<S> out(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const S mean = x.row(i).mean();
        const S var = (x.row(i).array() - mean).square().mean();
        const S inv = S(1) / std::sqrt(var + eps);
        cache.inv_std(i) = inv;
        cache.xhat.row(i) = (x.row(i).array() - mean) * inv;
        out.row(i) = cache.xhat.row(i).array() * gamma.col(0).transpose().array() +
                     beta.col(0).transpose().array();
    }
    return out;
}

template <typename S>
Mat<S> layer_norm_backward(const Mat<S>& dout, const LayerNormCache<S>& cache, const Mat<S>& gamma,
                           Mat<S>& ggamma, Mat<S>& gbeta) {
    const Eigen::Index n = dout.rows(), d = dout.cols();
    Mat<S> dx(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        ggamma.col(0).array() += (dout.row(i).array() * cache.xhat.row(i).array()).transpose();
        gbeta.col(0).array() += dout.row(i).transpose().array();
        Eigen::Array<S, 1, Eigen::Dynamic> dy = dout.row(i).array() * gamma.col(0).transpose().array();
        const S mean_dy = dy.mean();
        const S mean_dy_xhat = (dy * cache.xhat.row(i).array()).mean();
        dx.row(i) =
            cache.inv_std(i) * (dy - mean_dy - cache.xhat.row(i).array() * mean_dy_xhat);
    }
    return dx;
}

} // namespace nn

// ---------------------------------------------------------------------------
// Encoder

// Contextualizes one sentence: per character, char/pinyin/glyph embeddings
// are concatenated, fused to D dims, position embedding added, then passed
// through the transformer stack. Returns H (n x D).
template <typename S>
Mat<S> encode(const std::vector<int>& char_ids, const std::vector<int>& pinyin_ids,
              const ModelParameters<S>& params, const ModelConfig& cfg,
              EncoderCache<S>* cache = nullptr) {
    const auto n = static_cast<Eigen::Index>(char_ids.size());
    if (char_ids.size() != pinyin_ids.size()) throw LengthMismatch("char/pinyin id lengths differ");
    if (n == 0) throw LengthMismatch("cannot encode an empty sequence");
    if (n > cfg.max_len) throw SequenceTooLong(char_ids.size(), static_cast<std::size_t>(cfg.max_len));
    const int d = cfg.embed_dim;
    const int heads = cfg.num_heads;
    const int dk = cfg.head_dim();
    const S scale = S(1) / std::sqrt(static_cast<S>(dk));

    Mat<S> concat(n, 3 * d);
    for (Eigen::Index i = 0; i < n; ++i) {
        concat.row(i).segment(0, d) = params.char_embedding.row(char_ids[static_cast<std::size_t>(i)]);
        concat.row(i).segment(d, d) = params.pinyin_embedding.row(pinyin_ids[static_cast<std::size_t>(i)]);
        concat.row(i).segment(2 * d, d) = params.glyph_embedding.row(char_ids[static_cast<std::size_t>(i)]);
    }
    Mat<S> x = nn::affine(concat, params.fuse_w, params.fuse_b);
    x += params.pos_embedding.topRows(n);

    if (cache) {
        cache->char_ids = char_ids;
        cache->pinyin_ids = pinyin_ids;
        cache->concat = concat;
        cache->embed = x;
        cache->layers.assign(params.layers.size(), LayerCache<S>{});
    }

    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& lp = params.layers[l];
        LayerCache<S> local;
        LayerCache<S>& lc = cache ? cache->layers[l] : local;
        lc.input = x;
        lc.q = nn::affine(x, lp.attn.wq, lp.attn.bq);
        lc.k = nn::affine(x, lp.attn.wk, lp.attn.bk);
        lc.v = nn::affine(x, lp.attn.wv, lp.attn.bv);
        lc.attn.resize(static_cast<std::size_t>(heads));
        lc.attn_concat.resize(n, d);
        for (int h = 0; h < heads; ++h) {
            auto qh = lc.q.middleCols(h * dk, dk);
            auto kh = lc.k.middleCols(h * dk, dk);
            auto vh = lc.v.middleCols(h * dk, dk);
            Mat<S> scores = (qh * kh.transpose()) * scale;
            lc.attn[static_cast<std::size_t>(h)] = nn::softmax_rows(scores);
            lc.attn_concat.middleCols(h * dk, dk).noalias() =
                lc.attn[static_cast<std::size_t>(h)] * vh;
        }
        lc.attn_proj = nn::affine(lc.attn_concat, lp.attn.wo, lp.attn.bo);
        lc.res1 = lc.input + lc.attn_proj;
        lc.ln1_out = nn::layer_norm(lc.res1, lp.ln1_gamma, lp.ln1_beta, lc.ln1);
        lc.ffn_pre = nn::affine(lc.ln1_out, lp.ffn_w1, lp.ffn_b1);
        lc.ffn_out = nn::affine(nn::gelu(lc.ffn_pre), lp.ffn_w2, lp.ffn_b2);
        lc.res2 = lc.ln1_out + lc.ffn_out;
        x = nn::layer_norm(lc.res2, lp.ln2_gamma, lp.ln2_beta, lc.ln2);
    }
    if (cache) cache->H = x;
    return x;
}

// Sentence-level convenience wrapper.
template <typename S>
Mat<S> encode(const std::u32string& sentence, const std::vector<Syllable>& source_pinyin,
              const Vocabulary& vocab, const ModelParameters<S>& params, const ModelConfig& cfg,
              EncoderCache<S>* cache = nullptr) {
    return encode(vocab.char_ids(sentence), vocab.syllable_ids(source_pinyin), params, cfg, cache);
}

// Propagates dH back through the encoder, accumulating into `grads`.
template <typename S>
void encode_backward(const EncoderCache<S>& cache, const Mat<S>& dH,
                     const ModelParameters<S>& params, const ModelConfig& cfg,
                     ModelParameters<S>& grads) {
    const Eigen::Index n = dH.rows();
    const int d = cfg.embed_dim;
    const int heads = cfg.num_heads;
    const int dk = cfg.head_dim();
    const S scale = S(1) / std::sqrt(static_cast<S>(dk));

    Mat<S> dx = dH;
    for (std::size_t li = params.layers.size(); li-- > 0;) {
        const auto& lp = params.layers[li];
        auto& gl = grads.layers[li];
        const auto& lc = cache.layers[li];

        Mat<S> dres2 = nn::layer_norm_backward(dx, lc.ln2, lp.ln2_gamma, gl.ln2_gamma, gl.ln2_beta);
        Mat<S> dln1_out = dres2;
        // FFN
        Mat<S> act = nn::gelu(lc.ffn_pre);
        Mat<S> dact = nn::affine_backward(act, lp.ffn_w2, dres2, gl.ffn_w2, gl.ffn_b2);
        Mat<S> dpre = dact.array() * lc.ffn_pre.unaryExpr([](S v) { return nn::gelu_grad<S>(v); }).array();
        dln1_out += nn::affine_backward(lc.ln1_out, lp.ffn_w1, dpre, gl.ffn_w1, gl.ffn_b1);

        Mat<S> dres1 = nn::layer_norm_backward(dln1_out, lc.ln1, lp.ln1_gamma, gl.ln1_gamma, gl.ln1_beta);
        Mat<S> dinput = dres1;
        // attention output projection
        Mat<S> dconcat =
            nn::affine_backward(lc.attn_concat, lp.attn.wo, dres1, gl.attn.wo, gl.attn.bo);
        Mat<S> dq = Mat<S>::Zero(n, d), dkm = Mat<S>::Zero(n, d), dv = Mat<S>::Zero(n, d);
        for (int h = 0; h < heads; ++h) {
            const auto& a = lc.attn[static_cast<std::size_t>(h)];
            auto qh = lc.q.middleCols(h * dk, dk);
            auto kh = lc.k.middleCols(h * dk, dk);
            auto vh = lc.v.middleCols(h * dk, dk);
            Mat<S> doh = dconcat.middleCols(h * dk, dk);
            Mat<S> da = doh * vh.transpose();
            dv.middleCols(h * dk, dk).noalias() += a.transpose() * doh;
            Mat<S> dscores = nn::softmax_backward_rows(a, da) * scale;
            dq.middleCols(h * dk, dk).noalias() += dscores * kh;
            dkm.middleCols(h * dk, dk).noalias() += dscores.transpose() * qh;
        }
        dinput += nn::affine_backward(lc.input, lp.attn.wq, dq, gl.attn.wq, gl.attn.bq);
        dinput += nn::affine_backward(lc.input, lp.attn.wk, dkm, gl.attn.wk, gl.attn.bk);
        dinput += nn::affine_backward(lc.input, lp.attn.wv, dv, gl.attn.wv, gl.attn.bv);
        dx = dinput;
    }

    // embedding fusion + tables
    grads.pos_embedding.topRows(n) += dx;
    Mat<S> dconcat3 = nn::affine_backward(cache.concat, params.fuse_w, dx, grads.fuse_w, grads.fuse_b);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int cid = cache.char_ids[static_cast<std::size_t>(i)];
        const int pid = cache.pinyin_ids[static_cast<std::size_t>(i)];
        grads.char_embedding.row(cid) += dconcat3.row(i).segment(0, d);
        grads.pinyin_embedding.row(pid) += dconcat3.row(i).segment(d, d);
        grads.glyph_embedding.row(cid) += dconcat3.row(i).segment(2 * d, d);
    }
}

// ---------------------------------------------------------------------------
// Decoders

// h_i -> GeLU(W^(c) h_i + b^(c)), the character-specific feature space.
template <typename S>
Mat<S> char_projection(const Mat<S>& h, const ModelParameters<S>& params) {
    return nn::gelu(nn::affine(h, params.char_proj_w, params.char_proj_b).eval());
}

// Character decoder logits over the vocabulary (softmax gives p(y_i | X)).
template <typename S>
Mat<S> char_logits(const Mat<S>& h, const ModelParameters<S>& params) {
    return nn::affine(char_projection(h, params), params.char_head_w, params.char_head_b);
}

// h_i -> GeLU(W^(p) h_i + b^(p)), the pronunciation-specific feature space.
// Public because the adaptive weighting consumes it for both X and Y.
template <typename S>
Mat<S> pron_projection(const Mat<S>& h, const ModelParameters<S>& params) {
    return nn::gelu(nn::affine(h, params.pron_proj_w, params.pron_proj_b).eval());
}

// Fine granularity: one logit matrix per pronunciation component; coarse:
// a single whole-syllable matrix.
template <typename S>
struct PronLogits {
    Granularity granularity = Granularity::fine;
    Mat<S> initial, final_part, tone; // fine
    Mat<S> syllable;                  // coarse
};

template <typename S>
PronLogits<S> pron_logits(const Mat<S>& hp, const ModelParameters<S>& params,
                          const ModelConfig& cfg) {
    PronLogits<S> out;
    out.granularity = cfg.granularity;
    if (cfg.granularity == Granularity::fine) {
        if (!params.has_fine_heads())
            throw GranularityMismatch("fine granularity requested but model has no component heads");
        out.initial = nn::affine(hp, params.initial_head_w, params.initial_head_b);
        out.final_part = nn::affine(hp, params.final_head_w, params.final_head_b);
        out.tone = nn::affine(hp, params.tone_head_w, params.tone_head_b);
    } else {
        if (!params.has_coarse_head())
            throw GranularityMismatch("coarse granularity requested but model has no syllable head");
        out.syllable = nn::affine(hp, params.syllable_head_w, params.syllable_head_b);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Combined forward/backward used by training.

template <typename S>
struct ModelForward {
    EncoderCache<S> enc;
    Mat<S> hc_pre, hc;        // char projection pre-activation / output
    Mat<S> char_logit;        // n x V
    Mat<S> hp_pre, hp;        // pron projection
    PronLogits<S> pron;
};

template <typename S>
ModelForward<S> forward_model(const std::vector<int>& char_ids, const std::vector<int>& pinyin_ids,
                              const ModelParameters<S>& params, const ModelConfig& cfg) {
    ModelForward<S> f;
    Mat<S> h = encode(char_ids, pinyin_ids, params, cfg, &f.enc);
    f.hc_pre = nn::affine(h, params.char_proj_w, params.char_proj_b);
    f.hc = nn::gelu(f.hc_pre);
    f.char_logit = nn::affine(f.hc, params.char_head_w, params.char_head_b);
    f.hp_pre = nn::affine(h, params.pron_proj_w, params.pron_proj_b);
    f.hp = nn::gelu(f.hp_pre);
    f.pron = pron_logits(f.hp, params, cfg);
    return f;
}

// Backward from logit gradients through both decoders and the encoder.
// d_pron members may be empty when a branch carries no loss.
template <typename S>
void backward_model(const ModelForward<S>& f, const Mat<S>& d_char_logits,
                    const PronLogits<S>& d_pron, const ModelParameters<S>& params,
                    const ModelConfig& cfg, ModelParameters<S>& grads) {
    const Mat<S>& h = f.enc.H;
    Mat<S> dh = Mat<S>::Zero(h.rows(), h.cols());

    if (d_char_logits.size() > 0) {
        Mat<S> dhc = nn::affine_backward(f.hc, params.char_head_w, d_char_logits,
                                         grads.char_head_w, grads.char_head_b);
        Mat<S> dhc_pre =
            dhc.array() * f.hc_pre.unaryExpr([](S v) { return nn::gelu_grad<S>(v); }).array();
        dh += nn::affine_backward(h, params.char_proj_w, dhc_pre, grads.char_proj_w,
                                  grads.char_proj_b);
    }

    Mat<S> dhp = Mat<S>::Zero(h.rows(), h.cols());
    bool has_pron = false;
    if (cfg.granularity == Granularity::fine) {
        if (d_pron.initial.size() > 0) {
            dhp += nn::affine_backward(f.hp, params.initial_head_w, d_pron.initial,
                                       grads.initial_head_w, grads.initial_head_b);
            dhp += nn::affine_backward(f.hp, params.final_head_w, d_pron.final_part,
                                       grads.final_head_w, grads.final_head_b);
            dhp += nn::affine_backward(f.hp, params.tone_head_w, d_pron.tone, grads.tone_head_w,
                                       grads.tone_head_b);
            has_pron = true;
        }
    } else if (d_pron.syllable.size() > 0) {
        dhp += nn::affine_backward(f.hp, params.syllable_head_w, d_pron.syllable,
                                   grads.syllable_head_w, grads.syllable_head_b);
        has_pron = true;
    }
    if (has_pron) {
        Mat<S> dhp_pre =
            dhp.array() * f.hp_pre.unaryExpr([](S v) { return nn::gelu_grad<S>(v); }).array();
        dh += nn::affine_backward(h, params.pron_proj_w, dhp_pre, grads.pron_proj_w,
                                  grads.pron_proj_b);
    }

    encode_backward(f.enc, dh, params, cfg, grads);
}

} // namespace scope
