#pragma once

// Losses, the three CPP task weighting schemes, the adaptively weighted total
// loss with its forward-only target branch, and the pre-train/fine-tune
// loops.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scope/dataset.hpp"
#include "scope/error.hpp"
#include "scope/model.hpp"

namespace scope {

enum class WeightingScheme { non_adaptive, partially_adaptive, fully_adaptive };

inline std::string to_string(WeightingScheme s) {
    switch (s) {
        case WeightingScheme::non_adaptive: return "non";
        case WeightingScheme::partially_adaptive: return "part";
        case WeightingScheme::fully_adaptive: return "full";
    }
    return "?";
}

inline WeightingScheme scheme_from_string(const std::string& s) {
    if (s == "non" || s == "non-adapt") return WeightingScheme::non_adaptive;
    if (s == "part" || s == "part-adapt") return WeightingScheme::partially_adaptive;
    if (s == "full" || s == "full-adapt") return WeightingScheme::fully_adaptive;
    throw Error("unknown weighting scheme: " + s);
}

// w(c) = exp(-(c - 1)^2); strictly increasing on [-1, 1] with w(1) = 1.
template <typename S>
S adaptive_weight_from_cosine(S c) {
    const S d = c - S(1);
    return std::exp(-d * d);
}

// Target ids for the fine-grained pronunciation heads.
struct FineTargets {
    std::vector<int> initial, final_part, tone;
};

inline FineTargets fine_targets(const SentencePair& pair, const Vocabulary& vocab) {
    FineTargets t;
    t.initial.reserve(pair.size());
    t.final_part.reserve(pair.size());
    t.tone.reserve(pair.size());
    for (const auto& tri : pair.target_pinyin) {
        auto ids = vocab.triplet_ids(tri);
        t.initial.push_back(ids.initial);
        t.final_part.push_back(ids.final_part);
        t.tone.push_back(ids.tone);
    }
    return t;
}

inline std::vector<int> coarse_targets(const SentencePair& pair, const Vocabulary& vocab) {
    std::vector<int> ids;
    ids.reserve(pair.size());
    for (const auto& tri : pair.target_pinyin) ids.push_back(vocab.syllable_id(tri.recompose()));
    return ids;
}

// ---------------------------------------------------------------------------
// Losses

// L^(c)_i = -log p(y_i | X), per position.
template <typename S>
Vec<S> char_loss(const Mat<S>& logits, const std::vector<int>& target_ids) {
    if (logits.rows() != static_cast<Eigen::Index>(target_ids.size()))
        throw LengthMismatch("char_loss: logits/targets length mismatch");
    Mat<S> logp = nn::log_softmax_rows(logits);
    Vec<S> out(logits.rows());
    for (Eigen::Index i = 0; i < logits.rows(); ++i)
        out(i) = -logp(i, target_ids[static_cast<std::size_t>(i)]);
    return out;
}

// Fine: L^(p)_i = -(1/3) sum over {initial, final, tone} of log p(. | X);
// coarse: plain cross-entropy on the syllable head.
template <typename S>
Vec<S> pron_loss(const PronLogits<S>& logits, const FineTargets& fine,
                 const std::vector<int>& coarse, Granularity granularity) {
    if (granularity == Granularity::fine) {
        if (logits.granularity != Granularity::fine || logits.initial.size() == 0)
            throw GranularityMismatch("pron_loss: fine targets but no fine logits");
        const auto n = logits.initial.rows();
        if (static_cast<Eigen::Index>(fine.initial.size()) != n)
            throw LengthMismatch("pron_loss: fine target length mismatch");
        Mat<S> li = nn::log_softmax_rows(logits.initial);
        Mat<S> lf = nn::log_softmax_rows(logits.final_part);
        Mat<S> lt = nn::log_softmax_rows(logits.tone);
        Vec<S> out(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            out(i) = -(li(i, fine.initial[k]) + lf(i, fine.final_part[k]) + lt(i, fine.tone[k])) / S(3);
        }
        return out;
    }
    if (logits.granularity != Granularity::coarse || logits.syllable.size() == 0)
        throw GranularityMismatch("pron_loss: coarse targets but no syllable logits");
    const auto n = logits.syllable.rows();
    if (static_cast<Eigen::Index>(coarse.size()) != n)
        throw LengthMismatch("pron_loss: coarse target length mismatch");
    Mat<S> ls = nn::log_softmax_rows(logits.syllable);
    Vec<S> out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = -ls(i, coarse[static_cast<std::size_t>(i)]);
    return out;
}

// Joint log-probability of a triplet under the factorized fine heads: the
// sum of the three component log-probabilities.
template <typename S>
S triplet_log_prob(const PronLogits<S>& logits, Eigen::Index i, int initial, int final_part,
                   int tone) {
    Mat<S> li = nn::log_softmax_rows(logits.initial);
    Mat<S> lf = nn::log_softmax_rows(logits.final_part);
    Mat<S> lt = nn::log_softmax_rows(logits.tone);
    return li(i, initial) + lf(i, final_part) + lt(i, tone);
}

// Per-position losses plus the adaptively weighted total of Eq.-(10) form:
// total = mean_i(char_i + w_i * pron_i).
template <typename S>
struct LossBreakdown {
    Vec<S> char_losses;
    Vec<S> pron_losses;
    Vec<S> weights;
    S total = S(0);
};

template <typename S>
LossBreakdown<S> total_loss(const Vec<S>& char_losses, const Vec<S>& pron_losses,
                            const Vec<S>& weights) {
    if (char_losses.size() != pron_losses.size() || char_losses.size() != weights.size())
        throw LengthMismatch("total_loss: component lengths disagree");
    if (char_losses.size() == 0) throw LengthMismatch("total_loss: empty loss vectors");
    LossBreakdown<S> b;
    b.char_losses = char_losses;
    b.pron_losses = pron_losses;
    b.weights = weights;
    b.total = (char_losses.array() + weights.array() * pron_losses.array()).mean();
    return b;
}

// ---------------------------------------------------------------------------
// Weighting schemes

// Cosine between rows, clamped to [-1, 1] against rounding excursions, with
// the convention that two zero rows are identical (cos = 1) and a single
// zero row is orthogonal (cos = 0).
template <typename S>
Vec<S> row_cosines(const Mat<S>& a, const Mat<S>& b) {
    if (a.rows() != b.rows()) throw LengthMismatch("row_cosines: row count mismatch");
    Vec<S> out(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const S na = a.row(i).norm();
        const S nb = b.row(i).norm();
        if (na == S(0) && nb == S(0)) out(i) = S(1);
        else if (na == S(0) || nb == S(0)) out(i) = S(0);
        else out(i) = std::clamp(a.row(i).dot(b.row(i)) / (na * nb), S(-1), S(1));
    }
    return out;
}

// Fully-adaptive weights from already-computed pronunciation projections of
// the source and target sentences. The caller must treat the result as a
// constant: nothing here participates in backpropagation.
template <typename S>
Vec<S> weights_from_projections(const Mat<S>& hp_x, const Mat<S>& hp_y) {
    Vec<S> cos = row_cosines(hp_x, hp_y);
    return cos.unaryExpr([](S c) { return adaptive_weight_from_cosine(c); });
}

// Per-position CPP task weights under the selected scheme. For the
// fully-adaptive scheme the target sentence Y is encoded with the same
// encoder (fed Y's own pinyin) and projected into the pronunciation space;
// the whole branch is forward-only and contributes no gradient.
template <typename S>
Vec<S> adaptive_weights(const SentencePair& pair, const ModelParameters<S>& params,
                        const ModelConfig& cfg, const Vocabulary& vocab, WeightingScheme scheme) {
    const auto n = static_cast<Eigen::Index>(pair.size());
    switch (scheme) {
        case WeightingScheme::non_adaptive:
            return Vec<S>::Ones(n);
        case WeightingScheme::partially_adaptive: {
            Vec<S> w(n);
            if (pair.edit_weights.size() == pair.size()) {
                for (Eigen::Index i = 0; i < n; ++i)
                    w(i) = static_cast<S>(pair.edit_weights[static_cast<std::size_t>(i)]);
            } else {
                for (Eigen::Index i = 0; i < n; ++i) {
                    const auto k = static_cast<std::size_t>(i);
                    w(i) = static_cast<S>(pinyin_edit_weight(
                        pair.source_pinyin[k], Syllable{pair.target_pinyin[k].recompose()}));
                }
            }
            return w;
        }
        case WeightingScheme::fully_adaptive: {
            if (pair.target.empty())
                throw MissingTarget("fully-adaptive weighting requires the target sentence");
            Mat<S> hx = encode(vocab.char_ids(pair.source), vocab.syllable_ids(pair.source_pinyin),
                               params, cfg);
            std::vector<Syllable> target_syl;
            target_syl.reserve(pair.size());
            for (const auto& t : pair.target_pinyin) target_syl.push_back(Syllable{t.recompose()});
            Mat<S> hy = encode(vocab.char_ids(pair.target), vocab.syllable_ids(target_syl), params,
                               cfg);
            return weights_from_projections(pron_projection(hx, params).eval(),
                                            pron_projection(hy, params).eval());
        }
    }
    throw Error("unreachable scheme");
}

// ---------------------------------------------------------------------------
// Optimizer

template <typename S>
struct AdamState {
    ModelParameters<S> m, v;
    long step = 0;
    S beta1 = S(0.9);
    S beta2 = S(0.999);
    S eps = S(1e-8);

    static AdamState init(ModelParameters<S>& params) {
        AdamState st;
        st.m = zeros_like(params);
        st.v = zeros_like(params);
        return st;
    }
};

template <typename S>
void adam_update(ModelParameters<S>& params, ModelParameters<S>& grads, AdamState<S>& state,
                 S lr) {
    ++state.step;
    const S bc1 = S(1) - std::pow(state.beta1, static_cast<S>(state.step));
    const S bc2 = S(1) - std::pow(state.beta2, static_cast<S>(state.step));
    auto pv = tensor_views(params);
    auto gv = tensor_views(grads);
    auto mv = tensor_views(state.m);
    auto vv = tensor_views(state.v);
    for (std::size_t t = 0; t < pv.size(); ++t) {
        auto& p = *pv[t].tensor;
        auto& g = *gv[t].tensor;
        auto& m = *mv[t].tensor;
        auto& v = *vv[t].tensor;
        m = state.beta1 * m + (S(1) - state.beta1) * g;
        v = state.beta2 * v.array().matrix() + (S(1) - state.beta2) * g.array().square().matrix();
        p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + state.eps);
    }
}

// ---------------------------------------------------------------------------
// Training step

template <typename S>
struct StepResult {
    LossBreakdown<S> loss; // per-position vectors concatenated across the batch
};

namespace detail {

// Loss gradients w.r.t. logits for one sentence, scaled by 1/n_total; the
// pronunciation branch is additionally scaled by its constant weight w_i.
template <typename S>
void loss_backward(const ModelForward<S>& f, const std::vector<int>& char_targets,
                   const FineTargets& fine, const std::vector<int>& coarse, const Vec<S>& weights,
                   S inv_n, const ModelConfig& cfg, Mat<S>& d_char, PronLogits<S>& d_pron) {
    d_char = nn::softmax_rows(f.char_logit);
    for (Eigen::Index i = 0; i < d_char.rows(); ++i)
        d_char(i, char_targets[static_cast<std::size_t>(i)]) -= S(1);
    d_char *= inv_n;

    d_pron.granularity = cfg.granularity;
    if (cfg.granularity == Granularity::fine) {
        auto head_grad = [&](const Mat<S>& logits, const std::vector<int>& targets) {
            Mat<S> d = nn::softmax_rows(logits);
            for (Eigen::Index i = 0; i < d.rows(); ++i) d(i, targets[static_cast<std::size_t>(i)]) -= S(1);
            for (Eigen::Index i = 0; i < d.rows(); ++i) d.row(i) *= weights(i) * inv_n / S(3);
            return d;
        };
        d_pron.initial = head_grad(f.pron.initial, fine.initial);
        d_pron.final_part = head_grad(f.pron.final_part, fine.final_part);
        d_pron.tone = head_grad(f.pron.tone, fine.tone);
    } else {
        Mat<S> d = nn::softmax_rows(f.pron.syllable);
        for (Eigen::Index i = 0; i < d.rows(); ++i) d(i, coarse[static_cast<std::size_t>(i)]) -= S(1);
        for (Eigen::Index i = 0; i < d.rows(); ++i) d.row(i) *= weights(i) * inv_n;
        d_pron.syllable = d;
    }
}

template <typename S>
void append(Vec<S>& dst, const Vec<S>& src) {
    const Eigen::Index old = dst.size();
    dst.conservativeResize(old + src.size());
    dst.segment(old, src.size()) = src;
}

} // namespace detail

// Computes the batch loss and its gradients w.r.t. every parameter. The batch
// mean runs over all positions across the batch; sentences are processed at
// their natural length so no padding positions enter any sum. Weights are
// computed forward-only and injected as constants (the Eq.-(9) detach).
// `weight_override`, when non-null, bypasses the scheme (used by the detach
// verification).
template <typename S>
LossBreakdown<S> batch_loss_and_gradients(const std::vector<SentencePair>& batch,
                                          const ModelParameters<S>& params, const ModelConfig& cfg,
                                          const Vocabulary& vocab, WeightingScheme scheme,
                                          ModelParameters<S>& grads,
                                          const std::vector<Vec<S>>* weight_override = nullptr) {
    if (batch.empty()) throw LengthMismatch("empty batch");
    std::size_t n_total = 0;
    for (const auto& p : batch) n_total += p.size();
    const S inv_n = S(1) / static_cast<S>(n_total);

    LossBreakdown<S> agg;
    S total = S(0);
    for (std::size_t bi = 0; bi < batch.size(); ++bi) {
        const SentencePair& pair = batch[bi];
        pair.validate();
        const auto src_ids = vocab.char_ids(pair.source);
        const auto pin_ids = vocab.syllable_ids(pair.source_pinyin);
        const auto tgt_ids = vocab.char_ids(pair.target);

        ModelForward<S> f = forward_model(src_ids, pin_ids, params, cfg);

        FineTargets fine;
        std::vector<int> coarse;
        if (cfg.granularity == Granularity::fine) fine = fine_targets(pair, vocab);
        else coarse = coarse_targets(pair, vocab);

        Vec<S> weights = weight_override ? (*weight_override)[bi]
                                         : adaptive_weights(pair, params, cfg, vocab, scheme);
        Vec<S> lc = char_loss(f.char_logit, tgt_ids);
        Vec<S> lp = pron_loss(f.pron, fine, coarse, cfg.granularity);

        detail::append(agg.char_losses, lc);
        detail::append(agg.pron_losses, lp);
        detail::append(agg.weights, weights);
        total += (lc.array() + weights.array() * lp.array()).sum();

        Mat<S> d_char;
        PronLogits<S> d_pron;
        detail::loss_backward(f, tgt_ids, fine, coarse, weights, inv_n, cfg, d_char, d_pron);
        backward_model(f, d_char, d_pron, params, cfg, grads);
    }
    agg.total = total * inv_n;
    return agg;
}

// Forward-only batch loss (same aggregation, no gradients). The finite
// difference harness passes `weight_override` so the weights stay frozen
// while parameters are perturbed.
template <typename S>
LossBreakdown<S> batch_loss(const std::vector<SentencePair>& batch,
                            const ModelParameters<S>& params, const ModelConfig& cfg,
                            const Vocabulary& vocab, WeightingScheme scheme,
                            const std::vector<Vec<S>>* weight_override = nullptr) {
    if (batch.empty()) throw LengthMismatch("empty batch");
    LossBreakdown<S> agg;
    S total = S(0);
    std::size_t n_total = 0;
    for (std::size_t bi = 0; bi < batch.size(); ++bi) {
        const SentencePair& pair = batch[bi];
        pair.validate();
        n_total += pair.size();
        ModelForward<S> f =
            forward_model(vocab.char_ids(pair.source), vocab.syllable_ids(pair.source_pinyin),
                          params, cfg);
        FineTargets fine;
        std::vector<int> coarse;
        if (cfg.granularity == Granularity::fine) fine = fine_targets(pair, vocab);
        else coarse = coarse_targets(pair, vocab);
        Vec<S> weights = weight_override ? (*weight_override)[bi]
                                         : adaptive_weights(pair, params, cfg, vocab, scheme);
        Vec<S> lc = char_loss(f.char_logit, vocab.char_ids(pair.target));
        Vec<S> lp = pron_loss(f.pron, fine, coarse, cfg.granularity);
        detail::append(agg.char_losses, lc);
        detail::append(agg.pron_losses, lp);
        detail::append(agg.weights, weights);
        total += (lc.array() + weights.array() * lp.array()).sum();
    }
    agg.total = total / static_cast<S>(n_total);
    return agg;
}

// One optimizer step over a batch. Throws NaNLoss (leaving params untouched
// apart from the failed update) if the loss or any parameter goes non-finite.
template <typename S>
LossBreakdown<S> train_step(const std::vector<SentencePair>& batch, ModelParameters<S>& params,
                            AdamState<S>& opt, WeightingScheme scheme, const ModelConfig& cfg,
                            const Vocabulary& vocab, S lr) {
    ModelParameters<S> grads = zeros_like(params);
    LossBreakdown<S> loss = batch_loss_and_gradients(batch, params, cfg, vocab, scheme, grads);
    if (!std::isfinite(static_cast<double>(loss.total)))
        throw NaNLoss("non-finite loss at optimizer step " + std::to_string(opt.step + 1) +
                      " (char mean " + std::to_string(static_cast<double>(loss.char_losses.mean())) +
                      ", pron mean " + std::to_string(static_cast<double>(loss.pron_losses.mean())) + ")");
    adam_update(params, grads, opt, lr);
    if (!all_finite(params))
        throw NaNLoss("non-finite parameter after optimizer step " + std::to_string(opt.step));
    return loss;
}

// ---------------------------------------------------------------------------
// Training loops

struct TrainConfig {
    double lr = 5e-5; // fine-tune default; pre-training uses 1e-4
    int batch_size = 64;
    int epochs = 30;
    WeightingScheme scheme = WeightingScheme::fully_adaptive;
    Granularity granularity = Granularity::fine;
    std::uint64_t seed = 0;
    std::string checkpoint_dir;

    nlohmann::json to_json() const {
        return {{"lr", lr},
                {"batch_size", batch_size},
                {"epochs", epochs},
                {"scheme", scope::to_string(scheme)},
                {"granularity", scope::to_string(granularity)},
                {"seed", seed},
                {"checkpoint_dir", checkpoint_dir}};
    }

    static TrainConfig from_json(const nlohmann::json& j) {
        TrainConfig c;
        if (j.contains("lr")) c.lr = j.at("lr").get<double>();
        if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
        if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
        if (j.contains("scheme")) c.scheme = scheme_from_string(j.at("scheme").get<std::string>());
        if (j.contains("granularity"))
            c.granularity = granularity_from_string(j.at("granularity").get<std::string>());
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("checkpoint_dir")) c.checkpoint_dir = j.at("checkpoint_dir").get<std::string>();
        return c;
    }
};

struct EpochSummary {
    int epoch = 0;
    double mean_char = 0.0;
    double mean_pron = 0.0;
    double mean_total = 0.0;
    std::size_t positions = 0;
};

using EpochHook = std::function<void(const EpochSummary&)>;

template <typename S>
void run_training(const std::vector<SentencePair>& data, ModelParameters<S>& params,
                  const ModelConfig& cfg, const Vocabulary& vocab, const TrainConfig& train,
                  WeightingScheme scheme, std::ostream* log = nullptr,
                  const EpochHook& on_epoch = {}) {
    if (data.empty()) throw Error("training set is empty");
    AdamState<S> opt = AdamState<S>::init(params);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    const auto bs = static_cast<std::size_t>(std::max(1, train.batch_size));
    for (int epoch = 1; epoch <= train.epochs; ++epoch) {
        std::seed_seq seq{train.seed, static_cast<std::uint64_t>(epoch)};
        std::mt19937_64 rng(seq);
        std::shuffle(order.begin(), order.end(), rng);

        double sum_char = 0.0, sum_pron = 0.0, sum_weighted = 0.0;
        std::size_t positions = 0;
        for (std::size_t start = 0; start < order.size(); start += bs) {
            std::vector<SentencePair> batch;
            for (std::size_t i = start; i < std::min(order.size(), start + bs); ++i)
                batch.push_back(data[order[i]]);
            LossBreakdown<S> loss =
                train_step(batch, params, opt, scheme, cfg, vocab, static_cast<S>(train.lr));
            sum_char += static_cast<double>(loss.char_losses.sum());
            sum_pron += static_cast<double>(loss.pron_losses.sum());
            sum_weighted += static_cast<double>(
                (loss.char_losses.array() + loss.weights.array() * loss.pron_losses.array()).sum());
            positions += static_cast<std::size_t>(loss.char_losses.size());
        }
        EpochSummary s{epoch, sum_char / static_cast<double>(positions),
                       sum_pron / static_cast<double>(positions),
                       sum_weighted / static_cast<double>(positions), positions};
        if (log)
            (*log) << "epoch " << s.epoch << "  char " << s.mean_char << "  pron " << s.mean_pron
                   << "  total " << s.mean_total << '\n';
        if (on_epoch) on_epoch(s);
    }
}

// Confusion-set pre-training: the CPP weight is fixed to 1 (non-adaptive).
template <typename S>
void pretrain(const std::vector<SentencePair>& corpus, ModelParameters<S>& params,
              const ModelConfig& cfg, const Vocabulary& vocab, const TrainConfig& train,
              std::ostream* log = nullptr, const EpochHook& on_epoch = {}) {
    run_training(corpus, params, cfg, vocab, train, WeightingScheme::non_adaptive, log, on_epoch);
}

// Fine-tuning: the scheme comes from the config.
template <typename S>
void finetune(const std::vector<SentencePair>& dataset, ModelParameters<S>& params,
              const ModelConfig& cfg, const Vocabulary& vocab, const TrainConfig& train,
              std::ostream* log = nullptr, const EpochHook& on_epoch = {}) {
    run_training(dataset, params, cfg, vocab, train, train.scheme, log, on_epoch);
}

} // namespace scope
