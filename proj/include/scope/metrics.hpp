#pragma once

// Sentence-level and character-level precision/recall/F1 for the detection
// and correction sub-tasks.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scope/error.hpp"
#include "scope/utf8.hpp"

namespace scope {

struct EvalRecord {
    std::u32string source;
    std::u32string prediction;
    std::u32string target;

    void validate() const {
        if (source.size() != prediction.size() || source.size() != target.size())
            throw LengthMismatch("eval record fields must have equal length");
    }
};

struct MetricCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
};

struct MetricReport {
    double d_precision = 0.0, d_recall = 0.0, d_f1 = 0.0;
    double c_precision = 0.0, c_recall = 0.0, c_f1 = 0.0;
    MetricCounts detection;
    MetricCounts correction;

    nlohmann::json to_json() const {
        return {{"detection",
                 {{"precision", d_precision},
                  {"recall", d_recall},
                  {"f1", d_f1},
                  {"tp", detection.tp},
                  {"fp", detection.fp},
                  {"fn", detection.fn}}},
                {"correction",
                 {{"precision", c_precision},
                  {"recall", c_recall},
                  {"f1", c_f1},
                  {"tp", correction.tp},
                  {"fp", correction.fp},
                  {"fn", correction.fn}}}};
    }
};

namespace detail {

// 0/0 -> 0 everywhere.
inline double ratio(std::int64_t num, std::int64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

inline double f1(double p, double r) {
    return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

} // namespace detail

// Sentence-level metrics in the REALISE evaluator convention: a sentence is
// predicted-positive when the model edits anything; detection is a true
// positive when the edited position set equals the gold error set exactly;
// correction additionally requires the full prediction to match the target.
inline MetricReport sentence_metrics(const std::vector<EvalRecord>& records) {
    if (records.empty()) throw Error("no records to evaluate");
    std::int64_t predicted_positive = 0, gold_positive = 0, det_tp = 0, cor_tp = 0;
    for (const EvalRecord& r : records) {
        r.validate();
        bool any_edit = false, sets_equal = true, any_gold = false;
        for (std::size_t i = 0; i < r.source.size(); ++i) {
            const bool edited = r.prediction[i] != r.source[i];
            const bool gold = r.target[i] != r.source[i];
            any_edit |= edited;
            any_gold |= gold;
            sets_equal &= edited == gold;
        }
        predicted_positive += any_edit;
        gold_positive += any_gold;
        if (any_edit && sets_equal) ++det_tp;
        if (any_edit && r.prediction == r.target) ++cor_tp;
    }
    MetricReport m;
    m.detection = {det_tp, predicted_positive - det_tp, gold_positive - det_tp};
    m.correction = {cor_tp, predicted_positive - cor_tp, gold_positive - cor_tp};
    m.d_precision = detail::ratio(det_tp, predicted_positive);
    m.d_recall = detail::ratio(det_tp, gold_positive);
    m.d_f1 = detail::f1(m.d_precision, m.d_recall);
    m.c_precision = detail::ratio(cor_tp, predicted_positive);
    m.c_recall = detail::ratio(cor_tp, gold_positive);
    m.c_f1 = detail::f1(m.c_precision, m.c_recall);
    return m;
}

// Character-level metrics over all positions. Correction is evaluated among
// detection true positives: of the gold-error positions the model touched,
// how many received the right character.
inline MetricReport character_metrics(const std::vector<EvalRecord>& records) {
    if (records.empty()) throw Error("no records to evaluate");
    std::int64_t det_tp = 0, det_fp = 0, det_fn = 0, cor_tp = 0, gold_errors = 0;
    for (const EvalRecord& r : records) {
        r.validate();
        for (std::size_t i = 0; i < r.source.size(); ++i) {
            const bool edited = r.prediction[i] != r.source[i];
            const bool gold = r.target[i] != r.source[i];
            gold_errors += gold;
            if (edited && gold) {
                ++det_tp;
                if (r.prediction[i] == r.target[i]) ++cor_tp;
            } else if (edited) {
                ++det_fp;
            } else if (gold) {
                ++det_fn;
            }
        }
    }
    MetricReport m;
    m.detection = {det_tp, det_fp, det_fn};
    m.correction = {cor_tp, det_tp - cor_tp, gold_errors - cor_tp};
    m.d_precision = detail::ratio(det_tp, det_tp + det_fp);
    m.d_recall = detail::ratio(det_tp, det_tp + det_fn);
    m.d_f1 = detail::f1(m.d_precision, m.d_recall);
    m.c_precision = detail::ratio(cor_tp, det_tp);
    m.c_recall = detail::ratio(cor_tp, gold_errors);
    m.c_f1 = detail::f1(m.c_precision, m.c_recall);
    return m;
}

inline nlohmann::json record_to_json(const EvalRecord& r) {
    return {{"source", utf8_encode(r.source)},
            {"prediction", utf8_encode(r.prediction)},
            {"target", utf8_encode(r.target)}};
}

inline EvalRecord record_from_json(const nlohmann::json& j) {
    EvalRecord r;
    r.source = utf8_decode(j.at("source").get<std::string>());
    if (j.contains("prediction")) r.prediction = utf8_decode(j.at("prediction").get<std::string>());
    if (j.contains("target")) r.target = utf8_decode(j.at("target").get<std::string>());
    return r;
}

} // namespace scope
