// scope: Chinese spelling check experiments in one binary.
//
// Subcommands: pinyin, synth, pretrain, finetune, correct, eval.
// Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scope/checkpoint.hpp"
#include "scope/confusion.hpp"
#include "scope/dataset.hpp"
#include "scope/inference.hpp"
#include "scope/manifest.hpp"
#include "scope/metrics.hpp"
#include "scope/model.hpp"
#include "scope/pinyin.hpp"
#include "scope/training.hpp"

namespace fs = std::filesystem;

namespace {

fs::path data_root() {
    if (const char* env = std::getenv("SCOPE_DATA_DIR")) return fs::path(env);
    return fs::path("data");
}

struct PinyinArgs {
    std::string query;
};

int run_pinyin(const PinyinArgs& args) {
    scope::SyllableTable table = scope::SyllableTable::load(data_root());
    std::u32string q = scope::utf8_decode(args.query);
    scope::Syllable syl;
    if (q.size() == 1 && table.contains(q[0])) syl = table.syllable_of(q[0]);
    else syl = scope::Syllable{args.query};
    scope::PinyinTriplet t = scope::decompose(syl, table);
    std::cout << t.initial << ',' << t.final_part << ',' << t.tone << '\n';
    return 0;
}

struct SynthArgs {
    std::string corpus_dir;
    std::string confusion_file;
    std::string out_file;
    std::uint64_t seed = 0;
    double select_rate = 0.15;
    double confuse_p = 0.8;
    double random_p = 0.1;
    double keep_p = 0.1;
    std::size_t min_len = 2;
    std::size_t max_len = 192;
    std::string pairs_file;     // optional: build the confusion set from raw pairs
    double top_fraction = 0.4;
};

int run_synth(const SynthArgs& args) {
    scope::SyllableTable table = scope::SyllableTable::load(data_root());
    const auto chars = scope::table_characters(table);

    std::vector<std::u32string> targets;
    std::vector<fs::path> corpus_files;
    for (const auto& entry : fs::directory_iterator(args.corpus_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".txt")
            corpus_files.push_back(entry.path());
    std::sort(corpus_files.begin(), corpus_files.end());
    if (corpus_files.empty()) throw scope::IoError("no .txt files under " + args.corpus_dir);
    for (const auto& path : corpus_files) {
        std::ifstream in(path);
        std::stringstream ss;
        ss << in.rdbuf();
        for (const auto& para : scope::split_paragraphs(ss.str(), args.min_len, args.max_len))
            for (const auto& run : scope::hanzi_runs(para, table, args.min_len, args.max_len))
                targets.push_back(run);
    }
    std::cerr << "synth: " << targets.size() << " target sequences from " << corpus_files.size()
              << " articles\n";

    scope::ConfusionSet cs;
    if (!args.pairs_file.empty()) {
        // raw pair list: one `a<TAB>b` per line, filtered by corpus frequency
        std::ifstream in(args.pairs_file);
        if (!in) throw scope::IoError("cannot open " + args.pairs_file);
        std::vector<std::pair<char32_t, char32_t>> pairs;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::u32string u = scope::utf8_decode(line);
            std::u32string flat;
            for (char32_t c : u)
                if (c != U'\t') flat.push_back(c);
            if (flat.size() == 2) pairs.emplace_back(flat[0], flat[1]);
        }
        cs = scope::build_confusion_set(pairs, scope::count_frequencies(targets),
                                        args.top_fraction);
        if (cs.empty())
            std::cerr << "synth: warning: no confusion pair survived frequency filtering\n";
        scope::write_confusion_set(args.confusion_file, cs);
        std::cerr << "synth: wrote filtered confusion set to " << args.confusion_file << '\n';
    } else {
        cs = scope::read_confusion_set(args.confusion_file);
    }

    scope::SynthesisConfig cfg;
    cfg.select_rate = args.select_rate;
    cfg.confuse_p = args.confuse_p;
    cfg.random_p = args.random_p;
    cfg.keep_p = args.keep_p;
    cfg.freq_top_fraction = args.top_fraction;
    cfg.rng_seed = args.seed;
    cfg.validate();

    auto pairs = scope::synthesize_corpus(targets, cs, cfg, table, chars);
    scope::write_dataset(args.out_file, pairs);
    std::cerr << "synth: wrote " << pairs.size() << " pairs to " << args.out_file << '\n';

    scope::RunManifest manifest;
    manifest.command = "synth";
    manifest.config = {{"select_rate", cfg.select_rate}, {"confuse_p", cfg.confuse_p},
                       {"random_p", cfg.random_p},       {"keep_p", cfg.keep_p},
                       {"min_len", args.min_len},        {"max_len", args.max_len},
                       {"corpus", args.corpus_dir},      {"confusion", args.confusion_file}};
    manifest.seed = args.seed;
    manifest.add_dataset(args.out_file);
    manifest.timestamp = scope::iso_timestamp_now();
    scope::write_manifest_atomic(args.out_file + ".manifest.json", manifest);
    return 0;
}

struct TrainArgs {
    std::string data_file;
    std::string ckpt_dir;
    std::string init_ckpt;
    std::string config_file;
    // model shape (pretrain only; finetune inherits from the checkpoint)
    int embed_dim = 64;
    int layers = 2;
    int heads = 4;
    int ffn_dim = 0;
    int max_len = 192;
    std::string granularity = "fine";
    std::string scheme = "full";
    // training config; CLI flag > config file > default
    scope::TrainConfig train;
};

void apply_config_file(scope::TrainConfig& train, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw scope::IoError("cannot open config " + path);
    nlohmann::json j;
    in >> j;
    train = scope::TrainConfig::from_json(j);
}

int run_train(const TrainArgs& args, bool is_pretrain, const CLI::App* cmd) {
    scope::TrainConfig train = args.train;
    if (!args.config_file.empty()) {
        scope::TrainConfig from_file = train;
        apply_config_file(from_file, args.config_file);
        // CLI flags that were explicitly given win over the file
        if (!cmd->count("--lr")) train.lr = from_file.lr;
        if (!cmd->count("--batch-size")) train.batch_size = from_file.batch_size;
        if (!cmd->count("--epochs")) train.epochs = from_file.epochs;
        if (!cmd->count("--seed")) train.seed = from_file.seed;
        if (!cmd->count("--scheme")) train.scheme = from_file.scheme;
        if (!cmd->count("--granularity")) train.granularity = from_file.granularity;
    }
    train.checkpoint_dir = args.ckpt_dir;
    fs::create_directories(args.ckpt_dir);

    scope::SyllableTable table;
    scope::Vocabulary vocab;
    scope::ModelConfig cfg;
    scope::ModelParameters<float> params;

    if (!args.init_ckpt.empty()) {
        scope::Checkpoint ckpt = scope::load_checkpoint(args.init_ckpt);
        cfg = ckpt.config;
        vocab = ckpt.vocab;
        params = std::move(ckpt.params);
        table = scope::table_from_vocabulary(vocab);
        if (cmd->count("--granularity") &&
            scope::granularity_from_string(args.granularity) != cfg.granularity)
            throw scope::GranularityMismatch(
                "checkpoint was trained with granularity '" + to_string(cfg.granularity) +
                "'; re-run pretraining to switch");
        // resuming: verify recorded hashes if the checkpoint has a manifest
        const fs::path sibling = fs::path(args.init_ckpt).parent_path() / "manifest.json";
        if (fs::exists(sibling)) scope::verify_manifest_hashes(scope::read_manifest(sibling));
    } else {
        table = scope::SyllableTable::load(data_root());
        vocab = scope::Vocabulary(table);
        cfg = scope::ModelConfig::for_vocab(vocab);
        cfg.embed_dim = args.embed_dim;
        cfg.num_layers = args.layers;
        cfg.num_heads = args.heads;
        cfg.ffn_dim = args.ffn_dim;
        cfg.max_len = args.max_len;
        cfg.granularity = scope::granularity_from_string(args.granularity);
        cfg.validate();
        params = scope::init_parameters<float>(cfg, train.seed);
    }

    auto dataset = scope::read_dataset(args.data_file, table);
    std::cerr << (is_pretrain ? "pretrain" : "finetune") << ": " << dataset.size()
              << " pairs, model " << scope::parameter_count(params) << " parameters\n";

    scope::RunManifest manifest;
    manifest.command = is_pretrain ? "pretrain" : "finetune";
    manifest.config = {{"train", train.to_json()}, {"model", scope::model_config_to_json(cfg)}};
    manifest.seed = train.seed;
    manifest.add_dataset(args.data_file);
    if (!args.init_ckpt.empty()) manifest.add_checkpoint(args.init_ckpt);
    manifest.timestamp = scope::iso_timestamp_now();
    scope::write_manifest_atomic(fs::path(args.ckpt_dir) / "manifest.json", manifest);

    const fs::path final_path = fs::path(args.ckpt_dir) / "model.ckpt";
    auto save_epoch = [&](const scope::EpochSummary& s) {
        scope::save_checkpoint(final_path, cfg, vocab, params);
        std::cerr << "epoch " << s.epoch << "/" << train.epochs << "  char " << s.mean_char
                  << "  pron " << s.mean_pron << "  total " << s.mean_total << "  -> "
                  << final_path.string() << '\n';
    };

    if (is_pretrain) scope::pretrain(dataset, params, cfg, vocab, train, nullptr, save_epoch);
    else scope::finetune(dataset, params, cfg, vocab, train, nullptr, save_epoch);
    return 0;
}

struct CorrectArgs {
    std::string ckpt;
    int iterations = 2;
    int window = 3;
    bool sighan13_post = false;
    std::string trace_file;
    std::string from_jsonl;
};

nlohmann::json trace_to_json(const std::u32string& input, const scope::CorrectionTrace& trace) {
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& round : trace.iterations) {
        nlohmann::json edits = nlohmann::json::array();
        for (const auto& e : round)
            edits.push_back({{"pos", e.pos},
                             {"from", scope::utf8_encode(e.previous)},
                             {"to", scope::utf8_encode(e.next)}});
        rounds.push_back(std::move(edits));
    }
    return {{"input", scope::utf8_encode(input)},
            {"output", scope::utf8_encode(trace.final_output)},
            {"iterations", std::move(rounds)},
            {"reverted", std::vector<std::size_t>(trace.reverted_positions.begin(),
                                                  trace.reverted_positions.end())}};
}

int run_correct(const CorrectArgs& args) {
    scope::Checkpoint ckpt = scope::load_checkpoint(args.ckpt);
    scope::SyllableTable table = scope::table_from_vocabulary(ckpt.vocab);
    scope::CICConfig cic{args.iterations, args.window};
    cic.validate();

    std::optional<std::ofstream> trace_out;
    if (!args.trace_file.empty()) {
        trace_out.emplace(args.trace_file);
        if (!*trace_out) throw scope::IoError("cannot write " + args.trace_file);
    }

    auto process = [&](const std::u32string& line) {
        auto [output, trace] =
            scope::iterative_correct(line, ckpt.params, ckpt.config, ckpt.vocab, table, cic);
        if (args.sighan13_post) output = scope::sighan13_postprocess(line, output);
        std::cout << scope::utf8_encode(output) << '\n';
        if (trace_out) (*trace_out) << trace_to_json(line, trace).dump() << '\n';
    };

    if (!args.from_jsonl.empty()) {
        for (const auto& pair : scope::read_dataset(args.from_jsonl, table)) process(pair.source);
    } else {
        std::string line;
        while (std::getline(std::cin, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) {
                std::cout << '\n';
                continue;
            }
            process(scope::utf8_decode(line));
        }
    }
    return 0;
}

struct EvalArgs {
    std::string pred_file;
    std::string gold_file;
    std::string level = "sentence";
    bool sighan13_post = false;
};

int run_eval(const EvalArgs& args) {
    // gold: JSON-lines records with source/target (a synth dataset works);
    // pred: either plain corrected lines or JSON-lines with a `prediction` key
    std::ifstream gold_in(args.gold_file);
    if (!gold_in) throw scope::IoError("cannot open " + args.gold_file);
    std::ifstream pred_in(args.pred_file);
    if (!pred_in) throw scope::IoError("cannot open " + args.pred_file);

    std::vector<scope::EvalRecord> records;
    std::string gold_line, pred_line;
    std::size_t lineno = 0;
    while (std::getline(gold_in, gold_line)) {
        ++lineno;
        if (gold_line.empty()) continue;
        if (!std::getline(pred_in, pred_line))
            throw scope::LengthMismatch("prediction file is shorter than gold file");
        nlohmann::json g = nlohmann::json::parse(gold_line);
        scope::EvalRecord r;
        r.source = scope::utf8_decode(g.at("source").get<std::string>());
        r.target = scope::utf8_decode(g.at("target").get<std::string>());
        if (!pred_line.empty() && pred_line.front() == '{') {
            nlohmann::json p = nlohmann::json::parse(pred_line);
            r.prediction = scope::utf8_decode(p.at("prediction").get<std::string>());
        } else {
            r.prediction = scope::utf8_decode(pred_line);
        }
        if (args.sighan13_post) r.prediction = scope::sighan13_postprocess(r.source, r.prediction);
        r.validate();
        records.push_back(std::move(r));
    }
    if (std::getline(pred_in, pred_line) && !pred_line.empty())
        throw scope::LengthMismatch("prediction file is longer than gold file");

    scope::MetricReport report = args.level == "char" ? scope::character_metrics(records)
                                                      : scope::sentence_metrics(records);
    std::printf("%-12s %10s %10s %10s\n", args.level.c_str(), "precision", "recall", "f1");
    std::printf("%-12s %10.4f %10.4f %10.4f\n", "detection", report.d_precision, report.d_recall,
                report.d_f1);
    std::printf("%-12s %10.4f %10.4f %10.4f\n", "correction", report.c_precision, report.c_recall,
                report.c_f1);
    std::cout << report.to_json().dump() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SCOPE: Chinese spelling check with auxiliary pronunciation prediction"};
    app.require_subcommand(1);

    PinyinArgs pinyin_args;
    auto* pinyin_cmd = app.add_subcommand("pinyin", "decompose a character or syllable");
    pinyin_cmd->add_option("query", pinyin_args.query, "Chinese character or syllable like gao1")
        ->required();

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "synthesize a misspelled/correct pair corpus");
    synth_cmd->add_option("--corpus", synth_args.corpus_dir, "directory of .txt articles")->required();
    synth_cmd->add_option("--confusion", synth_args.confusion_file, "confusion-set TSV")->required();
    synth_cmd->add_option("--out", synth_args.out_file, "output JSONL")->required();
    synth_cmd->add_option("--seed", synth_args.seed, "RNG seed");
    synth_cmd->add_option("--select-rate", synth_args.select_rate, "corruption selection rate");
    synth_cmd->add_option("--confuse-p", synth_args.confuse_p, "confusable branch probability");
    synth_cmd->add_option("--random-p", synth_args.random_p, "random branch probability");
    synth_cmd->add_option("--keep-p", synth_args.keep_p, "keep branch probability");
    synth_cmd->add_option("--min-len", synth_args.min_len, "minimum sequence length");
    synth_cmd->add_option("--max-len", synth_args.max_len, "maximum sequence length");
    synth_cmd->add_option("--pairs", synth_args.pairs_file,
                          "raw confusable pair list; builds --confusion after frequency filtering");
    synth_cmd->add_option("--top-fraction", synth_args.top_fraction,
                          "frequency cutoff for pair filtering");

    TrainArgs pre_args, ft_args;
    auto add_train_opts = [](CLI::App* cmd, TrainArgs& a, bool is_pretrain) {
        cmd->add_option("--data", a.data_file, "training JSONL")->required();
        cmd->add_option("--ckpt-dir", a.ckpt_dir, "checkpoint directory")->required();
        cmd->add_option("--config", a.config_file, "training config JSON");
        cmd->add_option("--lr", a.train.lr, "learning rate");
        cmd->add_option("--batch-size", a.train.batch_size, "batch size");
        cmd->add_option("--epochs", a.train.epochs, "epochs");
        cmd->add_option("--seed", a.train.seed, "RNG seed");
        cmd->add_option("--granularity", a.granularity, "fine|coarse");
        if (is_pretrain) {
            cmd->add_option("--embed-dim", a.embed_dim, "embedding dim");
            cmd->add_option("--layers", a.layers, "transformer layers");
            cmd->add_option("--heads", a.heads, "attention heads");
            cmd->add_option("--ffn-dim", a.ffn_dim, "FFN dim (0 = 4x embed)");
            cmd->add_option("--max-len", a.max_len, "max sequence length");
            cmd->add_option("--init-ckpt", a.init_ckpt, "resume from checkpoint");
        } else {
            cmd->add_option("--init-ckpt", a.init_ckpt, "starting checkpoint");
            cmd->add_option("--scheme", a.scheme, "non|part|full");
        }
    };
    auto* pre_cmd = app.add_subcommand("pretrain", "confusion-set pre-training (CPP weight = 1)");
    add_train_opts(pre_cmd, pre_args, true);
    pre_args.train.lr = 1e-4; // pre-training default
    pre_args.train.epochs = 1;
    auto* ft_cmd = app.add_subcommand("finetune", "fine-tune with a task weighting scheme");
    add_train_opts(ft_cmd, ft_args, false);

    CorrectArgs correct_args;
    auto* correct_cmd = app.add_subcommand("correct", "correct sentences (stdin -> stdout)");
    correct_cmd->add_option("--ckpt", correct_args.ckpt, "model checkpoint")->required();
    correct_cmd->add_option("--iterations", correct_args.iterations, "CIC iterations");
    correct_cmd->add_option("--window", correct_args.window, "CIC window (odd)");
    correct_cmd->add_flag("--sighan13-post", correct_args.sighan13_post,
                          "apply the SIGHAN13 de/di/de reversion");
    correct_cmd->add_option("--trace", correct_args.trace_file, "write JSONL correction traces");
    correct_cmd->add_option("--from-jsonl", correct_args.from_jsonl,
                            "read sources from a dataset JSONL instead of stdin");

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "score predictions against gold");
    eval_cmd->add_option("--pred", eval_args.pred_file, "predictions (text lines or JSONL)")
        ->required();
    eval_cmd->add_option("--gold", eval_args.gold_file, "gold JSONL with source/target")->required();
    eval_cmd->add_option("--level", eval_args.level, "sentence|char")
        ->check(CLI::IsMember({"sentence", "char"}));
    eval_cmd->add_flag("--sighan13-post", eval_args.sighan13_post,
                       "apply the SIGHAN13 de/di/de reversion before scoring");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1; // --help exits 0; any parse failure is a usage error
    }

    try {
        if (pinyin_cmd->parsed()) return run_pinyin(pinyin_args);
        if (synth_cmd->parsed()) return run_synth(synth_args);
        if (pre_cmd->parsed()) {
            pre_args.scheme = "non"; // pre-training fixes the CPP weight to 1
            return run_train(pre_args, true, pre_cmd);
        }
        if (ft_cmd->parsed()) {
            ft_args.train.scheme = scope::scheme_from_string(ft_args.scheme);
            return run_train(ft_args, false, ft_cmd);
        }
        if (correct_cmd->parsed()) return run_correct(correct_args);
        if (eval_cmd->parsed()) return run_eval(eval_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
