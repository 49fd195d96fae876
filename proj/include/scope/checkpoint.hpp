#pragma once

// Versioned single-file checkpoint: magic string, JSON header (model config +
// vocabulary), then named float32 tensors. Self-contained: everything needed
// to run inference travels with the weights.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scope/dataset.hpp"
#include "scope/error.hpp"
#include "scope/model.hpp"

namespace scope {

inline constexpr const char* kCheckpointMagic = "SCOPE-CKPT-1\n";

inline nlohmann::json model_config_to_json(const ModelConfig& cfg) {
    return {{"embed_dim", cfg.embed_dim},
            {"num_layers", cfg.num_layers},
            {"num_heads", cfg.num_heads},
            {"ffn_dim", cfg.ffn_dim},
            {"max_len", cfg.max_len},
            {"granularity", to_string(cfg.granularity)},
            {"vocab_size", cfg.vocab_size},
            {"syllable_count", cfg.syllable_count},
            {"initial_count", cfg.initial_count},
            {"final_count", cfg.final_count},
            {"tone_count", cfg.tone_count}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig cfg;
    cfg.embed_dim = j.at("embed_dim").get<int>();
    cfg.num_layers = j.at("num_layers").get<int>();
    cfg.num_heads = j.at("num_heads").get<int>();
    cfg.ffn_dim = j.at("ffn_dim").get<int>();
    cfg.max_len = j.at("max_len").get<int>();
    cfg.granularity = granularity_from_string(j.at("granularity").get<std::string>());
    cfg.vocab_size = j.at("vocab_size").get<int>();
    cfg.syllable_count = j.at("syllable_count").get<int>();
    cfg.initial_count = j.at("initial_count").get<int>();
    cfg.final_count = j.at("final_count").get<int>();
    cfg.tone_count = j.at("tone_count").get<int>();
    return cfg;
}

inline nlohmann::json vocabulary_to_json(const Vocabulary& vocab) {
    return {{"chars", utf8_encode(vocab.chars_flat())},
            {"char_syllables", vocab.char_syllables_flat()},
            {"syllables", vocab.syllables()},
            {"initials", vocab.initials()},
            {"finals", vocab.finals()}};
}

inline Vocabulary vocabulary_from_json(const nlohmann::json& j) {
    return Vocabulary::from_parts(utf8_decode(j.at("chars").get<std::string>()),
                                  j.at("char_syllables").get<std::vector<int>>(),
                                  j.at("syllables").get<std::vector<std::string>>(),
                                  j.at("initials").get<std::vector<std::string>>(),
                                  j.at("finals").get<std::vector<std::string>>());
}

// Rebuilds the syllable lookup used at inference from a checkpoint
// vocabulary. Initials/finals minus the slot-0 sentinel feed from_entries.
inline SyllableTable table_from_vocabulary(const Vocabulary& vocab) {
    std::vector<std::pair<char32_t, std::string>> entries;
    const std::u32string chars = vocab.chars_flat();
    const std::vector<int> syl = vocab.char_syllables_flat();
    entries.reserve(chars.size());
    for (std::size_t i = 0; i < chars.size(); ++i)
        entries.emplace_back(chars[i], vocab.syllable_at(syl[i]));
    std::vector<std::string> initials(vocab.initials().begin() + 1, vocab.initials().end());
    return SyllableTable::from_entries(entries, initials, vocab.finals());
}

struct Checkpoint {
    ModelConfig config;
    Vocabulary vocab;
    ModelParameters<float> params;
};

namespace detail {

template <typename T>
void write_pod(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw IoError("truncated checkpoint");
    return v;
}

} // namespace detail

inline void save_checkpoint(const std::filesystem::path& path, const ModelConfig& cfg,
                            const Vocabulary& vocab, ModelParameters<float>& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(kCheckpointMagic, static_cast<std::streamsize>(std::strlen(kCheckpointMagic)));

    nlohmann::json header{{"config", model_config_to_json(cfg)},
                          {"vocab", vocabulary_to_json(vocab)}};
    const std::string hs = header.dump();
    detail::write_pod<std::uint64_t>(out, hs.size());
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));

    auto views = tensor_views(params);
    detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(views.size()));
    for (const auto& v : views) {
        detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(v.name.size()));
        out.write(v.name.data(), static_cast<std::streamsize>(v.name.size()));
        detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(v.tensor->rows()));
        detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(v.tensor->cols()));
        out.write(reinterpret_cast<const char*>(v.tensor->data()),
                  static_cast<std::streamsize>(sizeof(float) * static_cast<std::size_t>(v.tensor->size())));
    }
    if (!out) throw IoError("failed writing " + path.string());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    std::string magic(std::strlen(kCheckpointMagic), '\0');
    in.read(magic.data(), static_cast<std::streamsize>(magic.size()));
    if (!in || magic != kCheckpointMagic)
        throw IoError(path.string() + " is not a SCOPE-CKPT-1 checkpoint");

    const auto hlen = detail::read_pod<std::uint64_t>(in);
    std::string hs(hlen, '\0');
    in.read(hs.data(), static_cast<std::streamsize>(hlen));
    if (!in) throw IoError("truncated checkpoint header");
    nlohmann::json header = nlohmann::json::parse(hs);

    Checkpoint ckpt;
    ckpt.config = model_config_from_json(header.at("config"));
    ckpt.vocab = vocabulary_from_json(header.at("vocab"));
    // Allocate the right tensor shapes, then overwrite with stored values.
    ckpt.params = init_parameters<float>(ckpt.config, 0);

    auto views = tensor_views(ckpt.params);
    const auto count = detail::read_pod<std::uint32_t>(in);
    if (count != views.size()) throw IoError("checkpoint tensor count mismatch");
    for (auto& v : views) {
        const auto nlen = detail::read_pod<std::uint32_t>(in);
        std::string name(nlen, '\0');
        in.read(name.data(), static_cast<std::streamsize>(nlen));
        const auto rows = detail::read_pod<std::uint32_t>(in);
        const auto cols = detail::read_pod<std::uint32_t>(in);
        if (name != v.name || rows != static_cast<std::uint32_t>(v.tensor->rows()) ||
            cols != static_cast<std::uint32_t>(v.tensor->cols()))
            throw IoError("checkpoint tensor '" + name + "' does not match model layout");
        in.read(reinterpret_cast<char*>(v.tensor->data()),
                static_cast<std::streamsize>(sizeof(float) * static_cast<std::size_t>(v.tensor->size())));
        if (!in) throw IoError("truncated tensor data in checkpoint");
    }
    return ckpt;
}

} // namespace scope
