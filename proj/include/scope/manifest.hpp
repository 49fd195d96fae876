#pragma once

// Run manifests: a JSON snapshot of config, seeds and input hashes written
// atomically at run start so runs are auditable and resumable.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "scope/error.hpp"

namespace scope {

// FNV-1a over the file bytes; enough to detect swapped or edited inputs.
inline std::string file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot hash " + path.string());
    std::uint64_t h = 1469598103934665603ULL;
    char buf[1 << 14];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return std::string(hex);
}

struct RunManifest {
    std::string command;
    nlohmann::json config;
    std::uint64_t seed = 0;
    nlohmann::json dataset_hashes = nlohmann::json::object();    // path -> hash
    nlohmann::json checkpoint_hashes = nlohmann::json::object(); // path -> hash
    std::string timestamp;

    void add_dataset(const std::filesystem::path& p) {
        dataset_hashes[p.string()] = file_hash(p);
    }
    void add_checkpoint(const std::filesystem::path& p) {
        checkpoint_hashes[p.string()] = file_hash(p);
    }

    nlohmann::json to_json() const {
        return {{"command", command},
                {"config", config},
                {"seed", seed},
                {"dataset_hashes", dataset_hashes},
                {"checkpoint_hashes", checkpoint_hashes},
                {"timestamp", timestamp}};
    }

    static RunManifest from_json(const nlohmann::json& j) {
        RunManifest m;
        m.command = j.value("command", "");
        m.config = j.value("config", nlohmann::json::object());
        m.seed = j.value("seed", std::uint64_t{0});
        m.dataset_hashes = j.value("dataset_hashes", nlohmann::json::object());
        m.checkpoint_hashes = j.value("checkpoint_hashes", nlohmann::json::object());
        m.timestamp = j.value("timestamp", "");
        return m;
    }
};

inline std::string iso_timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf);
}

// Write-to-temp + rename so a crash never leaves a partial manifest.
inline void write_manifest_atomic(const std::filesystem::path& path, const RunManifest& m) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << m.to_json().dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

inline RunManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    return RunManifest::from_json(j);
}

// Verifies that every recorded hash still matches the file on disk; used when
// resuming from a checkpoint that carries a manifest.
inline void verify_manifest_hashes(const RunManifest& m) {
    auto check = [](const nlohmann::json& table) {
        for (auto it = table.begin(); it != table.end(); ++it) {
            const std::filesystem::path p = it.key();
            if (!std::filesystem::exists(p))
                throw IoError("manifest references missing file " + p.string());
            if (file_hash(p) != it.value().get<std::string>())
                throw IoError("hash mismatch for " + p.string() + "; inputs changed since the run");
        }
    };
    check(m.dataset_hashes);
    check(m.checkpoint_hashes);
}

} // namespace scope
