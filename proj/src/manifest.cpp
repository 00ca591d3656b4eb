#include "ppg/manifest.hpp"

#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>

#include "ppg/errors.hpp"
#include "ppg/hash.hpp"

namespace ppg {

namespace {

constexpr const char* kVersion = "1.0.0";

std::string iso8601_now() {
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

nlohmann::json refs_to_json(const std::vector<ArtifactRef>& refs) {
    nlohmann::json out = nlohmann::json::array();
    for (const ArtifactRef& ref : refs) {
        out.push_back({{"hash", ref.hash}, {"name", ref.name}});
    }
    return out;
}

}  // namespace

std::string manifest_path_for(const std::string& artifact_path) {
    return artifact_path + ".manifest.json";
}

ArtifactRef artifact_ref(const std::string& path) {
    return ArtifactRef{std::filesystem::path(path).filename().string(),
                       hash_file(path)};
}

void write_manifest(const Manifest& manifest, const std::string& artifact_path) {
    nlohmann::json doc;
    doc["command"] = manifest.command;
    doc["config"] = manifest.config.is_null() ? nlohmann::json::object()
                                              : manifest.config;
    if (!manifest.deterministic) doc["created_at"] = iso8601_now();
    doc["inputs"] = refs_to_json(manifest.inputs);
    doc["outputs"] = refs_to_json(manifest.outputs);
    doc["root_dataset_hash"] = manifest.root_dataset_hash;
    doc["seed"] = manifest.seed;
    doc["version"] = kVersion;

    const std::string path = manifest_path_for(artifact_path);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ArgumentError("manifest: cannot open '" + path + "' for writing");
    os << doc.dump(2) << '\n';
    if (!os) throw ArgumentError("manifest: write to '" + path + "' failed");
}

std::optional<std::string> read_root_hash(const std::string& artifact_path) {
    const std::string path = manifest_path_for(artifact_path);
    std::ifstream is(path, std::ios::binary);
    if (!is) return std::nullopt;
    nlohmann::json doc;
    try {
        is >> doc;
        return doc.at("root_dataset_hash").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::string resolve_root_hash(const std::vector<std::string>& input_paths) {
    std::set<std::string> roots;
    for (const std::string& path : input_paths) {
        if (const auto root = read_root_hash(path)) roots.insert(*root);
    }
    if (roots.size() > 1) {
        std::string msg =
            "manifest: inputs descend from different dataset lineages:";
        for (const std::string& root : roots) msg += ' ' + root;
        throw IntegrityError(msg);
    }
    if (roots.size() == 1) return *roots.begin();
    std::vector<std::string> hashes;
    hashes.reserve(input_paths.size());
    for (const std::string& path : input_paths) {
        hashes.push_back(hash_file(path));
    }
    return combined_hash(hashes);
}

std::string combined_hash(const std::vector<std::string>& content_hashes) {
    Fnv1a64 hasher;
    for (const std::string& hash : content_hashes) {
        hasher.update(hash.data(), hash.size());
        hasher.update(";", 1);
    }
    return hex64(hasher.value());
}

}  // namespace ppg
