#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ppg {

// A named artifact and the hash of its bytes. Only basenames are recorded so
// the same pipeline run in two directories produces identical manifests.
struct ArtifactRef {
    std::string name;
    std::string hash;
};

// Every pipeline stage writes one of these next to its artifact
// ("<artifact>.manifest.json"): what ran, with which seed and settings, over
// which inputs, and which dataset lineage the artifact descends from.
struct Manifest {
    std::string command;
    std::uint64_t seed = 0;
    nlohmann::json config;  // effective non-path settings, flag overrides applied
    std::vector<ArtifactRef> inputs;
    std::vector<ArtifactRef> outputs;
    std::string root_dataset_hash;
    bool deterministic = false;  // suppresses the wall-clock timestamp
};

std::string manifest_path_for(const std::string& artifact_path);

ArtifactRef artifact_ref(const std::string& path);

void write_manifest(const Manifest& manifest, const std::string& artifact_path);

// The lineage hash recorded in an artifact's manifest, if it has one.
std::optional<std::string> read_root_hash(const std::string& artifact_path);

// One lineage hash for a stage: the unique root among the inputs' manifests.
// Inputs without manifests are tolerated (hand-built files); if no input has
// one, the inputs' own content hashes are combined into a fresh root. Two
// different recorded roots mean someone is mixing pipelines — integrity error.
std::string resolve_root_hash(const std::vector<std::string>& input_paths);

std::string combined_hash(const std::vector<std::string>& content_hashes);

}  // namespace ppg
