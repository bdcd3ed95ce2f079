#pragma once

#include <filesystem>

#include "s3rr/core.hpp"

namespace s3rr {

// JSON-lines trajectory file plus a sidecar "<stem>.manifest.json" holding the
// dataset-level fields (env_id, provenance, levels, controls, seed, scorer).
void save_dataset(const DegradationDataset& dataset, const std::filesystem::path& path);
DegradationDataset load_dataset(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& path);

}  // namespace s3rr
