#pragma once

#include <string>

#include "useembed/dataset.hpp"

namespace useembed {

// Manifest-driven ingestion. The manifest is a JSON object naming the
// feature, label, taxonomy and attribute files; relative paths resolve
// against the manifest's directory. The returned dataset is fully validated.
Dataset load_dataset(const std::string& manifest_path);

// Writes the dataset in the same file formats under dir (created if needed)
// and returns the manifest path. load_dataset(save_dataset(d)) reproduces d
// bit for bit.
std::string save_dataset(const Dataset& dataset, const std::string& dir);

}  // namespace useembed
