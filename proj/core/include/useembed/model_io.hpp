#pragma once

#include <string>

#include "useembed/model.hpp"

namespace useembed {

// Binary model format: magic "USEM", u32 version, u32 JSON header length,
// JSON header (dims, taxonomy, attribute names, hyperparams, payload CRC32),
// then W, U_cat, U_sup, U_attr, B as little-endian 32-bit floats, row-major.
void save_model(const EmbeddingModel& model, const std::string& path);
EmbeddingModel load_model(const std::string& path);

}  // namespace useembed
