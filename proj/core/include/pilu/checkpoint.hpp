#pragma once

// Binary model checkpoints.
//
// Layout (little-endian): "PILUCKPT", u32 version (1), u32 scalar bytes (4 or
// 8), u64 metadata length, metadata (JSON text), u64 tensor count, then per
// tensor: u32 name length, name, u32 rank, rank x u64 dims, raw values.

#include <filesystem>
#include <string>

#include "pilu/model.hpp"

namespace pilu {

template <typename T>
void save_checkpoint(const Model<T>& model, const std::filesystem::path& path, const std::string& metadata = "{}");

/// Restores every parameter of `model` from `path` and returns the metadata.
/// Throws std::runtime_error if the file is malformed, was written with a
/// different scalar type, or its tensor names/shapes do not match the model.
template <typename T>
std::string load_checkpoint(Model<T>& model, const std::filesystem::path& path);

}  // namespace pilu
