#pragma once

#include <filesystem>
#include <string>

#include "gcs/surrogate/net.hpp"

namespace gcs::surrogate {

// Layout: magic "GCSCKPT\0", u32 version, u64 header length, JSON header (spec, spec digest, target,
// normalization, input scales, output times, tensor names and shapes), raw little-endian f64 tensors in
// registration order, then the u64 FNV-1a checksum of everything before it.
inline constexpr unsigned kCheckpointVersion = 1;

std::string serialize_checkpoint(const SurrogateNet& net);
SurrogateNet deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const SurrogateNet& net, const std::filesystem::path& path);
SurrogateNet load_checkpoint(const std::filesystem::path& path);

}  // namespace gcs::surrogate
