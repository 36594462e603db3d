#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace gcs {

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

// FNV-1a over raw bytes; `state` allows incremental hashing.
std::uint64_t fnv1a(std::span<const std::byte> bytes, std::uint64_t state = kFnvOffset);
std::uint64_t fnv1a(std::string_view text, std::uint64_t state = kFnvOffset);

std::uint64_t splitmix64(std::uint64_t x);

// Seed for an independent random stream, derived from (seed, component, index).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view component, std::uint64_t index = 0);

}  // namespace gcs
