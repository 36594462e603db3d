#include "gcs/common/hash.hpp"

namespace gcs {

std::uint64_t fnv1a(std::span<const std::byte> bytes, std::uint64_t state) {
  for (std::byte b : bytes) {
    state ^= static_cast<std::uint64_t>(b);
    state *= kFnvPrime;
  }
  return state;
}

std::uint64_t fnv1a(std::string_view text, std::uint64_t state) {
  return fnv1a(std::as_bytes(std::span(text.data(), text.size())), state);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view component, std::uint64_t index) {
  std::uint64_t h = splitmix64(seed);
  h = fnv1a(component, h);
  h = splitmix64(h ^ splitmix64(index + 0x632be59bd9b4e019ULL));
  return h;
}

}  // namespace gcs
