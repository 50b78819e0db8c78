#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace paofed {

using Rng = std::mt19937_64;

// Seeds for independent named substreams ("data", "availability", "delay",
// ...) derived from one root seed, so that every consumer of randomness in a
// run draws from its own stream regardless of what the others consume.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                          std::uint64_t index = 0);

Rng make_stream(std::uint64_t root, std::string_view stream,
                std::uint64_t index = 0);

}  // namespace paofed
