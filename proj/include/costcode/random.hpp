#pragma once

#include <cstdint>
#include <functional>
#include <random>

namespace costcode {

// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Engine for the stream identified by (seed, stream index). Streams are
// std::mt19937_64 instances seeded through SplitMix64 so that neighbouring
// indices give unrelated states.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);

inline constexpr std::size_t kChunkSize = 4096;

// Runs body(chunk_index, begin, end) over [0, count) split into kChunkSize
// pieces. Work is distributed over `workers` threads (0 = hardware
// concurrency); chunk boundaries never depend on the worker count.
void for_each_chunk(std::size_t count, unsigned workers,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

} // namespace costcode
