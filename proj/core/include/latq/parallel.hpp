#pragma once

#include <cstddef>
#include <functional>

namespace latq {

// Splits [0, total) into `chunk_count` contiguous chunks and runs
// fn(chunk_index, begin, end) for each, distributing chunks across
// `threads` workers.  Chunk boundaries depend only on total/chunk_count,
// never on the thread count, so per-chunk floating-point accumulations
// combined in chunk order give byte-identical results at any thread count.
void parallel_chunks(std::size_t total, std::size_t chunk_count, int threads,
                     const std::function<void(std::size_t, std::size_t,
                                              std::size_t)>& fn);

// Convenience: fixed chunk grid for deterministic reductions.
inline constexpr std::size_t kReductionChunks = 256;

}  // namespace latq
