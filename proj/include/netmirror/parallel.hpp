#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace netmirror {

using Rng = std::mt19937_64;

/// Derives an independent seed for substream `stream` of a master seed.
/// Used everywhere a computation is split per node, per time or per
/// replicate, so results do not depend on evaluation order.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream);

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    return Rng(substream_seed(seed, stream));
}

/// Number of worker threads used by parallel_for. 0 selects the hardware
/// concurrency. Output of every library routine is independent of this value.
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Runs body(i) for i in [0, count). Each index is processed exactly once;
/// bodies must only write to index-owned slots.
template <typename Body>
void parallel_for(std::size_t count, Body&& body);

namespace detail {
void run_parallel(std::size_t count, void (*fn)(void*, std::size_t), void* ctx);
}

template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
    using B = std::remove_reference_t<Body>;
    detail::run_parallel(
        count, [](void* ctx, std::size_t i) { (*static_cast<B*>(ctx))(i); },
        static_cast<void*>(&body));
}

}  // namespace netmirror
