#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace xfish {

// Thrown for bad user input: unusable config files, missing checkpoints,
// malformed manifests. The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// splitmix64 finalizer; used to derive per-epoch / per-sample seeds from a
// base seed so parallel consumers never share an RNG stream.
inline std::uint64_t mix_bits(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a) {
    return mix_bits(base ^ mix_bits(a));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return mix_bits(derive_seed(base, a) ^ mix_bits(b));
}

// Worker count for fan-out sections (frame scoring, clip scanning).
// XFISH_DETERMINISTIC=1 (the default) pins everything to one worker.
int worker_count();

}  // namespace xfish
