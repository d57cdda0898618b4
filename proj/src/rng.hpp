#pragma once

#include <cstdint>
#include <initializer_list>

#include "numkit.hpp"

namespace mnr::datagen {

// Counter-based generator in the splitmix64 family: output i of a stream
// with key k is mix64(k + (i+1) * GAMMA). Streams are derived by hashing a
// path of 64-bit labels into the key, so (master_seed, replicate, row, ...)
// yield independent streams and any draw is reproducible from its
// coordinates alone, independent of threading or call order.
class CounterRng {
  public:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

    static std::uint64_t mix64(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    static std::uint64_t derive(std::uint64_t seed,
                                std::initializer_list<std::uint64_t> path) {
        std::uint64_t k = mix64(seed + kGamma);
        for (std::uint64_t part : path)
            k = mix64(k ^ mix64(part + kGamma));
        return k;
    }

    explicit CounterRng(std::uint64_t key) : key_(key) {}
    CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
        : key_(derive(seed, path)) {}

    std::uint64_t next_u64() { return mix64(key_ + (++ctr_) * kGamma); }

    // Uniform on the open interval (0,1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via inverse-cdf transform of a (0,1) uniform.
    double normal() {
        return numkit::dist_quantile(numkit::Dist::std_normal, uniform());
    }

  private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
};

} // namespace mnr::datagen
