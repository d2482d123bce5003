#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace mmoe {

// Deterministic helpers on top of mt19937_64. The standard distributions are
// implementation-defined, so every transform here is spelled out by hand and
// produces the same stream on every platform.

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 1469598103934665603ull) {
    std::uint64_t h = seed;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

// Uniform in (0, 1), strictly inside the open interval.
inline double uniform_unit(std::mt19937_64& g) {
    return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform_range(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(g);
}

// Unbiased index in [0, n) via 128-bit multiply-high.
inline std::size_t uniform_index(std::mt19937_64& g, std::size_t n) {
    using u128 = unsigned __int128;
    return static_cast<std::size_t>((static_cast<u128>(g()) * n) >> 64);
}

template <class T>
void shuffle_inplace(std::vector<T>& v, std::mt19937_64& g) {
    for (std::size_t i = v.size(); i > 1; --i) {
        using std::swap;
        swap(v[i - 1], v[uniform_index(g, i)]);
    }
}

// Uniform sample from the probability simplex over k labels (Dirichlet(1,...,1)),
// via normalized exponentials.
inline std::vector<double> sample_simplex(std::mt19937_64& g, std::size_t k) {
    std::vector<double> p(k);
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        p[i] = -std::log(uniform_unit(g));
        sum += p[i];
    }
    for (std::size_t i = 0; i < k; ++i) p[i] /= sum;
    return p;
}

}  // namespace mmoe
