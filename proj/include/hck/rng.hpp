#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>
#include <random>
#include <string_view>

namespace hck {

// Seeding scheme
// --------------
// Every random stream in the library derives from a single master seed via
//
//     stream_seed = splitmix64( splitmix64(master ^ fnv1a(tag)) ^ counter )
//
// where `tag` names the purpose ("inputs", "teacher", "mc", ...) and `counter`
// enumerates the consumer (trial index, sample index, ...). Streams are
// created up front and consumed in a fixed order inside each task, so results
// do not depend on how tasks are scheduled across threads.
//
// The uniform and normal draws are implemented here instead of using
// std::uniform_real_distribution / std::normal_distribution because the
// standard leaves those implementation-defined; mt19937_64 itself is fully
// specified, so the bit stream below is reproducible everywhere.

constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t counter) {
    return splitmix64(splitmix64(master ^ fnv1a(tag)) ^ counter);
}

namespace detail {

// Ziggurat tables for the standard normal (128 layers). Built once from the
// closed-form constants; all IEEE double arithmetic, so the tables and the
// generated stream are identical everywhere.
struct ZigguratTables {
    double x[130];
    double ratio[128];

    ZigguratTables() {
        constexpr double r = 3.442619855899;
        constexpr double v = 9.91256303526217e-3;
        const double f = std::exp(-0.5 * r * r);
        x[0] = v / f;  // virtual base layer
        x[1] = r;
        x[128] = 0.0;
        for (int i = 2; i < 128; ++i)
            x[i] = std::sqrt(-2.0 * std::log(v / x[i - 1] + std::exp(-0.5 * x[i - 1] * x[i - 1])));
        for (int i = 0; i < 128; ++i) ratio[i] = x[i + 1] / x[i];
        x[129] = 0.0;
    }
};

inline const ZigguratTables& ziggurat() {
    static const ZigguratTables tables;
    return tables;
}

}  // namespace detail

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // standard normal via the ziggurat; one u64 feeds both the layer index
    // (low 7 bits) and the position (top 53 bits)
    double normal() {
        const auto& zig = detail::ziggurat();
        for (;;) {
            const std::uint64_t bits = next_u64();
            const int layer = static_cast<int>(bits & 0x7f);
            const double u = 2.0 * (static_cast<double>(bits >> 11) * 0x1.0p-53) - 1.0;
            if (std::abs(u) < zig.ratio[layer]) return u * zig.x[layer];
            if (layer == 0) return tail(u < 0.0);
            const double val = u * zig.x[layer];
            const double f0 = std::exp(-0.5 * (zig.x[layer] * zig.x[layer] - val * val));
            const double f1 = std::exp(-0.5 * (zig.x[layer + 1] * zig.x[layer + 1] - val * val));
            if (f1 + uniform() * (f0 - f1) < 1.0) return val;
        }
    }

    void fill_normal(double* dst, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) dst[i] = normal();
    }

private:
    double tail(bool negative) {
        constexpr double r = 3.442619855899;
        double a, b;
        do {
            a = std::log(positive_uniform()) / r;
            b = std::log(positive_uniform());
        } while (-2.0 * b < a * a);
        return negative ? a - r : r - a;
    }

    double positive_uniform() {  // (0, 1]
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    std::mt19937_64 engine_;
};

}  // namespace hck
