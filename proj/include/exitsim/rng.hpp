#pragma once

#include <cmath>
#include <cstdint>

// Counter-based random streams: every variate is a pure function of
// (seed, stream, path, slot, coord), so output is identical for any
// worker count or evaluation order.

namespace exitsim::rng {

struct Counter {
    uint32_t v[4];
};
struct Key {
    uint32_t v[2];
};

inline uint32_t mul_hi_lo(uint32_t a, uint32_t b, uint32_t& lo) {
    const uint64_t p = static_cast<uint64_t>(a) * b;
    lo = static_cast<uint32_t>(p);
    return static_cast<uint32_t>(p >> 32);
}

// Philox 4x32-10 (Salmon et al. constants).
inline Counter philox4x32(Counter ctr, Key key) {
    constexpr uint32_t kM0 = 0xD2511F53u;
    constexpr uint32_t kM1 = 0xCD9E8D57u;
    constexpr uint32_t kW0 = 0x9E3779B9u;
    constexpr uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        uint32_t lo0, lo1;
        const uint32_t hi0 = mul_hi_lo(kM0, ctr.v[0], lo0);
        const uint32_t hi1 = mul_hi_lo(kM1, ctr.v[2], lo1);
        const Counter next{{hi1 ^ ctr.v[1] ^ key.v[0], lo1, hi0 ^ ctr.v[3] ^ key.v[1], lo0}};
        ctr = next;
        key.v[0] += kW0;
        key.v[1] += kW1;
    }
    return ctr;
}

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Stream ids keep independent uses of one experiment seed apart.
constexpr uint64_t kStreamBase = 0;  // driver increments on the grid a driver was sampled on

inline uint64_t bridge_stream(uint64_t sub_seed, int depth) {
    return splitmix64(0x4252494447ull ^ sub_seed) + static_cast<uint64_t>(depth) + 1;
}

inline uint64_t named_stream(uint64_t tag) {
    return splitmix64(0x5354524Dull ^ tag) | 1ull;
}

inline Key make_key(uint64_t seed, uint64_t stream) {
    const uint64_t k = splitmix64(seed ^ splitmix64(stream));
    return Key{{static_cast<uint32_t>(k), static_cast<uint32_t>(k >> 32)}};
}

inline Counter make_counter(uint64_t path, uint64_t slot, uint32_t coord) {
    return Counter{{static_cast<uint32_t>(path), static_cast<uint32_t>(path >> 32),
                    static_cast<uint32_t>(slot),
                    static_cast<uint32_t>((slot >> 32) ^ (static_cast<uint64_t>(coord) << 24))}};
}

// Uniform in (0,1), never exactly 0 or 1.
inline double uniform01(uint64_t seed, uint64_t stream, uint64_t path, uint64_t slot, uint32_t coord) {
    const Counter out = philox4x32(make_counter(path, slot, coord), make_key(seed, stream));
    const uint64_t bits = (static_cast<uint64_t>(out.v[0]) << 32) | out.v[1];
    return static_cast<double>(bits >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

// Inverse standard normal CDF, Wichura's PPND16 (AS 241). |error| < 1e-15 on (0,1).
inline double inverse_normal_cdf(double p) {
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) *
                        r +
                    4.5921953931549871457e4) *
                       r +
                   1.3731693765509461125e4) *
                      r +
                  1.9715909503065514427e3) *
                     r +
                 1.3314166789178437745e2) *
                    r +
                3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) *
                        r +
                    2.1213794301586595867e4) *
                       r +
                   5.3941960214247511077e3) *
                      r +
                  6.8718700749205790830e2) *
                     r +
                 4.2313330701600911252e1) *
                    r +
                1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) *
                       r +
                   1.27045825245236838258e0) *
                      r +
                  3.64784832476320460504e0) *
                     r +
                 5.76949722146069140550e0) *
                    r +
                4.63033784615654529590e0) *
                   r +
               1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) *
                       r +
                   1.48103976427480074590e-1) *
                      r +
                  6.89767334985100004550e-1) *
                     r +
                 1.67638483018380384940e0) *
                    r +
                2.05319162663775882187e0) *
                   r +
               1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) *
                       r +
                   2.65321895265761230930e-2) *
                      r +
                  2.96560571828504891230e-1) *
                     r +
                 1.78482653991729133580e0) *
                    r +
                5.46378491116411436990e0) *
                   r +
               6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) *
                       r +
                   7.86869131145613259100e-4) *
                      r +
                  1.48753612908506148525e-2) *
                     r +
                 1.36929880922735805310e-1) *
                    r +
                5.99832206555887937690e-1) *
                   r +
               1.0);
    }
    return (q < 0.0) ? -val : val;
}

// One standard normal variate keyed by (seed, stream, path, slot, coord).
inline double normal(uint64_t seed, uint64_t stream, uint64_t path, uint64_t slot, uint32_t coord) {
    return inverse_normal_cdf(uniform01(seed, stream, path, slot, coord));
}

}  // namespace exitsim::rng
