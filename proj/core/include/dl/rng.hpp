#pragma once
// Counter-keyed splittable random streams.
//
// Every consumer derives its own stream from (seed, experiment tag,
// replicate index, purpose tag), so replicates can run on any number of
// threads and still produce identical results, and adding draws to one
// purpose never perturbs another.

#include <cstdint>
#include <cmath>

namespace dl {

// 64-bit finalizer used for key derivation (splitmix64 mixing function).
inline uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// purpose tags for substream derivation
namespace purpose {
constexpr uint64_t arrivals  = 0x01;
constexpr uint64_t shapes    = 0x02;
constexpr uint64_t marks     = 0x03;
constexpr uint64_t origins   = 0x04;
constexpr uint64_t sampling  = 0x05;
constexpr uint64_t scratch   = 0x06;
}

// xoshiro256++ with keyed seeding
struct RngStream {
    uint64_t s[4];
    double spare = 0.0;
    bool has_spare = false;

    static RngStream keyed(uint64_t seed, uint64_t a = 0, uint64_t b = 0, uint64_t c = 0) {
        uint64_t x = seed ^ 0x6A09E667F3BCC908ull;
        x = mix64(x) ^ a;
        x = mix64(x) ^ b;
        x = mix64(x) ^ c;
        RngStream r;
        uint64_t st = x;
        for (int i = 0; i < 4; ++i) {
            st += 0x9E3779B97F4A7C15ull;
            r.s[i] = mix64(st);
        }
        if (!(r.s[0] | r.s[1] | r.s[2] | r.s[3])) r.s[0] = 1;
        return r;
    }

    static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    uint64_t next() {
        uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    // uniform on [0,1) with 53 random bits
    double u01() { return double(next() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * u01(); }

    double exponential(double rate) { return -std::log1p(-u01()) / rate; }

    bool bernoulli(double p) { return u01() < p; }

    uint64_t below(uint64_t n) { return next() % n; }  // n small, bias negligible

    // Box-Muller with cached second variate
    double normal() {
        if (has_spare) { has_spare = false; return spare; }
        double u = u01(), v = u01();
        while (u <= 0x1.0p-60) u = u01();
        double r = std::sqrt(-2.0 * std::log(u));
        double th = 6.283185307179586476925287 * v;
        spare = r * std::sin(th);
        has_spare = true;
        return r * std::cos(th);
    }
};

}  // namespace dl
