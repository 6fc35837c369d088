#pragma once

#include "rtlab/rational.hpp"

#include <cstdint>

// splitmix64; small and reproducible across platforms.
struct Gen {
    uint64_t s;
    explicit Gen(uint64_t seed) : s(seed) {}
    uint64_t next() {
        uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    uint64_t below(uint64_t n) { return next() % n; }
    long range(long lo, long hi) { return lo + static_cast<long>(below(static_cast<uint64_t>(hi - lo + 1))); }
    // Rational in [0, 1) with denominator 3^depth.
    rtlab::Q triadic_point(unsigned depth) {
        const rtlab::Z den = rtlab::zpow(3, depth);
        rtlab::Q v(rtlab::Z(static_cast<unsigned long>(below(den.get_ui()))), den);
        v.canonicalize();
        return v;
    }
    rtlab::Q rational(long maxNum, long maxDen) {
        rtlab::Q v(range(-maxNum, maxNum), range(1, maxDen));
        v.canonicalize();
        return v;
    }
};
