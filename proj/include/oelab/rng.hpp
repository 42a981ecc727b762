#pragma once

#include <cstdint>

namespace oelab {

// splitmix64 finalizer, used as a keyed hash
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t hash_key(uint64_t seed, uint64_t stream) {
    return mix64(mix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

// Counter-based stream: value i depends only on (key, i), so any worker can
// reproduce any draw without shared state.
class Stream {
public:
    Stream(uint64_t seed, uint64_t stream) : key_(hash_key(seed, stream)) {}

    uint64_t next() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * (++ctr_)); }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // unbiased integer in [0, n), n >= 1
    uint64_t below(uint64_t n) {
        if (n <= 1) return 0;
        uint64_t lim = (~uint64_t(0)) - ((~uint64_t(0)) % n + 1) % n;
        for (;;) {
            uint64_t v = next();
            if (v <= lim) return v % n;
        }
    }

    int64_t range(int64_t lo, int64_t hi) {  // inclusive
        return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo) + 1));
    }

private:
    uint64_t key_;
    uint64_t ctr_ = 0;
};

}  // namespace oelab
