#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "oelab/group.hpp"

namespace oelab {

// x in prod_Z Z/kZ: coordinate i is override[i] if present, else a seeded
// digit at i - offset. Overrides equal to the seeded digit are never stored.
class BiInfinitePoint {
public:
    BiInfinitePoint(int k, uint64_t seed) : k_(k), seed_(seed) {}

    int k() const { return k_; }
    uint64_t seed() const { return seed_; }
    int64_t offset() const { return offset_; }
    const std::map<int64_t, int>& overrides() const { return ov_; }

    int at(int64_t i) const;
    void set(int64_t i, int digit);
    // (shifted x)_i = x_{i-m}
    void shift(int64_t m);
    // realized window [lo, hi]; empty overrides give [0, 0]
    int64_t window_lo() const;
    int64_t window_hi() const;

    bool operator==(const BiInfinitePoint& o) const = default;

private:
    int base(int64_t j) const;
    int k_;
    uint64_t seed_;
    int64_t offset_ = 0;
    std::map<int64_t, int> ov_;
};

inline constexpr int64_t kCarrySlack = 64;

// (f, m) . x: y_i = f_i + x_{i-m}
BiInfinitePoint ll_act(const Group& LL, const Element& g, const BiInfinitePoint& x);
// (a/k^s, n) . x: shift y_i = x_{i+n}, then add a at position -s with rightward carries
BiInfinitePoint bs_act(const Group& BS, const Element& g, const BiInfinitePoint& x);
// add an integer at position p; WindowExhausted if the carry runs kCarrySlack past the window
void add_at(BiInfinitePoint& x, i128 a, int64_t p);

enum class Metric { LL, BS };
// word length, in the metric's group, of the element carrying x to g.x (g in the other group)
int64_t move_distance(Metric metric, const Group& LL, const Group& BS, const Element& g, const BiInfinitePoint& x);
// the element of the metric's group carrying x to y; x and y must share seed and offset
Element carrying_element(Metric metric, const Group& LL, const Group& BS, const BiInfinitePoint& x,
                         const BiInfinitePoint& y);

struct TailCheck {
    double freq = 0;
    double stderr_ = 0;
    double bound = 0;      // k^{-M+1}
    int64_t threshold = 0;  // (k+1)(2|g|_T + 2M + 3)
    int64_t gLength = 0;
    double exhaustedFraction = 0;
    bool pass = false;      // freq <= bound + 4 stderr
};
TailCheck tail_bound_check(int k, const Element& g, int M, uint64_t N, uint64_t seed);
// several M from one set of samples
std::vector<TailCheck> tail_bound_checks(int k, const Element& g, const std::vector<int>& Ms, uint64_t N,
                                         uint64_t seed);

// max over x_0 in Z/kZ of d_T(s.x, x) for each lamplighter generator s
std::vector<int64_t> linf_constants(int k, uint64_t seed);

}  // namespace oelab
