#include "oelab/bsll.hpp"

#include <cmath>

#include "oelab/errors.hpp"
#include "oelab/parallel.hpp"
#include "oelab/rng.hpp"

namespace oelab {

int BiInfinitePoint::base(int64_t j) const {
    Stream rs(seed_, static_cast<uint64_t>(j));
    return static_cast<int>(rs.below(static_cast<uint64_t>(k_)));
}

int BiInfinitePoint::at(int64_t i) const {
    auto it = ov_.find(i);
    return it != ov_.end() ? it->second : base(i - offset_);
}

void BiInfinitePoint::set(int64_t i, int digit) {
    digit = ((digit % k_) + k_) % k_;
    if (digit == base(i - offset_))
        ov_.erase(i);
    else
        ov_[i] = digit;
}

void BiInfinitePoint::shift(int64_t m) {
    if (m == 0) return;
    std::map<int64_t, int> moved;
    for (auto& [i, v] : ov_) moved.emplace_hint(moved.end(), i + m, v);
    ov_ = std::move(moved);
    offset_ += m;
}

int64_t BiInfinitePoint::window_lo() const { return ov_.empty() ? 0 : ov_.begin()->first; }
int64_t BiInfinitePoint::window_hi() const { return ov_.empty() ? 0 : ov_.rbegin()->first; }

void add_at(BiInfinitePoint& x, i128 a, int64_t p) {
    const int k = x.k();
    const int64_t limit = std::max(x.window_hi(), p) + kCarrySlack;
    i128 c = a;
    for (int64_t i = p; c != 0; ++i) {
        if (i > limit) throw WindowExhausted("carry ran past position " + std::to_string(limit));
        i128 v = x.at(i) + c;
        i128 d = v % k;
        if (d < 0) d += k;
        c = (v - d) / k;
        x.set(i, static_cast<int>(d));
    }
}

BiInfinitePoint ll_act(const Group& LL, const Element& g, const BiInfinitePoint& x) {
    LL.check(g);
    if (LL.param() != x.k()) throw UsageError("lamplighter and point disagree on k");
    const auto& l = std::get<LampEl>(g);
    BiInfinitePoint y = x;
    y.shift(l.pos);
    for (auto& [i, v] : l.lamps) y.set(i, y.at(i) + v);
    return y;
}

BiInfinitePoint bs_act(const Group& BS, const Element& g, const BiInfinitePoint& x) {
    BS.check(g);
    if (BS.param() != x.k()) throw UsageError("BS(1,k) and point disagree on k");
    const auto& b = std::get<BsEl>(g);
    BiInfinitePoint y = x;
    y.shift(-b.n);
    add_at(y, b.a, -b.s);
    return y;
}

Element carrying_element(Metric metric, const Group&, const Group&, const BiInfinitePoint& x,
                         const BiInfinitePoint& y) {
    if (x.seed() != y.seed() || x.k() != y.k()) throw UsageError("points come from different seeds");
    const int k = x.k();
    BiInfinitePoint xs = x;
    const int64_t m = y.offset() - x.offset();
    xs.shift(m);
    std::map<int64_t, int> diff;  // y_i - (shifted x)_i, in (-k, k)
    auto note = [&](int64_t i) {
        int d = y.at(i) - xs.at(i);
        if (d != 0) diff[i] = d;
    };
    for (auto& [i, v] : xs.overrides()) note(i);
    for (auto& [i, v] : y.overrides()) note(i);
    if (metric == Metric::LL) {
        LampEl e;
        e.pos = m;
        for (auto& [i, d] : diff) e.lamps[i] = ((d % k) + k) % k;
        return e;
    }
    // q = sum d_i k^i, n = -m
    if (diff.empty()) return bs_normalize(0, 0, -m, k);
    const int64_t lo = diff.begin()->first, hi = diff.rbegin()->first;
    const int64_t s = std::max<int64_t>(0, -lo);
    if (hi + s > 120) throw ResourceExhausted("k-adic difference too wide for 128 bits");
    i128 a = 0, pw = 1;
    int64_t pos = -s;
    for (auto& [i, d] : diff) {
        while (pos < i) {
            if (__builtin_mul_overflow(pw, static_cast<i128>(k), &pw)) throw ResourceExhausted("k-adic difference overflow");
            ++pos;
        }
        a += pw * d;
    }
    return bs_normalize(a, s, -m, k);
}

int64_t move_distance(Metric metric, const Group& LL, const Group& BS, const Element& g, const BiInfinitePoint& x) {
    if (metric == Metric::LL) {
        BiInfinitePoint y = bs_act(BS, g, x);
        return LL.word_length(carrying_element(Metric::LL, LL, BS, x, y));
    }
    BiInfinitePoint y = ll_act(LL, g, x);
    return BS.word_length(carrying_element(Metric::BS, LL, BS, x, y));
}

namespace {
struct TailAcc {
    std::vector<uint64_t> hits;
    uint64_t exhausted = 0;
    TailAcc& operator+=(const TailAcc& o) {
        for (std::size_t i = 0; i < hits.size(); ++i) hits[i] += o.hits[i];
        exhausted += o.exhausted;
        return *this;
    }
};
}  // namespace

std::vector<TailCheck> tail_bound_checks(int k, const Element& g, const std::vector<int>& Ms, uint64_t N,
                                         uint64_t seed) {
    if (N < 1) throw UsageError("need at least one sample");
    const Group LL = Group::lamplighter(k), BS = Group::bs(k);
    BS.check(g);
    const int64_t len = BS.word_length(g);
    std::vector<TailCheck> out(Ms.size());
    for (std::size_t j = 0; j < Ms.size(); ++j) {
        out[j].gLength = len;
        out[j].threshold = static_cast<int64_t>(k + 1) * (2 * len + 2 * Ms[j] + 3);
        out[j].bound = std::pow(static_cast<double>(k), -Ms[j] + 1);
    }
    TailAcc zero{std::vector<uint64_t>(Ms.size(), 0)};
    auto acc = block_reduce(N, zero, [&](TailAcc& a, uint64_t i) {
        BiInfinitePoint x(k, hash_key(seed, i));
        try {
            const int64_t d = move_distance(Metric::LL, LL, BS, g, x);
            for (std::size_t j = 0; j < out.size(); ++j)
                if (d >= out[j].threshold) ++a.hits[j];
        } catch (const WindowExhausted&) {
            ++a.exhausted;
        }
    });
    // exhausted samples count as hits, which can only raise the frequency
    const double n = static_cast<double>(N);
    for (std::size_t j = 0; j < out.size(); ++j) {
        auto& r = out[j];
        r.freq = static_cast<double>(acc.hits[j] + acc.exhausted) / n;
        r.stderr_ = std::sqrt(r.freq * (1 - r.freq) / n);
        r.exhaustedFraction = static_cast<double>(acc.exhausted) / n;
        r.pass = r.freq <= r.bound + 4 * r.stderr_;
    }
    return out;
}

TailCheck tail_bound_check(int k, const Element& g, int M, uint64_t N, uint64_t seed) {
    return tail_bound_checks(k, g, {M}, N, seed).front();
}

std::vector<int64_t> linf_constants(int k, uint64_t seed) {
    const Group LL = Group::lamplighter(k), BS = Group::bs(k);
    std::vector<int64_t> out;
    for (const auto& s : LL.generators()) {
        int64_t best = 0;
        for (int v = 0; v < k; ++v) {
            BiInfinitePoint x(k, seed);
            x.set(0, v);
            best = std::max(best, move_distance(Metric::BS, LL, BS, s, x));
        }
        out.push_back(best);
    }
    return out;
}

}  // namespace oelab
