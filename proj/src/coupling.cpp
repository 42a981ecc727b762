#include "oelab/coupling.hpp"

#include <algorithm>
#include <cmath>

#include "oelab/errors.hpp"
#include "oelab/parallel.hpp"
#include "oelab/rng.hpp"

namespace oelab {

// ---- gauges ----

Gauge Gauge::power(double p) {
    if (!(p > 0)) throw UsageError("power gauge needs p > 0");
    return Gauge(Kind::Power, p);
}
Gauge Gauge::exp(double c) {
    if (!(c > 0)) throw UsageError("exp gauge needs c > 0");
    return Gauge(Kind::Exp, c);
}
Gauge Gauge::logpower(double eps) {
    if (!(eps >= 0)) throw UsageError("logpow gauge needs eps >= 0");
    return Gauge(Kind::LogPower, eps);
}

Gauge Gauge::parse(const std::string& s) {
    if (s == "identity") return identity();
    auto c = s.find(':');
    if (c == std::string::npos) throw UsageError("bad gauge '" + s + "'");
    std::string kind = s.substr(0, c);
    double v;
    try {
        std::size_t pos = 0;
        v = std::stod(s.substr(c + 1), &pos);
        if (pos != s.size() - c - 1) throw UsageError("bad gauge parameter in '" + s + "'");
    } catch (const std::logic_error&) {
        throw UsageError("bad gauge parameter in '" + s + "'");
    }
    if (kind == "power") return power(v);
    if (kind == "exp") return exp(v);
    if (kind == "logpow") return logpower(v);
    throw UsageError("unknown gauge '" + kind + "'");
}

double Gauge::operator()(double t) const {
    switch (kind_) {
    case Kind::Power: return std::pow(t, param_);
    case Kind::Exp: return std::exp(param_ * t);
    case Kind::LogPower: return t / std::pow(std::log(std::exp(1.0 + param_) + t), 1.0 + param_);
    case Kind::Identity: return t;
    }
    return t;
}

std::string Gauge::name() const {
    std::string v = std::to_string(param_);
    switch (kind_) {
    case Kind::Power: return "power:" + v;
    case Kind::Exp: return "exp:" + v;
    case Kind::LogPower: return "logpow:" + v;
    case Kind::Identity: return "identity";
    }
    return "?";
}

// ---- coupling ----

MatchedCoupling::MatchedCoupling(TilingPtr left, TilingPtr right, int maxDepth)
    : left_(std::move(left)), right_(std::move(right)), maxDepth_(maxDepth) {
    if (maxDepth < 0) throw UsageError("max depth must be >= 0");
    maxDepth_ = std::min({maxDepth, left_->max_depth(), right_->max_depth()});
    for (int k = 0; k <= maxDepth_; ++k)
        if (left_->letter_count(k) != right_->letter_count(k))
            throw UsageError("letter sizes differ at depth " + std::to_string(k) + ": " +
                             std::to_string(left_->letter_count(k)) + " vs " + std::to_string(right_->letter_count(k)));
}

MatchedCoupling make_coupling(const std::string& left, const std::string& right, int maxDepth) {
    // match whichever side is the plain Z tiling
    if (left == "zn:1" && right != "zn:1") {
        auto r = builtin(right);
        return MatchedCoupling(builtin_for_partner(left, *r), r, maxDepth);
    }
    auto l = builtin(left);
    return MatchedCoupling(l, builtin_for_partner(right, *l), maxDepth);
}

uint64_t MatchedCoupling::coord(const CouplingPoint& x, int k) const {
    const uint64_t n = left_->letter_count(k);
    if (k < static_cast<int>(x.prefix.size())) {
        if (x.prefix[k] >= n) throw UsageError("coordinate " + std::to_string(k) + " out of range");
        return x.prefix[k];
    }
    Stream rs(x.seed, static_cast<uint64_t>(k));
    return rs.below(n);
}

bool MatchedCoupling::same_point(const CouplingPoint& a, const CouplingPoint& b, int upTo) const {
    for (int k = 0; k <= upTo; ++k)
        if (coord(a, k) != coord(b, k)) return false;
    return true;
}

Element MatchedCoupling::prefix_word(Side s, const CouplingPoint& x, int n) const {
    const Tiling& T = tiling(s);
    std::vector<uint64_t> idx(n + 1);
    for (int k = 0; k <= n; ++k) idx[k] = coord(x, k);
    return T.word(idx);
}

CouplingPoint MatchedCoupling::random_point(uint64_t seed, uint64_t i) const { return CouplingPoint{{}, hash_key(seed, i)}; }

ActResult MatchedCoupling::act(Side s, const Element& gamma, const CouplingPoint& x) const {
    const Tiling& T = tiling(s);
    const Group& G = T.group();
    G.check(gamma);
    const bool leftOrient = T.orientation() == Orientation::Left;
    const Element gammaInv = G.inverse(gamma);
    Element w = G.identity();
    for (int n = 0; n <= maxDepth_; ++n) {
        Element letter = T.letter(n, coord(x, n));
        w = leftOrient ? G.multiply(w, letter) : G.multiply(letter, w);
        Element cand = leftOrient ? G.multiply(gamma, w) : G.multiply(w, gammaInv);
        if (T.in_tile(cand, n)) {
            ActResult r;
            r.depth = n;
            r.point.seed = x.seed;
            r.point.prefix = T.decode(cand, n);
            for (std::size_t k = n + 1; k < x.prefix.size(); ++k) r.point.prefix.push_back(x.prefix[k]);
            return r;
        }
    }
    throw DepthExhausted("no depth <= " + std::to_string(maxDepth_) + " absorbs " + G.format(gamma));
}

int MatchedCoupling::stabilization_depth(Side s, const Element& gamma, const CouplingPoint& x) const {
    ActResult r = act(s, gamma, x);
    for (int k = r.depth; k >= 0; --k)
        if (coord(r.point, k) != coord(x, k)) return k + 1;
    return 0;
}

Element MatchedCoupling::transfer_cocycle(Side s, const Element& gamma, const CouplingPoint& x) const {
    return transfer_cocycle(s, gamma, x, act(s, gamma, x));
}

Element MatchedCoupling::transfer_cocycle(Side s, const Element&, const CouplingPoint& x, const ActResult& r) const {
    const Side p = other(s);
    const Tiling& P = tiling(p);
    const Group& H = P.group();
    Element before = prefix_word(p, x, r.depth), after = prefix_word(p, r.point, r.depth);
    if (P.orientation() == Orientation::Left) return H.multiply(after, H.inverse(before));
    return H.multiply(H.inverse(after), before);
}

Element MatchedCoupling::carrying_element(Side s, const CouplingPoint& x, const CouplingPoint& y) const {
    if (x.seed != y.seed) throw UsageError("points from different seeds are not in one orbit");
    const std::size_t tail = std::max(x.prefix.size(), y.prefix.size());
    for (std::size_t k = maxDepth_ + 1; k < tail; ++k)
        if (coord(x, static_cast<int>(k)) != coord(y, static_cast<int>(k)))
            throw UsageError("points differ beyond depth " + std::to_string(maxDepth_));
    int d = -1;
    for (int k = maxDepth_; k >= 0 && d < 0; --k)
        if (coord(x, k) != coord(y, k)) d = k;
    const Tiling& T = tiling(s);
    const Group& G = T.group();
    if (d < 0) return G.identity();
    Element before = prefix_word(s, x, d), after = prefix_word(s, y, d);
    if (T.orientation() == Orientation::Left) return G.multiply(after, G.inverse(before));
    return G.multiply(G.inverse(after), before);
}

// ---- tail ----

namespace {
struct CountAcc {
    std::vector<uint64_t> c;
    CountAcc& operator+=(const CountAcc& o) {
        for (std::size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
        return *this;
    }
};
}  // namespace

std::vector<TailRow> mc_tail(const MatchedCoupling& C, Side s, const Element& gamma, int K, uint64_t N, uint64_t seed,
                             bool withExact) {
    if (N < 1) throw UsageError("need at least one sample");
    K = std::min(K, C.max_depth());
    C.tiling(s).group().check(gamma);
    CountAcc zero{std::vector<uint64_t>(K + 1, 0)};
    auto acc = block_reduce(N, zero, [&](CountAcc& a, uint64_t i) {
        int d;
        try {
            d = C.act(s, gamma, C.random_point(seed, i)).depth;
        } catch (const DepthExhausted&) {
            d = C.max_depth() + 1;
        }
        for (int k = 0; k < std::min(d, K + 1); ++k) ++a.c[k];
    });
    std::vector<TailRow> rows;
    for (int k = 0; k <= K; ++k) {
        TailRow r;
        r.k = k;
        r.freq = static_cast<double>(acc.c[k]) / static_cast<double>(N);
        r.stderr_ = std::sqrt(r.freq * (1 - r.freq) / static_cast<double>(N));
        if (withExact) {
            try {
                r.exact = exact_tail(C.tiling(s), gamma, k);
            } catch (const ResourceExhausted&) {
            }
        }
        rows.push_back(r);
    }
    return rows;
}

// ---- integrability ----

namespace {

struct IntAcc {
    double sum = 0, sumsq = 0, beyond = 0;
    uint64_t n = 0, exhausted = 0;
    std::vector<double> strata;
    IntAcc& operator+=(const IntAcc& o) {
        sum += o.sum;
        sumsq += o.sumsq;
        beyond += o.beyond;
        n += o.n;
        exhausted += o.exhausted;
        for (std::size_t i = 0; i < strata.size(); ++i) strata[i] += o.strata[i];
        return *this;
    }
};

template <bool Parallel>
IntegrabilityReport integrability_impl(const MatchedCoupling& C, Side s, const Element& gamma, const Gauge& g,
                                       uint64_t N, uint64_t seed) {
    if (N < 1) throw UsageError("need at least one sample");
    C.tiling(s).group().check(gamma);
    const Tiling& P = C.tiling(other(s));
    const Tiling& T = C.tiling(s);
    const int D = C.max_depth();

    std::vector<double> radius;  // 2R'_k
    for (int k = 0; k <= D; ++k) {
        auto r = P.claimed_radius(k);
        if (!r) {
            radius.clear();
            break;
        }
        radius.push_back(2 * *r);
    }

    IntAcc zero;
    zero.strata.assign(radius.size(), 0.0);
    auto body = [&](IntAcc& a, uint64_t i) {
        try {
            auto pt = C.random_point(seed, i);
            auto r = C.act(s, gamma, pt);
            double d = static_cast<double>(P.group().word_length(C.transfer_cocycle(s, gamma, pt, r)));
            double v = g(d);
            a.sum += v;
            a.sumsq += v * v;
            ++a.n;
            if (!radius.empty()) {
                auto it = std::lower_bound(radius.begin(), radius.end(), d);
                if (it == radius.end())
                    a.beyond += v;
                else
                    a.strata[it - radius.begin()] += v;
            }
        } catch (const DepthExhausted&) {
            ++a.exhausted;
        } catch (const CapExceeded&) {
            ++a.exhausted;
        }
    };
    IntAcc acc = Parallel ? block_reduce(N, zero, body) : block_reduce_serial(N, zero, body);

    IntegrabilityReport rep;
    rep.samples = N;
    rep.exhaustedFraction = static_cast<double>(acc.exhausted) / static_cast<double>(N);
    if (acc.n > 0) {
        const double n = static_cast<double>(acc.n);
        rep.estimate = acc.sum / n;
        double var = acc.n > 1 ? std::max(0.0, (acc.sumsq - n * rep.estimate * rep.estimate) / (n - 1)) : 0.0;
        rep.stderr_ = std::sqrt(var / n);
        for (double v : acc.strata) rep.strata.push_back(v / n);
        rep.beyondStrata = acc.beyond / n;
    }

    if (!radius.empty()) {
        double prevEps = 1.0, sum = 0.0, prevTerm = -1.0, lastTerm = 0.0;
        bool ok = true;
        for (int k = 0; k <= D; ++k) {
            auto e = T.claimed_epsilon(k);
            if (!e) {
                ok = false;
                break;
            }
            double eps = boost::rational_cast<double>(*e);
            prevTerm = lastTerm;
            lastTerm = g(radius[k]) * (prevEps - eps);
            sum += lastTerm;
            rep.stratifiedPartial.push_back(sum);
            prevEps = eps;
        }
        if (ok) {
            rep.stratifiedBound = sum;
            rep.diverging = D > 0 && lastTerm >= prevTerm;
        }
    }
    return rep;
}

}  // namespace

IntegrabilityReport mc_integrability(const MatchedCoupling& C, Side s, const Element& gamma, const Gauge& g,
                                     uint64_t N, uint64_t seed) {
    return integrability_impl<true>(C, s, gamma, g, N, seed);
}

IntegrabilityReport mc_integrability_serial(const MatchedCoupling& C, Side s, const Element& gamma, const Gauge& g,
                                            uint64_t N, uint64_t seed) {
    return integrability_impl<false>(C, s, gamma, g, N, seed);
}

// ---- return times ----

double cylinder_measure(const MatchedCoupling& C, Side s, const CylinderSet& X0) {
    const Tiling& T = C.tiling(s);
    const auto& cs = X0.cylinders;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        if (static_cast<int>(cs[i].size()) > C.max_depth() + 1) throw UsageError("cylinder longer than max depth");
        for (std::size_t k = 0; k < cs[i].size(); ++k)
            if (cs[i][k] >= T.letter_count(static_cast<int>(k))) throw UsageError("cylinder coordinate out of range");
        for (std::size_t j = 0; j < i; ++j) {
            std::size_t m = std::min(cs[i].size(), cs[j].size());
            if (std::equal(cs[i].begin(), cs[i].begin() + m, cs[j].begin())) throw UsageError("cylinders overlap");
        }
    }
    double mu = 0;
    for (const auto& c : cs) {
        double p = 1;
        for (std::size_t k = 0; k < c.size(); ++k) p /= static_cast<double>(T.letter_count(static_cast<int>(k)));
        mu += p;
    }
    return mu;
}

bool in_cylinders(const MatchedCoupling& C, const CylinderSet& X0, const CouplingPoint& x) {
    for (const auto& c : X0.cylinders) {
        bool hit = true;
        for (std::size_t k = 0; k < c.size() && hit; ++k) hit = C.coord(x, static_cast<int>(k)) == c[k];
        if (hit) return true;
    }
    return false;
}

namespace {
struct RetAcc {
    double sum = 0, sumsq = 0;
    uint64_t acts = 0, exhausted = 0;
    RetAcc& operator+=(const RetAcc& o) {
        sum += o.sum;
        sumsq += o.sumsq;
        acts += o.acts;
        exhausted += o.exhausted;
        return *this;
    }
};
}  // namespace

ReturnTimeReport return_time_density(const MatchedCoupling& C, Side s, const CylinderSet& X0, int n, uint64_t N,
                                     uint64_t seed) {
    if (N < 1) throw UsageError("need at least one sample");
    ReturnTimeReport rep;
    rep.measure = cylinder_measure(C, s, X0);
    rep.rhs = 2 * rep.measure - 1;
    if (X0.cylinders.empty()) return rep;
    const Tiling& T = C.tiling(s);
    const auto ball = T.group().ball(n);
    const double V = static_cast<double>(ball.size());

    std::vector<double> cum;
    double acc = 0;
    for (const auto& c : X0.cylinders) {
        double p = 1;
        for (std::size_t k = 0; k < c.size(); ++k) p /= static_cast<double>(T.letter_count(static_cast<int>(k)));
        acc += p;
        cum.push_back(acc);
    }

    auto r = block_reduce(N, RetAcc{}, [&](RetAcc& a, uint64_t i) {
        Stream rs(seed ^ 0x5bd1e995ULL, i);
        double u = rs.uniform() * acc;
        std::size_t j = std::min<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin(), cum.size() - 1);
        CouplingPoint x{X0.cylinders[j], rs.next()};
        uint64_t hits = 0;
        for (const auto& g : ball) {
            ++a.acts;
            try {
                if (in_cylinders(C, X0, C.act(s, g, x).point)) ++hits;
            } catch (const DepthExhausted&) {
                ++a.exhausted;
            }
        }
        double v = static_cast<double>(hits) / V;
        a.sum += v;
        a.sumsq += v * v;
    });
    const double m = r.sum / static_cast<double>(N);
    double var = N > 1 ? std::max(0.0, (r.sumsq - static_cast<double>(N) * m * m) / static_cast<double>(N - 1)) : 0.0;
    rep.lhs = rep.measure * m;
    rep.stderr_ = rep.measure * std::sqrt(var / static_cast<double>(N));
    rep.exhaustedFraction = static_cast<double>(r.exhausted) / static_cast<double>(r.acts);
    return rep;
}

}  // namespace oelab
