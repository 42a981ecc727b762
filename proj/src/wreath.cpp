#include "oelab/wreath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <sstream>

#include "oelab/errors.hpp"
#include "oelab/parallel.hpp"

namespace oelab {

WreathLength wreath_length(const Group& L, const Group& G, const WreathElement& w) {
    int64_t lamps = 0;
    std::vector<Element> pts;
    for (auto& [g, v] : w.f) {
        if (L.is_identity(v)) continue;
        G.check(g);
        lamps += L.word_length(v);
        pts.push_back(g);
    }
    const Element e = G.identity();
    auto d = [&](const Element& a, const Element& b) { return G.word_length(G.multiply(G.inverse(a), b)); };
    const int m = static_cast<int>(pts.size());
    WreathLength r;
    if (m == 0) {
        r.lower = r.upper = lamps + d(e, w.gamma);
        r.exact = true;
        return r;
    }
    std::vector<int64_t> from0(m), toEnd(m);
    std::vector<std::vector<int64_t>> D(m, std::vector<int64_t>(m));
    for (int i = 0; i < m; ++i) {
        from0[i] = d(e, pts[i]);
        toEnd[i] = d(pts[i], w.gamma);
        for (int j = 0; j < m; ++j) D[i][j] = i == j ? 0 : d(pts[i], pts[j]);
    }
    if (m <= 12) {
        const int64_t INF = std::numeric_limits<int64_t>::max() / 4;
        std::vector<std::vector<int64_t>> dp(std::size_t(1) << m, std::vector<int64_t>(m, INF));
        for (int i = 0; i < m; ++i) dp[std::size_t(1) << i][i] = from0[i];
        for (std::size_t mask = 1; mask < dp.size(); ++mask)
            for (int i = 0; i < m; ++i) {
                if (!(mask >> i & 1) || dp[mask][i] >= INF) continue;
                for (int j = 0; j < m; ++j)
                    if (!(mask >> j & 1))
                        dp[mask | (std::size_t(1) << j)][j] = std::min(dp[mask | (std::size_t(1) << j)][j], dp[mask][i] + D[i][j]);
            }
        int64_t best = INF;
        for (int i = 0; i < m; ++i) best = std::min(best, dp.back()[i] + toEnd[i]);
        r.lower = r.upper = lamps + best;
        r.exact = true;
        return r;
    }
    // nearest neighbour walk above, farthest detour below
    std::vector<char> used(m, 0);
    int64_t walk = 0;
    int cur = -1;
    for (int step = 0; step < m; ++step) {
        int nxt = -1;
        for (int j = 0; j < m; ++j)
            if (!used[j] && (nxt < 0 || (cur < 0 ? from0[j] < from0[nxt] : D[cur][j] < D[cur][nxt]))) nxt = j;
        walk += cur < 0 ? from0[nxt] : D[cur][nxt];
        used[nxt] = 1;
        cur = nxt;
    }
    walk += toEnd[cur];
    int64_t detour = d(e, w.gamma);
    for (int i = 0; i < m; ++i) detour = std::max(detour, from0[i] + toEnd[i]);
    r.lower = lamps + detour;
    r.upper = lamps + walk;
    r.exact = r.lower == r.upper;
    return r;
}

WreathCoupling::WreathCoupling(MatchedCoupling base, MatchedCoupling lamp)
    : base_(std::move(base)), lamp_(std::move(lamp)) {}

MatchedCoupling parse_matched(const std::string& spec, int maxDepth) {
    auto slash = spec.find('/');
    if (slash == std::string::npos) throw UsageError("matched coupling spec needs LEFT/RIGHT, got '" + spec + "'");
    return make_coupling(spec.substr(0, slash), spec.substr(slash + 1), maxDepth);
}

WreathPoint WreathCoupling::random_point(uint64_t seed, uint64_t i) const {
    WreathPoint P;
    P.root = base_.random_point(seed, i);
    P.x = P.root;
    P.key = base_group(Side::Left).identity();
    P.lampSeed = hash_key(seed ^ 0x6c616d70ULL, i);
    return P;
}

CouplingPoint WreathCoupling::lamp_at(const WreathPoint& P, const Element& key) const {
    auto it = P.lamps.find(key);
    if (it != P.lamps.end()) return it->second;
    return lamp_.random_point(P.lampSeed, ElementHash{}(key));
}

Element WreathCoupling::key_of(Side s, const WreathPoint& P, const Element& g) const {
    const Group& G = base_group(s);
    const Group& K = base_group(Side::Left);
    Element gi = G.inverse(g);
    Element pi = s == Side::Left ? gi : base_.transfer_cocycle(s, gi, P.x);
    return K.multiply(pi, P.key);
}

WreathPoint WreathCoupling::act(Side s, const WreathElement& w, const WreathPoint& P) const {
    const Group& G = base_group(s);
    const Group& L = lamp_group(s);
    const Group& K = base_group(Side::Left);
    G.check(w.gamma);
    WreathPoint Q = P;
    ActResult r = base_.act(s, w.gamma, P.x);
    Element pi = s == Side::Left ? w.gamma : base_.transfer_cocycle(s, w.gamma, P.x, r);
    Q.x = r.point;
    Q.key = K.multiply(pi, P.key);
    for (auto& [g, lam] : w.f) {
        L.check(lam);
        if (L.is_identity(lam)) continue;
        Element ky = key_of(s, Q, g);
        CouplingPoint l = lamp_.act(s, lam, lamp_at(Q, ky)).point;
        Q.lamps[ky] = std::move(l);
    }
    return Q;
}

bool WreathCoupling::same(const WreathPoint& P, const WreathPoint& Q) const {
    if (P.root.seed != Q.root.seed || P.lampSeed != Q.lampSeed || !(P.key == Q.key)) return false;
    if (!base_.same_point(P.x, Q.x, base_.max_depth())) return false;
    auto check = [&](const WreathPoint& A, const WreathPoint& B) {
        for (auto& [k, l] : A.lamps)
            if (!lamp_.same_point(l, lamp_at(B, k), lamp_.max_depth())) return false;
        return true;
    };
    return check(P, Q) && check(Q, P);
}

WreathElement WreathCoupling::carrying(Side s, const WreathPoint& P, const WreathPoint& Q) const {
    if (P.root.seed != Q.root.seed || P.lampSeed != Q.lampSeed) throw UsageError("wreath points from different samples");
    const Group& K = base_group(Side::Left);
    const Group& L = lamp_group(s);
    WreathElement w;
    w.gamma = base_.carrying_element(s, P.x, Q.x);
    std::vector<Element> keys;
    for (auto& [k, l] : P.lamps) keys.push_back(k);
    for (auto& [k, l] : Q.lamps)
        if (!P.lamps.count(k)) keys.push_back(k);
    for (const auto& ky : keys) {
        CouplingPoint a = lamp_at(P, ky), b = lamp_at(Q, ky);
        if (lamp_.same_point(a, b, lamp_.max_depth())) continue;
        Element lam = lamp_.carrying_element(s, a, b);
        if (L.is_identity(lam)) continue;
        // position of y relative to Q.x: c_s(y, Q.x)
        CouplingPoint y = base_.act(Side::Left, K.multiply(ky, K.inverse(Q.key)), Q.x).point;
        w.f[base_.carrying_element(s, y, Q.x)] = std::move(lam);
    }
    return w;
}

WreathElement WreathCoupling::identity(Side s) const { return WreathElement{{}, base_group(s).identity()}; }

WreathElement WreathCoupling::embed_base(Side s, const Element& gamma) const {
    base_group(s).check(gamma);
    return WreathElement{{}, gamma};
}

WreathElement WreathCoupling::embed_lamp(Side s, const Element& lambda) const {
    const Group& L = lamp_group(s);
    L.check(lambda);
    WreathElement w = identity(s);
    if (!L.is_identity(lambda)) w.f.emplace(base_group(s).identity(), lambda);
    return w;
}

WreathElement WreathCoupling::multiply(Side s, const WreathElement& a, const WreathElement& b) const {
    const Group& G = base_group(s);
    const Group& L = lamp_group(s);
    // (f1, g1)(f2, g2) = (f1 . g1 f2, g1 g2), (g1 f2)(h) = f2(g1^{-1} h)
    WreathElement w{a.f, G.multiply(a.gamma, b.gamma)};
    for (auto& [h, v] : b.f) {
        Element pos = G.multiply(a.gamma, h);
        auto it = w.f.find(pos);
        Element nv = it == w.f.end() ? v : L.multiply(it->second, v);
        if (L.is_identity(nv)) {
            if (it != w.f.end()) w.f.erase(it);
        } else {
            w.f[pos] = std::move(nv);
        }
    }
    return w;
}

WreathElement WreathCoupling::random_element(Side s, Stream& rs, int supp, int len) const {
    const Group& G = base_group(s);
    const Group& L = lamp_group(s);
    WreathElement w{{}, G.random_element(rs, len)};
    for (int i = 0; i < supp; ++i) {
        Element v = L.random_element(rs, static_cast<int>(rs.range(1, std::max(1, len))));
        if (!L.is_identity(v)) w.f[G.random_element(rs, static_cast<int>(rs.range(0, len)))] = std::move(v);
    }
    return w;
}

std::string WreathCoupling::format(Side s, const WreathElement& w) const {
    std::vector<std::string> parts;
    for (auto& [g, v] : w.f) parts.push_back(base_group(s).format(g) + "->" + lamp_group(s).format(v));
    std::sort(parts.begin(), parts.end());
    std::ostringstream os;
    os << "({";
    for (std::size_t i = 0; i < parts.size(); ++i) os << (i ? "; " : "") << parts[i];
    os << "}, " << base_group(s).format(w.gamma) << ")";
    return os.str();
}

Prop72Result prop72_check(const WreathCoupling& W, Side s, const WreathElement& w, const WreathPoint& P) {
    const Side t = other(s);
    const Group& G = W.base_group(s);
    Prop72Result r;
    const bool pureBase = w.f.empty();
    const bool pureLamp = G.is_identity(w.gamma) && w.f.size() == 1 && G.is_identity(w.f.begin()->first);
    if (!pureBase && !pureLamp) throw UsageError("distance identity needs a pure base or pure lamp move");
    WreathPoint Q = W.act(s, w, P);
    WreathElement wt = W.carrying(t, P, Q);
    WreathLength len = wreath_length(W.lamp_group(t), W.base_group(t), wt);
    r.dist = len.upper;
    r.exact = len.exact;
    r.roundTrip = W.same(W.act(t, wt, P), Q);
    if (pureBase && G.is_identity(w.gamma)) {
        r.kind = "identity";
        r.expected = 0;
    } else if (pureBase) {
        r.kind = "base";
        r.expected = W.base_group(t).word_length(W.base().transfer_cocycle(s, w.gamma, P.x));
    } else {
        r.kind = "lamp";
        CouplingPoint le = W.lamp_at(P, P.key);
        r.expected = W.lamp_group(t).word_length(W.lamp().transfer_cocycle(s, w.f.begin()->second, le));
    }
    r.ok = r.exact && r.roundTrip && r.dist == r.expected;
    return r;
}

namespace {
struct PairAcc {
    double ws = 0, wss = 0, bs = 0, bss = 0;
    uint64_t n = 0, exhausted = 0;
    PairAcc& operator+=(const PairAcc& o) {
        ws += o.ws;
        wss += o.wss;
        bs += o.bs;
        bss += o.bss;
        n += o.n;
        exhausted += o.exhausted;
        return *this;
    }
};

std::pair<double, double> mean_se(double s, double ss, uint64_t n) {
    if (n == 0) return {0, 0};
    const double N = static_cast<double>(n), m = s / N;
    const double var = n > 1 ? std::max(0.0, (ss - N * m * m) / (N - 1)) : 0.0;
    return {m, std::sqrt(var / N)};
}
}  // namespace

WreathGaugeReport wreath_base_gauge(const WreathCoupling& W, Side s, const Element& gamma, const Gauge& g, uint64_t N,
                                    uint64_t seed) {
    if (N < 1) throw UsageError("need at least one sample");
    const Side t = other(s);
    const WreathElement w = W.embed_base(s, gamma);
    auto acc = block_reduce(N, PairAcc{}, [&](PairAcc& a, uint64_t i) {
        try {
            WreathPoint P = W.random_point(seed, i);
            WreathPoint Q = W.act(s, w, P);
            double lw = static_cast<double>(wreath_length(W.lamp_group(t), W.base_group(t), W.carrying(t, P, Q)).upper);
            double lb = static_cast<double>(W.base_group(t).word_length(W.base().transfer_cocycle(s, gamma, P.x)));
            a.ws += g(lw);
            a.wss += g(lw) * g(lw);
            a.bs += g(lb);
            a.bss += g(lb) * g(lb);
            ++a.n;
        } catch (const DepthExhausted&) {
            ++a.exhausted;
        }
    });
    WreathGaugeReport r;
    r.samples = N;
    std::tie(r.wreath, r.wreathStderr) = mean_se(acc.ws, acc.wss, acc.n);
    std::tie(r.base, r.baseStderr) = mean_se(acc.bs, acc.bss, acc.n);
    r.exhaustedFraction = static_cast<double>(acc.exhausted) / static_cast<double>(N);
    return r;
}

}  // namespace oelab
