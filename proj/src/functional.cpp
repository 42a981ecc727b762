#include "oelab/functional.hpp"

#include <cmath>
#include <deque>
#include <sstream>
#include <unordered_set>

#include "oelab/errors.hpp"
#include "oelab/parallel.hpp"

namespace oelab {

// ---- finite functions ----

double FiniteFunction::at(const Element& g) const {
    auto it = values.find(g);
    return it == values.end() ? 0.0 : it->second;
}

void FiniteFunction::set(const Element& g, double v) {
    group.check(g);
    if (v == 0)
        values.erase(g);
    else
        values[g] = v;
}

double FiniteFunction::norm_pp(double p) const {
    double s = 0;
    for (auto& [g, v] : values) s += std::pow(std::abs(v), p);
    return s;
}

double FiniteFunction::norm(double p) const { return std::pow(norm_pp(p), 1.0 / p); }

double gradient_pp(const FiniteFunction& f, GradSide side, double p) {
    if (!(p > 0)) throw UsageError("gradient needs p > 0");
    const Group& G = f.group;
    std::unordered_set<Element, ElementHash> U;
    for (auto& [g, v] : f.values) {
        U.insert(g);
        for (const auto& s : G.generators()) U.insert(side == GradSide::Left ? G.multiply(s, g) : G.multiply(g, G.inverse(s)));
    }
    double sum = 0;
    for (const auto& g : U)
        for (const auto& s : G.generators()) {
            Element h = side == GradSide::Left ? G.multiply(G.inverse(s), g) : G.multiply(g, s);
            double d = std::abs(f.at(g) - f.at(h));
            if (d != 0) sum += std::pow(d, p);
        }
    return sum;
}

double gradient_norm(const FiniteFunction& f, GradSide side, double p) {
    return std::pow(gradient_pp(f, side, p), 1.0 / p);
}

// ---- transitive sets ----

TransitiveSet::TransitiveSet(Group g, std::vector<std::vector<int>> gen, std::string name)
    : group_(std::move(g)), gen_(std::move(gen)), name_(std::move(name)) {
    if (gen_.size() != group_.generators().size()) throw UsageError("one transition table per generator expected");
    for (auto& row : gen_) {
        if (row.size() != gen_[0].size()) throw UsageError("transition tables of different sizes");
        for (int v : row)
            if (v < -1 || v >= static_cast<int>(row.size())) throw UsageError("transition target out of range");
    }
}

TransitiveSet TransitiveSet::regular(const Group& g, int radius) {
    auto ball = g.ball(radius);
    std::unordered_map<Element, int, ElementHash> idx;
    for (std::size_t i = 0; i < ball.size(); ++i) idx.emplace(ball[i], static_cast<int>(i));
    std::vector<std::vector<int>> gen;
    for (const auto& s : g.generators()) {
        std::vector<int> row(ball.size(), -1);
        for (std::size_t i = 0; i < ball.size(); ++i) {
            auto it = idx.find(g.multiply(s, ball[i]));
            if (it != idx.end()) row[i] = it->second;
        }
        gen.push_back(std::move(row));
    }
    TransitiveSet t(g, std::move(gen), g.name() + " on ball(" + std::to_string(radius) + ")");
    t.base_ = idx.at(g.identity());
    return t;
}

TransitiveSet TransitiveSet::cycle(int m) {
    if (m < 1) throw UsageError("cycle needs m >= 1");
    std::vector<int> up(m), down(m);
    for (int i = 0; i < m; ++i) {
        up[i] = (i + 1) % m;
        down[i] = (i + m - 1) % m;
    }
    return TransitiveSet(Group::zn(1), {up, down}, "Z on Z/" + std::to_string(m));
}

TransitiveSet TransitiveSet::lamplighter_on_cursor(int m, int w) {
    Group G = Group::lamplighter(m);
    const int n = 2 * w + 1;
    std::vector<std::vector<int>> gen;
    for (const auto& s : G.generators()) {
        const int64_t step = std::get<LampEl>(s).pos;
        std::vector<int> row(n);
        for (int i = 0; i < n; ++i) {
            int64_t j = i + step;
            row[i] = j >= 0 && j < n ? static_cast<int>(j) : -1;
        }
        gen.push_back(std::move(row));
    }
    TransitiveSet t(G, std::move(gen), G.name() + " on cursor [-" + std::to_string(w) + "," + std::to_string(w) + "]");
    t.base_ = w;
    return t;
}

std::vector<int> TransitiveSet::geodesic(const Element& lambda) const {
    const Group& G = group_;
    const auto& S = G.generators();
    std::vector<int> word;
    Element cur = lambda;
    int64_t len = G.word_length(cur);
    while (len > 0) {
        bool moved = false;
        for (std::size_t i = 0; i < S.size() && !moved; ++i) {
            Element next = G.multiply(G.inverse(S[i]), cur);
            if (G.word_length(next) == len - 1) {
                word.push_back(static_cast<int>(i));
                cur = std::move(next);
                --len;
                moved = true;
            }
        }
        if (!moved) throw Error("no geodesic step found");
    }
    return word;  // lambda = S[word[0]] S[word[1]] ...
}

int TransitiveSet::act(const Element& lambda, int x) const {
    group_.check(lambda);
    auto w = geodesic(lambda);
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
        x = gen_[*it][x];
        if (x < 0) throw TruncationError("action of " + group_.format(lambda) + " leaves " + name_);
    }
    return x;
}

int TransitiveSet::distance(int x0, int x1) const {
    std::vector<int> d(size(), -1);
    std::deque<int> q{x0};
    d[x0] = 0;
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        if (v == x1) return d[v];
        for (auto& row : gen_) {
            int u = row[v];
            if (u >= 0 && d[u] < 0) {
                d[u] = d[v] + 1;
                q.push_back(u);
            }
        }
    }
    throw TruncationError("states not connected inside " + name_);
}

std::vector<double> push_function(const FiniteFunction& f, const TransitiveSet& X, int x, double p) {
    std::vector<double> acc(X.size(), 0.0);
    for (auto& [lambda, v] : f.values) acc[X.act(lambda, x)] += std::pow(std::abs(v), p);
    for (auto& a : acc) a = std::pow(a, 1.0 / p);
    return acc;
}

PushResult push_to_orbit(const FiniteFunction& f, const TransitiveSet& X, int x0, int x1, double p) {
    if (!(p >= 1)) throw UsageError("push_to_orbit needs p >= 1");
    PushResult r;
    auto a = push_function(f, X, x0, p), b = push_function(f, X, x1, p);
    double s = 0, n0 = 0;
    for (int y = 0; y < X.size(); ++y) {
        s += std::pow(std::abs(a[y] - b[y]), p);
        n0 += std::pow(a[y], p);
    }
    r.lhs = std::pow(s, 1.0 / p);
    r.normPushed = std::pow(n0, 1.0 / p);
    r.normF = f.norm(p);
    r.distance = X.distance(x0, x1);
    r.rhs = r.distance * gradient_norm(f, GradSide::Right, p);
    r.ok = r.lhs <= r.rhs * (1 + 1e-12) + 1e-12;
    return r;
}

L1RatioResult l1_ratio_check(const FiniteFunction& f, const TransitiveSet& X, int x0, int x1, const Gauge& phi) {
    bool admissible = phi.kind() == Gauge::Kind::Identity || (phi.kind() == Gauge::Kind::Power && phi.param() <= 1);
    if (!admissible) throw UsageError("phi must be t^p with p <= 1");
    const double g = gradient_pp(f, GradSide::Right, 1.0);
    if (g == 0) throw UsageError("f has zero gradient");
    FiniteFunction h(f.group);
    for (auto& [k, v] : f.values) h.set(k, v / g);
    auto a = push_function(h, X, x0, 1.0), b = push_function(h, X, x1, 1.0);
    double diff = 0;
    for (int y = 0; y < X.size(); ++y) diff += std::abs(a[y] - b[y]);
    const double n1 = h.norm_pp(1.0);
    const int d = X.distance(x0, x1);
    L1RatioResult r;
    r.ratio = diff > 0 ? n1 / diff : INFINITY;
    r.bound = d > 0 ? phi(n1) / (2 * phi(d)) : INFINITY;
    r.ok = d == 0 || r.ratio >= r.bound * (1 - 1e-12);
    return r;
}

// ---- induced functions on a coupling ----

namespace {
struct MeanAcc {
    double sum = 0, sumsq = 0;
    uint64_t n = 0, exhausted = 0;
    MeanAcc& operator+=(const MeanAcc& o) {
        sum += o.sum;
        sumsq += o.sumsq;
        n += o.n;
        exhausted += o.exhausted;
        return *this;
    }
};
}  // namespace

InducedGradientReport induced_gradient_check(const MatchedCoupling& C, Side lambdaSide, const FiniteFunction& f0,
                                             double p, uint64_t N, uint64_t seed, const std::optional<Gauge>& gauge) {
    if (!(p >= 1)) throw UsageError("induced gradient needs p >= 1");
    if (gauge && p != 1) throw UsageError("gauge version is an l1 statement");
    const Group& L = C.tiling(lambdaSide).group();
    const Side gs = other(lambdaSide);
    const Group& G = C.tiling(gs).group();
    if (!(f0.group == L)) throw UsageError("f must live on " + L.name());

    FiniteFunction f = f0;
    double gradR = gradient_pp(f, GradSide::Right, p);
    if (gauge) {
        if (gradR == 0) throw UsageError("f has zero gradient");
        FiniteFunction h(L);
        for (auto& [k, v] : f.values) h.set(k, v / gradR);
        f = std::move(h);
        gradR = 1.0;
    }
    std::vector<std::pair<Element, double>> supp(f.values.begin(), f.values.end());

    InducedGradientReport rep;
    auto acc = block_reduce(N, MeanAcc{}, [&](MeanAcc& a, uint64_t i) {
        auto x = C.random_point(seed, i);
        try {
            // f^x(gamma) = |f(alpha(gamma, x)^{-1})|; gamma_mu carries x where mu^{-1} does
            FiniteFunction fx(G);
            for (auto& [mu, v] : supp) fx.set(C.transfer_cocycle(lambdaSide, L.inverse(mu), x), std::abs(v));
            double v = gradient_pp(fx, GradSide::Left, p);
            a.sum += v;
            a.sumsq += v * v;
            ++a.n;
        } catch (const DepthExhausted&) {
            ++a.exhausted;
        } catch (const CapExceeded&) {
            ++a.exhausted;
        }
    });
    rep.exhaustedFraction = static_cast<double>(acc.exhausted) / static_cast<double>(N);
    if (acc.n > 0) {
        const double n = static_cast<double>(acc.n);
        rep.lhs = acc.sum / n;
        double var = acc.n > 1 ? std::max(0.0, (acc.sumsq - n * rep.lhs * rep.lhs) / (n - 1)) : 0.0;
        rep.lhsStderr = std::sqrt(var / n);
    }

    const Gauge g = gauge ? *gauge : Gauge::power(p);
    double best = -1, bestSe = 0;
    for (const auto& s : G.generators()) {
        auto r = mc_integrability(C, gs, s, g, N, seed ^ 0xc2b2ae3d27d4eb4fULL);
        if (r.estimate > best) {
            best = r.estimate;
            bestSe = r.stderr_;
        }
    }
    const double nS = static_cast<double>(G.generators().size());
    rep.C = nS * best;
    rep.cStderr = nS * bestSe;
    if (gauge) {
        const double n1 = f.norm_pp(1.0);
        rep.lhs /= n1;
        rep.lhsStderr /= n1;
        rep.rhs = 2 * rep.C / (*gauge)(n1);
        rep.rhsStderr = 2 * rep.cStderr / (*gauge)(n1);
    } else {
        rep.rhs = rep.C * gradR;
        rep.rhsStderr = rep.cStderr * gradR;
    }
    rep.ok = rep.lhs - 3 * rep.lhsStderr <= rep.rhs + 3 * rep.rhsStderr + 1e-12;
    return rep;
}

// ---- isoperimetric profile ----

namespace {

// Redelmeier enumeration of connected sets containing vertex 0
class SetSearch {
public:
    SetSearch(const std::vector<std::vector<int>>& nbr, int inner, int n, ProfileMode mode, int maxVal, uint64_t budget)
        : nbr_(nbr), inner_(inner), n_(n), mode_(mode), maxVal_(maxVal), budget_(budget),
          inA_(nbr.size(), 0), seen_(nbr.size(), 0), val_(nbr.size(), 0) {}

    void run_from(std::vector<int> untried, int first, std::vector<int> preset) {
        for (int v : preset) seen_[v] = 1;
        add(0);
        if (first >= 0) {
            add(first);
            std::vector<int> fresh;
            expand(first, untried, fresh);
        }
        recurse(untried);
    }

    // root step: the children of {0} are independent branches
    std::vector<int> root_untried() const {
        std::vector<int> u;
        std::vector<char> s(nbr_.size(), 0);
        s[0] = 1;
        for (int w : nbr_[0])
            if (w < inner_ && !s[w]) {
                s[w] = 1;
                u.push_back(w);
            }
        return u;
    }

    Rational best{0};
    std::vector<int> bestSet;
    std::vector<int64_t> bestVals;
    uint64_t searched = 0;
    bool exhausted = false;

private:
    void add(int v) {
        inA_[v] = 1;
        seen_[v] = 1;
        set_.push_back(v);
    }
    void remove() {
        inA_[set_.back()] = 0;
        set_.pop_back();
    }
    void expand(int v, std::vector<int>& untried, std::vector<int>& fresh) {
        for (int w : nbr_[v])
            if (w < inner_ && !seen_[w]) {
                seen_[w] = 1;
                fresh.push_back(w);
                untried.push_back(w);
            }
    }
    void recurse(std::vector<int> untried) {
        evaluate();
        if (exhausted || static_cast<int>(set_.size()) >= n_) return;
        while (!untried.empty()) {
            int v = untried.back();
            untried.pop_back();
            add(v);
            std::vector<int> next = untried, fresh;
            expand(v, next, fresh);
            recurse(std::move(next));
            for (int w : fresh) seen_[w] = 0;
            remove();
            if (exhausted) return;
        }
    }

    void evaluate() {
        if (mode_ == ProfileMode::Sets) {
            for (int v : set_) val_[v] = 1;
            consider();
            return;
        }
        // all value patterns in {1..maxVal}
        for (int v : set_) val_[v] = 1;
        for (;;) {
            consider();
            if (exhausted) return;
            std::size_t j = 0;
            while (j < set_.size() && val_[set_[j]] == maxVal_) val_[set_[j++]] = 1;
            if (j == set_.size()) break;
            ++val_[set_[j]];
        }
    }

    void consider() {
        if (++searched > budget_) {
            exhausted = true;
            return;
        }
        int64_t mass = 0, grad = 0;
        for (int a : set_) {
            mass += val_[a];
            for (int w : nbr_[a]) grad += inA_[w] ? std::abs(val_[a] - val_[w]) : 2 * val_[a];
        }
        Rational r(mass, grad);
        if (r > best) {
            best = r;
            bestSet = set_;
            bestVals.clear();
            for (int a : set_) bestVals.push_back(val_[a]);
        }
    }

    const std::vector<std::vector<int>>& nbr_;
    int inner_, n_;
    ProfileMode mode_;
    int maxVal_;
    uint64_t budget_;
    std::vector<char> inA_, seen_;
    std::vector<int64_t> val_;
    std::vector<int> set_;
};

}  // namespace

ProfileResult isoperimetric_profile(const Group& G, int n, ProfileMode mode, int maxVal, uint64_t budget) {
    ProfileResult res;
    res.convention = "||f||_1 / ||grad^l f||_1, grad summed over all s in S; sets: |A| / sum_s |A sym-diff sA|";
    res.heuristic = mode == ProfileMode::IntegerValued;
    if (n <= 0) return res;
    if (mode == ProfileMode::IntegerValued && maxVal < 1) throw UsageError("maxVal must be >= 1");

    // vertices of ball(n-1) come first (identity at 0); neighbours may reach ball(n)
    auto ball = G.ball(n);
    const int inner = static_cast<int>(G.growth(n - 1));
    std::unordered_map<Element, int, ElementHash> idx;
    for (std::size_t i = 0; i < ball.size(); ++i) idx.emplace(ball[i], static_cast<int>(i));
    std::vector<std::vector<int>> nbr(ball.size());
    for (int i = 0; i < inner; ++i)
        for (const auto& s : G.generators()) nbr[i].push_back(idx.at(G.multiply(s, ball[i])));

    // branch on the second vertex: branch b takes root_untried[b] and excludes the earlier ones
    SetSearch probe(nbr, inner, n, mode, maxVal, budget);
    const auto first = probe.root_untried();
    const int B = static_cast<int>(first.size());
    std::vector<Rational> best(B + 1, Rational(0));
    std::vector<std::vector<int>> sets(B + 1);
    std::vector<std::vector<int64_t>> vals(B + 1);
    std::vector<uint64_t> counts(B + 1, 0);
    std::vector<char> over(B + 1, 0);

    {
        // the singleton
        SetSearch s(nbr, inner, 1, mode, maxVal, budget);
        s.run_from({}, -1, {0});
        best[B] = s.best;
        sets[B] = s.bestSet;
        vals[B] = s.bestVals;
        counts[B] = s.searched;
    }
    if (n >= 2) {
        ParallelErrors errs;
#pragma omp parallel for schedule(dynamic, 1)
        for (int b = 0; b < B; ++b) errs.guard([&] {
            // first[0..b) stay seen, so they never join this branch
            std::vector<int> untried(first.begin() + b + 1, first.end());
            std::vector<int> preset(first.begin(), first.end());
            SetSearch s(nbr, inner, n, mode, maxVal, budget / static_cast<uint64_t>(B));
            s.run_from(untried, first[b], preset);
            best[b] = s.best;
            sets[b] = s.bestSet;
            vals[b] = s.bestVals;
            counts[b] = s.searched;
            over[b] = s.exhausted;
        });
        errs.rethrow();
    }
    int arg = B;
    for (int b = 0; b <= B; ++b) {
        res.searched += counts[b];
        if (best[b] > best[arg] || (best[b] == best[arg] && b < arg && !sets[b].empty())) arg = b;
    }
    res.value = best[arg];
    for (int v : sets[arg]) res.witness.push_back(ball[v]);
    res.witnessValues = vals[arg];
    for (int b = 0; b < B; ++b)
        if (over[b]) {
            std::ostringstream os;
            os << "profile search budget exceeded; best so far " << res.value.numerator() << "/" << res.value.denominator();
            throw ResourceExhausted(os.str());
        }
    return res;
}

Rational folner_set_quality(const Group& G, const std::vector<Element>& A, Orientation o) {
    if (A.empty()) throw UsageError("folner_set_quality needs a nonempty set");
    std::unordered_set<Element, ElementHash> in(A.begin(), A.end());
    std::unordered_set<Element, ElementHash> out;
    for (const auto& a : in)
        for (const auto& s : G.generators()) {
            Element b = o == Orientation::Left ? G.multiply(s, a) : G.multiply(a, s);
            if (!in.count(b)) out.insert(std::move(b));
        }
    return Rational(static_cast<int64_t>(out.size()), static_cast<int64_t>(in.size()));
}

}  // namespace oelab
