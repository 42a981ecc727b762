#include "oelab/hyperbolicity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <omp.h>

#include "oelab/errors.hpp"
#include "oelab/rng.hpp"

namespace oelab {

// ---- graphs ----

MetricGraph MetricGraph::from_edges(int n, const std::vector<std::pair<int, int>>& edges, std::string name) {
    if (n < 1) throw UsageError("graph needs at least one vertex");
    MetricGraph g;
    g.n_ = n;
    g.name_ = std::move(name);
    g.adj_.assign(n, {});
    for (auto [u, v] : edges) {
        if (u < 0 || v < 0 || u >= n || v >= n) throw UsageError("edge " + std::to_string(u) + " " + std::to_string(v) + " out of range");
        if (u == v) throw UsageError("self-loop at " + std::to_string(u));
        g.adj_[u].push_back(v);
        g.adj_[v].push_back(u);
    }
    g.finish();
    return g;
}

void MetricGraph::finish() {
    for (auto& a : adj_) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    const std::size_t need = static_cast<std::size_t>(n_) * n_ * sizeof(int);
    if (need > budget_bytes()) throw ResourceExhausted("distance matrix needs " + std::to_string(need >> 20) + " MB");
    d_.assign(static_cast<std::size_t>(n_) * n_, -1);
    bool connected = true;
#pragma omp parallel for schedule(dynamic, 8) reduction(&& : connected)
    for (int s = 0; s < n_; ++s) {
        int* row = d_.data() + static_cast<std::size_t>(s) * n_;
        std::vector<int> q{s};
        row[s] = 0;
        for (std::size_t h = 0; h < q.size(); ++h) {
            int v = q[h];
            for (int u : adj_[v])
                if (row[u] < 0) {
                    row[u] = row[v] + 1;
                    q.push_back(u);
                }
        }
        connected = connected && static_cast<int>(q.size()) == n_;
    }
    if (!connected) throw UsageError("graph " + name_ + " is not connected");
}

MetricGraph MetricGraph::parse_edge_list(std::istream& in) {
    std::vector<std::pair<int, int>> edges;
    std::string line;
    int n = 0, lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        std::istringstream ls(line);
        long long u, v;
        if (!(ls >> u)) continue;
        if (!(ls >> v) || u < 0 || v < 0 || u > std::numeric_limits<int>::max() || v > std::numeric_limits<int>::max())
            throw UsageError("bad edge on line " + std::to_string(lineNo));
        std::string rest;
        if (ls >> rest) throw UsageError("trailing text on line " + std::to_string(lineNo));
        edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
        n = std::max(n, static_cast<int>(std::max(u, v)) + 1);
    }
    if (edges.empty()) throw UsageError("edge list is empty");
    return from_edges(n, edges, "edge-list");
}

MetricGraph MetricGraph::grid(int rows, int cols) {
    if (rows < 1 || cols < 1) throw UsageError("grid needs positive sides");
    std::vector<std::pair<int, int>> e;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) e.emplace_back(r * cols + c, r * cols + c + 1);
            if (r + 1 < rows) e.emplace_back(r * cols + c, (r + 1) * cols + c);
        }
    return from_edges(rows * cols, e, "grid:" + std::to_string(rows) + "x" + std::to_string(cols));
}

MetricGraph MetricGraph::cycle(int n) {
    if (n < 3) throw UsageError("cycle needs n >= 3");
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
    return from_edges(n, e, "cycle:" + std::to_string(n));
}

MetricGraph MetricGraph::path(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return from_edges(n, e, "path:" + std::to_string(n));
}

MetricGraph MetricGraph::random_tree(int n, uint64_t seed) {
    Stream rs(seed, 0x74726565);
    std::vector<std::pair<int, int>> e;
    for (int i = 1; i < n; ++i) e.emplace_back(static_cast<int>(rs.below(static_cast<uint64_t>(i))), i);
    return from_edges(n, e, "tree:" + std::to_string(n));
}

MetricGraph MetricGraph::cayley_ball(const Group& G, int radius) {
    auto ball = G.ball(radius);
    std::unordered_map<Element, int, ElementHash> idx;
    for (std::size_t i = 0; i < ball.size(); ++i) idx.emplace(ball[i], static_cast<int>(i));
    std::vector<std::pair<int, int>> e;
    for (std::size_t i = 0; i < ball.size(); ++i)
        for (const auto& s : G.generators()) {
            auto it = idx.find(G.multiply(ball[i], s));
            if (it != idx.end() && it->second > static_cast<int>(i)) e.emplace_back(static_cast<int>(i), it->second);
        }
    MetricGraph g = from_edges(static_cast<int>(ball.size()), e, "cayley-ball:" + G.name() + ":" + std::to_string(radius));
    for (const auto& b : ball) g.labels_.push_back(G.format(b));
    return g;
}

MetricGraph MetricGraph::family(const std::string& spec, uint64_t seed) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) throw UsageError("graph family needs KIND:ARGS, got '" + spec + "'");
    const std::string kind = spec.substr(0, colon), rest = spec.substr(colon + 1);
    auto num = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            int v = std::stoi(s, &used);
            if (used != s.size()) throw UsageError("");
            return v;
        } catch (...) {
            throw UsageError("bad number '" + s + "' in '" + spec + "'");
        }
    };
    if (kind == "grid") {
        auto x = rest.find('x');
        if (x == std::string::npos) return grid(num(rest), num(rest));
        return grid(num(rest.substr(0, x)), num(rest.substr(x + 1)));
    }
    if (kind == "cycle") return cycle(num(rest));
    if (kind == "path") return path(num(rest));
    if (kind == "tree") return random_tree(num(rest), seed);
    if (kind == "cayley-ball") {
        auto last = rest.rfind(':');
        if (last == std::string::npos) throw UsageError("cayley-ball needs GROUP:RADIUS");
        return cayley_ball(Group::parse(rest.substr(0, last)), num(rest.substr(last + 1)));
    }
    throw UsageError("unknown graph family '" + kind + "'");
}

int MetricGraph::diameter() const { return d_.empty() ? 0 : *std::max_element(d_.begin(), d_.end()); }

std::size_t MetricGraph::edge_count() const {
    std::size_t s = 0;
    for (auto& a : adj_) s += a.size();
    return s / 2;
}

std::vector<int> MetricGraph::interval(int a, int b) const {
    std::vector<int> out;
    const int dab = dist(a, b);
    for (int x = 0; x < n_; ++x)
        if (dist(a, x) + dist(x, b) == dab) out.push_back(x);
    return out;
}

std::vector<int> MetricGraph::geodesic(int a, int b) const {
    std::vector<int> p{a};
    int cur = a;
    while (cur != b) {
        for (int u : adj_[cur])
            if (dist(u, b) == dist(cur, b) - 1) {
                cur = u;
                break;
            }
        p.push_back(cur);
    }
    return p;
}

std::string MetricGraph::label(int v) const {
    if (v >= 0 && v < static_cast<int>(labels_.size())) return labels_[v];
    return std::to_string(v);
}

MetricGraph MetricGraph::relabeled(const std::vector<int>& perm) const {
    if (static_cast<int>(perm.size()) != n_) throw UsageError("permutation has the wrong size");
    std::vector<std::pair<int, int>> e;
    for (int v = 0; v < n_; ++v)
        for (int u : adj_[v])
            if (u > v) e.emplace_back(perm[v], perm[u]);
    return from_edges(n_, e, name_ + "~");
}

std::vector<int> grid_boundary(int rows, int cols) {
    if (rows < 2 || cols < 2) throw UsageError("grid boundary needs both sides >= 2");
    std::vector<int> c;
    for (int x = 0; x < cols; ++x) c.push_back(x);
    for (int r = 1; r < rows; ++r) c.push_back(r * cols + cols - 1);
    for (int x = cols - 2; x >= 0; --x) c.push_back((rows - 1) * cols + x);
    for (int r = rows - 2; r >= 1; --r) c.push_back(r * cols);
    return c;
}

// ---- Rips constants ----

namespace {
bool better(const RipsResult& x, const RipsResult& y) {
    if (x.delta != y.delta) return x.delta > y.delta;
    return std::tie(x.a, x.b, x.c, x.x) < std::tie(y.a, y.b, y.c, y.x);
}

template <class T>
RipsResult rips_with_table(const MetricGraph& G) {
    const int n = G.size();
    auto pid = [](int u, int v) {
        if (u > v) std::swap(u, v);
        return static_cast<std::size_t>(v) * (v + 1) / 2 + u;
    };
    const std::size_t pairs = static_cast<std::size_t>(n) * (n + 1) / 2;
    // table[pid(u, v) * n + x] = d(x, I(u, v))
    std::vector<T> table(pairs * n);
#pragma omp parallel
    {
        std::vector<int> q;
        std::vector<int> dd(n);
#pragma omp for schedule(dynamic, 16)
        for (int v = 0; v < n; ++v)
            for (int u = 0; u <= v; ++u) {
                std::fill(dd.begin(), dd.end(), -1);
                q.clear();
                for (int x : G.interval(u, v)) {
                    dd[x] = 0;
                    q.push_back(x);
                }
                for (std::size_t h = 0; h < q.size(); ++h)
                    for (int w : G.neighbors(q[h]))
                        if (dd[w] < 0) {
                            dd[w] = dd[q[h]] + 1;
                            q.push_back(w);
                        }
                T* row = table.data() + pid(u, v) * n;
                for (int x = 0; x < n; ++x) row[x] = static_cast<T>(dd[x]);
            }
    }
    std::vector<std::pair<int, int>> order;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) order.emplace_back(a, b);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto& p, auto& q) { return G.dist(p.first, p.second) > G.dist(q.first, q.second); });
    std::atomic<int64_t> global{0};
    RipsResult best{0, 0, n > 1 ? 1 : 0, 0, 0};
#pragma omp parallel
    {
        RipsResult local = best;
        bool have = false;
#pragma omp for schedule(dynamic, 32) nowait
        for (std::size_t k = 0; k < order.size(); ++k) {
            auto [a, b] = order[k];
            const int cap = G.dist(a, b) / 2;
            if (cap < global.load(std::memory_order_relaxed)) continue;
            auto I = G.interval(a, b);
            for (int c = 0; c < n; ++c) {
                const T* ra = table.data() + pid(a, c) * n;
                const T* rb = table.data() + pid(b, c) * n;
                int val = -1, wx = 0;
                for (int x : I) {
                    int m = std::min<int>(ra[x], rb[x]);
                    if (m > val) {
                        val = m;
                        wx = x;
                        if (val == cap) break;
                    }
                }
                RipsResult r{val, a, b, c, wx};
                if (!have || better(r, local)) {
                    local = r;
                    have = true;
                    int64_t g = global.load(std::memory_order_relaxed);
                    while (val > g && !global.compare_exchange_weak(g, val)) {
                    }
                }
            }
        }
#pragma omp critical
        if (have && better(local, best)) best = local;
    }
    return best;
}
}  // namespace

RipsResult rips_delta(const MetricGraph& G) {
    const int n = G.size();
    if (n == 1) return {};
    const bool narrow = G.diameter() < 255;
    const std::size_t bytes = static_cast<std::size_t>(n) * (n + 1) / 2 * n * (narrow ? 1 : 2);
    if (bytes > budget_bytes())
        throw ResourceExhausted("interval distance table needs " + std::to_string(bytes >> 20) + " MB for " +
                                std::to_string(n) + " vertices");
    return narrow ? rips_with_table<uint8_t>(G) : rips_with_table<uint16_t>(G);
}

RipsResult rips_delta_naive(const MetricGraph& G) {
    const int n = G.size();
    RipsResult best{0, 0, n > 1 ? 1 : 0, 0, 0};
    if (n == 1) return {};
    bool have = false;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            auto I = G.interval(a, b);
            for (int c = 0; c < n; ++c) {
                auto Y = G.interval(a, c), Yb = G.interval(b, c);
                Y.insert(Y.end(), Yb.begin(), Yb.end());
                int val = -1, wx = 0;
                for (int x : I) {
                    int m = std::numeric_limits<int>::max();
                    for (int y : Y) m = std::min(m, G.dist(x, y));
                    if (m > val) {
                        val = m;
                        wx = x;
                    }
                }
                RipsResult r{val, a, b, c, wx};
                if (!have || better(r, best)) {
                    best = r;
                    have = true;
                }
            }
        }
    return best;
}

Rational four_point_delta(const MetricGraph& G) {
    const int n = G.size();
    if (n > 300) throw ResourceExhausted("four-point constant limited to 300 vertices");
    int64_t best = 0;
#pragma omp parallel for schedule(dynamic, 1) reduction(max : best)
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k)
                for (int l = k + 1; l < n; ++l) {
                    int s[3] = {G.dist(i, j) + G.dist(k, l), G.dist(i, k) + G.dist(j, l), G.dist(i, l) + G.dist(j, k)};
                    std::sort(s, s + 3);
                    best = std::max<int64_t>(best, s[2] - s[1]);
                }
    return Rational(best, 2);
}

// ---- cycles and audits ----

namespace {
void check_walk(const MetricGraph& G, const std::vector<int>& w, bool closed, const char* what) {
    for (int v : w)
        if (v < 0 || v >= G.size()) throw UsageError(std::string(what) + " vertex " + std::to_string(v) + " out of range");
    const std::size_t m = w.size();
    for (std::size_t i = 0; i + (closed ? 0 : 1) < m; ++i) {
        int u = w[i], v = w[(i + 1) % m];
        if (!G.adjacent(u, v))
            throw UsageError(std::string(what) + " steps " + std::to_string(u) + " -> " + std::to_string(v) +
                             " are not adjacent");
    }
}
}  // namespace

DistortionReport cycle_distortion(const MetricGraph& G, const std::vector<int>& cycle) {
    const int m = static_cast<int>(cycle.size());
    if (m < 2) throw UsageError("a cycle needs at least two vertices");
    check_walk(G, cycle, true, "cycle");
    DistortionReport r;
    r.n = m;
    // a = min d/dc, b = max d/dc, kept as integer pairs
    int64_t an = 1, ad = 0, bn = 0, bd = 1;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            int64_t dc = std::min(j - i, m - (j - i));
            int64_t d = G.dist(cycle[i], cycle[j]);
            if (ad == 0 || d * ad < an * dc) {
                an = d;
                ad = dc;
                r.aWitness = {i, j};
            }
            if (d * bd > bn * dc) {
                bn = d;
                bd = dc;
                r.bWitness = {i, j};
            }
        }
    r.a = Rational(an, ad);
    r.b = Rational(bn, bd);
    return r;
}

Prop92Bound prop92_bound(double delta, double n, double b) {
    if (!(n >= 1) || !(b >= 1) || !(delta >= 0)) throw UsageError("bound needs n >= 1, b >= 1, delta >= 0");
    Prop92Bound r;
    r.bound = (4 * delta * std::log2(b * n) + 4 + 2 * b) / n;
    r.corollary = 12 * delta * std::log(n) / n;
    return r;
}

namespace {
double to_double(const Rational& q) { return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator()); }
}  // namespace

Prop92Audit prop92_audit(const MetricGraph& G, const std::vector<int>& cycle, int64_t delta) {
    Prop92Audit r;
    r.distortion = cycle_distortion(G, cycle);
    r.delta = delta;
    r.half = r.distortion.n / 2.0;
    const double a = to_double(r.distortion.a), b = std::max(1.0, to_double(r.distortion.b));
    r.bound = prop92_bound(static_cast<double>(delta), std::max(1.0, r.half), b).bound;
    const double lg = std::log2(b * r.half);
    r.deltaFloor = lg > 0 ? (a * r.half - 4 - 2 * b) / (4 * lg) : 0.0;
    r.ok = a <= r.bound * (1 + 1e-12);
    return r;
}

Lemma91Result lemma91_check(const MetricGraph& G, const std::vector<int>& path, int64_t delta) {
    if (path.empty()) throw UsageError("empty path");
    check_walk(G, path, false, "path");
    Lemma91Result r;
    r.length = static_cast<int>(path.size()) - 1;
    r.bound = static_cast<double>(delta) * std::log2(std::max(1, r.length)) + 1;
    for (int y : G.interval(path.front(), path.back())) {
        int m = std::numeric_limits<int>::max();
        for (int v : path) m = std::min(m, G.dist(y, v));
        r.maxDefect = std::max(r.maxDefect, m);
    }
    r.ok = r.maxDefect <= r.bound + 1e-12;
    return r;
}

// ---- fat cycles ----

namespace {
using Walk = std::vector<int>;

Walk segment(const Walk& p, int from, int to) {  // inclusive, either direction
    Walk s;
    if (from <= to)
        for (int i = from; i <= to; ++i) s.push_back(p[i]);
    else
        for (int i = from; i >= to; --i) s.push_back(p[i]);
    return s;
}

// nearest vertex of p[from..] to v: (distance, index)
std::pair<int, int> nearest_on(const MetricGraph& G, int v, const Walk& p, int from = 0) {
    std::pair<int, int> best{std::numeric_limits<int>::max(), from};
    for (int i = from; i < static_cast<int>(p.size()); ++i)
        if (G.dist(v, p[i]) < best.first) best = {G.dist(v, p[i]), i};
    return best;
}

int side_gap(const MetricGraph& G, const Walk& s, const Walk& t) {
    int m = std::numeric_limits<int>::max();
    for (int u : s)
        for (int v : t) m = std::min(m, G.dist(u, v));
    return m;
}

// corners cut where d(u, v) <= D/(8R) (d(u, corner) + d(corner, v)), then the closed walk
Walk cut_corners(const MetricGraph& G, const std::vector<Walk>& sides) {
    const int m = static_cast<int>(sides.size());
    int Dp = std::numeric_limits<int>::max(), R = 1;
    for (int i = 0; i < m; ++i) {
        R = std::max(R, static_cast<int>(sides[i].size()) - 1);
        for (int j = i + 2; j < m; ++j)
            if (!(i == 0 && j == m - 1)) Dp = std::min(Dp, side_gap(G, sides[i], sides[j]));
    }
    std::vector<int> back(m, 0), fwd(m, 0);  // corner i joins sides[i-1] and sides[i]
    if (m >= 4 && Dp >= 1) {
        for (int i = 0; i < m; ++i) {
            const Walk& in = sides[(i + m - 1) % m];
            const Walk& out = sides[i];
            const int li = static_cast<int>(in.size()) - 1, lo = static_cast<int>(out.size()) - 1;
            int bp = 0, bq = 0;
            for (int p = 0; p <= li / 2; ++p)
                for (int q = 0; q <= lo / 2; ++q) {
                    if (p + q <= bp + bq) continue;
                    if (static_cast<int64_t>(G.dist(in[li - p], out[q])) * 8 * R <= static_cast<int64_t>(Dp) * (p + q)) {
                        bp = p;
                        bq = q;
                    }
                }
            back[i] = bp;
            fwd[i] = bq;
        }
    }
    Walk w;
    for (int i = 0; i < m; ++i) {
        const Walk& s = sides[i];
        const int j = (i + 1) % m;
        const int end = static_cast<int>(s.size()) - 1 - back[j];
        for (int k = fwd[i]; k <= end; ++k) w.push_back(s[k]);
        Walk g = G.geodesic(s[end], sides[j][fwd[j]]);
        for (std::size_t k = 1; k + 1 < g.size(); ++k) w.push_back(g[k]);
        // the next side starts with sides[j][fwd[j]]
    }
    // consecutive duplicates where a side has length zero
    Walk clean;
    for (int v : w)
        if (clean.empty() || clean.back() != v) clean.push_back(v);
    while (clean.size() > 1 && clean.front() == clean.back()) clean.pop_back();
    return clean;
}

// split at repeated vertices, keeping the longer loop each time
Walk simple_loop(Walk w) {
    for (;;) {
        std::unordered_map<int, int> seen;
        int i = -1, j = -1;
        for (int k = 0; k < static_cast<int>(w.size()) && i < 0; ++k) {
            auto [it, fresh] = seen.emplace(w[k], k);
            if (!fresh) {
                i = it->second;
                j = k;
            }
        }
        if (i < 0) return w;
        Walk A(w.begin() + i, w.begin() + j);
        Walk B(w.begin() + j, w.end());
        B.insert(B.end(), w.begin(), w.begin() + i);
        w = A.size() >= B.size() ? A : B;
    }
}
}  // namespace

FatCycleReport extract_fat_cycle(const MetricGraph& G, const FatCycleParams& params) {
    FatCycleReport rep;
    rep.triangle = rips_delta(G);
    const int64_t D = rep.triangle.delta;
    rep.D = D;
    const int64_t target = params.targetDelta.value_or(0);
    if (D <= target)
        throw NotApplicable("every triangle is " + std::to_string(D) + "-thin, not fatter than " + std::to_string(target));
    const int a = rep.triangle.a, b = rep.triangle.b, c = rep.triangle.c, x = rep.triangle.x;
    const int t = static_cast<int>(std::max<int64_t>(1, (D + 14) / 15));

    Walk AB = G.geodesic(a, x);
    const int ix = static_cast<int>(AB.size()) - 1;
    {
        Walk xb = G.geodesic(x, b);
        AB.insert(AB.end(), xb.begin() + 1, xb.end());
    }
    const Walk AC = G.geodesic(a, c), BC = G.geodesic(b, c);
    // distance to [a,c] u [b,c] with the nearest point; ties go to [a,c]
    struct Foot {
        int dist, side, idx;  // side 0 = [a,c], 1 = [b,c]
    };
    auto foot = [&](int v) {
        auto p = nearest_on(G, v, AC), q = nearest_on(G, v, BC);
        return p.first <= q.first ? Foot{p.first, 0, p.second} : Foot{q.first, 1, q.second};
    };
    int ia = ix, ib = ix;
    while (ia > 0 && foot(AB[ia]).dist > t) --ia;
    while (ib + 1 < static_cast<int>(AB.size()) && foot(AB[ib]).dist > t) ++ib;
    const Foot fa = foot(AB[ia]), fb = foot(AB[ib]);
    const Walk* side[2] = {&AC, &BC};
    const int xa = AB[ia], xb = AB[ib];
    const int ya = (*side[fa.side])[fa.idx], yb = (*side[fb.side])[fb.idx];

    std::vector<Walk> sides;
    if (fa.side == fb.side) {
        rep.caseName = "same-side quadrilateral";
        sides = {G.geodesic(ya, xa), segment(AB, ia, ib), G.geodesic(xb, yb), segment(*side[fa.side], fb.idx, fa.idx)};
    } else {
        const Walk& P = *side[fa.side];  // through y_a, ending at c
        const Walk& Q = *side[fb.side];  // through y_b, ending at c
        auto toQ = nearest_on(G, ya, Q, fb.idx);
        auto toP = nearest_on(G, yb, P, fa.idx);
        if (toQ.first <= 3 * t) {
            rep.caseName = "quadrilateral via [y_b, c]";
            const int u = Q[toQ.second];
            sides = {G.geodesic(yb, xb), segment(AB, ib, ia), G.geodesic(xa, u), segment(Q, toQ.second, fb.idx)};
        } else if (toP.first <= 3 * t) {
            rep.caseName = "quadrilateral via [y_a, c]";
            const int u = P[toP.second];
            sides = {G.geodesic(ya, xa), segment(AB, ia, ib), G.geodesic(xb, u), segment(P, toP.second, fa.idx)};
        } else {
            rep.caseName = "hexagon";
            int kz = fa.idx;
            while (kz + 1 < static_cast<int>(P.size()) && nearest_on(G, P[kz], Q, fb.idx).first > t) ++kz;
            const auto zq = nearest_on(G, P[kz], Q, fb.idx);
            const int za = P[kz], zb = Q[zq.second];
            sides = {segment(AB, ia, ib),          G.geodesic(xb, yb), segment(Q, fb.idx, zq.second),
                     G.geodesic(zb, za),           segment(P, kz, fa.idx), G.geodesic(ya, xa)};
        }
    }
    rep.polygonCorners = static_cast<int>(sides.size());
    rep.cycle = simple_loop(cut_corners(G, sides));
    if (rep.cycle.size() < 2) throw NotApplicable("the fat polygon collapsed to a point");
    rep.distortion = cycle_distortion(G, rep.cycle);
    rep.lengthTarget = (D + 14) / 15;
    rep.meetsTargets = static_cast<int64_t>(rep.cycle.size()) >= rep.lengthTarget &&
                       rep.distortion.a * Rational(static_cast<int64_t>(rep.slack * rep.contractionTarget)) >= Rational(1);
    return rep;
}

}  // namespace oelab
