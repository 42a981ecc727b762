#include "oelab/tiling.hpp"
#include "oelab/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

#include "oelab/errors.hpp"
#include "oelab/rng.hpp"

namespace oelab {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

int parse_int(const std::string& s) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) throw UsageError("bad integer '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw UsageError("bad integer '" + s + "'");
    }
}

int64_t iabs(int64_t v) { return v < 0 ? -v : v; }

}  // namespace

// ---- Tiling base ----

uint64_t Tiling::tile_size(int k) const {
    if (k < 0 || k > max_depth()) throw UsageError("depth " + std::to_string(k) + " outside tiling range");
    uint64_t p = 1;
    for (int i = 0; i <= k; ++i)
        if (__builtin_mul_overflow(p, letter_count(i), &p) || p > static_cast<uint64_t>(INT64_MAX))
            throw ResourceExhausted("|T_" + std::to_string(k) + "| does not fit in 64 bits");
    return p;
}

std::vector<uint64_t> Tiling::unflatten(uint64_t flat, int k) const {
    std::vector<uint64_t> idx(k + 1);
    for (int i = 0; i <= k; ++i) {
        uint64_t n = letter_count(i);
        idx[i] = flat % n;
        flat /= n;
    }
    return idx;
}

Element Tiling::word(const std::vector<uint64_t>& idx) const {
    Element g = group_.identity();
    const int k = static_cast<int>(idx.size()) - 1;
    if (orient_ == Orientation::Left) {
        for (int i = 0; i <= k; ++i) g = group_.multiply(g, letter(i, idx[i]));
    } else {
        for (int i = 0; i <= k; ++i) g = group_.multiply(letter(i, idx[i]), g);
    }
    return g;
}

std::shared_ptr<const TileSet> Tiling::materialize(int k) const {
    {
        std::lock_guard lk(memoMu_);
        if (static_cast<int>(memo_.size()) > k && memo_[k]) return memo_[k];
    }
    const uint64_t n = tile_size(k);
    if (n * 160 > budget_bytes()) throw ResourceExhausted("T_" + std::to_string(k) + " exceeds memory budget");
    auto set = std::make_shared<TileSet>();
    set->reserve(n);
    for (uint64_t f = 0; f < n; ++f) {
        auto [it, fresh] = set->emplace(tile_element(k, f), f);
        if (!fresh) {
            auto show = [&](uint64_t flat) {
                std::ostringstream os;
                auto idx = unflatten(flat, k);
                os << "[";
                for (int i = 0; i <= k; ++i) os << (i ? " | " : "") << group_.format(letter(i, idx[i]));
                os << "]";
                return os.str();
            };
            throw TilingViolation(k, show(it->second), show(f));
        }
    }
    std::lock_guard lk(memoMu_);
    if (static_cast<int>(memo_.size()) <= k) memo_.resize(k + 1);
    memo_[k] = set;
    return set;
}

bool Tiling::in_tile(const Element& g, int k) const {
    auto set = materialize(k);
    return set->count(g) > 0;
}

std::vector<uint64_t> Tiling::decode(const Element& g, int k) const {
    auto set = materialize(k);
    auto it = set->find(g);
    if (it == set->end()) throw NotInTile(group_.format(g) + " is not in T_" + std::to_string(k));
    return unflatten(it->second, k);
}

// ---- explicit ----

ExplicitTiling::ExplicitTiling(Group g, Orientation o, std::vector<std::vector<Element>> letters, std::string name)
    : Tiling(std::move(g), o, std::move(name)), letters_(std::move(letters)) {
    if (letters_.empty()) throw UsageError("explicit tiling needs at least one letter set");
    for (auto& F : letters_) {
        if (F.empty()) throw UsageError("empty letter set");
        for (auto& e : F) group().check(e);
    }
}

uint64_t ExplicitTiling::letter_count(int k) const { return letters_.at(k).size(); }
Element ExplicitTiling::letter(int k, uint64_t idx) const { return letters_.at(k).at(idx); }

// ---- Z^n ----

ZnTiling::ZnTiling(int n, int m)
    : Tiling(Group::zn(n), Orientation::Left, m == 1 ? "zn:" + std::to_string(n) : "zn:" + std::to_string(n) + ":grouped:" + std::to_string(m)),
      n_(n), m_(m) {
    if (m < 1 || n * m > 62) throw UsageError("zn tiling needs 1 <= m and n*m <= 62");
}

uint64_t ZnTiling::letter_count(int) const { return uint64_t(1) << (n_ * m_); }

Element ZnTiling::letter(int k, uint64_t idx) const {
    ZnEl e{std::vector<int64_t>(n_)};
    const uint64_t mask = (uint64_t(1) << m_) - 1;
    for (int j = 0; j < n_; ++j) e.c[j] = static_cast<int64_t>((idx >> (j * m_)) & mask) << (m_ * k);
    return e;
}

bool ZnTiling::in_tile(const Element& g, int k) const {
    const int64_t L = int64_t(1) << (m_ * (k + 1));
    for (auto v : std::get<ZnEl>(g).c)
        if (v < 0 || v >= L) return false;
    return true;
}

std::vector<uint64_t> ZnTiling::decode(const Element& g, int k) const {
    group().check(g);
    if (!in_tile(g, k)) throw NotInTile(group().format(g) + " is not in T_" + std::to_string(k));
    const auto& c = std::get<ZnEl>(g).c;
    const uint64_t mask = (uint64_t(1) << m_) - 1;
    std::vector<uint64_t> idx(k + 1, 0);
    for (int i = 0; i <= k; ++i)
        for (int j = 0; j < n_; ++j) idx[i] |= ((static_cast<uint64_t>(c[j]) >> (m_ * i)) & mask) << (j * m_);
    return idx;
}

std::optional<Rational> ZnTiling::claimed_epsilon(int k) const {
    if (m_ * (k + 1) > 62) return std::nullopt;
    return Rational(1, int64_t(1) << (m_ * (k + 1)));
}

std::optional<double> ZnTiling::claimed_radius(int k) const { return n_ * std::ldexp(1.0, m_ * (k + 1)); }

std::optional<uint64_t> ZnTiling::escape_count_fast(const Element& g, int k) const {
    const uint64_t total = tile_size(k);
    const int64_t L = int64_t(1) << (m_ * (k + 1));
    uint64_t stay = 1;
    for (auto v : std::get<ZnEl>(g).c) stay *= static_cast<uint64_t>(std::max<int64_t>(L - iabs(v), 0));
    return total - stay;
}

std::optional<int64_t> ZnTiling::diameter_fast(int k) const {
    return static_cast<int64_t>(n_) * ((int64_t(1) << (m_ * (k + 1))) - 1);
}

// ---- Z matched to given sizes ----

ZMatchedTiling::ZMatchedTiling(std::vector<uint64_t> sizes, std::string name)
    : Tiling(Group::zn(1), Orientation::Left, std::move(name)), sizes_(std::move(sizes)) {
    if (sizes_.empty()) throw UsageError("zmatched needs letter sizes");
    int64_t p = 1;
    std::size_t keep = 0;
    for (auto s : sizes_) {
        if (s < 1) throw UsageError("zmatched sizes must be positive");
        int64_t q;
        if (s > static_cast<uint64_t>(INT64_MAX) || __builtin_mul_overflow(p, static_cast<int64_t>(s), &q)) break;
        p = q;
        prod_.push_back(p);
        ++keep;
    }
    if (keep == 0) throw UsageError("zmatched first letter too large");
    sizes_.resize(keep);
}

Element ZMatchedTiling::letter(int k, uint64_t idx) const {
    int64_t scale = k == 0 ? 1 : prod_.at(k - 1);
    return ZnEl{{static_cast<int64_t>(idx) * scale}};
}

bool ZMatchedTiling::in_tile(const Element& g, int k) const {
    int64_t v = std::get<ZnEl>(g).c.at(0);
    return v >= 0 && v < prod_.at(k);
}

std::vector<uint64_t> ZMatchedTiling::decode(const Element& g, int k) const {
    group().check(g);
    if (!in_tile(g, k)) throw NotInTile(group().format(g) + " is not in T_" + std::to_string(k));
    uint64_t v = static_cast<uint64_t>(std::get<ZnEl>(g).c[0]);
    std::vector<uint64_t> idx(k + 1);
    for (int i = 0; i <= k; ++i) {
        idx[i] = v % sizes_[i];
        v /= sizes_[i];
    }
    return idx;
}

std::optional<Rational> ZMatchedTiling::claimed_epsilon(int k) const { return Rational(2, prod_.at(k)); }
std::optional<double> ZMatchedTiling::claimed_radius(int k) const { return static_cast<double>(prod_.at(k) - 1); }

std::optional<uint64_t> ZMatchedTiling::escape_count_fast(const Element& g, int k) const {
    int64_t v = iabs(std::get<ZnEl>(g).c.at(0));
    return static_cast<uint64_t>(std::min(v, prod_.at(k)));
}

std::optional<int64_t> ZMatchedTiling::diameter_fast(int k) const { return prod_.at(k) - 1; }

// ---- Heisenberg ----

HeisTiling::HeisTiling() : Tiling(Group::heis(), Orientation::Left, "heis") {}

Element HeisTiling::letter(int k, uint64_t idx) const {
    int64_t x = idx & 1, y = (idx >> 1) & 1, z = (idx >> 2) & 3;
    return HeisEl{x << k, y << k, i128(z) << (2 * k)};
}

i128 HeisTiling::carry_term(int64_t x, int64_t y) {
    i128 s = 0;
    for (int i = 1; (x >> i) != 0; ++i)
        if ((x >> i) & 1) s += (i128(1) << i) * (y & ((int64_t(1) << i) - 1));
    return s;
}

bool HeisTiling::in_tile(const Element& g, int k) const {
    const auto& h = std::get<HeisEl>(g);
    const int64_t L = int64_t(1) << (k + 1);
    if (h.x < 0 || h.x >= L || h.y < 0 || h.y >= L) return false;
    i128 w = h.z - carry_term(h.x, h.y);
    return w >= 0 && w < (i128(1) << (2 * (k + 1)));
}

std::vector<uint64_t> HeisTiling::decode(const Element& g, int k) const {
    group().check(g);
    if (!in_tile(g, k)) throw NotInTile(group().format(g) + " is not in T_" + std::to_string(k));
    const auto& h = std::get<HeisEl>(g);
    i128 w = h.z - carry_term(h.x, h.y);
    std::vector<uint64_t> idx(k + 1);
    for (int i = 0; i <= k; ++i) {
        uint64_t x = (h.x >> i) & 1, y = (h.y >> i) & 1, z = static_cast<uint64_t>((w >> (2 * i)) & 3);
        idx[i] = x | (y << 1) | (z << 2);
    }
    return idx;
}

std::optional<Rational> HeisTiling::claimed_epsilon(int k) const { return Rational(1, int64_t(1) << k); }
std::optional<double> HeisTiling::claimed_radius(int k) const { return 10.0 * std::ldexp(1.0, k + 2); }

std::optional<uint64_t> HeisTiling::escape_count_fast(const Element& g, int k) const {
    const auto& gm = std::get<HeisEl>(g);
    const int64_t L = int64_t(1) << (k + 1);
    const i128 W = i128(1) << (2 * (k + 1));
    const uint64_t total = tile_size(k);
    uint64_t stay = 0;
#pragma omp parallel for reduction(+ : stay) schedule(static)
    for (int64_t x = 0; x < L; ++x) {
        for (int64_t y = 0; y < L; ++y) {
            int64_t x2 = x + gm.x, y2 = y + gm.y;
            if (x2 < 0 || x2 >= L || y2 < 0 || y2 >= L) continue;
            // gamma (x, y, z) has z' = z + gz + gy x; compare the two windows
            i128 shift = gm.z + i128(gm.y) * x + carry_term(x, y) - carry_term(x2, y2);
            i128 a = shift < 0 ? -shift : shift;
            if (a < W) stay += static_cast<uint64_t>(W - a);
        }
    }
    return total - stay;
}

// ---- lamplighter ----

LampTiling::LampTiling(int m) : Tiling(Group::lamplighter(m), Orientation::Right, "ll:" + std::to_string(m)), m_(m) {
    // |F_k| = 2 m^{2^k} must fit, and so must 2^{k+1}
    maxDepth_ = 0;
    for (int k = 1; k < 30; ++k) {
        uint64_t p = 2;
        bool ok = true;
        for (int64_t i = 0; i < (int64_t(1) << k) && ok; ++i)
            if (__builtin_mul_overflow(p, static_cast<uint64_t>(m), &p)) ok = false;
        if (!ok) break;
        maxDepth_ = k;
    }
}

uint64_t LampTiling::letter_count(int k) const {
    if (k < 0 || k > maxDepth_) throw UsageError("lamplighter letter depth out of range");
    if (k == 0) return 2ull * m_ * m_;
    uint64_t p = 2;
    for (int64_t i = 0; i < (int64_t(1) << k); ++i) p *= m_;
    return p;
}

Element LampTiling::letter(int k, uint64_t idx) const {
    LampEl e;
    if (k == 0) {
        int f0 = idx % m_, f1 = (idx / m_) % m_;
        e.pos = static_cast<int64_t>(idx / (uint64_t(m_) * m_));
        if (f0) e.lamps[0] = f0;
        if (f1) e.lamps[1] = f1;
        return e;
    }
    const int64_t half = int64_t(1) << k;
    const uint64_t block = letter_count(k) / 2;
    const bool shifted = idx >= block;
    uint64_t d = idx % block;
    for (int64_t i = 0; i < half; ++i) {
        int v = static_cast<int>(d % m_);
        d /= m_;
        if (v) e.lamps[shifted ? i : half + i] = v;
    }
    e.pos = shifted ? half : 0;
    return e;
}

bool LampTiling::in_tile(const Element& g, int k) const {
    const auto& l = std::get<LampEl>(g);
    const int64_t W = int64_t(1) << (k + 1);
    if (l.pos < 0 || l.pos >= W) return false;
    if (l.lamps.empty()) return true;
    return l.lamps.begin()->first >= 0 && l.lamps.rbegin()->first < W;
}

std::vector<uint64_t> LampTiling::decode(const Element& g, int k) const {
    group().check(g);
    if (!in_tile(g, k)) throw NotInTile(group().format(g) + " is not in T_" + std::to_string(k));
    LampEl cur = std::get<LampEl>(g);
    std::vector<uint64_t> idx(k + 1);
    for (int j = k; j >= 1; --j) {
        const int64_t half = int64_t(1) << j;
        const uint64_t block = letter_count(j) / 2;
        LampEl rest;
        uint64_t d = 0, place = 1;
        if (cur.pos >= half) {
            // leading letter (cur|[0,2^j), 2^j); remainder is the upper half shifted down
            for (int64_t i = 0; i < half; ++i) {
                auto it = cur.lamps.find(i);
                if (it != cur.lamps.end()) d += place * it->second;
                place *= m_;
            }
            for (auto& [i, v] : cur.lamps)
                if (i >= half) rest.lamps[i - half] = v;
            rest.pos = cur.pos - half;
            idx[j] = block + d;
        } else {
            for (int64_t i = 0; i < half; ++i) {
                auto it = cur.lamps.find(half + i);
                if (it != cur.lamps.end()) d += place * it->second;
                place *= m_;
            }
            for (auto& [i, v] : cur.lamps)
                if (i < half) rest.lamps[i] = v;
            rest.pos = cur.pos;
            idx[j] = d;
        }
        cur = std::move(rest);
    }
    int f0 = cur.lamps.count(0) ? cur.lamps[0] : 0, f1 = cur.lamps.count(1) ? cur.lamps[1] : 0;
    idx[0] = f0 + uint64_t(m_) * f1 + uint64_t(m_) * m_ * cur.pos;
    return idx;
}

std::optional<Rational> LampTiling::claimed_epsilon(int k) const { return Rational(1, int64_t(1) << (k + 1)); }
std::optional<double> LampTiling::claimed_radius(int k) const { return (m_ + 1) * std::ldexp(1.0, k + 1); }

std::optional<uint64_t> LampTiling::escape_count_fast(const Element& g, int k) const {
    // h gamma^{-1} = (F + g(. - P), P + n_g) with gamma^{-1} = (g, n_g)
    const auto inv = std::get<LampEl>(group().inverse(g));
    const int64_t W = int64_t(1) << (k + 1);
    int64_t lo = std::max<int64_t>(0, -inv.pos), hi = std::min<int64_t>(W - 1, W - 1 - inv.pos);
    if (!inv.lamps.empty()) {
        lo = std::max(lo, -inv.lamps.begin()->first);
        hi = std::min(hi, W - 1 - inv.lamps.rbegin()->first);
    }
    const uint64_t good = hi >= lo ? static_cast<uint64_t>(hi - lo + 1) : 0;
    const uint64_t total = tile_size(k);
    return total - good * (total / static_cast<uint64_t>(W));
}

// ---- builtins ----

std::vector<uint64_t> letter_sizes(const Tiling& t, int K) {
    std::vector<uint64_t> s;
    for (int k = 0; k <= std::min(K, t.max_depth()); ++k) s.push_back(t.letter_count(k));
    return s;
}

TilingPtr builtin(const std::string& spec) {
    auto p = split(spec, ':');
    if (p[0] == "zn") {
        if (p.size() == 2) return std::make_shared<ZnTiling>(parse_int(p[1]), 1);
        if (p.size() == 4 && p[2] == "grouped") return std::make_shared<ZnTiling>(parse_int(p[1]), parse_int(p[3]));
    } else if (p[0] == "heis" && p.size() == 1) {
        return std::make_shared<HeisTiling>();
    } else if (p[0] == "ll" && p.size() == 2) {
        std::string v = p[1].rfind("m=", 0) == 0 ? p[1].substr(2) : p[1];
        return std::make_shared<LampTiling>(parse_int(v));
    } else if (p[0] == "zmatched" && p.size() >= 2) {
        std::string rest = spec.substr(std::string("zmatched:").size());
        if (rest.find(':') != std::string::npos || rest.rfind("heis", 0) == 0) {
            auto partner = builtin(rest);
            return std::make_shared<ZMatchedTiling>(letter_sizes(*partner, 62), "zmatched:" + rest);
        }
        std::vector<uint64_t> sizes;
        for (auto& s : split(rest, ',')) sizes.push_back(static_cast<uint64_t>(parse_int(s)));
        return std::make_shared<ZMatchedTiling>(sizes, spec);
    }
    throw UsageError("unknown tiling builtin '" + spec + "'");
}

TilingPtr builtin_for_partner(const std::string& spec, const Tiling& partner) {
    auto t = builtin(spec);
    if (spec == "zn:1" && t->letter_count(0) != partner.letter_count(0))
        return std::make_shared<ZMatchedTiling>(letter_sizes(partner, 62), "zmatched:" + partner.name());
    return t;
}

BuildReport build_tiles(const Tiling& t, int K) {
    if (K < 0) throw UsageError("K must be >= 0");
    BuildReport r;
    for (int k = 0; k <= K; ++k) {
        auto set = t.materialize(k);
        if (set->size() != t.tile_size(k)) throw TilingViolation(k, "?", "?");
        r.sizes.push_back(set->size());
    }
    return r;
}

// ---- tails ----

namespace {
bool escapes(const Tiling& t, const Element& gamma, const Element& gammaInv, const Element& g, int k,
             const TileSet* set) {
    const Group& G = t.group();
    Element h = t.orientation() == Orientation::Left ? G.multiply(gamma, g) : G.multiply(g, gammaInv);
    return set ? set->count(h) == 0 : !t.in_tile(h, k);
}
}  // namespace

uint64_t escape_count_enumerated(const Tiling& t, const Element& gamma, int k) {
    t.group().check(gamma);
    auto set = t.materialize(k);
    const Element inv = t.group().inverse(gamma);
    uint64_t c = 0;
    for (auto& [g, flat] : *set)
        if (escapes(t, gamma, inv, g, k, set.get())) ++c;
    return c;
}

uint64_t escape_count_parallel(const Tiling& t, const Element& gamma, int k) {
    t.group().check(gamma);
    const uint64_t n = t.tile_size(k);
    const Element inv = t.group().inverse(gamma);
    uint64_t c = 0;
    ParallelErrors errs;
#pragma omp parallel for reduction(+ : c) schedule(static)
    for (int64_t f = 0; f < static_cast<int64_t>(n); ++f)
        errs.guard([&] {
            if (escapes(t, gamma, inv, t.tile_element(k, static_cast<uint64_t>(f)), k, nullptr)) ++c;
        });
    errs.rethrow();
    return c;
}

uint64_t escape_count(const Tiling& t, const Element& gamma, int k) {
    t.group().check(gamma);
    if (auto f = t.escape_count_fast(gamma, k)) return *f;
    return escape_count_parallel(t, gamma, k);
}

Rational exact_tail(const Tiling& t, const Element& gamma, int k) {
    return Rational(static_cast<int64_t>(escape_count(t, gamma, k)), static_cast<int64_t>(t.tile_size(k)));
}

Rational folner_constant(const Tiling& t, int k) {
    Rational best(0);
    for (const auto& s : t.group().generators()) best = std::max(best, exact_tail(t, s, k));
    return best;
}

// ---- diameters ----

DiameterReport tile_diameter_exact(const Tiling& t, int k) {
    DiameterReport r;
    r.exact = true;
    r.claimed = t.claimed_radius(k);
    if (auto d = t.diameter_fast(k)) {
        r.value = *d;
    } else {
        const uint64_t n = t.tile_size(k);
        if (n * n / 2 > (uint64_t(1) << 36)) throw ResourceExhausted("exact diameter of T_" + std::to_string(k) + " is too costly");
        std::vector<Element> elems(n), invs(n);
        for (uint64_t f = 0; f < n; ++f) {
            elems[f] = t.tile_element(k, f);
            invs[f] = t.group().inverse(elems[f]);
        }
        int64_t best = 0;
        ParallelErrors errs;
#pragma omp parallel for reduction(max : best) schedule(dynamic, 16)
        for (int64_t i = 0; i < static_cast<int64_t>(n); ++i)
            errs.guard([&] {
                for (uint64_t j = static_cast<uint64_t>(i) + 1; j < n; ++j)
                    best = std::max(best, t.group().word_length(t.group().multiply(invs[i], elems[j])));
            });
        errs.rethrow();
        r.value = best;
    }
    if (r.claimed) r.ok = static_cast<double>(r.value) <= *r.claimed;
    return r;
}

DiameterReport tile_diameter_sampled(const Tiling& t, int k, uint64_t pairs, uint64_t seed) {
    DiameterReport r;
    r.exact = false;
    r.claimed = t.claimed_radius(k);
    const uint64_t n = t.tile_size(k);
    int64_t best = 0;
    ParallelErrors errs;
#pragma omp parallel for reduction(max : best) schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(pairs); ++i)
        errs.guard([&] {
            Stream rs(seed, static_cast<uint64_t>(i));
            Element u = t.tile_element(k, rs.below(n)), v = t.tile_element(k, rs.below(n));
            best = std::max(best, t.group().word_length(t.group().multiply(t.group().inverse(u), v)));
        });
    errs.rethrow();
    r.value = best;
    if (r.claimed) r.ok = static_cast<double>(r.value) <= *r.claimed;
    return r;
}

}  // namespace oelab
