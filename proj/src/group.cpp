#include "oelab/group.hpp"

#include <algorithm>
#include <cstdlib>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

#include "oelab/errors.hpp"

namespace oelab {

std::size_t budget_bytes() {
    const char* env = std::getenv("OELAB_BUDGET_MB");
    std::size_t mb = 1024;
    if (env && *env) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0' && v > 0) mb = static_cast<std::size_t>(v);
    }
    return mb << 20;
}

std::string i128_str(i128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
    std::string s;
    while (u) {
        s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
        u /= 10;
    }
    if (neg) s.push_back('-');
    std::reverse(s.begin(), s.end());
    return s;
}

i128 parse_i128(const std::string& s) {
    if (s.empty()) throw UsageError("empty integer");
    std::size_t i = 0;
    bool neg = false;
    if (s[0] == '-' || s[0] == '+') {
        neg = s[0] == '-';
        i = 1;
    }
    if (i == s.size()) throw UsageError("bad integer '" + s + "'");
    i128 v = 0;
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') throw UsageError("bad integer '" + s + "'");
        if (__builtin_mul_overflow(v, i128(10), &v) || __builtin_add_overflow(v, i128(s[i] - '0'), &v))
            throw UsageError("integer out of range '" + s + "'");
    }
    return neg ? -v : v;
}

namespace {

int64_t parse_i64(const std::string& s) {
    i128 v = parse_i128(s);
    if (v > INT64_MAX || v < INT64_MIN) throw UsageError("integer out of range '" + s + "'");
    return static_cast<int64_t>(v);
}

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

i128 ipow(i128 base, int64_t e) {
    i128 r = 1;
    for (int64_t i = 0; i < e; ++i)
        if (__builtin_mul_overflow(r, base, &r)) throw ResourceExhausted("BS numerator overflow");
    return r;
}

int mod(int64_t v, int m) {
    int64_t r = v % m;
    return static_cast<int>(r < 0 ? r + m : r);
}

}  // namespace

BsEl bs_normalize(i128 a, int64_t s, int64_t n, int k) {
    if (s < 0) {
        if (__builtin_mul_overflow(a, ipow(k, -s), &a)) throw ResourceExhausted("BS numerator overflow");
        s = 0;
    }
    if (a == 0) return BsEl{0, 0, n};
    while (s > 0 && a % k == 0) {
        a /= k;
        --s;
    }
    return BsEl{a, s, n};
}

std::size_t ElementHash::operator()(const Element& e) const {
    uint64_t h = e.index() * 0x9e3779b97f4a7c15ULL;
    auto add = [&](uint64_t v) { h = mix64(h ^ v); };
    std::visit(
        [&](const auto& g) {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, ZnEl>) {
                for (auto v : g.c) add(static_cast<uint64_t>(v));
            } else if constexpr (std::is_same_v<T, HeisEl>) {
                add(static_cast<uint64_t>(g.x));
                add(static_cast<uint64_t>(g.y));
                add(static_cast<uint64_t>(g.z));
                add(static_cast<uint64_t>(g.z >> 64));
            } else if constexpr (std::is_same_v<T, LampEl>) {
                for (auto& [i, v] : g.lamps) add(static_cast<uint64_t>(i) * 31 + static_cast<uint64_t>(v));
                add(static_cast<uint64_t>(g.pos));
            } else {
                add(static_cast<uint64_t>(g.a));
                add(static_cast<uint64_t>(g.a >> 64));
                add(static_cast<uint64_t>(g.s));
                add(static_cast<uint64_t>(g.n));
            }
        },
        e);
    return h;
}

struct BallCache {
    std::shared_mutex mu;
    std::vector<std::vector<Element>> layers;
    std::unordered_map<Element, int, ElementHash> dist;
    std::size_t total = 0;
};

Group::Group(Family f, int p) : fam_(f), param_(p), cap_(48), cache_(std::make_shared<BallCache>()) {
    switch (f) {
    case Family::Zn:
        for (int i = 0; i < p; ++i)
            for (int sg : {1, -1}) {
                ZnEl e{std::vector<int64_t>(p, 0)};
                e.c[i] = sg;
                gens_.push_back(e);
            }
        break;
    case Family::Heis:
        gens_ = {HeisEl{1, 0, 0}, HeisEl{-1, 0, 0}, HeisEl{0, 1, 0}, HeisEl{0, -1, 0}};
        break;
    case Family::Lamp: {
        gens_.push_back(LampEl{{}, 1});
        gens_.push_back(LampEl{{}, -1});
        gens_.push_back(LampEl{{{0, 1}}, 0});
        if (p > 2) gens_.push_back(LampEl{{{0, p - 1}}, 0});
        break;
    }
    case Family::BS:
        gens_ = {BsEl{1, 0, 0}, BsEl{-1, 0, 0}, BsEl{0, 0, 1}, BsEl{0, 0, -1}};
        break;
    }
}

Group Group::zn(int n) {
    if (n < 1) throw UsageError("zn needs n >= 1");
    return Group(Family::Zn, n);
}
Group Group::heis() { return Group(Family::Heis, 0); }
Group Group::lamplighter(int m) {
    if (m < 2) throw UsageError("lamplighter needs m >= 2");
    return Group(Family::Lamp, m);
}
Group Group::bs(int k) {
    if (k < 2) throw UsageError("BS(1,k) needs k >= 2");
    return Group(Family::BS, k);
}

Group Group::parse(const std::string& spec) {
    auto parts = split(spec, ':');
    const std::string& f = parts[0];
    auto num = [&](const std::string& s, const std::string& key) -> int {
        std::string v = s;
        if (v.rfind(key + "=", 0) == 0) v = v.substr(key.size() + 1);
        return static_cast<int>(parse_i64(v));
    };
    if (f == "heis" && parts.size() == 1) return heis();
    if (parts.size() != 2) throw UsageError("bad group spec '" + spec + "'");
    if (f == "zn") return zn(num(parts[1], "n"));
    if (f == "ll") return lamplighter(num(parts[1], "m"));
    if (f == "bs") return bs(num(parts[1], "k"));
    throw UsageError("unknown group family '" + f + "'");
}

std::string Group::name() const {
    switch (fam_) {
    case Family::Zn: return "zn:" + std::to_string(param_);
    case Family::Heis: return "heis";
    case Family::Lamp: return "ll:" + std::to_string(param_);
    case Family::BS: return "bs:" + std::to_string(param_);
    }
    return "?";
}

Element Group::identity() const {
    switch (fam_) {
    case Family::Zn: return ZnEl{std::vector<int64_t>(param_, 0)};
    case Family::Heis: return HeisEl{};
    case Family::Lamp: return LampEl{};
    case Family::BS: return BsEl{};
    }
    return HeisEl{};
}

bool Group::belongs(const Element& g) const {
    switch (fam_) {
    case Family::Zn: {
        auto* z = std::get_if<ZnEl>(&g);
        return z && static_cast<int>(z->c.size()) == param_;
    }
    case Family::Heis: return std::holds_alternative<HeisEl>(g);
    case Family::Lamp: {
        auto* l = std::get_if<LampEl>(&g);
        if (!l) return false;
        for (auto& [i, v] : l->lamps)
            if (v <= 0 || v >= param_) return false;
        return true;
    }
    case Family::BS: {
        auto* b = std::get_if<BsEl>(&g);
        if (!b || b->s < 0) return false;
        if (b->a == 0) return b->s == 0;
        return b->s == 0 || b->a % param_ != 0;
    }
    }
    return false;
}

void Group::check(const Element& g) const {
    if (!belongs(g)) throw UsageError("element does not belong to " + name());
}

Element Group::multiply(const Element& g, const Element& h) const {
    check(g);
    check(h);
    switch (fam_) {
    case Family::Zn: {
        ZnEl r = std::get<ZnEl>(g);
        const auto& b = std::get<ZnEl>(h);
        for (int i = 0; i < param_; ++i) r.c[i] += b.c[i];
        return r;
    }
    case Family::Heis: {
        const auto& a = std::get<HeisEl>(g);
        const auto& b = std::get<HeisEl>(h);
        return HeisEl{a.x + b.x, a.y + b.y, a.z + b.z + i128(a.y) * b.x};
    }
    case Family::Lamp: {
        LampEl r = std::get<LampEl>(g);
        const auto& b = std::get<LampEl>(h);
        for (auto& [i, v] : b.lamps) {
            int64_t j = i + r.pos;
            int nv = (r.lamps.count(j) ? r.lamps[j] : 0) + v;
            nv %= param_;
            if (nv == 0) r.lamps.erase(j);
            else r.lamps[j] = nv;
        }
        r.pos += b.pos;
        return r;
    }
    case Family::BS: {
        const auto& a = std::get<BsEl>(g);
        const auto& b = std::get<BsEl>(h);
        const int k = param_;
        int64_t e2 = b.s + a.n;
        int64_t S = std::max<int64_t>({a.s, e2, 0});
        i128 t1, t2, num;
        if (__builtin_mul_overflow(a.a, ipow(k, S - a.s), &t1) ||
            __builtin_mul_overflow(b.a, ipow(k, S - e2), &t2) || __builtin_add_overflow(t1, t2, &num))
            throw ResourceExhausted("BS numerator overflow");
        return bs_normalize(num, S, a.n + b.n, k);
    }
    }
    return g;
}

Element Group::inverse(const Element& g) const {
    check(g);
    switch (fam_) {
    case Family::Zn: {
        ZnEl r = std::get<ZnEl>(g);
        for (auto& v : r.c) v = -v;
        return r;
    }
    case Family::Heis: {
        const auto& a = std::get<HeisEl>(g);
        return HeisEl{-a.x, -a.y, -a.z + i128(a.x) * a.y};
    }
    case Family::Lamp: {
        const auto& a = std::get<LampEl>(g);
        LampEl r;
        r.pos = -a.pos;
        for (auto& [i, v] : a.lamps) r.lamps[i - a.pos] = param_ - v;
        return r;
    }
    case Family::BS: {
        const auto& a = std::get<BsEl>(g);
        return bs_normalize(-a.a, a.s - a.n, -a.n, param_);
    }
    }
    return g;
}

Element Group::power(const Element& g, int64_t e) const {
    Element base = e < 0 ? inverse(g) : g;
    Element r = identity();
    for (int64_t i = 0; i < (e < 0 ? -e : e); ++i) r = multiply(r, base);
    return r;
}

int64_t lamplighter_length(const LampEl& g, int m) {
    int64_t sw = 0;
    int64_t L = std::min<int64_t>(0, g.pos), R = std::max<int64_t>(0, g.pos);
    for (auto& [i, v] : g.lamps) {
        sw += std::min(v, m - v);
        L = std::min(L, i);
        R = std::max(R, i);
    }
    const int64_t n = g.pos;
    int64_t leftFirst = -L + (R - L) + (R - n);
    int64_t rightFirst = R + (R - L) + (n - L);
    return sw + std::min(leftFirst, rightFirst);
}

int64_t Group::word_length(const Element& g) const {
    check(g);
    switch (fam_) {
    case Family::Zn: {
        int64_t s = 0;
        for (auto v : std::get<ZnEl>(g).c) s += v < 0 ? -v : v;
        return s;
    }
    case Family::Lamp: return lamplighter_length(std::get<LampEl>(g), param_);
    default: return word_length_bfs(g);
    }
}

void Group::ensure_radius(int r) const {
    auto& C = *cache_;
    {
        std::shared_lock lk(C.mu);
        if (static_cast<int>(C.layers.size()) > r) return;
    }
    std::unique_lock lk(C.mu);
    if (C.layers.empty()) {
        C.layers.push_back({identity()});
        C.dist.emplace(identity(), 0);
        C.total = 1;
    }
    const std::size_t perElement = fam_ == Family::Lamp ? 256 : 160;
    while (static_cast<int>(C.layers.size()) <= r) {
        int layer = static_cast<int>(C.layers.size());
        std::vector<Element> next;
        for (const auto& g : C.layers.back())
            for (const auto& s : gens_) {
                Element h = multiply(g, s);
                if (C.dist.emplace(h, layer).second) next.push_back(std::move(h));
            }
        C.total += next.size();
        if (C.total * perElement > budget_bytes())
            throw ResourceExhausted("ball of " + name() + " exceeds memory budget at layer " + std::to_string(layer));
        C.layers.push_back(std::move(next));
    }
}

int Group::cached_radius() const {
    std::shared_lock lk(cache_->mu);
    return static_cast<int>(cache_->layers.size()) - 1;
}

int64_t Group::word_length_bfs(const Element& g) const {
    check(g);
    auto& C = *cache_;
    for (int r = 0;; ++r) {
        if (r > cap_) throw CapExceeded("word length of " + format(g) + " exceeds cap " + std::to_string(cap_), cap_);
        {
            std::shared_lock lk(C.mu);
            if (static_cast<int>(C.layers.size()) > r) {
                auto it = C.dist.find(g);
                if (it != C.dist.end()) return it->second;
                r = static_cast<int>(C.layers.size()) - 1;
                continue;
            }
        }
        ensure_radius(r);
        std::shared_lock lk(C.mu);
        auto it = C.dist.find(g);
        if (it != C.dist.end()) return it->second;
    }
}

int64_t Group::growth(int n) const {
    if (n < 0) return 0;
    if (n > cap_) throw CapExceeded("growth radius " + std::to_string(n) + " exceeds cap", cap_);
    ensure_radius(n);
    std::shared_lock lk(cache_->mu);
    int64_t s = 0;
    for (int r = 0; r <= n; ++r) s += static_cast<int64_t>(cache_->layers[r].size());
    return s;
}

std::vector<Element> Group::ball(int n) const {
    if (n < 0) return {};
    if (n > cap_) throw CapExceeded("ball radius " + std::to_string(n) + " exceeds cap", cap_);
    ensure_radius(n);
    std::shared_lock lk(cache_->mu);
    std::vector<Element> out;
    for (int r = 0; r <= n; ++r) out.insert(out.end(), cache_->layers[r].begin(), cache_->layers[r].end());
    return out;
}

std::string Group::format(const Element& g) const {
    check(g);
    std::ostringstream os;
    switch (fam_) {
    case Family::Zn: {
        os << "zn:";
        const auto& c = std::get<ZnEl>(g).c;
        for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
        break;
    }
    case Family::Heis: {
        const auto& h = std::get<HeisEl>(g);
        os << "heis:" << h.x << "," << h.y << "," << i128_str(h.z);
        break;
    }
    case Family::Lamp: {
        const auto& l = std::get<LampEl>(g);
        os << "ll:m=" << param_ << ";lamps=";
        bool first = true;
        for (auto& [i, v] : l.lamps) {
            os << (first ? "" : ",") << i << ":" << v;
            first = false;
        }
        os << ";pos=" << l.pos;
        break;
    }
    case Family::BS: {
        const auto& b = std::get<BsEl>(g);
        os << "bs:a=" << i128_str(b.a) << ",s=" << b.s << ",n=" << b.n;
        break;
    }
    }
    return os.str();
}

Element Group::parse_element(const std::string& s) const {
    auto colon = s.find(':');
    if (colon == std::string::npos) throw UsageError("bad element '" + s + "'");
    std::string fam = s.substr(0, colon), body = s.substr(colon + 1);
    Element out;
    switch (fam_) {
    case Family::Zn: {
        if (fam != "zn") throw UsageError("expected zn element, got '" + s + "'");
        ZnEl z;
        for (auto& p : split(body, ',')) z.c.push_back(parse_i64(p));
        if (static_cast<int>(z.c.size()) != param_)
            throw UsageError("element '" + s + "' has wrong dimension for " + name());
        out = z;
        break;
    }
    case Family::Heis: {
        if (fam != "heis") throw UsageError("expected heis element, got '" + s + "'");
        auto p = split(body, ',');
        if (p.size() != 3) throw UsageError("heis element needs 3 coordinates");
        out = HeisEl{parse_i64(p[0]), parse_i64(p[1]), parse_i128(p[2])};
        break;
    }
    case Family::Lamp: {
        if (fam != "ll") throw UsageError("expected ll element, got '" + s + "'");
        LampEl l;
        bool sawM = false, sawPos = false;
        for (auto& kv : split(body, ';')) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) throw UsageError("bad ll field '" + kv + "'");
            std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
            if (key == "m") {
                if (parse_i64(val) != param_) throw UsageError("lamp modulus mismatch in '" + s + "'");
                sawM = true;
            } else if (key == "lamps") {
                if (val.empty()) continue;
                for (auto& e : split(val, ',')) {
                    auto c = e.find(':');
                    if (c == std::string::npos) throw UsageError("bad lamp '" + e + "'");
                    int64_t i = parse_i64(e.substr(0, c));
                    int v = mod(parse_i64(e.substr(c + 1)), param_);
                    if (l.lamps.count(i)) throw UsageError("duplicate lamp in '" + s + "'");
                    if (v) l.lamps[i] = v;
                }
            } else if (key == "pos") {
                l.pos = parse_i64(val);
                sawPos = true;
            } else {
                throw UsageError("unknown ll field '" + key + "'");
            }
        }
        if (!sawM || !sawPos) throw UsageError("ll element needs m= and pos=");
        out = l;
        break;
    }
    case Family::BS: {
        if (fam != "bs") throw UsageError("expected bs element, got '" + s + "'");
        i128 a = 0;
        int64_t sc = 0, n = 0;
        int seen = 0;
        for (auto& kv : split(body, ',')) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) throw UsageError("bad bs field '" + kv + "'");
            std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
            if (key == "a") a = parse_i128(val), seen |= 1;
            else if (key == "s") sc = parse_i64(val), seen |= 2;
            else if (key == "n") n = parse_i64(val), seen |= 4;
            else throw UsageError("unknown bs field '" + key + "'");
        }
        if (seen != 7) throw UsageError("bs element needs a=, s=, n=");
        if (sc < 0) throw UsageError("bs scale must be >= 0");
        out = bs_normalize(a, sc, n, param_);
        break;
    }
    }
    return out;
}

Element Group::random_element(Stream& rs, int wordLen) const {
    Element g = identity();
    for (int i = 0; i < wordLen; ++i) g = multiply(g, gens_[rs.below(gens_.size())]);
    return g;
}

}  // namespace oelab
