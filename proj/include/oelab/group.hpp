#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "oelab/rng.hpp"

namespace oelab {

using i128 = __int128;

std::string i128_str(i128 v);
i128 parse_i128(const std::string& s);

struct ZnEl {
    std::vector<int64_t> c;
    bool operator==(const ZnEl&) const = default;
};

// (x,y,z)(x',y',z') = (x+x', y+y', z+z'+y x')
struct HeisEl {
    int64_t x = 0, y = 0;
    i128 z = 0;
    bool operator==(const HeisEl&) const = default;
};

// (f,n)(f',n') = (f + f'(. - n), n + n'); lamps never store 0
struct LampEl {
    std::map<int64_t, int> lamps;
    int64_t pos = 0;
    bool operator==(const LampEl&) const = default;
};

// (a / k^s, n), s >= 0, k does not divide a unless a == 0 (then s == 0)
struct BsEl {
    i128 a = 0;
    int64_t s = 0;
    int64_t n = 0;
    bool operator==(const BsEl&) const = default;
};

using Element = std::variant<ZnEl, HeisEl, LampEl, BsEl>;

struct ElementHash {
    std::size_t operator()(const Element& e) const;
};

enum class Family { Zn, Heis, Lamp, BS };

struct BallCache;

class Group {
public:
    static Group zn(int n);
    static Group heis();
    static Group lamplighter(int m);
    static Group bs(int k);
    // "zn:2", "heis", "ll:2", "ll:m=2", "bs:2", "bs:k=2"
    static Group parse(const std::string& spec);

    Family family() const { return fam_; }
    int param() const { return param_; }  // n, m or k; 0 for Heisenberg
    std::string name() const;
    bool operator==(const Group& o) const { return fam_ == o.fam_ && param_ == o.param_; }

    const std::vector<Element>& generators() const { return gens_; }
    Element identity() const;
    bool belongs(const Element& g) const;
    void check(const Element& g) const;  // UsageError on family mismatch

    Element multiply(const Element& g, const Element& h) const;
    Element inverse(const Element& g) const;
    Element power(const Element& g, int64_t e) const;
    bool is_identity(const Element& g) const { return g == identity(); }

    int cap() const { return cap_; }
    void set_cap(int c) { cap_ = c; }

    // exact |g|; closed form for Zn and lamplighter, BFS otherwise
    int64_t word_length(const Element& g) const;
    // BFS from the identity regardless of family (oracle for closed forms)
    int64_t word_length_bfs(const Element& g) const;
    int64_t growth(int n) const;
    std::vector<Element> ball(int n) const;
    // number of BFS layers currently materialized, for diagnostics
    int cached_radius() const;

    std::string format(const Element& g) const;
    Element parse_element(const std::string& s) const;

    Element random_element(Stream& rs, int wordLen) const;

private:
    Group(Family f, int p);
    void ensure_radius(int r) const;

    Family fam_;
    int param_;
    int cap_;
    std::vector<Element> gens_;
    std::shared_ptr<BallCache> cache_;
};

int64_t lamplighter_length(const LampEl& g, int m);

BsEl bs_normalize(i128 a, int64_t s, int64_t n, int k);

}  // namespace oelab
