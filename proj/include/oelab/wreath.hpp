#pragma once

#include <optional>
#include <string>
#include <unordered_map>

#include "oelab/coupling.hpp"

namespace oelab {

// (f, gamma) in Lambda wr Gamma; f omits identity values
struct WreathElement {
    std::unordered_map<Element, Element, ElementHash> f;
    Element gamma;
};

// (x, (l_y)) with y indexed by the left base element kappa_y, kappa_y . root = y.
// Lamps missing from the map sit at their seeded default.
struct WreathPoint {
    CouplingPoint root;
    CouplingPoint x;
    Element key;  // kappa with kappa . root = x
    std::unordered_map<Element, CouplingPoint, ElementHash> lamps;
    uint64_t lampSeed = 0;
};

struct WreathLength {
    int64_t lower = 0, upper = 0;
    bool exact = false;
};
// generators S_Lambda at the cursor and S_Gamma moving it: sum |f(g)| plus the
// shortest walk from e through supp f to gamma (exact for |supp| <= 12)
WreathLength wreath_length(const Group& lambda, const Group& gamma, const WreathElement& w);

class WreathCoupling {
public:
    WreathCoupling(MatchedCoupling base, MatchedCoupling lamp);

    const MatchedCoupling& base() const { return base_; }
    const MatchedCoupling& lamp() const { return lamp_; }
    const Group& base_group(Side s) const { return base_.tiling(s).group(); }
    const Group& lamp_group(Side s) const { return lamp_.tiling(s).group(); }

    WreathPoint random_point(uint64_t seed, uint64_t i) const;
    CouplingPoint lamp_at(const WreathPoint& P, const Element& key) const;
    // the current point y_g = g^{-1} . x as a left base key
    Element key_of(Side s, const WreathPoint& P, const Element& g) const;

    WreathPoint act(Side s, const WreathElement& w, const WreathPoint& P) const;
    bool same(const WreathPoint& P, const WreathPoint& Q) const;
    // the side-s wreath element taking P to Q, read off from base and lamp differences
    WreathElement carrying(Side s, const WreathPoint& P, const WreathPoint& Q) const;

    WreathElement identity(Side s) const;
    WreathElement embed_base(Side s, const Element& gamma) const;
    WreathElement embed_lamp(Side s, const Element& lambda) const;
    WreathElement multiply(Side s, const WreathElement& a, const WreathElement& b) const;
    WreathElement random_element(Side s, Stream& rs, int supp, int len) const;
    std::string format(Side s, const WreathElement& w) const;

private:
    MatchedCoupling base_, lamp_;
};

// "zn:2/zn:1" -> coupling of the two tilings
MatchedCoupling parse_matched(const std::string& spec, int maxDepth);

struct Prop72Result {
    int64_t dist = 0;      // wreath length of the transferred element
    int64_t expected = 0;  // base or lamp coupling distance
    bool exact = false;
    bool roundTrip = false;  // the transferred element reproduces the move
    bool ok = false;
    std::string kind;  // "base", "lamp" or "identity"
};
// w must be a pure base or pure lamp move on side s
Prop72Result prop72_check(const WreathCoupling& W, Side s, const WreathElement& w, const WreathPoint& P);

struct WreathGaugeReport {
    double wreath = 0, wreathStderr = 0;
    double base = 0, baseStderr = 0;
    double exhaustedFraction = 0;
    uint64_t samples = 0;
};
// mean gauge of the transferred length of a pure base move, next to the base coupling's own estimate
WreathGaugeReport wreath_base_gauge(const WreathCoupling& W, Side s, const Element& gamma, const Gauge& g,
                                    uint64_t N, uint64_t seed);

}  // namespace oelab
