#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oelab/tiling.hpp"

namespace oelab {

enum class Side { Left, Right };
inline Side other(Side s) { return s == Side::Left ? Side::Right : Side::Left; }

// x in prod_k F_k: explicit prefix, then coordinate k drawn from Stream(seed, k)
struct CouplingPoint {
    std::vector<uint64_t> prefix;
    uint64_t seed = 0;
};

class Gauge {
public:
    enum class Kind { Power, Exp, LogPower, Identity };
    static Gauge power(double p);
    static Gauge exp(double c);
    // t / log(e^{1+eps} + t)^{1+eps}; the shifted log keeps it nondecreasing
    static Gauge logpower(double eps);
    static Gauge identity() { return Gauge(Kind::Identity, 1.0); }
    // "power:0.5", "exp:0.1", "logpow:1.0", "identity"
    static Gauge parse(const std::string& s);

    double operator()(double t) const;
    Kind kind() const { return kind_; }
    double param() const { return param_; }
    std::string name() const;

private:
    Gauge(Kind k, double p) : kind_(k), param_(p) {}
    Kind kind_;
    double param_;
};

struct ActResult {
    CouplingPoint point;
    int depth = 0;
};

// Two tilings with |F_k| = |F'_k|, identified through their letter indices.
class MatchedCoupling {
public:
    MatchedCoupling(TilingPtr left, TilingPtr right, int maxDepth);

    const Tiling& tiling(Side s) const { return s == Side::Left ? *left_ : *right_; }
    TilingPtr tiling_ptr(Side s) const { return s == Side::Left ? left_ : right_; }
    int max_depth() const { return maxDepth_; }

    uint64_t coord(const CouplingPoint& x, int k) const;
    bool same_point(const CouplingPoint& a, const CouplingPoint& b, int upTo) const;
    // g_n(x) for a left tiling, h_n(x) = x_n ... x_0 for a right one
    Element prefix_word(Side s, const CouplingPoint& x, int n) const;

    ActResult act(Side s, const Element& gamma, const CouplingPoint& x) const;
    // last differing coordinate + 1, 0 when gamma fixes x
    int stabilization_depth(Side s, const Element& gamma, const CouplingPoint& x) const;
    // lambda in the partner group with lambda . x = gamma . x
    Element transfer_cocycle(Side s, const Element& gamma, const CouplingPoint& x) const;
    Element transfer_cocycle(Side s, const Element& gamma, const CouplingPoint& x, const ActResult& r) const;

    // the side-s element taking x to y; they must agree past max_depth
    Element carrying_element(Side s, const CouplingPoint& x, const CouplingPoint& y) const;

    CouplingPoint random_point(uint64_t seed, uint64_t i) const;

private:
    TilingPtr left_, right_;
    int maxDepth_;
};

// left spec, right spec; "zn:1" is matched to its partner's letter sizes
MatchedCoupling make_coupling(const std::string& left, const std::string& right, int maxDepth);

struct TailRow {
    int k = 0;
    std::optional<Rational> exact;
    double freq = 0;  // frequency of act depth > k
    double stderr_ = 0;
};
// Monte Carlo frequencies of {gamma g_k(x) not in T_k} for k = 0..K next to exact_tail
std::vector<TailRow> mc_tail(const MatchedCoupling& C, Side s, const Element& gamma, int K, uint64_t N,
                             uint64_t seed, bool withExact = true);

struct IntegrabilityReport {
    double estimate = 0;
    double stderr_ = 0;
    double exhaustedFraction = 0;
    uint64_t samples = 0;
    // Monte Carlo contribution of distances in (2R'_{k-1}, 2R'_k] (stratum 0 is [0, 2R'_0])
    std::vector<double> strata;
    double beyondStrata = 0;
    // sum_{k <= K} gauge(2R'_k)(eps_{k-1} - eps_k), K = 0..maxDepth
    std::vector<double> stratifiedPartial;
    std::optional<double> stratifiedBound;
    bool diverging = false;  // stratified terms not decreasing at the truncation point
};
IntegrabilityReport mc_integrability(const MatchedCoupling& C, Side s, const Element& gamma, const Gauge& g,
                                     uint64_t N, uint64_t seed);
IntegrabilityReport mc_integrability_serial(const MatchedCoupling& C, Side s, const Element& gamma, const Gauge& g,
                                            uint64_t N, uint64_t seed);

// union of prefix cylinders {x : x_0..x_j = c}; cylinders must be disjoint
struct CylinderSet {
    std::vector<std::vector<uint64_t>> cylinders;
};
double cylinder_measure(const MatchedCoupling& C, Side s, const CylinderSet& X0);
bool in_cylinders(const MatchedCoupling& C, const CylinderSet& X0, const CouplingPoint& x);

struct ReturnTimeReport {
    double lhs = 0;
    double stderr_ = 0;
    double rhs = 0;  // 2 mu(X0) - 1
    double measure = 0;
    double exhaustedFraction = 0;
};
// int_{X0} |R_{X0}(x) cap B(n)| / V(n) dmu against 2 mu(X0) - 1
ReturnTimeReport return_time_density(const MatchedCoupling& C, Side s, const CylinderSet& X0, int n, uint64_t N,
                                     uint64_t seed);

}  // namespace oelab
