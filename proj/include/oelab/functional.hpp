#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "oelab/coupling.hpp"
#include "oelab/group.hpp"
#include "oelab/tiling.hpp"

namespace oelab {

struct FiniteFunction {
    Group group;
    std::unordered_map<Element, double, ElementHash> values;  // zero entries are dropped

    explicit FiniteFunction(Group g) : group(std::move(g)) {}
    double at(const Element& g) const;
    void set(const Element& g, double v);
    double norm_pp(double p) const;  // sum |f|^p
    double norm(double p) const;
};

enum class GradSide { Left, Right };

// sum over s in S and g of |f(g) - f(s^{-1} g)|^p (left) or |f(g) - f(g s)|^p (right)
double gradient_pp(const FiniteFunction& f, GradSide side, double p);
double gradient_norm(const FiniteFunction& f, GradSide side, double p);

// A transitive Lambda-set as a finite Schreier graph: gen[s][x] is s.x for the
// s-th generator of the group, or -1 where the model is truncated.
class TransitiveSet {
public:
    TransitiveSet(Group g, std::vector<std::vector<int>> gen, std::string name);
    // Lambda acting on itself, truncated to ball(radius)
    static TransitiveSet regular(const Group& g, int radius);
    // Z acting on Z/m
    static TransitiveSet cycle(int m);
    // lamplighter acting on Z through the cursor, truncated to [-w, w]
    static TransitiveSet lamplighter_on_cursor(int m, int w);

    const Group& group() const { return group_; }
    int size() const { return static_cast<int>(gen_.empty() ? 0 : gen_[0].size()); }
    const std::string& name() const { return name_; }
    // lambda . x via a geodesic word; TruncationError if the word leaves the model
    int act(const Element& lambda, int x) const;
    int distance(int x0, int x1) const;
    // the state of the identity, for regular sets
    int base() const { return base_; }

private:
    Group group_;
    std::vector<std::vector<int>> gen_;
    std::string name_;
    int base_ = 0;
    std::vector<int> geodesic(const Element& lambda) const;
};

struct PushResult {
    double lhs = 0;        // ||f_x0 - f_x1||_p
    double rhs = 0;        // d(x0, x1) ||grad^r f||_p
    double normF = 0;      // ||f||_p
    double normPushed = 0;  // ||f_x0||_p
    int distance = 0;
    bool ok = false;
};
// f_x(y) = (sum_{lambda . x = y} |f(lambda)|^p)^{1/p}
std::vector<double> push_function(const FiniteFunction& f, const TransitiveSet& X, int x, double p);
PushResult push_to_orbit(const FiniteFunction& f, const TransitiveSet& X, int x0, int x1, double p);

struct L1RatioResult {
    double ratio = 0;  // ||f||_1 / ||f_x0 - f_x1||_1 (infinite when the difference vanishes)
    double bound = 0;  // phi(||f||_1) / (2 phi(d))
    bool ok = false;
};
// f is rescaled so that ||grad^r f||_1 = 1; phi must be nondecreasing with t/phi(t) nondecreasing
L1RatioResult l1_ratio_check(const FiniteFunction& f, const TransitiveSet& X, int x0, int x1, const Gauge& phi);

struct InducedGradientReport {
    double lhs = 0;  // estimate of ||grad f~||_p^p (or ||grad f~||_1 / ||f~||_1 with a gauge)
    double lhsStderr = 0;
    double C = 0;
    double cStderr = 0;
    double rhs = 0;  // C ||grad^r f||_p^p (or 2C / phi(||f||_1))
    double rhsStderr = 0;
    double exhaustedFraction = 0;
    bool ok = false;  // lhs - 3 se <= rhs + 3 se
};
// f lives on the group of side lambdaSide; Gamma is the other side. With a
// gauge, p must be 1 and f is rescaled to ||grad^r f||_1 = 1.
InducedGradientReport induced_gradient_check(const MatchedCoupling& C, Side lambdaSide, const FiniteFunction& f,
                                             double p, uint64_t N, uint64_t seed,
                                             const std::optional<Gauge>& gauge = std::nullopt);

enum class ProfileMode { Sets, IntegerValued };
struct ProfileResult {
    Rational value{0};
    std::vector<Element> witness;      // support of the best function
    std::vector<int64_t> witnessValues;  // its values (all 1 for sets)
    uint64_t searched = 0;
    bool heuristic = false;  // integer-valued search restricted to connected supports
    std::string convention;
};
// sup over f supported on a connected set containing e with |supp| <= n of
// ||f||_1 / ||grad^l f||_1; Sets mode uses indicator functions
ProfileResult isoperimetric_profile(const Group& G, int n, ProfileMode mode = ProfileMode::Sets, int maxVal = 1,
                                    uint64_t budget = 200000000);

// |S A \ A| / |A| (|A S \ A| / |A| for Right)
Rational folner_set_quality(const Group& G, const std::vector<Element>& A, Orientation o = Orientation::Left);

}  // namespace oelab
