#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "oelab/group.hpp"

namespace oelab {

using Rational = boost::rational<int64_t>;

enum class Orientation { Left, Right };

// element -> flat letter index (i_0 + |F_0| (i_1 + |F_1| (...)))
using TileSet = std::unordered_map<Element, uint64_t, ElementHash>;

// Left: T_k = T_{k-1} F_k, elements f_0 f_1 ... f_k.
// Right: T_k = F_k T_{k-1}, elements f_k ... f_1 f_0.
class Tiling {
public:
    Tiling(Group g, Orientation o, std::string name) : group_(std::move(g)), orient_(o), name_(std::move(name)) {}
    virtual ~Tiling() = default;

    const Group& group() const { return group_; }
    Orientation orientation() const { return orient_; }
    const std::string& name() const { return name_; }

    virtual uint64_t letter_count(int k) const = 0;
    virtual Element letter(int k, uint64_t idx) const = 0;
    // deepest k whose letters can be indexed
    virtual int max_depth() const = 0;

    virtual bool in_tile(const Element& g, int k) const;
    // letter indices (i_0..i_k); NotInTile if g is outside T_k
    virtual std::vector<uint64_t> decode(const Element& g, int k) const;

    virtual std::optional<Rational> claimed_epsilon(int) const { return std::nullopt; }
    virtual std::optional<double> claimed_radius(int) const { return std::nullopt; }

    // analytic escape count (see escape_count); nullopt when not available
    virtual std::optional<uint64_t> escape_count_fast(const Element&, int) const { return std::nullopt; }
    // analytic exact diameter of T_k; nullopt when not available
    virtual std::optional<int64_t> diameter_fast(int) const { return std::nullopt; }

    // |T_k| = prod |F_i|; ResourceExhausted if it does not fit in int64
    uint64_t tile_size(int k) const;
    // product of the letters in orientation order
    Element word(const std::vector<uint64_t>& idx) const;
    std::vector<uint64_t> unflatten(uint64_t flat, int k) const;
    Element tile_element(int k, uint64_t flat) const { return word(unflatten(flat, k)); }

    // deduplicated T_k; TilingViolation on the first collision
    std::shared_ptr<const TileSet> materialize(int k) const;

private:
    Group group_;
    Orientation orient_;
    std::string name_;
    mutable std::mutex memoMu_;
    mutable std::vector<std::shared_ptr<const TileSet>> memo_;
};

using TilingPtr = std::shared_ptr<const Tiling>;

class ExplicitTiling : public Tiling {
public:
    ExplicitTiling(Group g, Orientation o, std::vector<std::vector<Element>> letters, std::string name = "explicit");
    uint64_t letter_count(int k) const override;
    Element letter(int k, uint64_t idx) const override;
    int max_depth() const override { return static_cast<int>(letters_.size()) - 1; }

private:
    std::vector<std::vector<Element>> letters_;
};

// F_k = {0, .., 2^m - 1}^n * 2^{mk}; m = 1 is F_k = {0, 2^k}^n
class ZnTiling : public Tiling {
public:
    ZnTiling(int n, int m);
    uint64_t letter_count(int k) const override;
    Element letter(int k, uint64_t idx) const override;
    int max_depth() const override { return 62 / m_ - 1; }
    bool in_tile(const Element& g, int k) const override;
    std::vector<uint64_t> decode(const Element& g, int k) const override;
    std::optional<Rational> claimed_epsilon(int k) const override;
    std::optional<double> claimed_radius(int k) const override;
    std::optional<uint64_t> escape_count_fast(const Element& g, int k) const override;
    std::optional<int64_t> diameter_fast(int k) const override;
    int grouping() const { return m_; }

private:
    int n_, m_;
};

// F'_0 = [0, s_0 - 1], F'_k = |T'_{k-1}| [0, s_k - 1]; T'_k = [0, |T'_k| - 1]
class ZMatchedTiling : public Tiling {
public:
    explicit ZMatchedTiling(std::vector<uint64_t> sizes, std::string name = "zmatched");
    uint64_t letter_count(int k) const override { return sizes_.at(k); }
    Element letter(int k, uint64_t idx) const override;
    int max_depth() const override { return static_cast<int>(sizes_.size()) - 1; }
    bool in_tile(const Element& g, int k) const override;
    std::vector<uint64_t> decode(const Element& g, int k) const override;
    std::optional<Rational> claimed_epsilon(int k) const override;
    std::optional<double> claimed_radius(int k) const override;
    std::optional<uint64_t> escape_count_fast(const Element& g, int k) const override;
    std::optional<int64_t> diameter_fast(int k) const override;

private:
    std::vector<uint64_t> sizes_;
    std::vector<int64_t> prod_;  // prod_[k] = |T'_k|
};

// F_k = {(2^k x, 2^k y, 4^k z) : x, y in {0,1}, z in {0..3}}, letter index x + 2y + 4z
class HeisTiling : public Tiling {
public:
    HeisTiling();
    uint64_t letter_count(int) const override { return 16; }
    Element letter(int k, uint64_t idx) const override;
    int max_depth() const override { return 28; }
    bool in_tile(const Element& g, int k) const override;
    std::vector<uint64_t> decode(const Element& g, int k) const override;
    std::optional<Rational> claimed_epsilon(int k) const override;
    std::optional<double> claimed_radius(int k) const override;
    std::optional<uint64_t> escape_count_fast(const Element& g, int k) const override;
    // sum_{i>=1} 2^i x_i sum_{j<i} 2^j y_j
    static i128 carry_term(int64_t x, int64_t y);
};

// right tiling of Z/mZ wr Z with T_k = {supp in [0, 2^{k+1}), pos in [0, 2^{k+1})}
class LampTiling : public Tiling {
public:
    explicit LampTiling(int m);
    uint64_t letter_count(int k) const override;
    Element letter(int k, uint64_t idx) const override;
    int max_depth() const override { return maxDepth_; }
    bool in_tile(const Element& g, int k) const override;
    std::vector<uint64_t> decode(const Element& g, int k) const override;
    std::optional<Rational> claimed_epsilon(int k) const override;
    std::optional<double> claimed_radius(int k) const override;
    std::optional<uint64_t> escape_count_fast(const Element& g, int k) const override;

private:
    int m_;
    int maxDepth_;
};

// "zn:2", "zn:2:grouped:3", "heis", "ll:2", "zmatched:4,4,16", "zmatched:ll:2"
TilingPtr builtin(const std::string& spec);
// Like builtin, but a plain "zn:1" paired with a partner of different letter
// sizes becomes the Z tiling matched to the partner's sizes.
TilingPtr builtin_for_partner(const std::string& spec, const Tiling& partner);

// Letter sizes of t up to depth K, for ZMatchedTiling
std::vector<uint64_t> letter_sizes(const Tiling& t, int K);

struct BuildReport {
    std::vector<uint64_t> sizes;  // |T_k| for k = 0..K
};
BuildReport build_tiles(const Tiling& t, int K);

// #{g in T_k : gamma g not in T_k} (left) or #{h in T_k : h gamma^{-1} not in T_k} (right)
uint64_t escape_count(const Tiling& t, const Element& gamma, int k);
// same, by enumerating T_k through letter words; the serial reference
uint64_t escape_count_enumerated(const Tiling& t, const Element& gamma, int k);
// same, by enumerating and checking membership with OpenMP
uint64_t escape_count_parallel(const Tiling& t, const Element& gamma, int k);

Rational exact_tail(const Tiling& t, const Element& gamma, int k);
// max over generators s of |T_k \ s T_k| / |T_k| (|T_k \ T_k s| for right tilings)
Rational folner_constant(const Tiling& t, int k);

struct DiameterReport {
    int64_t value = 0;
    bool exact = false;  // false: lower bound from sampled pairs
    std::optional<double> claimed;
    bool ok = true;      // value <= claimed when a claim exists
};
DiameterReport tile_diameter_exact(const Tiling& t, int k);
DiameterReport tile_diameter_sampled(const Tiling& t, int k, uint64_t pairs, uint64_t seed);

}  // namespace oelab
