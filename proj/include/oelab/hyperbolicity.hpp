#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oelab/group.hpp"
#include "oelab/tiling.hpp"

namespace oelab {

// Connected simple graph with its all-pairs BFS distances.
class MetricGraph {
public:
    static MetricGraph from_edges(int n, const std::vector<std::pair<int, int>>& edges, std::string name = "graph");
    // one "u v" pair per line, 0-indexed; blank lines and '#' comments ignored
    static MetricGraph parse_edge_list(std::istream& in);
    static MetricGraph grid(int rows, int cols);
    static MetricGraph cycle(int n);
    static MetricGraph path(int n);
    static MetricGraph random_tree(int n, uint64_t seed);
    static MetricGraph cayley_ball(const Group& G, int radius);
    // "grid:10", "grid:4x6", "cycle:8", "path:10", "tree:30", "cayley-ball:heis:4"
    static MetricGraph family(const std::string& spec, uint64_t seed = 0);

    int size() const { return n_; }
    const std::string& name() const { return name_; }
    const std::vector<int>& neighbors(int v) const { return adj_[v]; }
    int dist(int u, int v) const { return d_[static_cast<std::size_t>(u) * n_ + v]; }
    bool adjacent(int u, int v) const { return dist(u, v) == 1; }
    int diameter() const;
    std::size_t edge_count() const;
    // I(a, b) = {x : d(a,x) + d(x,b) = d(a,b)}, ascending
    std::vector<int> interval(int a, int b) const;
    // a geodesic from a to b, always stepping to the smallest admissible neighbour
    std::vector<int> geodesic(int a, int b) const;
    std::string label(int v) const;
    // the same graph with vertices renamed by perm (new index of v is perm[v])
    MetricGraph relabeled(const std::vector<int>& perm) const;

private:
    MetricGraph() = default;
    void finish();
    int n_ = 0;
    std::vector<std::vector<int>> adj_;
    std::vector<int> d_;
    std::vector<std::string> labels_;
    std::string name_;
};

// boundary of a rows x cols grid as a closed vertex list
std::vector<int> grid_boundary(int rows, int cols);

struct RipsResult {
    int64_t delta = 0;
    int a = 0, b = 0, c = 0, x = 0;  // x in I(a,b) realizing delta
};
// max over (a,b,c) and x in I(a,b) of d(x, I(a,c) u I(b,c))
RipsResult rips_delta(const MetricGraph& G);
RipsResult rips_delta_naive(const MetricGraph& G);

// max over quadruples of (largest - middle pair sum) / 2
Rational four_point_delta(const MetricGraph& G);

struct DistortionReport {
    int n = 0;
    Rational a{0}, b{0};
    std::pair<int, int> aWitness{0, 0}, bWitness{0, 0};  // cycle positions
};
DistortionReport cycle_distortion(const MetricGraph& G, const std::vector<int>& cycle);

struct Prop92Bound {
    double bound = 0;     // (4 delta log2(b n) + 4 + 2b) / n
    double corollary = 0;  // 12 delta ln(n) / n
};
Prop92Bound prop92_bound(double delta, double n, double b);

struct Prop92Audit {
    DistortionReport distortion;
    int64_t delta = 0;
    double half = 0;  // n for a cycle of length 2n
    double bound = 0;
    // smallest delta the bound allows for the measured a, b
    double deltaFloor = 0;
    bool ok = false;
};
Prop92Audit prop92_audit(const MetricGraph& G, const std::vector<int>& cycle, int64_t delta);

struct Lemma91Result {
    int maxDefect = 0;
    double bound = 0;  // delta log2(l) + 1
    int length = 0;
    bool ok = false;
};
// path is a walk of adjacent vertices from x1 to x2
Lemma91Result lemma91_check(const MetricGraph& G, const std::vector<int>& path, int64_t delta);

struct FatCycleParams {
    std::optional<int64_t> targetDelta;  // default: the graph's own Rips constant
};

struct FatCycleReport {
    std::vector<int> cycle;
    DistortionReport distortion;
    RipsResult triangle;
    int64_t D = 0;
    std::string caseName;
    int polygonCorners = 0;
    int64_t lengthTarget = 0;            // ceil(D / 15)
    double contractionTarget = 17820.0;  // a >= 1 / (slack * target)
    double slack = 2.0;
    bool meetsTargets = false;
};
// NotApplicable when no triangle is fatter than the target
FatCycleReport extract_fat_cycle(const MetricGraph& G, const FatCycleParams& params = {});

}  // namespace oelab
