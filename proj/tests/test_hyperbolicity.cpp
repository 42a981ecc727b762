#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "oelab/errors.hpp"
#include "oelab/hyperbolicity.hpp"
#include "oelab/rng.hpp"

using namespace oelab;

namespace {
MetricGraph random_graph(int n, int extra, uint64_t seed) {
    Stream rs(seed, 1);
    std::vector<std::pair<int, int>> e;
    for (int i = 1; i < n; ++i) e.emplace_back(static_cast<int>(rs.below(i)), i);
    for (int k = 0; k < extra; ++k) {
        int u = static_cast<int>(rs.below(n)), v = static_cast<int>(rs.below(n));
        if (u != v) e.emplace_back(u, v);
    }
    return MetricGraph::from_edges(n, e);
}

std::vector<int> random_walk(const MetricGraph& G, Stream& rs, int start, int len) {
    std::vector<int> w{start};
    for (int i = 0; i < len; ++i) {
        const auto& nb = G.neighbors(w.back());
        w.push_back(nb[rs.below(nb.size())]);
    }
    return w;
}
}  // namespace

TEST_CASE("graph construction") {
    auto g = MetricGraph::grid(3, 4);
    CHECK(g.size() == 12);
    CHECK(g.edge_count() == 17);
    CHECK(g.diameter() == 5);
    CHECK(MetricGraph::family("grid:4x6").size() == 24);
    CHECK(MetricGraph::family("cayley-ball:zn:2:3").size() == 25);
    CHECK(MetricGraph::family("cayley-ball:heis:2").size() == Group::heis().growth(2));
    std::istringstream in("# square\n0 1\n1 2\n2 3\n\n3 0\n");
    auto sq = MetricGraph::parse_edge_list(in);
    CHECK(sq.size() == 4);
    CHECK(sq.dist(0, 2) == 2);
    std::istringstream bad("0 1\n2 3\n");
    CHECK_THROWS_AS(MetricGraph::parse_edge_list(bad), UsageError);
    CHECK_THROWS_AS(MetricGraph::family("blob:3"), UsageError);
    auto I = g.interval(0, 11);
    CHECK(I.size() == 12);
    auto geo = g.geodesic(0, 11);
    CHECK(geo.size() == 6);
}

TEST_CASE("Rips constant of trees and cycles") {
    CHECK(rips_delta(MetricGraph::path(10)).delta == 0);
    for (uint64_t s = 0; s < 20; ++s) {
        auto t = MetricGraph::random_tree(5 + static_cast<int>(s) * 3, s);
        CHECK(rips_delta(t).delta == 0);
    }
    auto c8 = MetricGraph::cycle(8);
    CHECK(rips_delta_naive(c8).delta == 2);
    CHECK(rips_delta(c8).delta == 2);
    for (int n : {3, 4, 5, 6, 7, 9, 12, 16}) CHECK(rips_delta(MetricGraph::cycle(n)).delta == rips_delta_naive(MetricGraph::cycle(n)).delta);
    auto g5 = MetricGraph::grid(5, 5);
    auto r = rips_delta(g5);
    CHECK(r.delta >= 2);
    CHECK(r.delta == rips_delta_naive(g5).delta);
}

TEST_CASE("Rips constant against the naive search") {
    for (uint64_t s = 0; s < 25; ++s) {
        auto g = random_graph(8 + static_cast<int>(s % 14), static_cast<int>(s % 6), s);
        auto fast = rips_delta(g), slow = rips_delta_naive(g);
        CHECK(fast.delta == slow.delta);
        CHECK(fast.a == slow.a);
        CHECK(fast.b == slow.b);
        CHECK(fast.c == slow.c);
        CHECK(fast.x == slow.x);
    }
}

TEST_CASE("Rips constant is an isomorphism invariant") {
    for (uint64_t s = 0; s < 10; ++s) {
        auto g = random_graph(20, 5, 100 + s);
        std::vector<int> perm(g.size());
        std::iota(perm.begin(), perm.end(), 0);
        Stream rs(s, 9);
        for (int i = g.size() - 1; i > 0; --i) std::swap(perm[i], perm[rs.below(i + 1)]);
        CHECK(rips_delta(g.relabeled(perm)).delta == rips_delta(g).delta);
    }
}

TEST_CASE("four-point constant") {
    CHECK(four_point_delta(MetricGraph::random_tree(30, 4)) == Rational(0));
    CHECK(four_point_delta(MetricGraph::path(2)) == Rational(0));
    auto c8 = four_point_delta(MetricGraph::cycle(8));
    CHECK(c8 > Rational(0));
    CHECK(c8 <= Rational(2 * rips_delta(MetricGraph::cycle(8)).delta));
    // C_8: the square 0, 2, 4, 6 has pair sums 4, 4 and 8
    CHECK(c8 == Rational(2));
}

TEST_CASE("cycle distortion") {
    for (int n : {2, 4, 6, 10}) {
        auto g = MetricGraph::grid(n + 1, n + 1);
        auto d = cycle_distortion(g, grid_boundary(n + 1, n + 1));
        CHECK(d.n == 4 * n);
        CHECK(d.a == Rational(1, 2));
        CHECK(d.b == Rational(1));
    }
    auto c = MetricGraph::cycle(9);
    std::vector<int> id(9);
    std::iota(id.begin(), id.end(), 0);
    auto r = cycle_distortion(c, id);
    CHECK(r.a == Rational(1));
    CHECK(r.b == Rational(1));
    CHECK_THROWS_AS(cycle_distortion(c, {3, 3, 3, 3}), UsageError);
    CHECK_THROWS_AS(cycle_distortion(c, {0, 1, 3}), UsageError);
}

TEST_CASE("cycle distortion bound formula") {
    CHECK(prop92_bound(0, 10, 1).bound == doctest::Approx(0.6));
    CHECK(prop92_bound(1, 1024, 1).bound == doctest::Approx(46.0 / 1024));
    CHECK(prop92_bound(1, std::exp(2.0), 1).corollary == doctest::Approx(24 / std::exp(2.0)));
    CHECK_THROWS_AS(prop92_bound(1, 0, 1), UsageError);
}

TEST_CASE("distortion audit on grid boundaries") {
    int64_t prev = -1;
    for (int n : {6, 10, 14}) {
        auto g = MetricGraph::grid(n + 1, n + 1);
        auto delta = rips_delta(g).delta;
        auto audit = prop92_audit(g, grid_boundary(n + 1, n + 1), delta);
        CHECK(audit.ok);
        CHECK(static_cast<double>(delta) >= audit.deltaFloor);
        CHECK(delta > prev);
        prev = delta;
    }
}

TEST_CASE("quasi-geodesic defect examples and random audits") {
    auto t = MetricGraph::random_tree(25, 3);
    Stream rs(5, 5);
    for (int k = 0; k < 50; ++k) {
        auto w = random_walk(t, rs, static_cast<int>(rs.below(25)), 1 + static_cast<int>(rs.below(12)));
        auto r = lemma91_check(t, w, 0);
        CHECK(r.maxDefect == 0);
        CHECK(r.ok);
    }
    auto c8 = MetricGraph::cycle(8);
    auto half = lemma91_check(c8, {0, 1, 2, 3, 4}, 2);
    CHECK(half.maxDefect == 2);
    CHECK(half.bound == doctest::Approx(5));
    auto g = MetricGraph::grid(6, 6);
    // geodesics are unique in an odd cycle
    auto c11 = MetricGraph::cycle(11);
    CHECK(lemma91_check(c11, c11.geodesic(0, 5), 2).maxDefect == 0);
    // in a grid the interval is the whole rectangle
    auto corner = lemma91_check(g, g.geodesic(0, 35), rips_delta(g).delta);
    CHECK(corner.maxDefect == 5);
    CHECK(corner.ok);
    CHECK_THROWS_AS(lemma91_check(c8, {0, 2}, 2), UsageError);

    std::vector<MetricGraph> graphs = {MetricGraph::cycle(11), MetricGraph::grid(5, 7), random_graph(30, 8, 4),
                                       MetricGraph::family("cayley-ball:zn:2:3")};
    int violations = 0;
    for (auto& G : graphs) {
        auto delta = rips_delta(G).delta;
        for (int k = 0; k < 100; ++k) {
            auto w = random_walk(G, rs, static_cast<int>(rs.below(G.size())), 1 + static_cast<int>(rs.below(20)));
            violations += !lemma91_check(G, w, delta).ok;
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("fat cycle extraction") {
    auto g = MetricGraph::grid(12, 12);
    auto rep = extract_fat_cycle(g);
    CHECK(rep.D == rips_delta(g).delta);
    auto audit = cycle_distortion(g, rep.cycle);
    CHECK(audit.a == rep.distortion.a);
    CHECK(audit.b == rep.distortion.b);
    CHECK(rep.meetsTargets);
    CHECK(static_cast<int64_t>(rep.cycle.size()) >= rep.lengthTarget);
    CHECK_THROWS_AS(extract_fat_cycle(MetricGraph::random_tree(20, 1)), NotApplicable);
    CHECK_THROWS_AS(extract_fat_cycle(g, FatCycleParams{rep.D}), NotApplicable);

    auto c = MetricGraph::cycle(16);
    auto rc = extract_fat_cycle(c);
    auto ac = cycle_distortion(c, rc.cycle);
    CHECK(ac.a == rc.distortion.a);
    CHECK(ac.b == rc.distortion.b);
    CHECK(rc.cycle.size() == 16);
    CHECK(rc.distortion.a == Rational(1));
}
