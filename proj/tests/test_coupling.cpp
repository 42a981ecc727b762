#include <cmath>
#include <set>

#include "doctest.h"
#include "oelab/coupling.hpp"
#include "oelab/errors.hpp"

using namespace oelab;

namespace {
Element z(int64_t v) { return ZnEl{{v}}; }
}  // namespace

TEST_CASE("odometer carry on Z") {
    auto C = make_coupling("zn:1", "zn:1", 20);
    CouplingPoint x{{1, 1, 1, 0}, 0};
    auto r = C.act(Side::Left, z(1), x);
    CHECK(r.depth == 3);
    CHECK(r.point.prefix == std::vector<uint64_t>{0, 0, 0, 1});
    CHECK(C.stabilization_depth(Side::Left, z(1), x) == 4);
    CHECK(C.stabilization_depth(Side::Left, z(1), CouplingPoint{{1, 0}, 0}) == 2);
    CHECK(C.stabilization_depth(Side::Left, z(0), x) == 0);
    auto r0 = C.act(Side::Left, z(1), CouplingPoint{{0, 1}, 5});
    CHECK(r0.depth == 0);
    CHECK(r0.point.prefix == std::vector<uint64_t>{1, 1});
    CHECK(C.transfer_cocycle(Side::Left, z(1), x) == z(1));
}

TEST_CASE("exact tails on Z") {
    ZnTiling t(1, 1);
    CHECK(exact_tail(t, z(1), 1) == Rational(1, 4));
    CHECK(exact_tail(t, z(3), 1) == Rational(3, 4));
    CHECK(exact_tail(t, z(0), 4) == Rational(0));
}

TEST_CASE("action property and orbit identity") {
    for (auto [l, r] : {std::pair{"zn:2", "zn:1:grouped:2"}, std::pair{"zn:4", "heis"}, std::pair{"ll:2", "zn:1"}}) {
        auto C = make_coupling(l, r, 20);
        for (Side s : {Side::Left, Side::Right}) {
            const Group& G = C.tiling(s).group();
            const Group& H = C.tiling(other(s)).group();
            Stream rs(42, static_cast<uint64_t>(s));
            int checked = 0;
            for (int t = 0; t < 300; ++t) {
                Element g1 = G.random_element(rs, 3), g2 = G.random_element(rs, 3);
                CouplingPoint x{{}, rs.next()};
                try {
                    auto a = C.act(s, g1, x);
                    auto b = C.act(s, g2, a.point);
                    auto c = C.act(s, G.multiply(g2, g1), x);
                    int D = std::max({a.depth, b.depth, c.depth}) + 1;
                    CHECK(C.same_point(b.point, c.point, D));
                    Element lam = C.transfer_cocycle(s, g1, x, a);
                    auto p = C.act(other(s), lam, x);
                    CHECK(C.same_point(p.point, a.point, std::max(p.depth, a.depth) + 1));
                    (void)H;
                    ++checked;
                } catch (const DepthExhausted&) {
                }
            }
            CHECK(checked > 250);
        }
    }
}

TEST_CASE("generators permute prefix cylinders") {
    auto C = make_coupling("zn:4", "heis", 10);
    for (Side s : {Side::Left, Side::Right}) {
        const Tiling& T = C.tiling(s);
        for (int k = 0; k <= 1; ++k)
            for (const auto& g : T.group().generators()) {
                // prefixes absorbed by depth k map injectively into prefixes
                std::set<std::vector<uint64_t>> image;
                uint64_t absorbed = 0, total = T.tile_size(k);
                for (uint64_t f = 0; f < total; ++f) {
                    CouplingPoint x{T.unflatten(f, k), 0};
                    auto r = C.act(s, g, x);
                    if (r.depth > k) continue;
                    ++absorbed;
                    image.insert(std::vector<uint64_t>(r.point.prefix.begin(), r.point.prefix.begin() + k + 1));
                }
                CHECK(image.size() == absorbed);
                CHECK(total - absorbed == escape_count(T, g, k));
            }
    }
}

TEST_CASE("tail frequencies track exact tails") {
    auto C = make_coupling("zn:2", "zn:1", 24);
    for (const auto& g : C.tiling(Side::Left).group().generators()) {
        auto rows = mc_tail(C, Side::Left, g, 5, 20000, 9);
        for (auto& r : rows) {
            REQUIRE(r.exact);
            double e = boost::rational_cast<double>(*r.exact);
            CHECK(std::abs(r.freq - e) <= 4 * std::sqrt(e * (1 - e) / 20000) + 1e-12);
        }
    }
}

TEST_CASE("integrability of the Z^2 / Z coupling") {
    auto C = make_coupling("zn:2", "zn:1:grouped:2", 24);
    // odometer on the x bits: depth j with probability 2^{-(j+1)} moves the
    // Z coordinate by 4^j - (4^j - 1)/3
    double exact = 0;
    for (int j = 0; j <= 40; ++j) exact += std::ldexp(1.0, -(j + 1)) * std::pow((2 * std::pow(4.0, j) + 1) / 3, 0.4);
    auto rep = mc_integrability(C, Side::Left, ZnEl{{1, 0}}, Gauge::power(0.4), 200000, 3);
    CHECK(std::abs(rep.estimate - exact) < 4 * rep.stderr_);
    REQUIRE(rep.stratifiedBound);
    CHECK(rep.estimate < *rep.stratifiedBound);
    CHECK_FALSE(rep.diverging);
    double s = rep.beyondStrata;
    for (double v : rep.strata) s += v;
    CHECK(s == doctest::Approx(rep.estimate));

    auto ser = mc_integrability_serial(C, Side::Left, ZnEl{{1, 0}}, Gauge::power(0.4), 200000, 3);
    CHECK(ser.estimate == rep.estimate);

    auto ex = mc_integrability(C, Side::Left, ZnEl{{1, 0}}, Gauge::exp(2.0), 1000, 3);
    CHECK(ex.diverging);
}

TEST_CASE("identity coupling has exact unit cost") {
    auto C = make_coupling("heis", "heis", 12);
    auto rep = mc_integrability(C, Side::Left, HeisEl{1, 0, 0}, Gauge::identity(), 5000, 1);
    CHECK(rep.estimate == 1.0);
    CHECK(rep.stderr_ == 0.0);
}

TEST_CASE("return-time density") {
    auto C = make_coupling("zn:1", "zn:1", 24);
    CylinderSet all{{{}}};
    auto r = return_time_density(C, Side::Left, all, 3, 200, 1);
    CHECK(r.lhs == doctest::Approx(1.0));
    CHECK(r.rhs == doctest::Approx(1.0));
    CylinderSet half{{{0}}};
    auto h = return_time_density(C, Side::Left, half, 4, 2000, 1);
    CHECK(h.rhs == doctest::Approx(0.0));
    CHECK(h.lhs >= h.rhs - 3 * h.stderr_);
    CylinderSet threeq{{{0}, {1, 0}}};
    CHECK(return_time_density(C, Side::Left, threeq, 2, 10, 1).rhs == doctest::Approx(0.5));
    CHECK_THROWS_AS(cylinder_measure(C, Side::Left, CylinderSet{{{0}, {0, 1}}}), UsageError);
}

TEST_CASE("mismatched letters are rejected") {
    CHECK_THROWS_AS(MatchedCoupling(builtin("zn:2"), builtin("heis"), 5), UsageError);
    auto C = make_coupling("zn:2:grouped:1", "zn:1", 10);
    CHECK(C.tiling(Side::Right).letter_count(3) == 4);
}

TEST_CASE("gauge parsing") {
    CHECK(Gauge::parse("power:0.5")(4.0) == doctest::Approx(2.0));
    CHECK(Gauge::parse("exp:0.1").kind() == Gauge::Kind::Exp);
    CHECK_THROWS_AS(Gauge::parse("power:-1"), UsageError);
    auto lp = Gauge::logpower(1.0);
    for (double t = 0; t < 100; t += 0.5) CHECK(lp(t + 0.5) >= lp(t));
}
