#include <cmath>

#include "doctest.h"
#include "oelab/bsll.hpp"
#include "oelab/errors.hpp"

using namespace oelab;

namespace {
BiInfinitePoint with_digits(int k, uint64_t seed, std::initializer_list<std::pair<int64_t, int>> d) {
    BiInfinitePoint x(k, seed);
    for (auto [i, v] : d) x.set(i, v);
    return x;
}
}  // namespace

TEST_CASE("lamplighter action") {
    Group LL = Group::lamplighter(2);
    auto x = with_digits(2, 1, {{0, 0}});
    auto y = ll_act(LL, LampEl{{{0, 1}}, 0}, x);
    CHECK(y.at(0) == 1);
    for (int i = -10; i <= 10; ++i)
        if (i) CHECK(y.at(i) == x.at(i));
    CHECK(ll_act(LL, LampEl{{{0, 1}}, 0}, y) == x);
    auto s = ll_act(LL, LampEl{{}, 1}, x);
    for (int i = -10; i <= 10; ++i) CHECK(s.at(i) == x.at(i - 1));
}

TEST_CASE("odometer carries") {
    Group BS = Group::bs(2);
    auto x = with_digits(2, 3, {{0, 1}, {1, 1}, {2, 0}});
    auto y = bs_act(BS, BsEl{1, 0, 0}, x);
    CHECK(y.at(0) == 0);
    CHECK(y.at(1) == 0);
    CHECK(y.at(2) == 1);
    CHECK(y.at(3) == x.at(3));
    auto z = bs_act(BS, BsEl{1, 0, 0}, with_digits(2, 3, {{0, 0}}));
    CHECK(z.at(0) == 1);
    CHECK(z.at(1) == with_digits(2, 3, {{0, 0}}).at(1));
    // the Z generators act the same way
    Group LL = Group::lamplighter(2);
    CHECK(bs_act(BS, BsEl{0, 0, -1}, x) == ll_act(LL, LampEl{{}, 1}, x));
}

TEST_CASE("both actions are actions") {
    for (int k : {2, 3}) {
        Group LL = Group::lamplighter(k), BS = Group::bs(k);
        Stream rs(99, k);
        for (int t = 0; t < 2000; ++t) {
            BiInfinitePoint x(k, rs.next());
            auto g = LL.random_element(rs, 6), h = LL.random_element(rs, 6);
            CHECK(ll_act(LL, g, ll_act(LL, h, x)) == ll_act(LL, LL.multiply(g, h), x));
            auto b = BS.random_element(rs, 6), c = BS.random_element(rs, 6);
            CHECK(bs_act(BS, b, bs_act(BS, c, x)) == bs_act(BS, BS.multiply(b, c), x));
            CHECK(bs_act(BS, BS.inverse(b), bs_act(BS, b, x)) == x);
        }
    }
}

TEST_CASE("carrying elements reproduce the orbit") {
    for (int k : {2, 3}) {
        Group LL = Group::lamplighter(k), BS = Group::bs(k);
        Stream rs(5, k);
        for (int t = 0; t < 2000; ++t) {
            BiInfinitePoint x(k, rs.next());
            auto b = BS.random_element(rs, 8);
            auto y = bs_act(BS, b, x);
            CHECK(ll_act(LL, carrying_element(Metric::LL, LL, BS, x, y), x) == y);
            auto g = LL.random_element(rs, 8);
            auto w = ll_act(LL, g, x);
            CHECK(bs_act(BS, carrying_element(Metric::BS, LL, BS, x, w), x) == w);
        }
    }
}

TEST_CASE("move distances") {
    Group LL = Group::lamplighter(2), BS = Group::bs(2);
    Stream rs(8, 0);
    for (int t = 0; t < 100; ++t) {
        BiInfinitePoint x(2, rs.next());
        CHECK(move_distance(Metric::LL, LL, BS, BsEl{0, 0, 1}, x) == 1);
        CHECK(move_distance(Metric::BS, LL, BS, LampEl{{{0, 1}}, 0}, x) <= 1);
    }
    auto x = with_digits(2, 3, {{0, 1}, {1, 1}, {2, 0}});
    CHECK(move_distance(Metric::LL, LL, BS, BsEl{1, 0, 0}, x) == 7);
    for (int k : {2, 3, 4}) {
        auto c = linf_constants(k, 17);
        CHECK(c[0] == 1);
        CHECK(c[1] == 1);
        for (std::size_t i = 2; i < c.size(); ++i) CHECK(c[i] <= k - 1);
    }
}

TEST_CASE("carry length is geometric") {
    for (int k : {2, 3}) {
        Group BS = Group::bs(k);
        const int N = 200000;
        std::vector<int> atLeast(6, 0);
        for (int i = 0; i < N; ++i) {
            BiInfinitePoint x(k, hash_key(77, i));
            auto y = bs_act(BS, BsEl{1, 0, 0}, x);
            int len = 0;
            while (y.at(len) != x.at(len) && y.at(len) == 0) ++len;  // positions turned from k-1 to 0
            for (int L = 0; L < 6; ++L)
                if (len >= L) ++atLeast[L];
        }
        for (int L = 0; L < 6; ++L) {
            double p = std::pow(k, -L);
            CHECK(std::abs(atLeast[L] / double(N) - p) <= 4 * std::sqrt(p * (1 - p) / N) + 1e-12);
        }
    }
}

TEST_CASE("exponential tail bound") {
    CHECK(tail_bound_check(2, BsEl{0, 0, 1}, 2, 1000, 1).freq == 0.0);
    auto r = tail_bound_check(2, BsEl{1, 0, 0}, 3, 20000, 1);
    CHECK(r.bound == doctest::Approx(0.25));
    CHECK(r.pass);
    auto rs = tail_bound_checks(3, bs_normalize(1, 0, 1, 3), {1, 3, 5}, 20000, 2);
    for (auto& t : rs) CHECK(t.pass);
}

TEST_CASE("runaway borrows are reported") {
    BiInfinitePoint x(2, 1);
    CHECK_THROWS_AS(add_at(x, -(i128(1) << 100), 0), WindowExhausted);
    BiInfinitePoint y(2, 1);
    add_at(y, i128(1) << 40, 0);
    CHECK(y.window_hi() >= 40);
}
