#include <doctest.h>

#include "lo/error.hpp"
#include "lo/linalg.hpp"
#include "lo/rational.hpp"

using namespace lo;

TEST_CASE("parse_rational accepts fractions, integers and decimals exactly") {
    CHECK(parse_rational("3/6") == Rational(1, 2));
    CHECK(parse_rational("-7") == Rational(-7));
    CHECK(parse_rational("2.4") == Rational(12, 5));
    CHECK(parse_rational("-0.05") == Rational(-1, 20));
    CHECK(parse_rational(".5") == Rational(1, 2));
    CHECK(parse_rational(" 1/3 ") == Rational(1, 3));
    CHECK_THROWS_AS(parse_rational("1/0"), InvalidParameter);
    CHECK_THROWS_AS(parse_rational("abc"), InvalidParameter);
    CHECK_THROWS_AS(parse_rational(""), InvalidParameter);
    CHECK_THROWS_AS(parse_rational("1.2.3"), InvalidParameter);
}

TEST_CASE("to_string always writes p/q") {
    CHECK(to_string(Rational(3)) == "3/1");
    CHECK(to_string(make_rational(-2, 4)) == "-1/2");
    CHECK(parse_rational(to_string(Rational(-22, 7))) == Rational(-22, 7));
}

TEST_CASE("rounding helpers") {
    CHECK(floor_of(Rational(-1, 2)) == -1);
    CHECK(floor_of(Rational(7, 2)) == 3);
    CHECK(round_half_down(Rational(12, 5)) == 2);
    CHECK(round_half_down(Rational(5, 2)) == 2);
    CHECK(round_half_down(Rational(-5, 2)) == -3);
    CHECK(pow(Rational(2, 3), 3) == Rational(8, 27));
}

TEST_CASE("rank and nullspace over Q") {
    QMatrix m{{1, 2}, {2, 4}};
    CHECK(rank(m, 2) == 1);
    auto ns = integer_nullspace(m, 2);
    REQUIRE(ns.size() == 1);
    CHECK(ns[0] == ZVec{2, -1});
    CHECK(rank({}, 3) == 0);
    CHECK(integer_nullspace({}, 2).size() == 2);
}

TEST_CASE("integer determinant") {
    CHECK(determinant({}) == 1);
    CHECK(determinant({{3}}) == 3);
    CHECK(determinant({{0, 1}, {1, 0}}) == -1);
    CHECK(determinant({{2, 0, 1}, {1, 3, 2}, {1, 1, 1}}) == 0);
    CHECK(determinant({{2, 0, 1}, {1, 3, 2}, {1, 1, 2}}) == 6);
}

TEST_CASE("unimodular completion sends a primitive vector to e_1") {
    for (const ZVec& a : {ZVec{3, -2}, ZVec{0, 1}, ZVec{6, 10, 15}, ZVec{-1}, ZVec{4, 0, 7}}) {
        auto [w, w_inv] = unimodular_to_unit(a);
        const std::size_t n = a.size();
        for (std::size_t c = 0; c < n; ++c) {
            Integer s = 0;
            for (std::size_t r = 0; r < n; ++r) s += a[r] * w[r][c];
            CHECK(s == (c == 0 ? 1 : 0));
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                Integer s = 0;
                for (std::size_t k = 0; k < n; ++k) s += w[i][k] * w_inv[k][j];
                CHECK(s == (i == j ? 1 : 0));
            }
    }
    CHECK_THROWS_AS(unimodular_to_unit(ZVec{2, 4}), InvalidParameter);
}
