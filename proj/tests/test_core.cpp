#include <doctest.h>

#include "bsu/bernoulli.hpp"
#include "bsu/int.hpp"

using namespace bsu;

TEST_CASE("integer arithmetic basics") {
    Int a(123456789L), b(-987654321L);
    CHECK(a + b == Int(-864197532L));
    CHECK((a * b).str() == "-121932631112635269");
    CHECK(gcd(Int(462), Int(1071)) == Int(21));
    Int u, v;
    Int g = gcdext(Int(240), Int(46), u, v);
    CHECK(g == Int(2));
    CHECK(u * Int(240) + v * Int(46) == g);
    CHECK(fdiv_q(Int(-7), Int(2)) == Int(-4));
    CHECK(fdiv_r(Int(-7), Int(2)) == Int(1));
    CHECK(pow_ui(Int(3), 20).str() == "3486784401");
    CHECK(Int("3486784401").is_perfect_square());
    CHECK(Int(221).valuation(Int(13)) == 1);
    CHECK(mod(invmod(Int(7), Int(243)) * Int(7), Int(243)) == Int(1));
    CHECK(kronecker(Int(221), Int(3)) == -1);
    CHECK(kronecker(Int(221), Int(5)) == 1);
}

TEST_CASE("rational arithmetic canonical") {
    Rat r(Int(6), Int(-4));
    CHECK(r.num() == Int(-3));
    CHECK(r.den() == Int(2));
    CHECK(r + Rat(1, 2) == Rat(-1));
    CHECK((Rat(22, 7) * Rat(7, 11)) == Rat(2));
    CHECK(Rat(5, 3).floor() == Int(1));
    CHECK(Rat(-5, 3).floor() == Int(-2));
    CHECK(Rat(9, 8).valuation(Int(2)) == -3);
    CHECK(Rat(16, 5).valuation(Int(2)) == 4);
    CHECK(Rat(7, 2).str() == "7/2");
}

TEST_CASE("bernoulli polynomial values") {
    CHECK(bernoulli_poly(1, Rat(0)) == Rat(-1, 2));
    CHECK(bernoulli_poly(2, Rat(0)) == Rat(1, 6));
    CHECK(bernoulli_poly(2, Rat(1, 2)) == Rat(-1, 12));
    CHECK(bernoulli_poly(0, Rat(7, 3)) == Rat(1));
    // multiplication theorem: sum_{i<m} B_k((x+i)/m) = m^{1-k} B_k(x)
    for (unsigned k = 0; k <= 6; ++k) {
        long m = 3;
        Rat x(5, 7);
        Rat lhs(0);
        for (long i = 0; i < m; ++i) lhs += bernoulli_poly(k, (x + Rat(i)) / Rat(m));
        Rat rhs = bernoulli_poly(k, x);  // times m^{1-k}
        for (unsigned j = 1; j < k; ++j) rhs = rhs / Rat(m);
        if (k == 0) rhs = rhs * Rat(m);
        CHECK(lhs == rhs);
    }
    // odd Bernoulli numbers vanish
    const auto& B = bernoulli_numbers(15);
    for (size_t i = 3; i <= 15; i += 2) CHECK(B[i].is_zero());
}
