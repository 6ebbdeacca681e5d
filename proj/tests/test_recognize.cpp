#include <doctest.h>

#include "bsu/measure.hpp"
#include "bsu/recognize.hpp"

using namespace bsu;

TEST_CASE("elementary symmetric functions") {
    PadicCtx C = PadicCtx::create(Int(3), 30, Int(221));
    PadicElt v = PadicElt::from_pair(C, Rat(2), Rat(5));
    // singleton
    auto e1 = elementary_symmetric({v});
    CHECK(agree(e1[0], v, 30));
    // pair {v, 1/v}: e_1 = v + 1/v, e_2 = 1
    auto e2 = elementary_symmetric({v, v.inv()});
    CHECK(agree(e2[0], v + v.inv(), 30));
    CHECK(agree(e2[1], PadicElt::from_int(C, Int(1)), 30));
    // e_n is the product
    PadicElt w = PadicElt::from_pair(C, Rat(7), Rat(1));
    PadicElt z = PadicElt::from_pair(C, Rat(1), Rat(4));
    auto e3 = elementary_symmetric({v, w, z});
    CHECK(agree(e3[2], v * w * z, 30));
}

TEST_CASE("coefficient recognition roundtrips") {
    QuadField F = make_field(Int(221));
    PadicCtx C = PadicCtx::create(Int(3), 30, Int(221));
    // embed (3 + omega)/p^2 and recognize
    PadicElt x = PadicElt::embed(C, F, QuadElt{Rat(3), Rat(1)}).shift(-2);
    RecognizedCoeff rc = recognize_coeff(x, F, 10);
    CHECK(rc == RecognizedCoeff{Int(3), Int(1), 2});
    // embed 1
    RecognizedCoeff one = recognize_coeff(PadicElt::from_int(C, Int(1)), F, 10);
    CHECK(one == RecognizedCoeff{Int(1), Int(0), 0});
    // negative coordinates survive the balanced lift
    PadicElt y = PadicElt::embed(C, F, QuadElt{Rat(-1234), Rat(77)});
    CHECK(recognize_coeff(y, F, 10) == RecognizedCoeff{Int(-1234), Int(77), 0});
    // denominator exponent beyond the bound
    CHECK_THROWS_AS(recognize_coeff(x, F, 1), no_pure_p_denominator_error);
}

TEST_CASE("recognition of the reference cubic coefficient (D=221)") {
    // -423812/3^13 + 71680 sqrt(221)/3^15 as (a + b omega)/3^15
    QuadField F = make_field(Int(221));
    PadicCtx C = PadicCtx::create(Int(3), 40, Int(221));
    Rat part1(Int("-423812"), pow_ui(Int(3), 13));
    Rat part2(Int("71680"), pow_ui(Int(3), 15));
    // value = part1 + part2 * sqrt(D); sqrt(D) = 2*omega - 1
    // in the (1, omega) basis: x = part1 - part2, y = 2*part2
    QuadElt val{part1 - part2, part2 + part2};
    PadicElt emb = PadicElt::embed(C, F, val);
    RecognizedCoeff rc = recognize_coeff(emb, F, 30);
    CHECK(rc.k == 15);
    CHECK(rc.a == Int("-3885988"));
    CHECK(rc.b == Int("143360"));
    // display converts back to the split-denominator form
    auto [dp1, dp2] = rc.display_parts(F, Int(3));
    CHECK(dp1 == part1);
    CHECK(dp2 == part2);
}

TEST_CASE("minimal polynomial of the D=221 unit matches the reference") {
    QuadField F = make_field(Int(221));
    NarrowClassGroup G = narrow_class_group(F, F.principal_ideal(QuadElt{Rat(15), Rat(0)}));
    PadicCtx C = PadicCtx::create(Int(3), 100, Int(221));
    IntegralOptions opt;
    opt.target_abs = 60;
    ConjugateSet conj = all_conjugates(F, G, Int(3), Int(5), C, {}, nullptr, opt);
    MinPolyResult mp = minimal_polynomial(conj.values, F, 60);
    REQUIRE(mp.degree == 4);
    CHECK(mp.palindromic);
    CHECK(mp.coeffs[0] == RecognizedCoeff{Int(1), Int(0), 0});
    // X^3 coefficient: -423812/3^13 + 71680 sqrt(D)/3^15
    auto [c3a, c3b] = mp.coeffs[3].display_parts(F, Int(3));
    CHECK(c3a == Rat(Int("-423812"), pow_ui(Int(3), 13)));
    CHECK(c3b == Rat(Int("71680"), pow_ui(Int(3), 15)));
    // X^2 coefficient: 76348630/3^18 - 5218304 sqrt(D)/3^16
    auto [c2a, c2b] = mp.coeffs[2].display_parts(F, Int(3));
    CHECK(c2a == Rat(Int("76348630"), pow_ui(Int(3), 18)));
    CHECK(c2b == -Rat(Int("5218304"), pow_ui(Int(3), 16)));
    // palindromy: X coefficient equals the X^3 coefficient
    CHECK(mp.coeffs[1] == mp.coeffs[3]);

    // the square-root branch swap permutes conjugates but fixes the result
    PadicCtx Cm = PadicCtx::create(Int(3), 100, Int(221), -1);
    ConjugateSet conj2 = all_conjugates(F, G, Int(3), Int(5), Cm, {}, nullptr, opt);
    MinPolyResult mp2 = minimal_polynomial(conj2.values, F, 60);
    for (size_t i = 0; i < mp.coeffs.size(); ++i) CHECK(mp.coeffs[i] == mp2.coeffs[i]);
}

TEST_CASE("recognition is stable under increasing precision") {
    QuadField F = make_field(Int(221));
    NarrowClassGroup G = narrow_class_group(F, F.principal_ideal(QuadElt{Rat(15), Rat(0)}));
    MinPolyResult results[2];
    int targets[2] = {45, 65};
    for (int i = 0; i < 2; ++i) {
        PadicCtx C = PadicCtx::create(Int(3), 110, Int(221));
        IntegralOptions opt;
        opt.target_abs = targets[i];
        ConjugateSet conj = all_conjugates(F, G, Int(3), Int(5), C, {}, nullptr, opt);
        results[i] = minimal_polynomial(conj.values, F, 60);
    }
    for (size_t i = 0; i < results[0].coeffs.size(); ++i)
        CHECK(results[0].coeffs[i] == results[1].coeffs[i]);
}
