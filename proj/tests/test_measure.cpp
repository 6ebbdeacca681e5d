#include <doctest.h>

#include <set>

#include "bsu/measure.hpp"

using namespace bsu;

namespace {
struct Setup {
    QuadField F;
    NarrowClassGroup G;
    Setup(long D, long avoid) : F(make_field(Int(D))) {
        G = narrow_class_group(F, F.principal_ideal(QuadElt{Rat(avoid), Rat(0)}));
    }
};
} // namespace

TEST_CASE("measure values: integrality, additivity, unit-mass zero") {
    Setup s(221, 15);
    for (long cls = 0; cls < s.G.order; ++cls) {
        MeasureHandle h = make_measure(s.F, s.G, cls, Int(3), Int(5));
        Int total = zeta0(h);
        // sigma-additivity: sum of level-1 values is the total mass
        Int sum1(0), units(0);
        for (long rx = 0; rx < 3; ++rx)
            for (long ry = 0; ry < 3; ++ry) {
                Int v = measure_of(h, Int(rx), Int(ry), 1);
                sum1 += v;
                if (!(rx == 0 && ry == 0)) units += v;
            }
        CHECK(sum1 == total);
        // the unit residues carry zero total mass (trivial class of p)
        CHECK(units == Int(0));
        // level-2 refinement of a level-1 cell, direct vs children
        Int v1 = measure_of(h, Int(1), Int(2), 1);
        Int v2(0);
        for (long ax = 0; ax < 3; ++ax)
            for (long ay = 0; ay < 3; ++ay)
                v2 += measure_of(h, Int(1 + 3 * ax), Int(2 + 3 * ay), 2);
        CHECK(v1 == v2);
    }
}

TEST_CASE("bulk measure values agree with individual queries") {
    Setup s(221, 15);
    MeasureHandle h = make_measure(s.F, s.G, 1, Int(3), Int(5));
    for (int level : {1, 2, 3}) {
        long seen = 0;
        measure_values_bulk(h, level, [&](const Int& rx, const Int& ry, const Rat& nu) {
            CHECK(nu.is_integer());
            CHECK(nu.num() == measure_of(h, rx, ry, level));
            ++seen;
        });
        long pl = 1;
        for (int i = 0; i < level; ++i) pl *= 3;
        CHECK(seen == pl * pl);
    }
}

TEST_CASE("exact moments: consistency and expected valuations") {
    Setup s(221, 15);
    MeasureHandle h = make_measure(s.F, s.G, 0, Int(3), Int(5));
    // moment with k = 0 equals the measure
    for (long rx = 0; rx < 3; ++rx) {
        QuadElt m0 = moment_exact(h, Int(rx), Int(1), 1, 0);
        CHECK(m0.y == Rat(0));
        CHECK(m0.x == Rat(measure_of(h, Int(rx), Int(1), 1)));
    }
    // binomial identity: int x^2 = sum_j C(2,j) r^{2-j} int (x-r)^j
    Int rx(2), ry(1);
    QuadElt r{Rat(rx), Rat(ry)};
    QuadElt m2 = moment_exact(h, rx, ry, 1, 2);
    QuadElt c0 = centered_moment_exact(h, rx, ry, 1, 0);
    QuadElt c1 = centered_moment_exact(h, rx, ry, 1, 1);
    QuadElt c2 = centered_moment_exact(h, rx, ry, 1, 2);
    QuadElt rhs = s.F.add(s.F.mul(s.F.mul(r, r), c0),
                          s.F.add(s.F.mul_rat(s.F.mul(r, c1), Rat(2)), c2));
    CHECK(m2 == rhs);
    // centered moments gain p-valuation with the level: v_p >= level * k
    for (unsigned k = 1; k <= 4; ++k) {
        for (int level = 1; level <= 2; ++level) {
            QuadElt ck = centered_moment_exact(h, Int(1), Int(1), level, k);
            if (ck.is_zero()) continue;
            long v = std::min(ck.x.is_zero() ? 1000 : ck.x.valuation(Int(3)),
                              ck.y.is_zero() ? 1000 : ck.y.valuation(Int(3)));
            CHECK(v >= static_cast<long>(k) * level);
        }
    }
}

TEST_CASE("p-adic moment engine matches the exact moments") {
    Setup s(221, 15);
    MeasureHandle h = make_measure(s.F, s.G, 2, Int(3), Int(5));
    PadicCtx C = PadicCtx::create(Int(3), 40, Int(221));
    MomentTable tab = moment_table(h, C, 6, 1);
    for (size_t idx = 0; idx < tab.residues.size(); ++idx) {
        auto [rx, ry] = tab.residues[idx];
        for (unsigned j = 0; j <= 6; ++j) {
            QuadElt exact = moment_exact(h, rx, ry, 1, j);
            PadicElt expect = PadicElt::embed(C, s.F, exact);
            CHECK(agree(tab.raw[idx][j], expect, 20));
        }
    }
}

TEST_CASE("riemann oracle refines and matches the integral (D=221)") {
    Setup s(221, 15);
    PadicCtx C = PadicCtx::create(Int(3), 40, Int(221));
    for (long cls = 0; cls < s.G.order; ++cls) {
        MeasureHandle h = make_measure(s.F, s.G, cls, Int(3), Int(5));
        PadicElt o1 = riemann_oracle(h, C, 1);
        PadicElt o2 = riemann_oracle(h, C, 2);
        PadicElt o3 = riemann_oracle(h, C, 3);
        CHECK(agree(o1, o2, 1));
        CHECK(agree(o2, o3, 2));
        IntegralOptions opt;
        opt.target_abs = 25;
        PadicElt u = mult_integral(h, C, opt);
        CHECK(u.val() == 0);
        CHECK(agree(u, o3, 2));
    }
}

TEST_CASE("conjugates: orders, total product, and conjugate pairing (D=221)") {
    Setup s(221, 15);
    PadicCtx C = PadicCtx::create(Int(3), 70, Int(221));
    IntegralOptions opt;
    opt.target_abs = 40;
    ConjugateSet conj = all_conjugates(s.F, s.G, Int(3), Int(5), C, {}, nullptr, opt);
    std::multiset<long> ords;
    PadicElt prod = PadicElt::from_int(C, Int(1));
    for (long i = 0; i < s.G.order; ++i) {
        ords.insert(conj.ords[static_cast<size_t>(i)].to_long());
        CHECK(conj.values[static_cast<size_t>(i)].val() == conj.ords[static_cast<size_t>(i)].to_long());
        prod = prod * conj.values[static_cast<size_t>(i)];
    }
    CHECK(ords == std::multiset<long>{-15, -3, 3, 15});
    // product of all conjugates is exactly 1 (constant term of the minimal polynomial)
    CHECK(agree(prod, PadicElt::from_int(C, Int(1)), 30));
    // conjugate pairing: sigma(u) * (c sigma)(u) = 1
    for (long i = 0; i < s.G.order; ++i) {
        long ci = s.G.compose(s.G.conj_class, i);
        PadicElt pair = conj.values[static_cast<size_t>(i)] * conj.values[static_cast<size_t>(ci)];
        CHECK(agree(pair, PadicElt::from_int(C, Int(1)), 30));
    }
}
