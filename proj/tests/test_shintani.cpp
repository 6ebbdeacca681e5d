#include <doctest.h>

#include <set>

#include "bsu/cache.hpp"
#include "bsu/shintani.hpp"

using namespace bsu;

namespace {
ZetaQuery base_query(const QuadField& F, const Ideal& rep, long p, long ell) {
    ZetaQuery q;
    q.F = &F;
    q.class_rep = rep;
    q.p = Int(p);
    q.ell = Int(ell);
    return q;
}
} // namespace

TEST_CASE("shintani domain membership: each orbit meets the domain once") {
    QuadField F = make_field(Int(221));
    Cone D0 = shintani_domain_cone(F);
    // deterministic sample of totally positive elements (embeddings of a + b*omega
    // and its unit translates)
    long hits_total = 0;
    for (long a = 1; a <= 40; ++a)
        for (long b = -4; b <= 4; ++b) {
            QuadElt x{Rat(a), Rat(b)};
            if (!F.is_totally_positive(x)) continue;
            int hits = 0;
            for (long t = -20; t <= 20; ++t) {
                QuadElt y = F.mul(x, F.pow(F.eps_plus, t));
                if (cone_contains(F, D0, y)) ++hits;
            }
            CHECK(hits == 1);
            ++hits_total;
        }
    CHECK(hits_total > 60);
}

TEST_CASE("unimodular fan partitions the domain cone") {
    for (long D : {221L, 321L, 897L, 12L}) {
        QuadField F = make_field(Int(D));
        Cone D0 = shintani_domain_cone(F);
        auto fan = unimodular_fan(F, D0);
        CHECK(!fan.empty());
        // each subcone unimodular and positively oriented
        for (const Cone& C : fan) {
            Int det = C.v1.x.num() * C.v2.y.num() - C.v1.y.num() * C.v2.x.num();
            CHECK(det == Int(1));
            CHECK(F.is_totally_positive(C.v1));
            CHECK(F.is_totally_positive(C.v2));
        }
        // chaining: consecutive cones share the boundary ray
        for (size_t i = 0; i + 1 < fan.size(); ++i) CHECK(fan[i].v2 == fan[i + 1].v1);
        // sample points land in exactly one subcone and membership matches D0
        for (long a = 1; a <= 8; ++a)
            for (long b = 1; b <= 8; ++b) {
                QuadElt x{Rat(a), Rat(b)};
                if (!F.is_totally_positive(x)) continue;
                int inside = 0;
                for (const Cone& C : fan)
                    if (cone_contains(F, C, x)) ++inside;
                CHECK(inside == (cone_contains(F, D0, x) ? 1 : 0));
            }
    }
}

TEST_CASE("unsmoothed values reproduce classical zeta anchors") {
    // Q(sqrt5): class number 1, so the single unsmoothed class value is the
    // Dedekind zeta: 0 at s=0 and s=-2, 1/30 at s=-1 (= zeta(-1) L(-1, chi_5)).
    QuadField F = make_field(Int(5));
    Ideal O = F.ring_ideal();
    ZetaQuery q = base_query(F, O, 3, 11);
    q.k = 0;
    CHECK(partial_zeta_unsmoothed(q) == Rat(0));
    q.k = 1;
    CHECK(partial_zeta_unsmoothed(q) == Rat(1, 30));
    q.k = 2;
    CHECK(partial_zeta_unsmoothed(q) == Rat(0));
    // the same values over the single cone instead of the fan
    q.use_fan = false;
    q.k = 1;
    CHECK(partial_zeta_unsmoothed(q) == Rat(1, 30));

    // Q(sqrt3) (D=12): partial zeta values at 0 are {1/12, -1/12}
    QuadField F12 = make_field(Int(12));
    Ideal avoid12 = F12.principal_ideal(QuadElt{Rat(35), Rat(0)});
    NarrowClassGroup G12 = narrow_class_group(F12, avoid12);
    std::multiset<std::string> vals;
    for (long i = 0; i < G12.order; ++i) {
        ZetaQuery qi = base_query(F12, G12.reps[static_cast<size_t>(i)], 5, 7);
        Rat v = partial_zeta_unsmoothed(qi);
        vals.insert(v.str());
    }
    CHECK(vals == std::multiset<std::string>{"-1/12", "1/12"});
}

TEST_CASE("smoothed values at 0: integrality, zero-sum, antisymmetry, table") {
    QuadField F = make_field(Int(221));
    Ideal avoid = F.principal_ideal(QuadElt{Rat(15), Rat(0)});
    NarrowClassGroup G = narrow_class_group(F, avoid);
    std::vector<Rat> vals;
    for (long i = 0; i < G.order; ++i) {
        ZetaQuery q = base_query(F, G.reps[static_cast<size_t>(i)], 3, 5);
        vals.push_back(partial_zeta(q));
    }
    Rat sum(0);
    std::multiset<std::string> tbl;
    for (auto& v : vals) {
        CHECK(v.is_integer());
        sum += v;
        tbl.insert(v.str());
    }
    CHECK(sum == Rat(0));
    CHECK(tbl == std::multiset<std::string>{"-15", "-3", "15", "3"});
    // antisymmetry under the conjugation class
    for (long i = 0; i < G.order; ++i) {
        long ci = G.compose(G.conj_class, i);
        CHECK(vals[static_cast<size_t>(ci)] == -vals[static_cast<size_t>(i)]);
    }
    // without the auxiliary prime (2), the bare values are one third
    for (long i = 0; i < G.order; ++i) {
        ZetaQuery q = base_query(F, G.reps[static_cast<size_t>(i)], 3, 5);
        q.aux_two = 0;
        CHECK(partial_zeta(q) * Rat(-3) == vals[static_cast<size_t>(i)]);
    }
}

TEST_CASE("reference tables for D=321 and D=897") {
    {
        QuadField F = make_field(Int(321));
        Ideal avoid = F.principal_ideal(QuadElt{Rat(35), Rat(0)});
        NarrowClassGroup G = narrow_class_group(F, avoid);
        std::multiset<std::string> tbl;
        for (long i = 0; i < G.order; ++i) {
            ZetaQuery q = base_query(F, G.reps[static_cast<size_t>(i)], 7, 5);
            Rat v = partial_zeta(q);
            CHECK(v.is_integer());
            tbl.insert(v.str());
        }
        CHECK(tbl == std::multiset<std::string>{"-7", "-3", "-1", "1", "3", "7"});
    }
    {
        QuadField F = make_field(Int(897));
        Ideal avoid = F.principal_ideal(QuadElt{Rat(35), Rat(0)});
        NarrowClassGroup G = narrow_class_group(F, avoid);
        std::multiset<std::string> tbl;
        for (long i = 0; i < G.order; ++i) {
            ZetaQuery q = base_query(F, G.reps[static_cast<size_t>(i)], 5, 7);
            Rat v = partial_zeta(q);
            CHECK(v.is_integer());
            tbl.insert(v.str());
        }
        CHECK(tbl ==
              std::multiset<std::string>{"-21", "-11", "-9", "-7", "21", "11", "9", "7"});
    }
}

TEST_CASE("cone subdivision leaves values unchanged") {
    QuadField F = make_field(Int(221));
    Ideal avoid = F.principal_ideal(QuadElt{Rat(15), Rat(0)});
    NarrowClassGroup G = narrow_class_group(F, avoid);
    QuadElt ray = F.add(F.one(), F.eps_plus);
    for (long i = 0; i < G.order; ++i) {
        for (int level = 0; level <= 2; ++level) {
            ZetaQuery q = base_query(F, G.reps[static_cast<size_t>(i)], 3, 5);
            if (level > 0) q.congruence = Congruence{Int(1), Int(level), level};
            Rat v1 = partial_zeta(q);
            q.use_fan = false;
            Rat v2 = partial_zeta(q);
            q.subdivide_ray = ray;
            Rat v3 = partial_zeta(q);
            q.use_fan = true;
            Rat v4 = partial_zeta(q);
            CHECK(v1 == v2);
            CHECK(v1 == v3);
            CHECK(v1 == v4);
        }
    }
}

TEST_CASE("congruence additivity over lifts") {
    QuadField F = make_field(Int(221));
    Ideal avoid = F.principal_ideal(QuadElt{Rat(15), Rat(0)});
    NarrowClassGroup G = narrow_class_group(F, avoid);
    Int p(3);
    for (unsigned k = 0; k <= 2; ++k) {
        // sum over residues mod p of level-1 values = level-0 value
        ZetaQuery q0 = base_query(F, G.reps[1], 3, 5);
        q0.k = k;
        Rat total = partial_zeta(q0);
        Rat sum(0);
        for (long rx = 0; rx < 3; ++rx)
            for (long ry = 0; ry < 3; ++ry) {
                ZetaQuery q = q0;
                q.congruence = Congruence{Int(rx), Int(ry), 1};
                sum += partial_zeta(q);
            }
        CHECK(sum == total);
        // lifts of a fixed level-1 residue to level 2
        ZetaQuery q1 = q0;
        q1.congruence = Congruence{Int(2), Int(1), 1};
        Rat v1 = partial_zeta(q1);
        Rat s2(0);
        for (long ax = 0; ax < 3; ++ax)
            for (long ay = 0; ay < 3; ++ay) {
                ZetaQuery q = q0;
                q.congruence = Congruence{Int(2 + 3 * ax), Int(1 + 3 * ay), 2};
                s2 += partial_zeta(q);
            }
        CHECK(s2 == v1);
    }
}

TEST_CASE("zeta cache short-circuits cone summation") {
    QuadField F = make_field(Int(221));
    Ideal avoid = F.principal_ideal(QuadElt{Rat(15), Rat(0)});
    NarrowClassGroup G = narrow_class_group(F, avoid);
    ZetaCache cache;  // in-memory
    ZetaQuery q = base_query(F, G.reps[2], 3, 5);
    Rat v1 = partial_zeta(q, &cache);
    unsigned long evals = zeta_evaluations().load();
    Rat v2 = partial_zeta(q, &cache);
    CHECK(v1 == v2);
    CHECK(zeta_evaluations().load() == evals);  // second call served from cache
}
