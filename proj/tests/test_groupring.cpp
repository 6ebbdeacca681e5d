#include <doctest.h>

#include <set>

#include "bsu/groupring.hpp"

using namespace bsu;

namespace {
std::vector<Int> convolve(const NarrowClassGroup& G, const std::vector<Int>& x,
                          const std::vector<Int>& y) {
    std::vector<Int> out(static_cast<size_t>(G.order), Int(0));
    for (long i = 0; i < G.order; ++i)
        for (long j = 0; j < G.order; ++j)
            out[static_cast<size_t>(G.compose(i, j))] += x[static_cast<size_t>(i)] * y[static_cast<size_t>(j)];
    return out;
}
} // namespace

TEST_CASE("minus algebra: conjugation acts as -1, ring laws hold") {
    FinAbGroup g;
    g.factors = {2, 5};
    FinAbGroup::Elt c{1, 0};
    MinusAlgebra A(g, c, Int(5), 4);
    CHECK(A.rank() == 5);
    // image of c is -1
    auto ec = A.from_group_index(g.index_of(c));
    CHECK(A.equal(ec, A.neg(A.one())));
    // (c + 1) * anything = 0
    auto cp1 = A.add(ec, A.one());
    for (long i = 0; i < g.order(); ++i)
        CHECK(A.is_zero(A.mul(cp1, A.from_group_index(i))));
    // distributivity on a deterministic triple sample
    auto mk = [&](long seed) {
        MinusAlgebra::Elt e = A.zero();
        for (long i = 0; i < A.rank(); ++i) e[static_cast<size_t>(i)] = Int((seed * 37 + 11 * i) % 625);
        return e;
    };
    for (long s = 1; s <= 5; ++s) {
        auto x = mk(s), y = mk(s + 7), z = mk(s + 13);
        CHECK(A.equal(A.mul(x, A.add(y, z)), A.add(A.mul(x, y), A.mul(x, z))));
        CHECK(A.equal(A.mul(x, y), A.mul(y, x)));
    }
    // units: 1 is a unit, p is not
    CHECK(A.is_unit(A.one()));
    CHECK_FALSE(A.is_unit(A.scale(A.one(), Int(5))));
}

TEST_CASE("fitting determinants over the minus algebra") {
    FinAbGroup g;
    g.factors = {2, 3};
    MinusAlgebra A(g, FinAbGroup::Elt{1, 0}, Int(3), 5);
    auto one = A.one(), zero = A.zero();
    auto theta = A.add(A.scale(A.from_group_index(g.index_of({0, 1})), Int(2)), A.one());
    // identity matrix: unit ideal
    std::vector<std::vector<MinusAlgebra::Elt>> id = {{one, zero}, {zero, one}};
    CHECK(A.is_unit(A.det(id)));
    // zero matrix: zero ideal
    std::vector<std::vector<MinusAlgebra::Elt>> zz = {{zero, zero}, {zero, zero}};
    CHECK(A.is_zero(A.det(zz)));
    // diagonal(theta, 1, 1): ideal (theta)
    std::vector<std::vector<MinusAlgebra::Elt>> diag = {
        {theta, zero, zero}, {zero, one, zero}, {zero, zero, one}};
    CHECK(A.equal(A.det(diag), theta));
    // non-square rejected
    std::vector<std::vector<MinusAlgebra::Elt>> rect = {{one, zero, zero}, {zero, one, zero}};
    CHECK_THROWS_AS(A.det(rect), non_square_error);
    // block-diagonal multiplicativity on 2x2 blocks
    auto b = A.from_group_index(g.index_of({0, 2}));
    std::vector<std::vector<MinusAlgebra::Elt>> m4 = {
        {theta, b, zero, zero}, {b, one, zero, zero}, {zero, zero, one, b}, {zero, zero, theta, theta}};
    std::vector<std::vector<MinusAlgebra::Elt>> b1 = {{theta, b}, {b, one}};
    std::vector<std::vector<MinusAlgebra::Elt>> b2 = {{one, b}, {theta, theta}};
    CHECK(A.equal(A.det(m4), A.mul(A.det(b1), A.det(b2))));
}

TEST_CASE("structure-map kernels of the ratio ring") {
    // toy instances over g = Z/2 x Z/5, G = Z/2
    FinAbGroup g;
    g.factors = {2, 5};
    RLInstance inst;
    inst.g = g;
    inst.c = {1, 0};
    inst.G_order = 2;
    inst.proj.assign(static_cast<size_t>(g.order()), 0);
    for (long i = 0; i < g.order(); ++i) inst.proj[static_cast<size_t>(i)] = g.from_index(i)[0];
    inst.p = Int(5);
    inst.M = 4;
    inst.theta_H_G.assign(2, Int(0));
    inst.theta_L_g.assign(10, Int(0));

    SUBCASE("zero data: kernel equals the square of the augmentation ideal") {
        RLResult r = rl_quotient(inst);
        CHECK(r.kernel_contains_I2);
        CHECK(r.kernel_equals_I2);
    }
    SUBCASE("unit Theta_H with Theta_L in I: kernel is exactly I^2") {
        inst.theta_H_G[0] = Int(1);  // the identity: a unit of the minus algebra
        // Theta_L = gamma - 1 for a generator gamma of the kernel of proj
        long gamma = g.index_of({0, 1});
        inst.theta_L_g[static_cast<size_t>(gamma)] = Int(1);
        inst.theta_L_g[static_cast<size_t>(g.index_of(g.id()))] = Int(-1);
        RLResult r = rl_quotient(inst);
        CHECK(r.kernel_contains_I2);
        CHECK(r.kernel_equals_I2);
    }
    SUBCASE("randomized instances: kernel always contains I^2") {
        for (long seed = 1; seed <= 6; ++seed) {
            RLInstance ri = inst;
            for (long i = 0; i < 2; ++i) ri.theta_H_G[static_cast<size_t>(i)] = Int((seed * 31 + i * 17) % 25);
            for (long i = 0; i < 10; ++i)
                ri.theta_L_g[static_cast<size_t>(i)] = Int((seed * 13 + i * 7) % 25);
            RLResult r = rl_quotient(ri);
            CHECK(r.kernel_contains_I2);
        }
    }
}

TEST_CASE("stickelberger element of D=221") {
    QuadField F = make_field(Int(221));
    NarrowClassGroup G = narrow_class_group(F, F.principal_ideal(QuadElt{Rat(15), Rat(0)}));
    std::vector<Int> theta = stickelberger(F, G, Int(3), Int(5));
    std::multiset<long> coeffs;
    Int sum(0);
    for (const Int& c : theta) {
        coeffs.insert(c.to_long());
        sum += c;
    }
    CHECK(coeffs == std::multiset<long>{-15, -3, 3, 15});
    CHECK(sum == Int(0));
    // c . Theta = -Theta
    for (long j = 0; j < G.order; ++j) {
        long cj = G.compose(G.conj_class, j);
        CHECK(theta[static_cast<size_t>(cj)] == -theta[static_cast<size_t>(j)]);
    }
}

TEST_CASE("derivative element: refinement, smoothing factors, nonvanishing") {
    QuadField F = make_field(Int(221));
    NarrowClassGroup G = narrow_class_group(F, F.principal_ideal(QuadElt{Rat(15), Rat(0)}));
    ThetaDerivative t1 = theta_derivative(F, G, Int(3), Int(5), 1);
    ThetaDerivative t2 = theta_derivative(F, G, Int(3), Int(5), 2);
    ThetaDerivative t3 = theta_derivative(F, G, Int(3), Int(5), 3);
    // successive levels agree modulo p^m
    for (long i = 0; i < G.order; ++i) {
        CHECK(mod(t2.coeffs[static_cast<size_t>(i)] - t1.coeffs[static_cast<size_t>(i)], t1.modulus)
                  .is_zero());
        CHECK(mod(t3.coeffs[static_cast<size_t>(i)] - t2.coeffs[static_cast<size_t>(i)], t2.modulus)
                  .is_zero());
    }
    // smoothing in/out: derivatives for two smoothing primes agree after
    // cross-multiplying the Euler factors (1 - Nq [q]^{-1}); the class
    // indexing is representative-independent, so one group with reps coprime
    // to both primes serves both runs
    NarrowClassGroup Gb = narrow_class_group(F, F.principal_ideal(QuadElt{Rat(105), Rat(0)}));
    ThetaDerivative s5 = theta_derivative(F, Gb, Int(3), Int(5), 2);
    ThetaDerivative s7 = theta_derivative(F, Gb, Int(3), Int(7), 2);
    auto euler = [&](long ell) {
        Ideal q = smoothing_prime(F, Int(ell), false);
        long cq = class_of(Gb, q);
        std::vector<Int> f(static_cast<size_t>(Gb.order), Int(0));
        f[0] = Int(1);
        f[static_cast<size_t>(Gb.inverse(cq))] += Int(-ell);
        return f;
    };
    std::vector<Int> lhs = convolve(Gb, s5.coeffs, euler(7));
    std::vector<Int> rhs = convolve(Gb, s7.coeffs, euler(5));
    for (long i = 0; i < Gb.order; ++i)
        CHECK(mod(lhs[static_cast<size_t>(i)] - rhs[static_cast<size_t>(i)], s5.modulus).is_zero());
    // character components do not vanish at working precision (m = 3 window;
    // the components here have exact valuation 2)
    PadicCtx C = PadicCtx::create(Int(3), 12, Int(221));
    CharacterTable chars(G, C);
    long odd_seen = 0;
    for (long t = 0; t < chars.count(); ++t) {
        if (!chars.is_odd(t)) continue;
        ++odd_seen;
        PadicElt acc = PadicElt::zero(C, t3.m);
        for (long i = 0; i < G.order; ++i)
            acc = acc + chars.value(t, i) * PadicElt::from_int(C, t3.coeffs[static_cast<size_t>(i)]);
        CHECK(!acc.is_zero());
        CHECK(acc.val() == 2);
    }
    CHECK(odd_seen == 2);
}

TEST_CASE("rank-1 derivative identity residuals (D=221, m=3)") {
    QuadField F = make_field(Int(221));
    NarrowClassGroup G = narrow_class_group(F, F.principal_ideal(QuadElt{Rat(15), Rat(0)}));
    PadicCtx C = PadicCtx::create(Int(3), 70, Int(221));
    IntegralOptions opt;
    opt.target_abs = 40;
    ConjugateSet conj = all_conjugates(F, G, Int(3), Int(5), C, {}, nullptr, opt);
    int m = 3;
    GrossStarkReport rep = gross_stark_residual(F, G, Int(3), Int(5), m, conj, C);
    CHECK(rep.rows.size() == 2);  // two odd characters
    for (const auto& row : rep.rows) {
        CHECK(row.theta_nonzero);
        CHECK(row.residual_val >= m - 1);
    }
    // squaring every conjugate doubles the log side: residual with halved logs
    // is unchanged, so recompute with squared values and compare valuations
    ConjugateSet sq = conj;
    for (auto& v : sq.values) v = v * v;
    GrossStarkReport rep2 = gross_stark_residual(F, G, Int(3), Int(5), m, sq, C);
    // chi(Theta') + L(u^2) = chi(Theta') + 2 L(u) = residual + L(u) and
    // 2*residual - chi(Theta') ... compare via: residual2 = chi + 2L = 2*residual - chi
    // valuation statement: residual2 >= min(residual_val, theta_val)
    for (size_t i = 0; i < rep.rows.size(); ++i)
        CHECK(rep2.rows[i].residual_val >=
              std::min(rep.rows[i].residual_val, rep.rows[i].theta_val));
}

TEST_CASE("ray class data of conductor p for D=221 feeds the ratio ring") {
    QuadField F = make_field(Int(221));
    NarrowClassGroup G = narrow_class_group(F, F.principal_ideal(QuadElt{Rat(15), Rat(0)}));
    RayClassData ray = ray_class_data(F, G, Int(3), Int(5));
    CHECK(ray.g.order() == 8);
    // projection is onto and the conjugation maps to the class-group conjugation
    std::set<long> image;
    for (long v : ray.proj) image.insert(v);
    CHECK(image.size() == static_cast<size_t>(G.order));
    CHECK(ray.proj[static_cast<size_t>(ray.g.index_of(ray.c))] == G.conj_class);
    // the ray Stickelberger pushes forward to zero in the class-group minus algebra
    // (the Euler factor at the trivial class of p kills it)
    std::vector<Int> push(static_cast<size_t>(G.order), Int(0));
    for (long i = 0; i < ray.g.order(); ++i)
        push[static_cast<size_t>(ray.proj[static_cast<size_t>(i)])] += ray.theta_L[static_cast<size_t>(i)];
    for (long j = 0; j < G.order; ++j) {
        long cj = G.compose(G.conj_class, j);
        // minus projection: coefficient minus the conjugated coefficient must vanish
        CHECK(push[static_cast<size_t>(j)] - push[static_cast<size_t>(cj)] == Int(0));
    }
    // the analytic instance: kernel of the structure map equals I^2
    RLInstance inst;
    inst.g = ray.g;
    inst.c = ray.c;
    inst.proj = ray.proj;
    inst.G_order = G.order;
    inst.theta_H_G = stickelberger(F, G, Int(3), Int(5));
    inst.theta_L_g = ray.theta_L;
    inst.p = Int(3);
    inst.M = 6;
    RLResult r = rl_quotient(inst);
    CHECK(r.kernel_contains_I2);
    CHECK(r.kernel_equals_I2);
}
