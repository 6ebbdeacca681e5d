#include "bsu/quadfield.hpp"

#include <ostream>

namespace bsu {

std::ostream& operator<<(std::ostream& os, const Int& v) { return os << v.str(); }
std::ostream& operator<<(std::ostream& os, const Rat& v) { return os << v.str(); }

QuadElt QuadField::pow(QuadElt u, long e) const {
    if (e < 0) {
        u = inv(u);
        e = -e;
    }
    QuadElt r = one();
    while (e > 0) {
        if (e & 1) r = mul(r, u);
        u = mul(u, u);
        e >>= 1;
    }
    return r;
}

int QuadField::sign_embed1(const QuadElt& u) const {
    // embed1(u) = x + y*(t + sqrt(D))/2; sign of (2x + ty) + y*sqrt(D).
    Rat a = u.x + u.x + Rat(t) * u.y;
    const Rat& b = u.y;
    int sa = a.sign(), sb = b.sign();
    if (sb == 0) return sa;
    if (sa == 0) return sb;
    if (sa == sb) return sa;
    // Opposite signs: compare a^2 with b^2 D.
    Rat d = a * a - b * b * Rat(D);
    return d.sign() * sa;
}

bool QuadField::is_omega_stable(const Int& a, const Int& b, const Int& c) const {
    // omega * a = -(?)  a*omega lies in the span iff c | a (always true in HNF).
    // omega * (b + c*omega) = -c n + (b + c t) omega; need c | (b + ct) [true] and
    // a c | N(b + c omega) = b^2 + t b c + n c^2.
    if (!divisible(a, c) || !divisible(b, c)) return false;
    Int nb = b * b + Int(t) * b * c + n * c * c;
    return divisible(nb, a * c);
}

Ideal QuadField::make_ideal(Int a, Int b, Int c) const {
    if (a.sign() <= 0 || c.sign() <= 0)
        throw domain_error("make_ideal: nonpositive HNF diagonal");
    b = fdiv_r(b, a);
    if (!is_omega_stable(a, b, c))
        throw domain_error("make_ideal: span is not an O_F-module");
    return {a, b, c};
}

Ideal QuadField::principal_ideal(const QuadElt& g) const {
    if (!g.x.is_integer() || !g.y.is_integer())
        throw domain_error("principal_ideal: generator not integral");
    if (g.is_zero()) throw domain_error("principal_ideal: zero generator");
    Int gx = g.x.num(), gy = g.y.num();
    // Span of g and g*omega over Z.
    QuadElt gw = mul(g, omega());
    // Columns (x-coord; y-coord): HNF of 2x2 integer matrix.
    Int a1 = gx, b1 = gy;
    Int a2 = gw.x.num(), b2 = gw.y.num();
    // Reduce second coordinates by gcd.
    Int u, v;
    Int g2 = gcdext(b1, b2, u, v);
    if (g2.is_zero()) {
        // both y-coords zero: g rational, ideal = (|gx|)
        Int q = gx.abs();
        return {q, Int(0), q};
    }
    Int w1 = u * a1 + v * a2;          // x-coord of vector with y-coord g2
    // The other generator: eliminate y: (b2/g2)*row1 - (b1/g2)*row2 has y-coord 0.
    Int zx = divexact(b2, g2) * a1 - divexact(b1, g2) * a2;
    Int a = zx.abs();
    if (a.is_zero()) throw domain_error("principal_ideal: degenerate span");
    Int b = fdiv_r(w1, a);
    return {a, b, g2.abs()};
}

Ideal QuadField::mul_ideal(const Ideal& I, const Ideal& J) const {
    // Four Z-generators of the product, HNF via column reduction on y then x.
    struct V { Int x, y; };
    QuadElt g1 = {Rat(I.b), Rat(I.c)};
    QuadElt g2 = {Rat(J.b), Rat(J.c)};
    QuadElt g12 = mul(g1, g2);
    V gens[4] = {
        {I.a * J.a, Int(0)},
        {I.a * J.b, I.a * J.c},
        {J.a * I.b, J.a * I.c},
        {g12.x.num(), g12.y.num()},
    };
    // gcd of y-coords with Bezout tracking.
    Int c = gens[0].y, cx = gens[0].x;
    for (int i = 1; i < 4; ++i) {
        if (gens[i].y.is_zero()) continue;
        if (c.is_zero()) {
            c = gens[i].y;
            cx = gens[i].x;
            continue;
        }
        Int u, v;
        Int g = gcdext(c, gens[i].y, u, v);
        cx = u * cx + v * gens[i].x;
        c = g;
    }
    if (c.sign() < 0) { c = -c; cx = -cx; }
    if (c.is_zero()) throw domain_error("mul_ideal: degenerate product");
    // x-coords of y-eliminated combinations.
    Int a;
    for (int i = 0; i < 4; ++i) {
        Int r = gens[i].x - divexact(gens[i].y, c) * cx;
        a = gcd(a, r);
    }
    if (a.is_zero()) throw domain_error("mul_ideal: degenerate product");
    Int b = fdiv_r(cx, a);
    Ideal out{a, b, c};
    if (!is_omega_stable(out.a, out.b, out.c))
        throw domain_error("mul_ideal: product not omega-stable");
    return out;
}

std::vector<Ideal> QuadField::primes_above(const Int& q) const {
    std::vector<Ideal> out;
    if (!q.is_probab_prime() || q.sign() <= 0)
        throw domain_error("primes_above: q must be a positive prime");
    // Roots of x^2 - t x + n mod q.
    std::vector<Int> roots;
    for (Int r(0); r < q; r += 1) {
        if (mod(r * r - Int(t) * r + n, q).is_zero()) roots.push_back(r);
    }
    for (const Int& r : roots) {
        // (q, omega - r): Z-span {q, -r + omega}.
        out.push_back(make_ideal(q, fdiv_r(-r, q), Int(1)));
    }
    if (out.empty()) {
        // inert: (q) = qO
        out.push_back(Ideal{q, Int(0), q});
    }
    return out;
}

std::pair<QuadElt, QuadElt> QuadField::inverse_ideal_basis(const Ideal& I) const {
    // I^{-1} = conj(I) / N(I).
    // conj(I): span {a, b + c*(t - omega)} = {a, (b + ct) - c*omega}; renormalize
    // to {a, b' + c*omega} with b' = -(b + ct) mod a (negating the generator).
    Int bc = fdiv_r(-(I.b + Int(t) * I.c), I.a);
    Rat inv_norm = Rat(Int(1), I.norm());
    QuadElt e1{Rat(I.a) * inv_norm, Rat(0)};
    QuadElt e2{Rat(bc) * inv_norm, Rat(I.c) * inv_norm};
    return {e1, e2};
}

std::pair<QuadElt, QuadElt> QuadField::mul_ideal_lattice(const Ideal& I, const QuadElt& f1,
                                                         const QuadElt& f2) const {
    QuadElt Ib{Rat(I.b), Rat(I.c)};
    QuadElt g1 = mul_rat(f1, Rat(I.a));
    QuadElt g2 = mul_rat(f2, Rat(I.a));
    QuadElt g3 = mul(f1, Ib), g4 = mul(f2, Ib);
    Int dcom(1);
    for (const QuadElt* g : {&g1, &g2, &g3, &g4})
        dcom = lcm(dcom, lcm(g->x.den(), g->y.den()));
    auto scaled = [&](const QuadElt& g) {
        return std::pair<Int, Int>{(g.x * Rat(dcom)).num(), (g.y * Rat(dcom)).num()};
    };
    std::pair<Int, Int> vs[4] = {scaled(g1), scaled(g2), scaled(g3), scaled(g4)};
    Int c(0), cx(0);
    for (auto& [vx, vy] : vs) {
        if (vy.is_zero()) continue;
        if (c.is_zero()) {
            c = vy;
            cx = vx;
            continue;
        }
        Int u, v;
        Int g = gcdext(c, vy, u, v);
        cx = u * cx + v * vx;
        c = g;
    }
    Int a(0);
    for (auto& [vx, vy] : vs) {
        Int r = vx;
        if (!c.is_zero()) r = vx - divexact(vy, c) * cx;
        a = gcd(a, r);
    }
    if (a.is_zero() || c.is_zero()) throw domain_error("mul_ideal_lattice: degenerate lattice");
    return {QuadElt{Rat(a, dcom), Rat(0)}, QuadElt{Rat(cx, dcom), Rat(c, dcom)}};
}

QuadField make_field(const Int& D) {
    if (D <= Int(0)) throw not_real_error("discriminant must be positive");
    if (D == Int(1) || D.is_perfect_square())
        throw not_fundamental_error("discriminant is a perfect square");
    Int m4 = fdiv_r(D, Int(4));
    QuadField F;
    F.D = D;
    auto squarefree = [](const Int& v) {
        // trial division; desk-scale discriminants only
        Int x = v.abs();
        for (Int d(2); d * d <= x; d += 1) {
            if (divisible(x, d * d)) return false;
        }
        return true;
    };
    if (m4 == Int(1)) {
        if (!squarefree(D)) throw not_fundamental_error("D = 1 mod 4 must be squarefree");
        F.t = 1;
        F.n = divexact(Int(1) - D, Int(4));
    } else if (m4 == Int(0)) {
        Int m = divexact(D, Int(4));
        Int mm4 = fdiv_r(m, Int(4));
        if (!(mm4 == Int(2) || mm4 == Int(3)) || !squarefree(m))
            throw not_fundamental_error("D = 0 mod 4 requires D/4 squarefree, = 2,3 mod 4");
        F.t = 0;
        F.n = -m;
    } else {
        throw not_fundamental_error("discriminant must be 0 or 1 mod 4");
    }
    F.eps_plus = totally_positive_fundamental_unit(F);
    return F;
}

QuadElt totally_positive_fundamental_unit(const QuadField& F) {
    // Continued fraction of omega = (P0 + sqrt(D))/Q0 by the integer PQa recurrence;
    // convergents p/q give candidate units p - q*conj(omega).
    // omega = (t + sqrt(D))/2 in both cases (t = 0 gives sqrt(D)/2 = sqrt(D/4)).
    Int P(F.t), Q(2);
    // alpha_0 = (P + sqrt(D)) / Q with Q | D - P^2 (P=t, Q=2: D-t^2 = -4n+... holds).
    Int sq = F.D.isqrt();
    Int pm1(1), p0, qm1(0), q0(1);
    // a0 = floor((P + sqrt(D))/Q)
    Int a = fdiv_q(P + sq, Q);
    p0 = a;
    QuadField const& f = F;
    auto unit_norm = [&](const Int& p, const Int& q) {
        // N(p - q*conj(omega)) = p^2 - t p q + n q^2
        return p * p - Int(f.t) * p * q + f.n * q * q;
    };
    for (int it = 0; it < 100000; ++it) {
        Int nm = unit_norm(p0, q0);
        if (nm.abs().is_one()) {
            // u = p - q*conj(omega) = (p - t q) + q*omega
            QuadElt u{Rat(p0 - Int(f.t) * q0), Rat(q0)};
            if (nm == Int(-1)) u = F.mul(u, u);
            // normalize to the totally positive generator > 1
            if (F.sign_embed1(u) < 0) u = F.neg(u);
            if (!F.is_totally_positive(u)) throw domain_error("unit normalization failed");
            if (F.cmp_embed1(u, F.one()) < 0) u = F.inv(u);
            return u;
        }
        // PQa step
        P = a * Q - P;
        Q = divexact(F.D - P * P, Q);
        a = fdiv_q(P + sq, Q);
        Int p1 = a * p0 + pm1, q1 = a * q0 + qm1;
        pm1 = p0; p0 = p1;
        qm1 = q0; q0 = q1;
    }
    throw domain_error("continued fraction did not terminate");
}

std::optional<QuadElt> fundamental_unit_bruteforce(const QuadField& F, long ybound) {
    // Smallest unit > 1: enumerate y >= 1, solve x^2 + txy + ny^2 = +-1 for x.
    std::optional<QuadElt> best;
    for (long y = 1; y <= ybound; ++y) {
        for (int s = -1; s <= 1; s += 2) {
            // x = (-ty +- sqrt(t^2 y^2 - 4(n y^2 - s))) / 2
            Int disc = Int(F.t) * Int(F.t) * Int(y) * Int(y) - Int(4) * (F.n * Int(y) * Int(y) - Int(s));
            if (disc.sign() < 0 || !disc.is_perfect_square()) continue;
            Int r = disc.isqrt();
            for (int s2 = -1; s2 <= 1; s2 += 2) {
                Int two_x = -Int(F.t) * Int(y) + (s2 > 0 ? r : -r);
                if (!divisible(two_x, Int(2))) continue;
                QuadElt u{Rat(divexact(two_x, Int(2))), Rat(Int(y))};
                if (F.sign_embed1(u) < 0) u = F.neg(u);
                if (F.cmp_embed1(u, F.one()) <= 0) continue;
                if (!best || F.cmp_embed1(u, *best) < 0) best = u;
            }
        }
        if (best) return best;  // smallest y wins; x choices already minimized
    }
    return best;
}

bool is_inert(const QuadField& F, const Int& p) {
    if (p <= Int(2) || !p.is_probab_prime() || !p.odd())
        throw domain_error("is_inert: p must be an odd prime");
    if (divisible(F.D, p)) throw ramified_error("p divides the discriminant");
    return kronecker(F.D, p) == -1;
}

} // namespace bsu
