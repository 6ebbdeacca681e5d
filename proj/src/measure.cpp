#include "bsu/measure.hpp"

#include <algorithm>
#include <atomic>
#include <climits>
#include <cstdlib>
#include <thread>

namespace bsu {

namespace {

std::pair<Int, Int> residue_of(const QuadElt& z, const Int& pk) {
    auto lift = [&](const Rat& r) {
        return mulmod(mod(r.num(), pk), invmod(mod(r.den(), pk), pk), pk);
    };
    return {lift(z.x), lift(z.y)};
}

std::vector<WeightedLattice> handle_lattices(const MeasureHandle& h) {
    auto T = smoothing_set(*h.F, h.ell, h.conv.q_other_root, h.conv.aux_two);
    return smoothing_lattices(*h.F, h.class_rep, T, h.conv.smooth_by_inverse, 0);
}

} // namespace

namespace {

/// Smallest-norm integral ideal of the given class coprime to `avoid`; the
/// conjugates and zeta values are representative-invariant, so a small
/// representative only shrinks the cone lattices.
Ideal small_class_rep(const QuadField& F, const NarrowClassGroup& G, long cls, const Int& avoid) {
    for (Int n(1); n <= Int(4000); n += 1) {
        if (!gcd(n, avoid).is_one()) continue;
        // HNF ideals of norm n: a*c = n with c | a, 0 <= b < a, c | b
        for (Int cdiv(1); cdiv * cdiv <= n; cdiv += 1) {
            if (!divisible(n, cdiv)) continue;
            Int a = divexact(n, cdiv);
            if (!divisible(a, cdiv)) continue;
            for (Int b(0); b < a; b += cdiv) {
                if (!F.is_omega_stable(a, b, cdiv)) continue;
                Ideal I{a, b, cdiv};
                if (class_of(G, I) == cls) return I;
            }
        }
    }
    throw domain_error("small_class_rep: no representative below the norm bound");
}

} // namespace

MeasureHandle make_measure(const QuadField& F, const NarrowClassGroup& G, long class_index,
                           const Int& p, const Int& ell, MeasureConventions conv,
                           ZetaCache* cache) {
    if (!is_inert(F, p)) throw not_inert_error("make_measure: p is not inert");
    if (class_index < 0 || class_index >= G.order)
        throw domain_error("make_measure: class index out of range");
    MeasureHandle h;
    h.F = &F;
    h.G = &G;
    h.class_index = class_index;
    h.class_rep = small_class_rep(F, G, class_index, p * ell);
    h.p = p;
    h.ell = ell;
    h.conv = conv;
    h.cache = cache;
    return h;
}

Int zeta0(const MeasureHandle& h) {
    ZetaQuery q;
    q.F = h.F;
    q.class_rep = h.class_rep;
    q.p = h.p;
    q.ell = h.ell;
    q.q_other_root = h.conv.q_other_root;
    q.smooth_by_inverse = h.conv.smooth_by_inverse;
    q.aux_two = h.conv.aux_two;
    q.k = 0;
    Rat v = partial_zeta(q, h.cache);
    if (!v.is_integer()) throw domain_error("zeta0: non-integral smoothed value");
    return v.num();
}

Int measure_of(const MeasureHandle& h, const Int& rx, const Int& ry, int level) {
    if (level < 0 || level > max_congruence_level())
        throw level_too_deep_error("measure_of: level beyond configured bound");
    if (level == 0) return zeta0(h);
    Int pk = pow_ui(h.p, static_cast<unsigned long>(level));
    Int crx = mod(rx, pk), cry = mod(ry, pk);
    auto key = std::make_tuple(level, crx.str(), cry.str());
    {
        std::lock_guard<std::mutex> lk(h.memo_mtx);
        auto it = h.memo.find(key);
        if (it != h.memo.end()) return it->second;
    }
    ZetaQuery q;
    q.F = h.F;
    q.class_rep = h.class_rep;
    q.p = h.p;
    q.ell = h.ell;
    q.q_other_root = h.conv.q_other_root;
    q.smooth_by_inverse = h.conv.smooth_by_inverse;
    q.aux_two = h.conv.aux_two;
    q.congruence = Congruence{crx, cry, level};
    q.k = 0;
    Rat v = partial_zeta(q, h.cache);
    if (!v.is_integer()) throw domain_error("measure_of: non-integral measure value");
    Int out = v.num();
    {
        std::lock_guard<std::mutex> lk(h.memo_mtx);
        h.memo.emplace(key, out);
    }
    return out;
}

QuadElt moment_exact(const MeasureHandle& h, const Int& rx, const Int& ry, int level, unsigned k) {
    const QuadField& F = *h.F;
    if (level < 0 || level > max_congruence_level())
        throw level_too_deep_error("moment_exact: level beyond configured bound");
    auto pieces = handle_lattices(h);
    std::vector<Cone> cones = unimodular_fan(F, shintani_domain_cone(F));
    Int pk = pow_ui(h.p, static_cast<unsigned long>(level));
    QuadElt total{Rat(0), Rat(0)};
    for (const auto& piece : pieces) {
        QuadElt f1 = piece.f1, f2 = piece.f2, mu{Rat(0), Rat(0)};
        if (level > 0) {
            // coset representative inside this lattice
            auto emb = [&](const Rat& r) {
                return mulmod(mod(r.num(), pk), invmod(mod(r.den(), pk), pk), pk);
            };
            Int a = emb(f1.x), b = emb(f2.x), c = emb(f1.y), d = emb(f2.y);
            Int idet = invmod(mod(a * d - b * c, pk), pk);
            Int c1 = mod(idet * (d * mod(rx, pk) - b * mod(ry, pk)), pk);
            Int c2 = mod(idet * (a * mod(ry, pk) - c * mod(rx, pk)), pk);
            mu = F.add(F.mul_rat(f1, Rat(c1)), F.mul_rat(f2, Rat(c2)));
            f1 = F.mul_rat(f1, Rat(pk));
            f2 = F.mul_rat(f2, Rat(pk));
        }
        for (const Cone& C : cones) {
            BoxBasis box = scaled_box(F, C, f1, f2);
            ConeSumExact acc(F, box, k);
            for_each_point(F, box, PointLattice{mu, f1, f2},
                           [&](const Rat& x1, const Rat& x2, const QuadElt&) {
                               acc.add_point(x1, x2);
                           });
            total = F.add(total, F.mul_rat(acc.element_weighted_value(k), piece.weight));
        }
    }
    return total;
}

QuadElt centered_moment_exact(const MeasureHandle& h, const Int& rx, const Int& ry, int level,
                              unsigned k) {
    const QuadField& F = *h.F;
    QuadElt r{Rat(rx), Rat(ry)};
    QuadElt total{Rat(0), Rat(0)};
    for (unsigned j = 0; j <= k; ++j) {
        QuadElt mj = moment_exact(h, rx, ry, level, j);
        QuadElt rpow = F.pow(F.neg(r), static_cast<long>(k - j));
        total = F.add(total, F.mul_rat(F.mul(rpow, mj), Rat(binomial(k, j))));
    }
    return total;
}

// ---------------------------------------------------------------------------
// Bulk exact measure values (all residues mod p^level)

namespace {

/// Integer model of one (piece, cone) pass for the bulk measure: box
/// coordinates x1 = (A0 + a P1 + b Q1)/M1 in (0,1], x2 = .../M2 in [0,1),
/// residue coordinates linear mod p^level. Valid when every quantity fits
/// comfortably in int64.
struct FastPass {
    long M1, M2;
    long P1, Q1, P2, Q2;      // steps of the block-lattice basis, scaled
    long RSx1, RSx2, RSy1, RSy2;  // residue steps of the basis mod p^level
    // per-point value = w1*(2A-M1)(2B-M2) + w2*(6A^2-6A M1+M1^2) + w3*(6B^2-...)
    Rat c1, c2, c3;
    Int IC1, IC2, IC3;        // c_i * DEN for the shared denominator
    QuadElt bf1, bf2;         // block lattice basis (elements)
    std::pair<Rat, Rat> g1, g2, inv_row1, inv_row2;  // box coords and inverse
};

bool fits(const Rat& r, long mul, long& out) {
    Int v = r.num() * Int(mul);
    if (!divisible(v, r.den())) return false;
    Int q = divexact(v, r.den());
    if (!q.fits_long()) return false;
    out = q.to_long();
    return std::abs(out) < (1L << 42);
}

} // namespace

void measure_values_bulk(const MeasureHandle& h, int level,
                         const std::function<void(const Int&, const Int&, const Rat&)>& cb) {
    const QuadField& F = *h.F;
    if (level < 0) throw domain_error("measure_values_bulk: negative level");
    if (level == 0) {
        ZetaQuery q;
        q.F = h.F;
        q.class_rep = h.class_rep;
        q.p = h.p;
        q.ell = h.ell;
        q.q_other_root = h.conv.q_other_root;
        q.smooth_by_inverse = h.conv.smooth_by_inverse;
        q.aux_two = h.conv.aux_two;
        cb(Int(0), Int(0), partial_zeta(q, h.cache));
        return;
    }
    auto pieces = handle_lattices(h);
    std::vector<Cone> cones = unimodular_fan(F, shintani_domain_cone(F));
    const Int& p = h.p;
    Int pN = pow_ui(p, static_cast<unsigned long>(level));
    int block_level = std::max(0, level - 2);
    Int pNb = pow_ui(p, static_cast<unsigned long>(block_level));
    long sub = pow_ui(p, static_cast<unsigned long>(level - block_level)).to_long();
    long pl = p.to_long();

    // Per-(piece, cone) fixed data: box and transforms for the level lattice.
    struct PassFixed {
        const WeightedLattice* piece;
        BoxBasis box;
        Rat c11, c2, c3;  // contribution = c11*B1(x1)B1(x2)-sum + c2*B2(x1)-sum + c3*B2(x2)-sum
    };
    std::vector<PassFixed> passes;
    for (const auto& piece : pieces) {
        QuadElt lf1 = F.mul_rat(piece.f1, Rat(pN));
        QuadElt lf2 = F.mul_rat(piece.f2, Rat(pN));
        for (const Cone& C : cones) {
            PassFixed pf;
            pf.piece = &piece;
            pf.box = scaled_box(F, C, lf1, lf2);
            // value of a point with box coords (x1, x2):
            //   B1(x1) B1(x2) + B2(x1)/4 * Tr(V1/V2) + B2(x2)/4 * Tr(V2/V1)
            Rat t12 = F.trace(F.mul(pf.box.V1, F.inv(pf.box.V2)));
            Rat t21 = F.trace(F.mul(pf.box.V2, F.inv(pf.box.V1)));
            pf.c11 = piece.weight;             // times B1(x1)B1(x2)
            pf.c2 = piece.weight * t12 / Rat(4);  // times B2(x1)
            pf.c3 = piece.weight * t21 / Rat(4);  // times B2(x2)
            passes.push_back(std::move(pf));
        }
    }

    // Try the integer fast path: every coordinate and residue step scaled to
    // int64 against pass-fixed denominators, per-slot sums folded through a
    // shared denominator. Falls back to exact rational per-point evaluation.
    std::vector<FastPass> fast(passes.size());
    bool fast_ok = level >= 2 && pN.fits_long();
    Int DEN(1);
    for (size_t i = 0; fast_ok && i < passes.size(); ++i) {
        const auto& pf = passes[i];
        FastPass& fp = fast[i];
        fp.bf1 = F.mul_rat(pf.piece->f1, Rat(pNb));
        fp.bf2 = F.mul_rat(pf.piece->f2, Rat(pNb));
        fp.g1 = coords_in_basis(fp.bf1, pf.box.V1, pf.box.V2);
        fp.g2 = coords_in_basis(fp.bf2, pf.box.V1, pf.box.V2);
        // scale against the denominators of the unscaled basis coordinates, so
        // the block shifts (integer combinations of them) stay integral
        auto gf1 = coords_in_basis(pf.piece->f1, pf.box.V1, pf.box.V2);
        auto gf2 = coords_in_basis(pf.piece->f2, pf.box.V1, pf.box.V2);
        Int m1 = lcm(gf1.first.den(), gf2.first.den());
        Int m2 = lcm(gf1.second.den(), gf2.second.den());
        if (!m1.fits_long() || !m2.fits_long()) { fast_ok = false; break; }
        fp.M1 = m1.to_long();
        fp.M2 = m2.to_long();
        if (fp.M1 > (1L << 21) || fp.M2 > (1L << 21)) { fast_ok = false; break; }
        fast_ok = fast_ok && fits(fp.g1.first, fp.M1, fp.P1) && fits(fp.g2.first, fp.M1, fp.Q1) &&
                  fits(fp.g1.second, fp.M2, fp.P2) && fits(fp.g2.second, fp.M2, fp.Q2);
        if (!fast_ok) break;
        // residue steps of the block basis mod p^level
        auto [r1x, r1y] = residue_of(fp.bf1, pN);
        auto [r2x, r2y] = residue_of(fp.bf2, pN);
        fp.RSx1 = r1x.to_long();
        fp.RSy1 = r1y.to_long();
        fp.RSx2 = r2x.to_long();
        fp.RSy2 = r2y.to_long();
        fp.c1 = pf.c11 / Rat(4 * fp.M1) / Rat(fp.M2);
        fp.c2 = pf.c2 / Rat(6) / Rat(fp.M1) / Rat(fp.M1);
        fp.c3 = pf.c3 / Rat(6) / Rat(fp.M2) / Rat(fp.M2);
        DEN = lcm(DEN, lcm(fp.c1.den(), lcm(fp.c2.den(), fp.c3.den())));
    }
    if (fast_ok) {
        for (auto& fp : fast) {
            fp.IC1 = divexact(fp.c1.num() * DEN, fp.c1.den());
            fp.IC2 = divexact(fp.c2.num() * DEN, fp.c2.den());
            fp.IC3 = divexact(fp.c3.num() * DEN, fp.c3.den());
        }
    }
    long pNl = fast_ok ? pN.to_long() : 0;
    long pNbl = pNb.to_long();

    std::vector<Rat> acc;                 // generic path accumulators
    std::vector<long> S1, S2, S3;         // fast path per-slot sums
    std::vector<Int> X;                   // fast path scaled numerators
    for (Int bx(0); bx < pNb; bx += 1) {
        for (Int by(0); by < pNb; by += 1) {
            if (!fast_ok) acc.assign(static_cast<size_t>(sub) * sub, Rat(0));
            if (fast_ok) X.assign(static_cast<size_t>(sub) * sub, Int(0));
            for (size_t pi = 0; pi < passes.size(); ++pi) {
                const auto& pf = passes[pi];
                const auto& piece = *pf.piece;
                QuadElt mu{Rat(0), Rat(0)};
                Int mc1(0), mc2(0);
                if (block_level > 0) {
                    auto emb = [&](const Rat& r) {
                        return mulmod(mod(r.num(), pNb), invmod(mod(r.den(), pNb), pNb), pNb);
                    };
                    Int a = emb(piece.f1.x), b = emb(piece.f2.x), c = emb(piece.f1.y),
                        d = emb(piece.f2.y);
                    Int idet = invmod(mod(a * d - b * c, pNb), pNb);
                    mc1 = mod(idet * (d * bx - b * by), pNb);
                    mc2 = mod(idet * (a * by - c * bx), pNb);
                    mu = F.add(F.mul_rat(piece.f1, Rat(mc1)), F.mul_rat(piece.f2, Rat(mc2)));
                }
                if (!fast_ok) {
                    QuadElt bf1 = F.mul_rat(piece.f1, Rat(pNb));
                    QuadElt bf2 = F.mul_rat(piece.f2, Rat(pNb));
                    for_each_point(
                        F, pf.box, PointLattice{mu, bf1, bf2},
                        [&](const Rat& x1, const Rat& x2, const QuadElt& z) {
                            auto [rx, ry] = residue_of(z, pN);
                            long hx = fdiv_q(rx, pNb).to_long();
                            long hy = fdiv_q(ry, pNb).to_long();
                            Rat b1b1 = (x1 - Rat(1, 2)) * (x2 - Rat(1, 2));
                            Rat b2a = x1 * x1 - x1 + Rat(1, 6);
                            Rat b2b = x2 * x2 - x2 + Rat(1, 6);
                            acc[static_cast<size_t>(hx) * sub + hy] +=
                                pf.c11 * b1b1 + pf.c2 * b2a + pf.c3 * b2b;
                        });
                    continue;
                }
                const FastPass& fp = fast[pi];
                // block shift in box coordinates: mu = mc1 f1 + mc2 f2, and the
                // unscaled-basis coordinates are (g / pNb), integral against M
                auto s1r = (fp.g1.first * Rat(mc1) + fp.g2.first * Rat(mc2)) / Rat(pNb);
                auto s2r = (fp.g1.second * Rat(mc1) + fp.g2.second * Rat(mc2)) / Rat(pNb);
                long A0, B0;
                if (!fits(s1r, fp.M1, A0) || !fits(s2r, fp.M2, B0))
                    throw domain_error("measure_values_bulk: fast path shift overflow");
                auto [m0x, m0y] = residue_of(mu, pN);
                long R0x = m0x.to_long(), R0y = m0y.to_long();
                // integer ranges for a from the rational corner solve
                Rat det = fp.g1.first * fp.g2.second - fp.g1.second * fp.g2.first;
                Rat amin, amax;
                bool first = true;
                for (int e1 = 0; e1 <= 1; ++e1)
                    for (int e2 = 0; e2 <= 1; ++e2) {
                        Rat w1 = Rat(e1) - s1r, w2 = Rat(e2) - s2r;
                        Rat aa = (w1 * fp.g2.second - w2 * fp.g2.first) / det;
                        if (first || aa < amin) amin = aa;
                        if (first || aa > amax) amax = aa;
                        first = false;
                    }
                long alo = amin.floor().to_long() - 1, ahi = amax.ceil().to_long() + 1;
                auto& visits = cone_point_visits();
                for (long a = alo; a <= ahi; ++a) {
                    // 0 < A0 + a P1 + b Q1 <= M1  and  0 <= B0 + a P2 + b Q2 < M2
                    long basex = A0 + a * fp.P1;
                    long basey = B0 + a * fp.P2;
                    long blo = LONG_MIN / 4, bhi = LONG_MAX / 4;
                    auto fdivl = [](long n, long d) {
                        long q = n / d, r = n % d;
                        return (r != 0 && ((r < 0) != (d < 0))) ? q - 1 : q;
                    };
                    // constraint lo <(=) base + c*b <(=) hi on integer b
                    auto clamp = [&](long c, long base, long lo, bool lo_strict, long hi,
                                     bool hi_strict) {
                        if (c == 0) {
                            bool ok = (lo_strict ? base > lo : base >= lo) &&
                                      (hi_strict ? base < hi : base <= hi);
                            if (!ok) { blo = 1; bhi = 0; }
                            return;
                        }
                        long nlo = lo - base, nhi = hi - base;
                        long lo_b, hi_b;
                        if (c > 0) {
                            lo_b = lo_strict ? fdivl(nlo, c) + 1 : -fdivl(-nlo, c);
                            hi_b = hi_strict ? -fdivl(-nhi, c) - 1 : fdivl(nhi, c);
                        } else {
                            hi_b = lo_strict ? -fdivl(nlo, -c) - 1 : fdivl(-nlo, -c);
                            lo_b = hi_strict ? fdivl(-nhi, -c) + 1 : -fdivl(nhi, -c);
                        }
                        if (lo_b > blo) blo = lo_b;
                        if (hi_b < bhi) bhi = hi_b;
                    };
                    clamp(fp.Q1, basex, 0, true, fp.M1, false);
                    clamp(fp.Q2, basey, 0, false, fp.M2, true);
                    if (blo > bhi) continue;
                    long A = basex + blo * fp.Q1;
                    long B = basey + blo * fp.Q2;
                    long rx = ((R0x + a % pNl * fp.RSx1 + blo % pNl * fp.RSx2) % pNl + pNl) % pNl;
                    long ry = ((R0y + a % pNl * fp.RSy1 + blo % pNl * fp.RSy2) % pNl + pNl) % pNl;
                    visits.fetch_add(static_cast<unsigned long>(bhi - blo + 1),
                                     std::memory_order_relaxed);
                    for (long b = blo; b <= bhi; ++b) {
                        long hx = rx / pNbl, hy = ry / pNbl;
                        size_t slot = static_cast<size_t>(hx) * sub + hy;
                        long s1 = (2 * A - fp.M1);
                        long s2 = (2 * B - fp.M2);
                        Int& xs = X[slot];
                        xs.add_mul(fp.IC1, Int(s1 * s2));
                        xs.add_mul(fp.IC2, Int(6 * A * (A - fp.M1) + fp.M1 * fp.M1));
                        xs.add_mul(fp.IC3, Int(6 * B * (B - fp.M2) + fp.M2 * fp.M2));
                        A += fp.Q1;
                        B += fp.Q2;
                        rx += fp.RSx2;
                        if (rx >= pNl) rx -= pNl;
                        ry += fp.RSy2;
                        if (ry >= pNl) ry -= pNl;
                    }
                }
            }
            for (long hx = 0; hx < sub; ++hx)
                for (long hy = 0; hy < sub; ++hy) {
                    Int rx = bx + pNb * Int(hx);
                    Int ry = by + pNb * Int(hy);
                    if (fast_ok)
                        cb(rx, ry, Rat(X[static_cast<size_t>(hx) * sub + hy], DEN));
                    else
                        cb(rx, ry, acc[static_cast<size_t>(hx) * sub + hy]);
                }
        }
    }
    (void)pl;
}

// ---------------------------------------------------------------------------
// p-adic moment engine

MomentTable moment_table(const MeasureHandle& h, const PadicCtx& ctx, unsigned kmax, int level) {
    const QuadField& F = *h.F;
    if (level < 1) throw domain_error("moment_table: level must be >= 1");
    Int pn = pow_ui(h.p, static_cast<unsigned long>(level));
    long pnl = pn.to_long();
    MomentTable tab;
    tab.level = level;
    // unit residues mod p^level, lexicographic
    std::vector<long> slot(static_cast<size_t>(pnl) * pnl, -1);
    for (long rx = 0; rx < pnl; ++rx)
        for (long ry = 0; ry < pnl; ++ry) {
            bool unit = !(rx % h.p.to_long() == 0 && ry % h.p.to_long() == 0);
            if (!unit) continue;
            slot[static_cast<size_t>(rx) * pnl + ry] = static_cast<long>(tab.residues.size());
            tab.residues.emplace_back(Int(rx), Int(ry));
        }
    size_t nres = tab.residues.size();
    unsigned K = kmax + 2;
    PadicElt pz = PadicElt::zero(ctx, ctx.prec);
    tab.raw.assign(nres, std::vector<PadicElt>(kmax + 1, pz));

    auto pieces = handle_lattices(h);
    std::vector<Cone> cones = unimodular_fan(F, shintani_domain_cone(F));

    // beta-hat embedded once
    std::vector<PadicElt> bh;
    {
        const auto& B = bernoulli_numbers(K);
        Rat f(1);
        for (unsigned i = 0; i <= K; ++i) {
            if (i > 0) f *= Rat(Int(static_cast<long>(i)));
            bh.push_back(PadicElt::from_rat(ctx, B[i] / f));
        }
    }
    std::vector<PadicElt> inv_e;  // 1/e!
    {
        Rat f(1);
        for (unsigned e = 0; e <= K; ++e) {
            if (e > 0) f *= Rat(Int(static_cast<long>(e)));
            inv_e.push_back(PadicElt::from_rat(ctx, Rat(1) / f));
        }
    }

    auto beta_vec = [&](const Rat& x) {
        std::vector<PadicElt> xe(K + 1);
        PadicElt xp = PadicElt::from_rat(ctx, x);
        xe[0] = PadicElt::from_int(ctx, Int(1));
        for (unsigned e = 1; e <= K; ++e) xe[e] = xe[e - 1] * xp;
        for (unsigned e = 0; e <= K; ++e) xe[e] = xe[e] * inv_e[e];
        std::vector<PadicElt> out(K + 1, pz);
        for (unsigned j = 0; j <= K; ++j) {
            PadicElt acc = pz;
            for (unsigned i = 0; i <= j; ++i) acc = acc + bh[i] * xe[j - i];
            out[j] = acc;
        }
        return out;
    };

    std::vector<std::vector<PadicElt>> T;  // per residue triangular (j1,j2), j1+j2 <= K
    auto tidx = [&](unsigned j1, unsigned j2) { return j1 * (K + 1) + j2; };

    for (const auto& piece : pieces) {
        QuadElt lf1 = F.mul_rat(piece.f1, Rat(pn));
        QuadElt lf2 = F.mul_rat(piece.f2, Rat(pn));
        PadicElt wt = PadicElt::from_rat(ctx, piece.weight);
        for (const Cone& C : cones) {
            BoxBasis box = scaled_box(F, C, lf1, lf2);
            // embedded sector data and power tables
            PadicElt a1 = PadicElt::embed(ctx, F, box.V1);
            PadicElt a2 = PadicElt::embed(ctx, F, box.V2);
            PadicElt b1 = a1.galois_conj(), b2 = a2.galois_conj();
            auto pows = [&](const PadicElt& v) {
                std::vector<PadicElt> P(K + 1, pz);
                P[0] = PadicElt::from_int(ctx, Int(1));
                for (unsigned i = 1; i <= K; ++i) P[i] = P[i - 1] * v;
                return P;
            };
            auto pa1 = pows(a1), pa2 = pows(a2), pb1 = pows(b1), pb2 = pows(b2);
            PadicElt ia1 = a1.inv(), ia2 = a2.inv(), ib1 = b1.inv(), ib2 = b2.inv();

            T.assign(nres, {});
            for_each_point(F, box, PointLattice{QuadElt{Rat(0), Rat(0)}, piece.f1, piece.f2},
                           [&](const Rat& x1, const Rat& x2, const QuadElt& z) {
                               auto [rx, ry] = residue_of(z, pn);
                               long s = slot[static_cast<size_t>(rx.to_long()) * pnl + ry.to_long()];
                               if (s < 0) return;  // non-unit residue: outside O_p^*
                               auto v1 = beta_vec(x1);
                               auto v2 = beta_vec(x2);
                               auto& Ts = T[static_cast<size_t>(s)];
                               if (Ts.empty()) Ts.assign((K + 1) * (K + 1), pz);
                               for (unsigned j1 = 0; j1 <= K; ++j1)
                                   for (unsigned j2 = 0; j1 + j2 <= K; ++j2)
                                       Ts[tidx(j1, j2)] = Ts[tidx(j1, j2)] + v1[j1] * v2[j2];
                           });
            // residue-independent bracket coefficients: for each moment j and
            // split j1 + j2 = j + 2, the [u^0] sector-1 plus [u^j] sector-2
            // coefficient of L1^{j1-1} L2^{j2-1}
            std::vector<PadicElt> inv_b1_pow(kmax + 2u), inv_b2_pow(kmax + 2u);
            inv_b1_pow[0] = PadicElt::from_int(ctx, Int(1));
            inv_b2_pow[0] = inv_b1_pow[0];
            for (unsigned i = 1; i <= kmax + 1; ++i) {
                inv_b1_pow[i] = inv_b1_pow[i - 1] * ib1;
                inv_b2_pow[i] = inv_b2_pow[i - 1] * ib2;
            }
            std::vector<std::vector<PadicElt>> bracket(kmax + 1);
            std::vector<PadicElt> scale(kmax + 1, pz);
            for (unsigned j = 0; j <= kmax; ++j) {
                unsigned Kj = j + 2;
                bracket[j].assign(Kj + 1, pz);
                for (unsigned j1 = 0; j1 <= Kj; ++j1) {
                    unsigned j2 = Kj - j1;
                    PadicElt br = pz;
                    if (j1 >= 1 && j2 >= 1) {
                        PadicElt lead = pa1[j1 - 1] * pa2[j2 - 1];
                        br = lead + lead;
                    } else if (j1 == 0) {
                        br = pa2[Kj - 1] * ia1;
                        for (unsigned i = 0; i <= std::min(Kj - 1, j); ++i) {
                            unsigned m = j - i;
                            PadicElt term = pb2[Kj - 1 - i] * pa2[i] * pa1[m] * inv_b1_pow[m + 1];
                            Int c = binomial(Kj - 1, i);
                            br = br + term * PadicElt::from_int(ctx, m % 2 == 1 ? -c : c);
                        }
                    } else {
                        br = pa1[Kj - 1] * ia2;
                        for (unsigned i = 0; i <= std::min(Kj - 1, j); ++i) {
                            unsigned m = j - i;
                            PadicElt term = pb1[Kj - 1 - i] * pa1[i] * pa2[m] * inv_b2_pow[m + 1];
                            Int c = binomial(Kj - 1, i);
                            br = br + term * PadicElt::from_int(ctx, m % 2 == 1 ? -c : c);
                        }
                    }
                    bracket[j][j1] = br;
                }
                scale[j] = PadicElt::from_rat(ctx, Rat(factorial(j), Int(2))) * wt;
            }
            // moments from the accumulated T: flat dot products per residue
            for (size_t s = 0; s < nres; ++s) {
                if (T[s].empty()) continue;
                const auto& Ts = T[s];
                for (unsigned j = 0; j <= kmax; ++j) {
                    unsigned Kj = j + 2;
                    PadicElt acc = pz;
                    for (unsigned j1 = 0; j1 <= Kj; ++j1) {
                        const PadicElt& t = Ts[tidx(j1, Kj - j1)];
                        if (t.is_zero()) continue;
                        acc = acc + bracket[j][j1] * t;
                    }
                    tab.raw[s][j] = tab.raw[s][j] + acc * scale[j];
                }
            }
        }
    }
    return tab;
}

// ---------------------------------------------------------------------------
// the multiplicative integral

namespace {
long ilog(long base, long x) {
    long r = 0;
    while (x >= base) {
        x /= base;
        ++r;
    }
    return r;
}
} // namespace

PadicElt mult_integral(const MeasureHandle& h, const PadicCtx& ctx, IntegralOptions opt) {
    const QuadField& F = *h.F;
    long pl = h.p.to_long();
    int n = opt.base_level;
    int target = opt.target_abs > 0 ? opt.target_abs : ctx.prec - 8;
    if (target < 4) throw domain_error("mult_integral: target precision too small");
    // moment cutoff: need k*n - v_p(k) >= target for all k > K_used
    unsigned K_used = 0;
    {
        unsigned k = 1;
        while (true) {
            long worst = static_cast<long>(k) * n - ilog(pl, static_cast<long>(k));
            if (worst >= target) {
                // all larger k also pass: k*n grows by n, ilog by at most 1 per p-fold
                bool ok = true;
                for (unsigned kk = k; kk <= k + 64; ++kk)
                    if (static_cast<long>(kk) * n - ilog(pl, static_cast<long>(kk)) < target) {
                        ok = false;
                        break;
                    }
                if (ok) break;
            }
            ++k;
            if (k > opt.max_moment)
                throw precision_exhausted_error(
                    "mult_integral: moment bound too small for target precision");
        }
        K_used = k;
    }
    // headroom for the negative valuations of the Bernoulli products:
    // beta'_{j}(x) has valuation >= -(j*n + v_p(j!)), and the T-entries pair two
    int work_prec = target + static_cast<int>(K_used + 2) * n +
                    2 * static_cast<int>(K_used + 2) / (pl - 1) + 24;
    PadicCtx work = PadicCtx::create(h.p, work_prec, F.D, ctx.branch);

    MomentTable tab = moment_table(h, work, K_used, n);

    // Teichmueller part from level-1 measures
    PadicElt omega_part = PadicElt::from_int(work, Int(1));
    {
        Int p2m1 = h.p * h.p - Int(1);
        for (long rx = 0; rx < pl; ++rx)
            for (long ry = 0; ry < pl; ++ry) {
                if (rx == 0 && ry == 0) continue;
                Int nu = measure_of(h, Int(rx), Int(ry), 1);
                Int e = mod(nu, p2m1);
                if (e.is_zero()) continue;
                PadicElt a = PadicElt::embed(work, F, QuadElt{Rat(rx), Rat(ry)});
                omega_part = omega_part * teichmuller(a).pow(e);
            }
    }

    // additive part: sum over unit residues r mod p^n of
    //   log<r> nu_r + sum_{k>=1} (-1)^{k+1}/(k r^k) * m_k(r)
    PadicElt additive = PadicElt::zero(work, work.prec);
    for (size_t s = 0; s < tab.residues.size(); ++s) {
        auto [rx, ry] = tab.residues[s];
        Int nu = measure_of(h, rx, ry, n);
        {   // engine self-check: the 0-th raw moment is the measure
            PadicElt diff = tab.raw[s][0] - PadicElt::from_int(work, nu);
            if (!diff.is_zero() && diff.val() < target)
                throw domain_error("mult_integral: moment engine disagrees with exact measure");
        }
        PadicElt r = PadicElt::embed(work, F, QuadElt{Rat(rx), Rat(ry)});
        if (!nu.is_zero()) additive = additive + log_p(r) * PadicElt::from_int(work, nu);
        // centered moments from raw ones
        PadicElt rinv = r.inv();
        // m_k = sum_j C(k,j) (-r)^{k-j} raw_j ; tail term = (-1)^{k+1} m_k / (k r^k)
        std::vector<PadicElt> negr_pow(K_used + 1, PadicElt::from_int(work, Int(1)));
        PadicElt negr = -r;
        for (unsigned i = 1; i <= K_used; ++i) negr_pow[i] = negr_pow[i - 1] * negr;
        PadicElt rinv_pow = PadicElt::from_int(work, Int(1));
        for (unsigned k = 1; k <= K_used; ++k) {
            PadicElt mk = PadicElt::zero(work, work.prec);
            for (unsigned j = 0; j <= k; ++j) {
                PadicElt term = negr_pow[k - j] * tab.raw[s][j];
                mk = mk + term * PadicElt::from_int(work, binomial(k, j));
            }
            if (!mk.is_zero() && mk.val() < static_cast<long>(k) * n)
                throw domain_error("mult_integral: centered moment below expected valuation");
            rinv_pow = rinv_pow * rinv;
            PadicElt coeff = PadicElt::from_rat(work, Rat(Int(k % 2 == 1 ? 1L : -1L), Int(static_cast<long>(k))));
            additive = additive + mk * rinv_pow * coeff;
        }
    }
    if (!additive.is_zero() && additive.val() < 1)
        throw domain_error("mult_integral: additive part not in p*O (convention failure)");
    PadicElt result = omega_part * exp_p(additive + PadicElt::zero(work, target + 4));
    if (result.val() != 0) throw domain_error("mult_integral: result is not a unit");
    // the mirrored fundamental domain conjugates the integral value
    if (h.conv.mirror_domain) result = result.galois_conj();
    // transport to the caller's context at the target precision
    PadicElt out = PadicElt::normalized(ctx, result.val(),
                                        std::min({target, result.rel_prec(), ctx.prec}),
                                        result.c0(), result.c1());
    return out;
}

PadicElt riemann_oracle(const MeasureHandle& h, const PadicCtx& ctx, int level) {
    if (level < 1 || level > 4) throw level_too_deep_error("riemann_oracle: level must be 1..4");
    const QuadField& F = *h.F;
    int prec = std::min(ctx.prec, level + 8);
    PadicCtx work = PadicCtx::create(h.p, prec + 8, F.D, ctx.branch);
    PadicElt prod = PadicElt::from_int(work, Int(1));
    Int pN = pow_ui(h.p, static_cast<unsigned long>(level));
    measure_values_bulk(h, level, [&](const Int& rx, const Int& ry, const Rat& nu) {
        if (mod(rx, h.p).is_zero() && mod(ry, h.p).is_zero()) return;  // units only
        if (!nu.is_integer())
            throw domain_error("riemann_oracle: non-integral measure value");
        if (nu.is_zero()) return;
        PadicElt a = PadicElt::embed(work, F, QuadElt{Rat(rx), Rat(ry)});
        prod = prod * a.pow(nu.num());
    });
    (void)pN;
    if (h.conv.mirror_domain) prod = prod.galois_conj();
    return PadicElt::normalized(ctx, prod.val(), std::min(prod.rel_prec(), ctx.prec), prod.c0(),
                                prod.c1());
}

PadicElt brumer_stark_conjugate(const MeasureHandle& h, const PadicCtx& ctx, IntegralOptions opt) {
    Int z = zeta0(h);
    PadicElt u = mult_integral(h, ctx, opt);
    return u.shift(z.to_long());
}

ConjugateSet all_conjugates(const QuadField& F, const NarrowClassGroup& G, const Int& p,
                            const Int& ell, const PadicCtx& ctx, MeasureConventions conv,
                            ZetaCache* cache, IntegralOptions opt) {
    ConjugateSet out;
    out.conv = conv;
    size_t n = static_cast<size_t>(G.order);
    out.values.assign(n, PadicElt());
    out.ords.assign(n, Int(0));
    unsigned hw = std::thread::hardware_concurrency();
    unsigned workers = std::min<unsigned>(hw ? hw : 1, static_cast<unsigned>(n));
    if (workers <= 1) {
        for (long i = 0; i < G.order; ++i) {
            MeasureHandle h = make_measure(F, G, i, p, ell, conv, cache);
            out.ords[static_cast<size_t>(i)] = zeta0(h);
            out.values[static_cast<size_t>(i)] = brumer_stark_conjugate(h, ctx, opt);
        }
        return out;
    }
    // classes are independent; contexts and the cache are safe to share
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    std::mutex err_mtx;
    std::exception_ptr first_error;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            try {
                for (long i = next.fetch_add(1); i < G.order; i = next.fetch_add(1)) {
                    MeasureHandle h = make_measure(F, G, i, p, ell, conv, cache);
                    out.ords[static_cast<size_t>(i)] = zeta0(h);
                    out.values[static_cast<size_t>(i)] = brumer_stark_conjugate(h, ctx, opt);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mtx);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

} // namespace bsu
