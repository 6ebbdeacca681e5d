#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "bsu/cache.hpp"
#include "bsu/classgroup.hpp"
#include "bsu/padic.hpp"
#include "bsu/shintani.hpp"

namespace bsu {

/// Orientation conventions pinned by the reference tables; both directions of
/// the smoothing divisor and both degree-1 primes above ell are implemented.
struct MeasureConventions {
    bool q_other_root = false;
    bool smooth_by_inverse = true;
    int aux_two = -1;  // extra smoothing prime (2): -1 auto (iff 2 inert), 0 off, 1 on
    // Orientation of the fundamental domain: the mirrored domain conj(D)
    // produces the Galois-conjugate integral values; the reference tables pin
    // the mirrored choice.
    bool mirror_domain = true;
};

/// The integer-valued measure nu(b, D) on O_p attached to a narrow class
/// representative b, smoothing prime ell, and the Shintani domain of the field.
/// Values on basic opens r + p^n O_p are congruence-restricted smoothed partial
/// zeta values at s = 0; moments come from the same cone data with element
/// weights.
struct MeasureHandle {
    const QuadField* F = nullptr;
    const NarrowClassGroup* G = nullptr;
    long class_index = 0;
    Ideal class_rep;
    Int p;
    Int ell;
    MeasureConventions conv;
    ZetaCache* cache = nullptr;

    mutable std::mutex memo_mtx;
    mutable std::map<std::tuple<int, std::string, std::string>, Int> memo;

    MeasureHandle() = default;
    MeasureHandle(const MeasureHandle& o)
        : F(o.F), G(o.G), class_index(o.class_index), class_rep(o.class_rep), p(o.p), ell(o.ell),
          conv(o.conv), cache(o.cache) {}
};

MeasureHandle make_measure(const QuadField& F, const NarrowClassGroup& G, long class_index,
                           const Int& p, const Int& ell, MeasureConventions conv = {},
                           ZetaCache* cache = nullptr);

/// nu(r + p^level O_p) for the residue rx + ry*omega; exact integer (throws if
/// the computed rational is not an integer).
Int measure_of(const MeasureHandle& h, const Int& rx, const Int& ry, int level);

/// Smoothed partial zeta value at 0 of the class: nu(O_p). Equals the order of
/// the associated conjugate at the prime above p.
Int zeta0(const MeasureHandle& h);

/// Exact raw moment: integral of x^k over r + p^level O_p, an element of F
/// (p-integral). k = 0 recovers measure_of. Intended for small k (test oracle
/// and invariants); the integral pipeline uses the p-adic engine instead.
QuadElt moment_exact(const MeasureHandle& h, const Int& rx, const Int& ry, int level, unsigned k);

/// Exact centered moment: integral of (x - r)^k, derived by binomial expansion.
QuadElt centered_moment_exact(const MeasureHandle& h, const Int& rx, const Int& ry, int level,
                              unsigned k);

/// Exact nu on every residue mod p^level, streamed in a deterministic order
/// (residues (rx, ry) lexicographic). Cost grows like p^{2*level}.
void measure_values_bulk(const MeasureHandle& h, int level,
                         const std::function<void(const Int& rx, const Int& ry, const Rat& nu)>& cb);

/// Raw p-adic moments per unit residue mod p at the given base level:
/// table[r][j] = integral of x^j over (r + p^level O_p) as an element of F_p,
/// j = 0..kmax. Residues indexed by rx + p*ry over unit residues, ordered
/// lexicographically; `residues` receives the coordinate pairs.
struct MomentTable {
    std::vector<std::pair<Int, Int>> residues;
    std::vector<std::vector<PadicElt>> raw;  // [residue][j]
    int level = 1;
};
MomentTable moment_table(const MeasureHandle& h, const PadicCtx& ctx, unsigned kmax, int level = 1);

struct IntegralOptions {
    int target_abs = 0;       // absolute precision target; 0 = ctx.prec - 8
    unsigned max_moment = 120;
    int base_level = 1;
};

/// The multiplicative integral of x against nu over the units of O_p, computed
/// as Teichmueller part times exp of the additive logarithmic integral.
/// The result is a unit known to ~target_abs digits.
PadicElt mult_integral(const MeasureHandle& h, const PadicCtx& ctx, IntegralOptions opt = {});

/// Brute-force check value Prod_a a^{nu(a + p^level O)} over unit residues a
/// mod p^level; converges to the integral as level grows (one digit per level).
PadicElt riemann_oracle(const MeasureHandle& h, const PadicCtx& ctx, int level);

/// p^{zeta0} * mult_integral: the analytic image of the class's conjugate.
PadicElt brumer_stark_conjugate(const MeasureHandle& h, const PadicCtx& ctx,
                                IntegralOptions opt = {});

/// All conjugates (class-indexed), their orders, and shared conventions.
struct ConjugateSet {
    std::vector<PadicElt> values;  // indexed by class index
    std::vector<Int> ords;         // zeta0 per class
    MeasureConventions conv;
};
ConjugateSet all_conjugates(const QuadField& F, const NarrowClassGroup& G, const Int& p,
                            const Int& ell, const PadicCtx& ctx, MeasureConventions conv = {},
                            ZetaCache* cache = nullptr, IntegralOptions opt = {});

} // namespace bsu
