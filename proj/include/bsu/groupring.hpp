#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bsu/measure.hpp"
#include "bsu/padic.hpp"

namespace bsu {

/// Finite abelian group presented as a product of cyclic factors; elements are
/// exponent vectors, also addressed by mixed-radix index.
struct FinAbGroup {
    std::vector<long> factors;

    using Elt = std::vector<long>;
    long order() const {
        long n = 1;
        for (long f : factors) n *= f;
        return n;
    }
    Elt id() const { return Elt(factors.size(), 0); }
    Elt mul(const Elt& a, const Elt& b) const {
        Elt r(factors.size());
        for (size_t i = 0; i < factors.size(); ++i) r[i] = (a[i] + b[i]) % factors[i];
        return r;
    }
    Elt inv(const Elt& a) const {
        Elt r(factors.size());
        for (size_t i = 0; i < factors.size(); ++i) r[i] = (factors[i] - a[i]) % factors[i];
        return r;
    }
    Elt pow(Elt a, long e) const;
    long index_of(const Elt& a) const {
        long idx = 0;
        for (size_t i = 0; i < factors.size(); ++i) idx = idx * factors[i] + a[i];
        return idx;
    }
    Elt from_index(long idx) const {
        Elt r(factors.size());
        for (size_t i = factors.size(); i-- > 0;) {
            r[i] = idx % factors[i];
            idx /= factors[i];
        }
        return r;
    }
};

/// (Z/p^M)[g]^-: the quotient of the group ring in which the distinguished
/// order-2 element c acts as -1. Free over Z/p^M on coset representatives of
/// <c>; elements are coefficient vectors over that basis.
class MinusAlgebra {
  public:
    MinusAlgebra(FinAbGroup g, FinAbGroup::Elt c, Int p, int M);

    using Elt = std::vector<Int>;

    long rank() const { return static_cast<long>(basis_.size()); }
    const Int& modulus() const { return pM_; }
    const FinAbGroup& group() const { return g_; }
    const FinAbGroup::Elt& conj() const { return c_; }

    Elt zero() const { return Elt(basis_.size(), Int(0)); }
    Elt one() const { return from_group_index(g_.index_of(g_.id())); }
    /// Image of a group element: +-(basis vector).
    Elt from_group_index(long gidx) const;
    /// Image of an integral group-ring element given by coefficients per group
    /// element index.
    Elt from_coeffs(const std::vector<Int>& coeffs) const;

    Elt add(const Elt& a, const Elt& b) const;
    Elt sub(const Elt& a, const Elt& b) const;
    Elt neg(const Elt& a) const;
    Elt mul(const Elt& a, const Elt& b) const;
    Elt scale(const Elt& a, const Int& s) const;
    bool is_zero(const Elt& a) const;
    bool equal(const Elt& a, const Elt& b) const;

    /// True iff a is invertible (multiplication matrix invertible mod p).
    bool is_unit(const Elt& a) const;
    /// Solvability of a*t = b; fills t when solvable.
    bool divides(const Elt& a, const Elt& b, Elt* t = nullptr) const;

    /// Determinant of a square matrix over the algebra (Fitting ideal
    /// generator of the quadratic presentation it defines).
    Elt det(const std::vector<std::vector<Elt>>& mat) const;

  private:
    FinAbGroup g_;
    FinAbGroup::Elt c_;
    Int p_;
    int M_;
    Int pM_;
    std::vector<long> basis_;           // group indices of the chosen coset reps
    std::vector<long> slot_of_;         // group index -> basis slot
    std::vector<int> sign_of_;          // group index -> +1 / -1
    std::vector<std::vector<long>> mul_slot_;  // slot x slot -> slot
    std::vector<std::vector<int>> mul_sign_;
};

/// Row-reduced (Howell) basis of a Z/p^M submodule of Z/p^M^n spanned by rows.
/// Supports membership tests; spans are equal iff mutual membership holds.
class HowellForm {
  public:
    HowellForm(std::vector<std::vector<Int>> rows, Int p, int M);
    bool contains(std::vector<Int> v) const;
    const std::vector<std::vector<Int>>& rows() const { return rows_; }

  private:
    std::vector<std::vector<Int>> rows_;  // echelon rows, pivot = p^v at pivot col
    std::vector<size_t> pivot_col_;
    std::vector<long> pivot_val_;
    Int p_;
    int M_;
    Int pM_;
};

/// R_L presentation data: the big group g with conjugation c, the projection
/// onto G (by group-element index), the two Stickelberger inputs, and the
/// modulus p^M.
struct RLInstance {
    FinAbGroup g;
    FinAbGroup::Elt c;
    std::vector<long> proj;       // g index -> G index
    long G_order = 0;
    std::vector<Int> theta_H_G;   // coefficients over G element indices
    std::vector<Int> theta_L_g;   // coefficients over g element indices
    Int p;
    int M = 8;
};

struct RLResult {
    bool kernel_contains_I2 = false;
    bool kernel_equals_I2 = false;
    long kernel_rows = 0;
    long I2_rows = 0;
};

/// Kernel of the structure map R -> R[L]/(Theta_H L - Theta_L, L I, L^2, I^2),
/// compared against I^2. Computed by Howell reduction of the relation module
/// in R + R L. Throws modulus_too_small_error when pivots exhaust precision.
RLResult rl_quotient(const RLInstance& inst);

/// Stickelberger element: coefficient of each group element [b]^{-1} is the
/// smoothed partial zeta value of the class b at 0.
std::vector<Int> stickelberger(const QuadField& F, const NarrowClassGroup& G, const Int& p,
                               const Int& ell, MeasureConventions conv = {},
                               ZetaCache* cache = nullptr);

/// Group-ring element over Z/p^m approximating the derivative of the p-adic
/// Stickelberger function at 0: coefficients indexed by class, computed from
/// level-(m+1) measure data and p-adic logarithms of ideal-norm characters.
struct ThetaDerivative {
    std::vector<Int> coeffs;  // over class indices (group-element coefficients)
    Int modulus;              // p^m
    int m = 0;
};
ThetaDerivative theta_derivative(const QuadField& F, const NarrowClassGroup& G, const Int& p,
                                 const Int& ell, int m, MeasureConventions conv = {},
                                 ZetaCache* cache = nullptr);

/// Explicit generators realizing the invariant-factor decomposition of the
/// narrow class group, plus the exponent tuple of every class.
struct GroupBasis {
    std::vector<long> gens;                  // class indices
    std::vector<long> orders;                // matching invariant factors
    std::vector<std::vector<long>> decomp;   // class index -> exponents
};
GroupBasis group_basis(const NarrowClassGroup& G);

/// Character table data: value of character chi (indexed by exponent tuple
/// against GroupBasis) on a class, as a Teichmueller root of unity in F_p.
class CharacterTable {
  public:
    CharacterTable(const NarrowClassGroup& G, const PadicCtx& ctx);
    long count() const { return ncars_; }
    /// chi_t(class i)
    PadicElt value(long t, long i) const;
    bool is_odd(long t) const;

  private:
    const NarrowClassGroup* G_;
    const PadicCtx* ctx_;
    GroupBasis basis_;
    long ncars_ = 0;
    std::vector<PadicElt> roots_;             // primitive d_j-th roots per factor
    std::vector<std::vector<long>> char_exp_; // t -> exponents
};

/// Per-odd-character report of the rank-1 derivative identity: the valuation of
/// chi(Theta') + sum_b chi(b)^{-1} log_p Norm(conjugate_b).
struct GrossStarkReport {
    struct Row {
        long char_index;
        long theta_val;      // valuation of chi(Theta'), large value = below precision
        long residual_val;   // valuation of the residual, relative to modulus
        bool theta_nonzero;  // chi(Theta') != 0 at working precision
    };
    std::vector<Row> rows;
    long min_residual_val = 0;
    int m = 0;
};
GrossStarkReport gross_stark_residual(const QuadField& F, const NarrowClassGroup& G, const Int& p,
                                      const Int& ell, int m, const ConjugateSet& conj,
                                      const PadicCtx& ctx, MeasureConventions conv = {},
                                      ZetaCache* cache = nullptr);

/// Narrow ray class group of conductor p (as an abstract group), with the data
/// needed to build the R_L instance for the field: projection to the class
/// group, the conjugation element, and the level-1 ray Stickelberger element.
struct RayClassData {
    FinAbGroup g;
    FinAbGroup::Elt c;
    std::vector<long> proj;      // g index -> class index
    std::vector<Int> theta_L;    // coefficients over g element indices (ray Stickelberger at 0)
};
RayClassData ray_class_data(const QuadField& F, const NarrowClassGroup& G, const Int& p,
                            const Int& ell, MeasureConventions conv = {},
                            ZetaCache* cache = nullptr);

} // namespace bsu
