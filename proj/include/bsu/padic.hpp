#pragma once

#include <memory>
#include <string>
#include <vector>

#include "bsu/int.hpp"
#include "bsu/quadfield.hpp"

namespace bsu {

/// Context for the degree-2 unramified extension of Q_p realized as
/// Q_p[w]/(w^2 - D), at fixed working precision. Requires (D|p) = -1 so the
/// residue field is F_{p^2}. `branch` selects which square root of D the
/// embedding of the field sends sqrt(D) to (w vs -w), i.e. which prime above p
/// in the splitting field is used.
struct PadicCtx {
    Int p;
    int prec;       // working precision in p-adic digits
    Int D;
    int branch = +1;  // +1: sqrt(D) -> w, -1: sqrt(D) -> -w
    std::vector<Int> ppow;  // ppow[i] = p^i, i <= prec

    static PadicCtx create(const Int& p, int prec, const Int& D, int branch = +1);
    const Int& pk(int i) const { return ppow.at(static_cast<size_t>(i)); }
};

/// Element p^val * (c0 + c1 w) with the unit part known to `rel` digits of
/// relative precision (c0, c1 canonical mod p^rel, not both divisible by p
/// unless rel = 0). rel = 0 encodes "zero to absolute precision val":
/// the element is O(p^val).
class PadicElt {
  public:
    PadicElt() = default;

    static PadicElt zero(const PadicCtx& C, int abs_prec);
    /// Canonicalize raw data p^val*(c0 + c1 w) known to `rel` relative digits.
    static PadicElt normalized(const PadicCtx& C, long val, int rel, Int c0, Int c1);
    static PadicElt from_int(const PadicCtx& C, const Int& v);             // full working precision
    static PadicElt from_rat(const PadicCtx& C, const Rat& v);             // denominator prime to p
    static PadicElt from_pair(const PadicCtx& C, const Rat& c0, const Rat& c1);
    /// Embedding of the quadratic field with omega -> (t + branch*w)/2.
    static PadicElt embed(const PadicCtx& C, const QuadField& F, const QuadElt& v);

    bool is_zero() const { return rel_ == 0; }
    long val() const;               // valuation; throws on (precision-)zero
    int rel_prec() const { return rel_; }
    long abs_prec() const { return val_ + rel_; }
    const Int& c0() const { return c0_; }
    const Int& c1() const { return c1_; }
    const PadicCtx& ctx() const { return *ctx_; }

    friend PadicElt operator+(const PadicElt& a, const PadicElt& b);
    friend PadicElt operator-(const PadicElt& a, const PadicElt& b);
    friend PadicElt operator*(const PadicElt& a, const PadicElt& b);
    friend PadicElt operator-(const PadicElt& a);
    PadicElt inv() const;                       // unit inverse
    friend PadicElt operator/(const PadicElt& a, const PadicElt& b) { return a * b.inv(); }

    /// Multiply by p^e (exact valuation shift).
    PadicElt shift(long e) const;
    /// Galois conjugate c0 - c1 w (the Frobenius of the unramified quadratic).
    PadicElt galois_conj() const;
    /// Norm to Q_p: x * conj(x).
    PadicElt norm_to_qp() const { return *this * galois_conj(); }
    bool is_qp_rational() const { return c1_.is_zero(); }

    PadicElt pow(const Int& e) const;

    /// Truncate to at most `digits` of relative precision.
    PadicElt truncated(int digits) const;

    /// Equal as far as both are known (agreement to min abs precision).
    friend bool agree(const PadicElt& a, const PadicElt& b, long abs_prec);

    std::string str() const;

  private:
    const PadicCtx* ctx_ = nullptr;
    long val_ = 0;
    int rel_ = 0;
    Int c0_, c1_;

    PadicElt(const PadicCtx& C, long val, int rel, Int c0, Int c1);
};

/// Teichmueller lift: the unique root of unity of order dividing p^2-1
/// congruent to the unit x mod p.
PadicElt teichmuller(const PadicElt& x);

/// Iwasawa p-adic logarithm: log of the unit part's principal factor
/// <x> = x / teichmuller(x); the p-power slot is discarded (log p = 0).
PadicElt log_p(const PadicElt& x);

/// Exponential, requires val(y) >= 1 (p odd).
PadicElt exp_p(const PadicElt& y);

/// A generator of the Teichmueller roots of unity (order p^2 - 1), chosen as
/// the lift of the lexicographically smallest generator of the residue field.
PadicElt teichmuller_generator(const PadicCtx& C);

} // namespace bsu
