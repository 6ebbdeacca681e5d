#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bsu/errors.hpp"
#include "bsu/int.hpp"

namespace bsu {

struct QuadField;

/// Element x + y*omega of a real quadratic field, exact rational coordinates
/// in the integral basis (1, omega).
struct QuadElt {
    Rat x, y;

    QuadElt() = default;
    QuadElt(Rat x_, Rat y_) : x(std::move(x_)), y(std::move(y_)) {}
    QuadElt(long x_, long y_) : x(x_), y(y_) {}

    bool is_zero() const { return x.is_zero() && y.is_zero(); }
    bool is_rational() const { return y.is_zero(); }
    friend bool operator==(const QuadElt& a, const QuadElt& b) { return a.x == b.x && a.y == b.y; }
    friend bool operator!=(const QuadElt& a, const QuadElt& b) { return !(a == b); }
    std::string str() const { return x.str() + " + " + y.str() + "*w"; }
};

/// Integral ideal in two-row Hermite normal form: Z-span of a*1 and b + c*omega,
/// with c | a, c | b, 0 <= b < a. Primitive ideals have c = 1.
struct Ideal {
    Int a, b, c;

    Int norm() const { return a * c; }
    bool is_primitive() const { return c == Int(1); }
};

/// Real quadratic field Q(sqrt(D)) for a fundamental discriminant D > 1.
/// omega = (1+sqrt(D))/2 when D = 1 mod 4, else sqrt(D/4); omega^2 = t*omega - n.
struct QuadField {
    Int D;
    long t = 0;  // trace of omega
    Int n;       // norm of omega
    QuadElt eps_plus;  // totally positive fundamental unit, > 1 in the first embedding

    // --- element arithmetic in the (1, omega) basis ---
    QuadElt add(const QuadElt& u, const QuadElt& v) const { return {u.x + v.x, u.y + v.y}; }
    QuadElt sub(const QuadElt& u, const QuadElt& v) const { return {u.x - v.x, u.y - v.y}; }
    QuadElt neg(const QuadElt& u) const { return {-u.x, -u.y}; }
    QuadElt mul(const QuadElt& u, const QuadElt& v) const {
        // (x1 + y1 w)(x2 + y2 w), w^2 = t w - n
        Rat yy = u.y * v.y;
        return {u.x * v.x - Rat(n) * yy, u.x * v.y + u.y * v.x + Rat(t) * yy};
    }
    QuadElt mul_rat(const QuadElt& u, const Rat& r) const { return {u.x * r, u.y * r}; }
    QuadElt conj(const QuadElt& u) const { return {u.x + Rat(t) * u.y, -u.y}; }
    Rat norm(const QuadElt& u) const { return u.x * u.x + Rat(t) * u.x * u.y + Rat(n) * u.y * u.y; }
    Rat trace(const QuadElt& u) const { return u.x + u.x + Rat(t) * u.y; }
    QuadElt inv(const QuadElt& u) const {
        Rat nm = norm(u);
        if (nm.is_zero()) throw domain_error("QuadField: inverse of zero");
        return mul_rat(conj(u), Rat(1) / nm);
    }
    QuadElt pow(QuadElt u, long e) const;
    QuadElt one() const { return {1, 0}; }
    QuadElt omega() const { return {0, 1}; }
    /// sqrt(D) as a field element: 2*omega - t.
    QuadElt sqrtD() const { return {Rat(-t), Rat(2)}; }

    /// Exact sign of the image of u under the first embedding (sqrt(D) -> +sqrt(D)).
    int sign_embed1(const QuadElt& u) const;
    /// Second embedding is the conjugate one.
    int sign_embed2(const QuadElt& u) const { return sign_embed1(conj(u)); }
    bool is_totally_positive(const QuadElt& u) const {
        return sign_embed1(u) > 0 && sign_embed2(u) > 0;
    }
    /// Compare embeddings: sign of embed1(u) - embed1(v).
    int cmp_embed1(const QuadElt& u, const QuadElt& v) const { return sign_embed1(sub(u, v)); }

    // --- ideals ---
    /// The ring of integers as an ideal.
    Ideal ring_ideal() const { return {Int(1), Int(0), Int(1)}; }
    /// Validates HNF/closure and normalizes b mod a.
    Ideal make_ideal(Int a, Int b, Int c) const;
    /// Principal ideal generated by an integral element.
    Ideal principal_ideal(const QuadElt& g) const;
    Ideal mul_ideal(const Ideal& I, const Ideal& J) const;
    /// Primitive prime ideals above a rational prime q: (q, omega - r) for roots r
    /// of x^2 - t x + n mod q. Inert primes yield the non-primitive (q).
    std::vector<Ideal> primes_above(const Int& q) const;
    /// Z-basis of the fractional ideal I^{-1} as field elements.
    std::pair<QuadElt, QuadElt> inverse_ideal_basis(const Ideal& I) const;
    /// Z-basis of I * (Z f1 + Z f2) for a fractional lattice (f1, f2).
    std::pair<QuadElt, QuadElt> mul_ideal_lattice(const Ideal& I, const QuadElt& f1,
                                                  const QuadElt& f2) const;
    /// True iff the Z-span of a*1, b+c*omega is closed under multiplication by omega.
    bool is_omega_stable(const Int& a, const Int& b, const Int& c) const;
};

/// Builds the field, checking that D is a real fundamental discriminant.
/// Throws not_real_error / not_fundamental_error otherwise.
QuadField make_field(const Int& D);

/// Totally positive fundamental unit via the continued fraction of omega;
/// squares the fundamental unit when its norm is -1.
QuadElt totally_positive_fundamental_unit(const QuadField& F);

/// Brute-force search for the fundamental unit (test oracle): smallest unit > 1
/// found by enumerating y-coordinates up to the given bound.
std::optional<QuadElt> fundamental_unit_bruteforce(const QuadField& F, long ybound);

/// True iff the odd prime p (not dividing D) is inert; throws ramified_error if p | D.
bool is_inert(const QuadField& F, const Int& p);

} // namespace bsu
