#pragma once

#include <string>
#include <vector>

#include "bsu/padic.hpp"

namespace bsu {

/// A recognized coefficient (a + b*omega)/p^k with a, b integers, k >= 0
/// minimal (a, b not both divisible by p when k > 0).
struct RecognizedCoeff {
    Int a, b;
    int k = 0;
    friend bool operator==(const RecognizedCoeff& u, const RecognizedCoeff& v) {
        return u.a == v.a && u.b == v.b && u.k == v.k;
    }
    /// Value in the rational + rational*sqrt(D) basis: two reduced fractions.
    std::pair<Rat, Rat> display_parts(const QuadField& F, const Int& p) const;
    std::string display(const QuadField& F, const Int& p) const;
};

/// Monic polynomial with recognized coefficients; coeffs[i] belongs to X^i,
/// i < degree (leading coefficient 1 implied).
struct MinPolyResult {
    long degree = 0;
    std::vector<RecognizedCoeff> coeffs;
    int precision_used = 0;   // absolute digits available at recognition
    int headroom = 0;         // digits of slack against the headroom bound
    bool palindromic = true;
};

/// Elementary symmetric functions e_1..e_n of the values, via the stable
/// expansion of prod (X - v_i).
std::vector<PadicElt> elementary_symmetric(const std::vector<PadicElt>& values);

/// Balanced-lift recognition of c as (a + b*omega)/p^k with k <= max_k minimal
/// and |a|, |b| < p^{M_rec - guard}. Throws insufficient_precision_error when
/// the headroom check fails and no_pure_p_denominator_error when val(c) < -max_k.
RecognizedCoeff recognize_coeff(const PadicElt& c, const QuadField& F, int max_k, int guard = 10);

/// Assembles and validates the minimal polynomial of the unit from its
/// conjugates: recognizes all coefficients, checks constant term 1 and
/// palindromy. On failure, checks whether the (p^2-1)-th powers pair up
/// (root-of-unity ambiguity) and reports which branch fired in the message.
MinPolyResult minimal_polynomial(const std::vector<PadicElt>& conjugates, const QuadField& F,
                                 int max_k, int guard = 10);

} // namespace bsu
