#include "bsu/recognize.hpp"

#include <sstream>

namespace bsu {

std::pair<Rat, Rat> RecognizedCoeff::display_parts(const QuadField& F, const Int& p) const {
    // (a + b*omega)/p^k = (2a + tb)/(2 p^k) + b/(2 p^k) * sqrt(D)
    Int pk = pow_ui(p, static_cast<unsigned long>(k));
    Rat den(Int(2) * pk);
    return {Rat(a + a + Int(F.t) * b) / den, Rat(b) / den};
}

std::string RecognizedCoeff::display(const QuadField& F, const Int& p) const {
    auto [r, s] = display_parts(F, p);
    std::ostringstream os;
    os << r.str();
    if (!s.is_zero()) os << (s.sign() >= 0 ? " + " : " - ") << (s.sign() >= 0 ? s : -s).str()
                         << "*sqrt(" << F.D.str() << ")";
    return os.str();
}

std::vector<PadicElt> elementary_symmetric(const std::vector<PadicElt>& values) {
    if (values.empty()) throw domain_error("elementary_symmetric: empty input");
    const PadicCtx& C = values.front().ctx();
    size_t n = values.size();
    // poly[j] = coefficient of X^{n-j} of prod (X - v_i), built incrementally:
    // e_j with sign folded; we return e_j = (-1)^j * coeff.
    std::vector<PadicElt> coeff(n + 1, PadicElt::zero(C, C.prec));
    coeff[0] = PadicElt::from_int(C, Int(1));
    size_t used = 0;
    for (const PadicElt& v : values) {
        ++used;
        for (size_t j = used; j >= 1; --j) {
            PadicElt t = coeff[j - 1] * v;
            coeff[j] = coeff[j] - t;
        }
    }
    // coeff[j] = (-1)^j e_j; extract e_j
    std::vector<PadicElt> out;
    out.reserve(n);
    for (size_t j = 1; j <= n; ++j) {
        out.push_back(j % 2 == 1 ? -coeff[j] : coeff[j]);
    }
    return out;
}

RecognizedCoeff recognize_coeff(const PadicElt& c, const QuadField& F, int max_k, int guard) {
    const PadicCtx& C = c.ctx();
    if (c.is_zero()) throw insufficient_precision_error("recognize_coeff: value is zero to precision");
    long v = c.val();
    int k = v < 0 ? static_cast<int>(-v) : 0;
    if (k > max_k)
        throw no_pure_p_denominator_error("recognize_coeff: denominator exponent exceeds bound");
    // integral part: p^k * c = unit (or p-multiple when v > 0)
    PadicElt ic = c.shift(k);
    // convert (1, w) coordinates to (1, omega): omega -> (t + w)/2 means
    // c0 + c1 w = (c0 - t*c1') + (2 c1') omega with c1' = c1 (branch folded in embed;
    // recognition inverts the context's embedding, so use the branch sign).
    long M_rec = std::min<long>(ic.abs_prec(), C.prec);
    if (M_rec <= guard + 2)
        throw insufficient_precision_error("recognize_coeff: no headroom at this precision");
    const Int& pM = C.pk(static_cast<int>(M_rec));
    // lift coordinates of ic mod p^M_rec
    Int c0 = mulmod(C.pk(static_cast<int>(ic.val())), ic.c0(), pM);
    Int c1 = mulmod(C.pk(static_cast<int>(ic.val())), ic.c1(), pM);
    // b = 2*c1/branch, a = c0 - t*c1  (from c0 + c1 w = a + b*(t + branch*w)/2)
    Int b = mod(Int(2 * C.branch) * c1, pM);
    Int a = mod(c0 - Int(F.t * C.branch) * c1, pM);
    auto balanced = [&](Int x) {
        if (x + x > pM) x -= pM;
        return x;
    };
    a = balanced(a);
    b = balanced(b);
    // headroom: |a|, |b| < p^{M_rec - guard}
    const Int& bound = C.pk(static_cast<int>(M_rec - guard));
    if (a.abs() >= bound || b.abs() >= bound)
        throw insufficient_precision_error("recognize_coeff: headroom violated, increase precision");
    return RecognizedCoeff{a, b, k};
}

MinPolyResult minimal_polynomial(const std::vector<PadicElt>& conjugates, const QuadField& F,
                                 int max_k, int guard) {
    const PadicCtx& C = conjugates.front().ctx();
    size_t n = conjugates.size();
    std::vector<PadicElt> e = elementary_symmetric(conjugates);
    MinPolyResult out;
    out.degree = static_cast<long>(n);
    out.coeffs.resize(n);
    long min_abs = C.prec;
    // coefficient of X^{n-j} is (-1)^j e_j
    for (size_t j = 1; j <= n; ++j) {
        PadicElt cj = (j % 2 == 1) ? -e[j - 1] : e[j - 1];
        out.coeffs[n - j] = recognize_coeff(cj, F, max_k, guard);
        if (!cj.is_zero()) min_abs = std::min(min_abs, cj.abs_prec());
    }
    out.precision_used = static_cast<int>(min_abs);
    // constant term must be 1 (the conjugate product pairs to 1)
    bool const_ok = out.coeffs[0] == RecognizedCoeff{Int(1), Int(0), 0};
    bool palin = true;
    for (size_t i = 1; i < n; ++i) {
        if (!(out.coeffs[i] == out.coeffs[n - i])) palin = false;
    }
    out.palindromic = palin && const_ok;
    if (!out.palindromic) {
        // Root-of-unity diagnostic: compare the (p^2-1)-th powers pairing.
        Int q = C.p * C.p - Int(1);
        bool power_pairs = true;
        PadicElt prod = PadicElt::from_int(C, Int(1));
        for (const PadicElt& v : conjugates) prod = prod * v.pow(q);
        PadicElt one = PadicElt::from_int(C, Int(1));
        if (!agree(prod, one, std::max<long>(4, min_abs / 2))) power_pairs = false;
        std::ostringstream os;
        os << "minimal_polynomial: validation failed ("
           << (const_ok ? "palindromy" : "constant term") << "); "
           << (power_pairs ? "(p^2-1)-th powers do pair (root-of-unity branch fired)"
                           : "powers do not pair either (precision exhaustion suspected)");
        throw palindromy_failure_error(os.str());
    }
    // headroom achieved: digits to spare over the guard
    int worst = 0;
    for (const auto& rc : out.coeffs) {
        int digits = 0;
        Int m = rc.a.abs() > rc.b.abs() ? rc.a.abs() : rc.b.abs();
        Int pk(1);
        while (pk <= m) {
            pk *= C.p;
            ++digits;
        }
        worst = std::max(worst, digits + rc.k);
    }
    out.headroom = out.precision_used - worst;
    return out;
}

} // namespace bsu
