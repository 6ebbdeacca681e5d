#include "bsu/padic.hpp"

#include <sstream>

namespace bsu {

PadicCtx PadicCtx::create(const Int& p, int prec, const Int& D, int branch) {
    if (!p.odd() || !p.is_probab_prime() || p <= Int(2))
        throw domain_error("PadicCtx: p must be an odd prime");
    if (prec < 1) throw domain_error("PadicCtx: precision must be positive");
    if (divisible(D, p)) throw ramified_error("PadicCtx: p divides D");
    if (kronecker(D, p) != -1)
        throw not_inert_error("PadicCtx: D is a square mod p (p not inert)");
    PadicCtx C;
    C.p = p;
    C.prec = prec;
    C.D = D;
    C.branch = branch >= 0 ? +1 : -1;
    C.ppow.reserve(static_cast<size_t>(prec) + 1);
    Int pk(1);
    for (int i = 0; i <= prec; ++i) {
        C.ppow.push_back(pk);
        pk *= p;
    }
    return C;
}

PadicElt::PadicElt(const PadicCtx& C, long val, int rel, Int c0, Int c1)
    : ctx_(&C), val_(val), rel_(rel), c0_(std::move(c0)), c1_(std::move(c1)) {}

PadicElt PadicElt::zero(const PadicCtx& C, int abs_prec) {
    return PadicElt(C, abs_prec, 0, Int(0), Int(0));
}

PadicElt PadicElt::normalized(const PadicCtx& C, long val, int rel, Int c0, Int c1) {
    // Strip p-powers common to both coordinates into val, reducing relative
    // precision accordingly (cancellation loses absolute digits, never gains).
    if (rel <= 0) return PadicElt::zero(C, static_cast<int>(val + std::max(rel, 0)));
    const Int& pk = C.pk(rel);
    c0 = mod(c0, pk);
    c1 = mod(c1, pk);
    if (c0.is_zero() && c1.is_zero()) return PadicElt::zero(C, static_cast<int>(val) + rel);
    long v = rel;
    if (!c0.is_zero()) v = std::min(v, c0.valuation(C.p));
    if (!c1.is_zero()) v = std::min(v, c1.valuation(C.p));
    if (v > 0) {
        const Int& pv = C.pk(static_cast<int>(v));
        c0 = divexact(c0, pv);
        c1 = divexact(c1, pv);
        val += v;
        rel -= static_cast<int>(v);
        const Int& pk2 = C.pk(rel);
        c0 = mod(c0, pk2);
        c1 = mod(c1, pk2);
    }
    return PadicElt(C, val, rel, std::move(c0), std::move(c1));
}

PadicElt PadicElt::from_int(const PadicCtx& C, const Int& v) {
    return normalized(C, 0, C.prec, v, Int(0));
}

PadicElt PadicElt::from_rat(const PadicCtx& C, const Rat& v) {
    if (v.is_zero()) return zero(C, C.prec);
    long vd = 0;
    Int num = v.num(), den = v.den();
    // pull p-powers out of numerator and denominator
    Int unit_num, unit_den;
    long vn = num.remove(C.p, unit_num);
    long dn = den.remove(C.p, unit_den);
    vd = vn - dn;
    Int c0 = mulmod(mod(unit_num, C.pk(C.prec)), invmod(mod(unit_den, C.pk(C.prec)), C.pk(C.prec)),
                    C.pk(C.prec));
    return PadicElt(C, vd, C.prec, std::move(c0), Int(0));
}

PadicElt PadicElt::from_pair(const PadicCtx& C, const Rat& c0, const Rat& c1) {
    PadicElt a = from_rat(C, c0);
    PadicElt b = from_rat(C, c1);
    // b * w
    PadicElt bw(C, b.val_, b.rel_, Int(0), b.c0_);
    if (b.is_zero()) bw = zero(C, static_cast<int>(b.val_));
    return a + bw;
}

PadicElt PadicElt::embed(const PadicCtx& C, const QuadField& F, const QuadElt& v) {
    if (F.D != C.D) throw domain_error("embed: field/context mismatch");
    // omega = (t + branch*w)/2
    Rat half_t = Rat(Int(F.t), Int(2));
    Rat c0 = v.x + v.y * half_t;
    Rat c1 = v.y * Rat(Int(C.branch), Int(2));
    return from_pair(C, c0, c1);
}

long PadicElt::val() const {
    if (rel_ == 0) throw domain_error("PadicElt: valuation of (precision-)zero");
    return val_;
}

PadicElt operator+(const PadicElt& a, const PadicElt& b) {
    const PadicCtx& C = a.ctx();
    if (a.is_zero() && b.is_zero())
        return PadicElt::zero(C, static_cast<int>(std::min(a.abs_prec(), b.abs_prec())));
    if (a.is_zero()) {
        long abs = std::min(a.abs_prec(), b.abs_prec());
        int rel = static_cast<int>(abs - b.val_);
        if (rel <= 0) return PadicElt::zero(C, static_cast<int>(abs));
        return PadicElt::normalized(C, b.val_, std::min(rel, b.rel_), b.c0_, b.c1_);
    }
    if (b.is_zero()) return b + a;
    long v = std::min(a.val_, b.val_);
    long abs = std::min(a.abs_prec(), b.abs_prec());
    int rel = static_cast<int>(abs - v);
    if (rel <= 0) return PadicElt::zero(C, static_cast<int>(abs));
    const Int& pk = C.pk(rel);
    Int sa0 = a.c0_, sa1 = a.c1_, sb0 = b.c0_, sb1 = b.c1_;
    if (a.val_ > v) {
        const Int& sf = C.pk(static_cast<int>(a.val_ - v));
        sa0 = sa0 * sf;
        sa1 = sa1 * sf;
    }
    if (b.val_ > v) {
        const Int& sf = C.pk(static_cast<int>(b.val_ - v));
        sb0 = sb0 * sf;
        sb1 = sb1 * sf;
    }
    return PadicElt::normalized(C, v, rel, mod(sa0 + sb0, pk), mod(sa1 + sb1, pk));
}

PadicElt operator-(const PadicElt& a) {
    if (a.is_zero()) return a;
    return PadicElt(a.ctx(), a.val_, a.rel_, a.c0_.is_zero() ? Int(0) : a.ctx().pk(a.rel_) - a.c0_,
                    a.c1_.is_zero() ? Int(0) : a.ctx().pk(a.rel_) - a.c1_);
}

PadicElt operator-(const PadicElt& a, const PadicElt& b) { return a + (-b); }

PadicElt operator*(const PadicElt& a, const PadicElt& b) {
    const PadicCtx& C = a.ctx();
    if (a.is_zero() || b.is_zero()) {
        // O(p^A)*O(p^B)-style bound: val of product >= val_a + val_b (using known vals)
        long va = a.is_zero() ? a.abs_prec() : a.val_;
        long vb = b.is_zero() ? b.abs_prec() : b.val_;
        return PadicElt::zero(C, static_cast<int>(va + vb));
    }
    int rel = std::min(a.rel_, b.rel_);
    const Int& pk = C.pk(rel);
    // (a0 + a1 w)(b0 + b1 w) = a0b0 + a1b1 D + (a0b1 + a1b0) w
    Int c0 = a.c0_ * b.c0_ + a.c1_ * b.c1_ * C.D;
    Int c1 = a.c0_ * b.c1_ + a.c1_ * b.c0_;
    return PadicElt(C, a.val_ + b.val_, rel, mod(c0, pk), mod(c1, pk));
}

PadicElt PadicElt::inv() const {
    if (is_zero()) throw domain_error("PadicElt: inverse of zero");
    const PadicCtx& C = *ctx_;
    const Int& pk = C.pk(rel_);
    // 1/(c0 + c1 w) = (c0 - c1 w) / (c0^2 - c1^2 D)
    Int nrm = mod(c0_ * c0_ - c1_ * c1_ * C.D, pk);
    Int ninv = invmod(nrm, pk);  // unit: (c0,c1) not both divisible by p and D non-square mod p
    Int r0 = mulmod(c0_, ninv, pk);
    Int r1 = mod(-mulmod(c1_, ninv, pk), pk);
    return PadicElt(C, -val_, rel_, std::move(r0), std::move(r1));
}

PadicElt PadicElt::shift(long e) const {
    if (is_zero()) return PadicElt::zero(*ctx_, static_cast<int>(abs_prec() + e));
    return PadicElt(*ctx_, val_ + e, rel_, c0_, c1_);
}

PadicElt PadicElt::galois_conj() const {
    if (is_zero()) return *this;
    Int c1 = c1_.is_zero() ? Int(0) : ctx_->pk(rel_) - c1_;
    return PadicElt(*ctx_, val_, rel_, c0_, std::move(c1));
}

PadicElt PadicElt::pow(const Int& e) const {
    const PadicCtx& C = *ctx_;
    if (e.is_zero()) return from_int(C, Int(1)).truncated(rel_ == 0 ? C.prec : rel_);
    if (is_zero()) {
        if (e.sign() < 0) throw domain_error("PadicElt: negative power of zero");
        long bound = abs_prec() * std::min(e, Int(static_cast<long>(C.prec))).to_long();
        return zero(C, static_cast<int>(std::min<long>(bound, C.prec)));
    }
    PadicElt base = *this;
    Int m = e;
    if (m.sign() < 0) {
        base = base.inv();
        m = -m;
    }
    PadicElt acc = from_int(C, Int(1)).truncated(base.rel_);
    // left-to-right binary powering
    long nb = static_cast<long>(m.bits());
    for (long i = nb - 1; i >= 0; --i) {
        acc = acc * acc;
        if (mpz_tstbit(m.raw(), static_cast<mp_bitcnt_t>(i))) acc = acc * base;
    }
    return acc;
}

PadicElt PadicElt::truncated(int digits) const {
    if (is_zero()) return *this;
    if (digits >= rel_) return *this;
    return normalized(*ctx_, val_, digits, c0_, c1_);
}

bool agree(const PadicElt& a, const PadicElt& b, long abs_prec) {
    PadicElt d = a - b;
    return d.is_zero() ? d.abs_prec() >= abs_prec : d.val() >= abs_prec;
}

std::string PadicElt::str() const {
    std::ostringstream os;
    if (is_zero()) {
        os << "O(p^" << abs_prec() << ")";
        return os.str();
    }
    os << "p^" << val_ << "*(" << c0_.str() << " + " << c1_.str() << "*w) + O(p^" << abs_prec()
       << ")";
    return os.str();
}

PadicElt teichmuller(const PadicElt& x) {
    if (x.is_zero() || x.val() != 0) throw not_unit_error("teichmuller: not a unit");
    const PadicCtx& C = x.ctx();
    // Newton iteration on z^{p^2-1} = 1 starting from x; quadratic convergence.
    Int q = C.p * C.p - Int(1);
    PadicElt z = x;
    PadicElt one = PadicElt::from_int(C, Int(1)).truncated(x.rel_prec());
    PadicElt iq = PadicElt::from_rat(C, Rat(Int(1), q)).truncated(x.rel_prec());
    for (int i = 0; i < 4 * x.rel_prec() + 8; ++i) {
        PadicElt zq = z.pow(q);             // = 1 + e, val(e) >= 1
        PadicElt e = zq - one;
        if (e.is_zero() || e.val() >= x.rel_prec()) break;
        // z <- z * (1 - e/(q * zq))
        PadicElt corr = one - e * iq * zq.inv();
        z = z * corr;
    }
    return z;
}

PadicElt log_p(const PadicElt& x) {
    if (x.is_zero()) throw domain_error("log_p of zero");
    const PadicCtx& C = x.ctx();
    // Iwasawa convention: drop the p-power slot, then split off the
    // Teichmueller part; log(<x>) with <x> = 1 mod p.
    PadicElt unit = x.shift(-x.val());
    PadicElt u = unit / teichmuller(unit);
    PadicElt one = PadicElt::from_int(C, Int(1)).truncated(u.rel_prec());
    PadicElt t = u - one;  // val >= 1
    if (!t.is_zero() && t.val() < 1) throw domain_error("log_p: principal part not 1 mod p");
    int target = static_cast<int>(u.abs_prec());
    PadicElt acc = PadicElt::zero(C, target);
    PadicElt tp = t;  // t^m
    long vt = t.is_zero() ? t.abs_prec() : t.val();
    if (t.is_zero()) return acc;
    for (long m = 1;; ++m) {
        // term t^m / m, sign (-1)^{m+1}
        long vterm = vt * m - Int(m).valuation(C.p);
        if (vterm >= target) break;
        PadicElt term = tp * PadicElt::from_rat(C, Rat(Int(1), Int(m))).truncated(u.rel_prec());
        acc = (m % 2 == 1) ? acc + term : acc - term;
        tp = tp * t;
        if (tp.is_zero()) break;
    }
    return acc.truncated(static_cast<int>(target - (acc.is_zero() ? 0 : acc.val())));
}

PadicElt exp_p(const PadicElt& y) {
    const PadicCtx& C = y.ctx();
    PadicElt one = PadicElt::from_int(C, Int(1));
    if (y.is_zero()) return one.truncated(static_cast<int>(y.abs_prec()));
    if (y.val() < 1) throw domain_error("exp_p: needs valuation >= 1");
    long target = y.abs_prec();
    PadicElt acc = one.truncated(static_cast<int>(target));
    PadicElt term = one.truncated(static_cast<int>(target));
    long vy = y.val();
    long pl = C.p.to_long();
    auto vfact = [&](long m) {  // v_p(m!) = (m - s_p(m)) / (p-1)
        long s = 0;
        for (long t = m; t > 0; t /= pl) s += t % pl;
        return (m - s) / (pl - 1);
    };
    for (long m = 1;; ++m) {
        long vterm = vy * m - vfact(m);
        if (vterm >= target) break;
        term = term * y;
        PadicElt im = PadicElt::from_rat(C, Rat(Int(1), Int(m)));
        term = term * im;
        acc = acc + term;
    }
    return acc;
}

PadicElt teichmuller_generator(const PadicCtx& C) {
    // smallest (c0, c1) lexicographically whose residue generates F_{p^2}^*
    Int p = C.p;
    Int order = p * p - Int(1);
    // factor the order
    std::vector<Int> primes;
    Int m = order;
    for (Int d(2); d * d <= m; d += 1) {
        if (divisible(m, d)) {
            primes.push_back(d);
            while (divisible(m, d)) m = divexact(m, d);
        }
    }
    if (m > Int(1)) primes.push_back(m);
    for (Int c0(0); c0 < p; c0 += 1) {
        for (Int c1(0); c1 < p; c1 += 1) {
            if (c1.is_zero()) continue;  // elements of F_p cannot generate F_{p^2}^*
            PadicElt cand = PadicElt::from_pair(C, Rat(c0), Rat(c1));
            bool gen = true;
            for (const Int& q : primes) {
                // cand^{order/q} = 1 mod p iff not a generator
                PadicElt t = cand.truncated(1).pow(divexact(order, q));
                PadicElt one = PadicElt::from_int(C, Int(1)).truncated(1);
                if (agree(t, one, 1)) {
                    gen = false;
                    break;
                }
            }
            if (gen) return teichmuller(cand);
        }
    }
    throw domain_error("teichmuller_generator: none found");
}

} // namespace bsu
