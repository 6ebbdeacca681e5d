#pragma once

#include <gmp.h>

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>

namespace bsu {

/// Arbitrary-precision integer, a value-semantics wrapper over GMP's mpz.
class Int {
  public:
    Int() { mpz_init(z_); }
    Int(long v) { mpz_init_set_si(z_, v); }            // NOLINT(google-explicit-constructor)
    Int(unsigned long v) { mpz_init_set_ui(z_, v); }   // NOLINT(google-explicit-constructor)
    Int(int v) { mpz_init_set_si(z_, v); }             // NOLINT(google-explicit-constructor)
    explicit Int(const std::string& s) {
        if (mpz_init_set_str(z_, s.c_str(), 10) != 0)
            throw std::invalid_argument("Int: bad decimal string: " + s);
    }
    Int(const Int& o) { mpz_init_set(z_, o.z_); }
    Int(Int&& o) noexcept {
        mpz_init(z_);
        mpz_swap(z_, o.z_);
    }
    Int& operator=(const Int& o) {
        if (this != &o) mpz_set(z_, o.z_);
        return *this;
    }
    Int& operator=(Int&& o) noexcept {
        mpz_swap(z_, o.z_);
        return *this;
    }
    ~Int() { mpz_clear(z_); }

    mpz_ptr raw() { return z_; }
    mpz_srcptr raw() const { return z_; }

    friend Int operator+(const Int& a, const Int& b) { Int r; mpz_add(r.z_, a.z_, b.z_); return r; }
    friend Int operator-(const Int& a, const Int& b) { Int r; mpz_sub(r.z_, a.z_, b.z_); return r; }
    friend Int operator*(const Int& a, const Int& b) { Int r; mpz_mul(r.z_, a.z_, b.z_); return r; }
    friend Int operator-(const Int& a) { Int r; mpz_neg(r.z_, a.z_); return r; }
    Int& operator+=(const Int& b) { mpz_add(z_, z_, b.z_); return *this; }
    Int& operator-=(const Int& b) { mpz_sub(z_, z_, b.z_); return *this; }
    Int& operator*=(const Int& b) { mpz_mul(z_, z_, b.z_); return *this; }
    Int& operator*=(long v) { mpz_mul_si(z_, z_, v); return *this; }
    void add_mul(const Int& a, const Int& b) { mpz_addmul(z_, a.raw(), b.raw()); }
    void sub_mul(const Int& a, const Int& b) { mpz_submul(z_, a.raw(), b.raw()); }

    friend bool operator==(const Int& a, const Int& b) { return mpz_cmp(a.z_, b.z_) == 0; }
    friend bool operator!=(const Int& a, const Int& b) { return !(a == b); }
    friend bool operator<(const Int& a, const Int& b) { return mpz_cmp(a.z_, b.z_) < 0; }
    friend bool operator<=(const Int& a, const Int& b) { return mpz_cmp(a.z_, b.z_) <= 0; }
    friend bool operator>(const Int& a, const Int& b) { return mpz_cmp(a.z_, b.z_) > 0; }
    friend bool operator>=(const Int& a, const Int& b) { return mpz_cmp(a.z_, b.z_) >= 0; }
    friend bool operator==(const Int& a, long b) { return mpz_cmp_si(a.z_, b) == 0; }
    friend bool operator!=(const Int& a, long b) { return mpz_cmp_si(a.z_, b) != 0; }

    int sign() const { return mpz_sgn(z_); }
    bool is_zero() const { return mpz_sgn(z_) == 0; }
    bool is_one() const { return mpz_cmp_ui(z_, 1) == 0; }
    bool odd() const { return mpz_odd_p(z_) != 0; }

    Int abs() const { Int r; mpz_abs(r.z_, z_); return r; }

    /// Floor division (quotient rounded toward -inf).
    friend Int fdiv_q(const Int& a, const Int& b) { Int r; mpz_fdiv_q(r.z_, a.z_, b.z_); return r; }
    friend Int fdiv_r(const Int& a, const Int& b) { Int r; mpz_fdiv_r(r.z_, a.z_, b.z_); return r; }
    friend Int cdiv_q(const Int& a, const Int& b) { Int r; mpz_cdiv_q(r.z_, a.z_, b.z_); return r; }
    /// Exact division; aborts if not divisible (debug responsibility of caller).
    friend Int divexact(const Int& a, const Int& b) { Int r; mpz_divexact(r.z_, a.z_, b.z_); return r; }
    friend bool divisible(const Int& a, const Int& b) { return mpz_divisible_p(a.z_, b.z_) != 0; }

    friend Int gcd(const Int& a, const Int& b) { Int r; mpz_gcd(r.z_, a.z_, b.z_); return r; }
    friend Int lcm(const Int& a, const Int& b) { Int r; mpz_lcm(r.z_, a.z_, b.z_); return r; }
    /// g = gcd(a,b) together with u,v solving u*a + v*b = g.
    friend Int gcdext(const Int& a, const Int& b, Int& u, Int& v) {
        Int g;
        mpz_gcdext(g.z_, u.z_, v.z_, a.z_, b.z_);
        return g;
    }

    friend Int pow_ui(const Int& a, unsigned long e) { Int r; mpz_pow_ui(r.z_, a.z_, e); return r; }
    static Int pow2(unsigned long e) { Int r; mpz_setbit(r.z_, e); return r; }

    friend Int mod(const Int& a, const Int& m) { Int r; mpz_mod(r.z_, a.z_, m.z_); return r; }
    friend Int mulmod(const Int& a, const Int& b, const Int& m) {
        Int r;
        mpz_mul(r.z_, a.z_, b.z_);
        mpz_mod(r.z_, r.z_, m.z_);
        return r;
    }
    friend Int powmod(const Int& a, const Int& e, const Int& m) {
        Int r;
        mpz_powm(r.z_, a.z_, e.z_, m.z_);
        return r;
    }
    /// Inverse of a mod m; throws if not invertible.
    friend Int invmod(const Int& a, const Int& m) {
        Int r;
        if (mpz_invert(r.z_, a.z_, m.z_) == 0)
            throw std::domain_error("invmod: not invertible");
        return r;
    }

    bool is_perfect_square() const { return mpz_perfect_square_p(z_) != 0; }
    Int isqrt() const { Int r; mpz_sqrt(r.z_, z_); return r; }
    bool is_probab_prime() const { return mpz_probab_prime_p(z_, 30) != 0; }

    /// Exponent of the largest power of p dividing *this (0 for units; throws on zero).
    long valuation(const Int& p) const {
        if (is_zero()) throw std::domain_error("valuation of zero");
        Int r;
        return static_cast<long>(mpz_remove(r.z_, z_, p.raw()));
    }
    /// Same, and divides the power out into q.
    long remove(const Int& p, Int& q) const {
        return static_cast<long>(mpz_remove(q.z_, z_, p.raw()));
    }

    long to_long() const {
        if (!mpz_fits_slong_p(z_)) throw std::overflow_error("Int::to_long overflow");
        return mpz_get_si(z_);
    }
    bool fits_long() const { return mpz_fits_slong_p(z_) != 0; }
    double to_double() const { return mpz_get_d(z_); }
    size_t bits() const { return mpz_sizeinbase(z_, 2); }

    std::string str() const {
        char* s = mpz_get_str(nullptr, 10, z_);
        std::string out(s);
        void (*freefn)(void*, size_t);
        mp_get_memory_functions(nullptr, nullptr, &freefn);
        freefn(s, out.size() + 1);
        return out;
    }

  private:
    mpz_t z_;
};

std::ostream& operator<<(std::ostream& os, const Int& v);

inline int kronecker(const Int& a, const Int& b) { return mpz_kronecker(a.raw(), b.raw()); }

/// Exact rational, canonical form (reduced, positive denominator).
class Rat {
  public:
    Rat() { mpq_init(q_); }
    Rat(long v) { mpq_init(q_); mpq_set_si(q_, v, 1); }  // NOLINT(google-explicit-constructor)
    Rat(const Int& n) {                                  // NOLINT(google-explicit-constructor)
        mpq_init(q_);
        mpq_set_z(q_, n.raw());
    }
    Rat(const Int& n, const Int& d) {
        if (d.is_zero()) throw std::domain_error("Rat: zero denominator");
        mpq_init(q_);
        mpz_set(mpq_numref(q_), n.raw());
        mpz_set(mpq_denref(q_), d.raw());
        mpq_canonicalize(q_);
    }
    Rat(long n, long d) : Rat(Int(n), Int(d)) {}
    Rat(const Rat& o) { mpq_init(q_); mpq_set(q_, o.q_); }
    Rat(Rat&& o) noexcept {
        mpq_init(q_);
        mpq_swap(q_, o.q_);
    }
    Rat& operator=(const Rat& o) {
        if (this != &o) mpq_set(q_, o.q_);
        return *this;
    }
    Rat& operator=(Rat&& o) noexcept {
        mpq_swap(q_, o.q_);
        return *this;
    }
    ~Rat() { mpq_clear(q_); }

    mpq_ptr raw() { return q_; }
    mpq_srcptr raw() const { return q_; }

    friend Rat operator+(const Rat& a, const Rat& b) { Rat r; mpq_add(r.q_, a.q_, b.q_); return r; }
    friend Rat operator-(const Rat& a, const Rat& b) { Rat r; mpq_sub(r.q_, a.q_, b.q_); return r; }
    friend Rat operator*(const Rat& a, const Rat& b) { Rat r; mpq_mul(r.q_, a.q_, b.q_); return r; }
    friend Rat operator/(const Rat& a, const Rat& b) {
        if (mpq_sgn(b.q_) == 0) throw std::domain_error("Rat: division by zero");
        Rat r;
        mpq_div(r.q_, a.q_, b.q_);
        return r;
    }
    friend Rat operator-(const Rat& a) { Rat r; mpq_neg(r.q_, a.q_); return r; }
    Rat& operator+=(const Rat& b) { mpq_add(q_, q_, b.q_); return *this; }
    Rat& operator-=(const Rat& b) { mpq_sub(q_, q_, b.q_); return *this; }
    Rat& operator*=(const Rat& b) { mpq_mul(q_, q_, b.q_); return *this; }
    Rat& operator/=(const Rat& b) { *this = *this / b; return *this; }

    friend bool operator==(const Rat& a, const Rat& b) { return mpq_equal(a.q_, b.q_) != 0; }
    friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
    friend bool operator<(const Rat& a, const Rat& b) { return mpq_cmp(a.q_, b.q_) < 0; }
    friend bool operator<=(const Rat& a, const Rat& b) { return mpq_cmp(a.q_, b.q_) <= 0; }
    friend bool operator>(const Rat& a, const Rat& b) { return mpq_cmp(a.q_, b.q_) > 0; }
    friend bool operator>=(const Rat& a, const Rat& b) { return mpq_cmp(a.q_, b.q_) >= 0; }

    int sign() const { return mpq_sgn(q_); }
    bool is_zero() const { return mpq_sgn(q_) == 0; }
    bool is_integer() const { return mpz_cmp_ui(mpq_denref(q_), 1) == 0; }

    Int num() const { Int r; mpz_set(r.raw(), mpq_numref(q_)); return r; }
    Int den() const { Int r; mpz_set(r.raw(), mpq_denref(q_)); return r; }

    Int floor() const { Int r; mpz_fdiv_q(r.raw(), mpq_numref(q_), mpq_denref(q_)); return r; }
    Int ceil() const { Int r; mpz_cdiv_q(r.raw(), mpq_numref(q_), mpq_denref(q_)); return r; }

    /// p-adic valuation of a nonzero rational.
    long valuation(const Int& p) const {
        if (is_zero()) throw std::domain_error("valuation of zero");
        Int tmp;
        long vn = mpz_remove(tmp.raw(), mpq_numref(q_), p.raw());
        if (vn > 0) return vn;
        return -static_cast<long>(mpz_remove(tmp.raw(), mpq_denref(q_), p.raw()));
    }

    std::string str() const {
        std::string s = num().str();
        if (!is_integer()) s += "/" + den().str();
        return s;
    }

  private:
    mpq_t q_;
};

std::ostream& operator<<(std::ostream& os, const Rat& v);

/// Binomial coefficient C(n, k).
inline Int binomial(unsigned long n, unsigned long k) {
    Int r;
    mpz_bin_uiui(r.raw(), n, k);
    return r;
}

inline Int factorial(unsigned long n) {
    Int r;
    mpz_fac_ui(r.raw(), n);
    return r;
}

} // namespace bsu
