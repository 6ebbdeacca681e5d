#include "bsu/groupring.hpp"

#include <algorithm>
#include <optional>

namespace bsu {

FinAbGroup::Elt FinAbGroup::pow(Elt a, long e) const {
    Elt r = id();
    long n = order();
    e = ((e % n) + n) % n;
    while (e > 0) {
        if (e & 1) r = mul(r, a);
        a = mul(a, a);
        e >>= 1;
    }
    return r;
}

// ---------------------------------------------------------------------------
// MinusAlgebra

MinusAlgebra::MinusAlgebra(FinAbGroup g, FinAbGroup::Elt c, Int p, int M)
    : g_(std::move(g)), c_(std::move(c)), p_(std::move(p)), M_(M) {
    if (M_ < 2) throw modulus_too_small_error("MinusAlgebra: modulus exponent too small");
    pM_ = pow_ui(p_, static_cast<unsigned long>(M_));
    long n = g_.order();
    if (g_.index_of(c_) == g_.index_of(g_.id()) ||
        g_.index_of(g_.mul(c_, c_)) != g_.index_of(g_.id()))
        throw domain_error("MinusAlgebra: conjugation must have order 2");
    slot_of_.assign(n, -1);
    sign_of_.assign(n, 0);
    for (long i = 0; i < n; ++i) {
        if (slot_of_[i] >= 0) continue;
        long j = g_.index_of(g_.mul(g_.from_index(i), c_));
        long s = static_cast<long>(basis_.size());
        basis_.push_back(i);
        slot_of_[i] = s;
        sign_of_[i] = +1;
        slot_of_[j] = s;
        sign_of_[j] = -1;
    }
    long r = rank();
    mul_slot_.assign(r, std::vector<long>(r));
    mul_sign_.assign(r, std::vector<int>(r));
    for (long i = 0; i < r; ++i)
        for (long j = 0; j < r; ++j) {
            long prod = g_.index_of(g_.mul(g_.from_index(basis_[i]), g_.from_index(basis_[j])));
            mul_slot_[i][j] = slot_of_[prod];
            mul_sign_[i][j] = sign_of_[prod];
        }
}

MinusAlgebra::Elt MinusAlgebra::from_group_index(long gidx) const {
    Elt e = zero();
    e[static_cast<size_t>(slot_of_[gidx])] = sign_of_[gidx] > 0 ? Int(1) : pM_ - Int(1);
    return e;
}

MinusAlgebra::Elt MinusAlgebra::from_coeffs(const std::vector<Int>& coeffs) const {
    Elt e = zero();
    for (size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i].is_zero()) continue;
        size_t s = static_cast<size_t>(slot_of_[static_cast<long>(i)]);
        if (sign_of_[static_cast<long>(i)] > 0)
            e[s] = mod(e[s] + coeffs[i], pM_);
        else
            e[s] = mod(e[s] - coeffs[i], pM_);
    }
    return e;
}

MinusAlgebra::Elt MinusAlgebra::add(const Elt& a, const Elt& b) const {
    Elt r = a;
    for (size_t i = 0; i < r.size(); ++i) r[i] = mod(r[i] + b[i], pM_);
    return r;
}
MinusAlgebra::Elt MinusAlgebra::sub(const Elt& a, const Elt& b) const {
    Elt r = a;
    for (size_t i = 0; i < r.size(); ++i) r[i] = mod(r[i] - b[i], pM_);
    return r;
}
MinusAlgebra::Elt MinusAlgebra::neg(const Elt& a) const {
    Elt r = a;
    for (size_t i = 0; i < r.size(); ++i) r[i] = mod(-r[i], pM_);
    return r;
}
MinusAlgebra::Elt MinusAlgebra::scale(const Elt& a, const Int& s) const {
    Elt r = a;
    for (size_t i = 0; i < r.size(); ++i) r[i] = mulmod(r[i], mod(s, pM_), pM_);
    return r;
}
MinusAlgebra::Elt MinusAlgebra::mul(const Elt& a, const Elt& b) const {
    Elt r = zero();
    long n = rank();
    for (long i = 0; i < n; ++i) {
        if (a[static_cast<size_t>(i)].is_zero()) continue;
        for (long j = 0; j < n; ++j) {
            if (b[static_cast<size_t>(j)].is_zero()) continue;
            Int term = a[static_cast<size_t>(i)] * b[static_cast<size_t>(j)];
            size_t s = static_cast<size_t>(mul_slot_[i][j]);
            if (mul_sign_[i][j] > 0)
                r[s] = mod(r[s] + term, pM_);
            else
                r[s] = mod(r[s] - term, pM_);
        }
    }
    return r;
}
bool MinusAlgebra::is_zero(const Elt& a) const {
    for (const Int& v : a)
        if (!v.is_zero()) return false;
    return true;
}
bool MinusAlgebra::equal(const Elt& a, const Elt& b) const { return is_zero(sub(a, b)); }

bool MinusAlgebra::is_unit(const Elt& a) const {
    // invertible iff the multiplication matrix is invertible mod p: Gaussian
    // elimination over F_p on the regular representation.
    long n = rank();
    std::vector<std::vector<Int>> m(static_cast<size_t>(n), std::vector<Int>(n, Int(0)));
    for (long j = 0; j < n; ++j) {
        Elt ej = zero();
        ej[static_cast<size_t>(j)] = Int(1);
        Elt col = mul(a, ej);
        for (long i = 0; i < n; ++i) m[static_cast<size_t>(i)][static_cast<size_t>(j)] = mod(col[static_cast<size_t>(i)], p_);
    }
    long rank_fp = 0;
    for (long col = 0; col < n; ++col) {
        long piv = -1;
        for (long i = rank_fp; i < n; ++i)
            if (!m[static_cast<size_t>(i)][static_cast<size_t>(col)].is_zero()) {
                piv = i;
                break;
            }
        if (piv < 0) return false;
        std::swap(m[static_cast<size_t>(piv)], m[static_cast<size_t>(rank_fp)]);
        Int inv = invmod(m[static_cast<size_t>(rank_fp)][static_cast<size_t>(col)], p_);
        for (long j = col; j < n; ++j)
            m[static_cast<size_t>(rank_fp)][static_cast<size_t>(j)] =
                mulmod(m[static_cast<size_t>(rank_fp)][static_cast<size_t>(j)], inv, p_);
        for (long i = 0; i < n; ++i) {
            if (i == rank_fp) continue;
            Int f = m[static_cast<size_t>(i)][static_cast<size_t>(col)];
            if (f.is_zero()) continue;
            for (long j = col; j < n; ++j)
                m[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                    mod(m[static_cast<size_t>(i)][static_cast<size_t>(j)] -
                            f * m[static_cast<size_t>(rank_fp)][static_cast<size_t>(j)],
                        p_);
        }
        ++rank_fp;
    }
    return rank_fp == n;
}

bool MinusAlgebra::divides(const Elt& a, const Elt& b, Elt* t) const {
    // solve a*x = b: rows of the regular representation as a module system
    long n = rank();
    std::vector<std::vector<Int>> rows;
    for (long j = 0; j < n; ++j) {
        Elt ej = zero();
        ej[static_cast<size_t>(j)] = Int(1);
        Elt col = mul(a, ej);
        // augmented row: [col | e_j] transposed system; we reduce the column space
        std::vector<Int> row(static_cast<size_t>(2 * n), Int(0));
        for (long i = 0; i < n; ++i) row[static_cast<size_t>(i)] = col[static_cast<size_t>(i)];
        row[static_cast<size_t>(n + j)] = Int(1);
        rows.push_back(std::move(row));
    }
    HowellForm H(std::move(rows), p_, M_);
    std::vector<Int> v(static_cast<size_t>(2 * n), Int(0));
    for (long i = 0; i < n; ++i) v[static_cast<size_t>(i)] = b[static_cast<size_t>(i)];
    // b is in the column space iff [b | *] reduces to a vector supported on the
    // tail block; recover x from the tail if requested.
    // Reduce v against rows with pivot in the first block only.
    for (size_t r = 0; r < H.rows().size(); ++r) {
        const auto& row = H.rows()[r];
        size_t pc = 0;
        while (pc < row.size() && row[pc].is_zero()) ++pc;
        if (pc >= static_cast<size_t>(n)) break;  // tail-block rows cannot help
        if (v[pc].is_zero()) continue;
        Int piv = row[pc];
        if (!divisible(v[pc], gcd(piv, pM_))) return false;
        // piv = p^e (normalized); quotient
        Int q = divexact(v[pc], gcd(piv, pM_));
        for (size_t j = 0; j < v.size(); ++j) v[j] = mod(v[j] - q * divexact(row[j] * gcd(piv, pM_), piv) , pM_);
    }
    for (long i = 0; i < n; ++i)
        if (!v[static_cast<size_t>(i)].is_zero()) return false;
    if (t) {
        t->assign(static_cast<size_t>(n), Int(0));
        for (long i = 0; i < n; ++i) (*t)[static_cast<size_t>(i)] = mod(-v[static_cast<size_t>(n + i)], pM_);
    }
    return true;
}

MinusAlgebra::Elt MinusAlgebra::det(const std::vector<std::vector<Elt>>& mat) const {
    size_t n = mat.size();
    for (const auto& row : mat)
        if (row.size() != n) throw non_square_error("det: matrix not square");
    if (n == 0) return one();
    if (n > 12) throw domain_error("det: dimension too large for expansion");
    // expansion by the first remaining row over column subsets
    std::vector<Elt> memo(static_cast<size_t>(1) << n);
    std::vector<bool> have(static_cast<size_t>(1) << n, false);
    std::function<Elt(unsigned, size_t)> go = [&](unsigned cols, size_t row) -> Elt {
        if (cols == 0) return one();
        if (have[cols]) return memo[cols];
        Elt acc = zero();
        int sign = +1;
        for (size_t j = 0; j < n; ++j) {
            if (!(cols & (1u << j))) continue;
            const Elt& a = mat[row][j];
            if (!is_zero(a)) {
                Elt sub_det = go(cols & ~(1u << j), row + 1);
                Elt term = mul(a, sub_det);
                acc = sign > 0 ? add(acc, term) : sub(acc, term);
            }
            sign = -sign;
        }
        have[cols] = true;
        memo[cols] = acc;
        return acc;
    };
    return go((1u << n) - 1, 0);
}

// ---------------------------------------------------------------------------
// Howell form over Z/p^M

HowellForm::HowellForm(std::vector<std::vector<Int>> in_rows, Int p, int M)
    : p_(std::move(p)), M_(M) {
    pM_ = pow_ui(p_, static_cast<unsigned long>(M_));
    size_t ncols = in_rows.empty() ? 0 : in_rows.front().size();
    std::vector<std::vector<Int>> pending;
    for (auto& r : in_rows) {
        for (auto& x : r) x = mod(x, pM_);
        pending.push_back(std::move(r));
    }
    for (size_t col = 0; col < ncols; ++col) {
        // minimal valuation entry at this column among pending rows whose
        // support starts at or before col (entries left of col are zero by
        // construction after elimination)
        long best = -1;
        long best_val = M_ + 1;
        for (size_t i = 0; i < pending.size(); ++i) {
            const Int& e = pending[i][col];
            if (e.is_zero()) continue;
            long v = e.valuation(p_);
            if (v < best_val) {
                best_val = v;
                best = static_cast<long>(i);
            }
        }
        if (best < 0) continue;
        std::vector<Int> piv = std::move(pending[static_cast<size_t>(best)]);
        pending.erase(pending.begin() + best);
        // normalize pivot entry to p^v
        Int e = piv[col];
        Int unit = divexact(e, pow_ui(p_, static_cast<unsigned long>(best_val)));
        Int uinv = invmod(unit, pM_);
        for (auto& x : piv) x = mulmod(x, uinv, pM_);
        // eliminate below
        Int pv = pow_ui(p_, static_cast<unsigned long>(best_val));
        for (auto& row : pending) {
            if (row[col].is_zero()) continue;
            Int q = divexact(row[col], pv);
            for (size_t j = col; j < ncols; ++j) row[j] = mod(row[j] - q * piv[j], pM_);
        }
        // annihilator completion: p^{M-v} * pivot row has zero pivot entry but
        // may have support to the right
        if (best_val > 0) {
            Int ann = pow_ui(p_, static_cast<unsigned long>(M_ - best_val));
            std::vector<Int> arow(ncols, Int(0));
            bool nonzero = false;
            for (size_t j = col + 1; j < ncols; ++j) {
                arow[j] = mulmod(piv[j], ann, pM_);
                if (!arow[j].is_zero()) nonzero = true;
            }
            if (nonzero) pending.push_back(std::move(arow));
        }
        pivot_col_.push_back(col);
        pivot_val_.push_back(best_val);
        rows_.push_back(std::move(piv));
    }
}

bool HowellForm::contains(std::vector<Int> v) const {
    for (auto& x : v) x = mod(x, pM_);
    for (size_t r = 0; r < rows_.size(); ++r) {
        size_t pc = pivot_col_[r];
        if (v[pc].is_zero()) continue;
        long val = v[pc].valuation(p_);
        if (val < pivot_val_[r]) return false;
        Int q = divexact(v[pc], pow_ui(p_, static_cast<unsigned long>(pivot_val_[r])));
        for (size_t j = pc; j < v.size(); ++j) v[j] = mod(v[j] - q * rows_[r][j], pM_);
    }
    for (const Int& x : v)
        if (!x.is_zero()) return false;
    return true;
}

// ---------------------------------------------------------------------------
// R_L quotient

RLResult rl_quotient(const RLInstance& inst) {
    if (inst.M < 2) throw modulus_too_small_error("rl_quotient: modulus exponent too small");
    MinusAlgebra A(inst.g, inst.c, inst.p, inst.M);
    long r = A.rank();
    long n = inst.g.order();
    // lift of Theta_H through the projection: smallest g-index per G-index
    std::vector<long> lift(static_cast<size_t>(inst.G_order), -1);
    for (long i = 0; i < n; ++i) {
        long gi = inst.proj[static_cast<size_t>(i)];
        if (lift[static_cast<size_t>(gi)] < 0) lift[static_cast<size_t>(gi)] = i;
    }
    std::vector<Int> thetaH_coeffs(static_cast<size_t>(n), Int(0));
    for (long gi = 0; gi < inst.G_order; ++gi) {
        if (inst.theta_H_G[static_cast<size_t>(gi)].is_zero()) continue;
        if (lift[static_cast<size_t>(gi)] < 0) throw domain_error("rl_quotient: projection not onto");
        thetaH_coeffs[static_cast<size_t>(lift[static_cast<size_t>(gi)])] =
            inst.theta_H_G[static_cast<size_t>(gi)];
    }
    MinusAlgebra::Elt thetaH = A.from_coeffs(thetaH_coeffs);
    MinusAlgebra::Elt thetaL = A.from_coeffs(inst.theta_L_g);

    // augmentation-kernel generators: gamma - 1 for gamma in ker(proj)
    std::vector<MinusAlgebra::Elt> Igens;
    long id_G = inst.proj[static_cast<size_t>(inst.g.index_of(inst.g.id()))];
    for (long i = 0; i < n; ++i) {
        if (inst.proj[static_cast<size_t>(i)] != id_G) continue;
        if (i == inst.g.index_of(inst.g.id())) continue;
        Igens.push_back(A.sub(A.from_group_index(i), A.one()));
    }

    // relation submodule of R^2, layout [L-block | 1-block]
    auto make_row = [&](const MinusAlgebra::Elt& Lpart, const MinusAlgebra::Elt& upart) {
        std::vector<Int> row(static_cast<size_t>(2 * r), Int(0));
        for (long i = 0; i < r; ++i) {
            row[static_cast<size_t>(i)] = Lpart[static_cast<size_t>(i)];
            row[static_cast<size_t>(r + i)] = upart[static_cast<size_t>(i)];
        }
        return row;
    };
    std::vector<std::vector<Int>> rows;
    std::vector<std::vector<Int>> i2rows;
    for (long s = 0; s < r; ++s) {
        MinusAlgebra::Elt es = A.zero();
        es[static_cast<size_t>(s)] = Int(1);
        // e_s (Theta_H L - Theta_L) and its L-multiple
        rows.push_back(make_row(A.mul(es, thetaH), A.neg(A.mul(es, thetaL))));
        rows.push_back(make_row(A.neg(A.mul(es, thetaL)), A.zero()));
        for (const auto& ig : Igens) {
            rows.push_back(make_row(A.mul(es, ig), A.zero()));
        }
        for (size_t a = 0; a < Igens.size(); ++a)
            for (size_t b = a; b < Igens.size(); ++b) {
                MinusAlgebra::Elt prod = A.mul(es, A.mul(Igens[a], Igens[b]));
                rows.push_back(make_row(A.zero(), prod));
                i2rows.push_back(prod);
            }
    }
    HowellForm W(std::move(rows), inst.p, inst.M);
    // kernel generators: rows with zero L-block
    std::vector<std::vector<Int>> kernel_rows;
    for (const auto& row : W.rows()) {
        bool lzero = true;
        for (long i = 0; i < r; ++i)
            if (!row[static_cast<size_t>(i)].is_zero()) {
                lzero = false;
                break;
            }
        if (!lzero) continue;
        std::vector<Int> u(static_cast<size_t>(r));
        for (long i = 0; i < r; ++i) u[static_cast<size_t>(i)] = row[static_cast<size_t>(r + i)];
        kernel_rows.push_back(std::move(u));
    }
    HowellForm K(kernel_rows, inst.p, inst.M);
    HowellForm I2(i2rows, inst.p, inst.M);
    RLResult out;
    out.kernel_rows = static_cast<long>(K.rows().size());
    out.I2_rows = static_cast<long>(I2.rows().size());
    out.kernel_contains_I2 = true;
    for (const auto& row : I2.rows())
        if (!K.contains(row)) out.kernel_contains_I2 = false;
    out.kernel_equals_I2 = out.kernel_contains_I2;
    for (const auto& row : K.rows())
        if (!I2.contains(row)) out.kernel_equals_I2 = false;
    return out;
}

// ---------------------------------------------------------------------------
// Stickelberger elements and derivatives

std::vector<Int> stickelberger(const QuadField& F, const NarrowClassGroup& G, const Int& p,
                               const Int& ell, MeasureConventions conv, ZetaCache* cache) {
    std::vector<Int> coeffs(static_cast<size_t>(G.order), Int(0));
    for (long i = 0; i < G.order; ++i) {
        MeasureHandle h = make_measure(F, G, i, p, ell, conv, cache);
        coeffs[static_cast<size_t>(G.inverse(i))] = zeta0(h);
    }
    return coeffs;
}

namespace {

/// Integer lift mod p^k of log_p of a p-adic unit integer.
Int log_unit_lift(const PadicCtx& C, const Int& u, const Int& pk) {
    PadicElt x = PadicElt::from_int(C, u);
    PadicElt l = log_p(x);
    if (l.is_zero()) return Int(0);
    return mod(C.pk(static_cast<int>(std::min<long>(l.val(), C.prec))) * l.c0(), pk);
}

} // namespace

ThetaDerivative theta_derivative(const QuadField& F, const NarrowClassGroup& G, const Int& p,
                                 const Int& ell, int m, MeasureConventions conv,
                                 ZetaCache* cache) {
    if (m < 1) throw domain_error("theta_derivative: m must be >= 1");
    int level = m + 1;
    if (level > max_congruence_level())
        throw level_too_deep_error("theta_derivative: level beyond bound");
    Int pm = pow_ui(p, static_cast<unsigned long>(m));
    Int pwork = pow_ui(p, static_cast<unsigned long>(m + 2));
    PadicCtx C = PadicCtx::create(p, m + 4, F.D);
    ThetaDerivative out;
    out.m = m;
    out.modulus = pm;
    out.coeffs.assign(static_cast<size_t>(G.order), Int(0));
    for (long i = 0; i < G.order; ++i) {
        MeasureHandle h = make_measure(F, G, i, p, ell, conv, cache);
        Int nb = h.class_rep.norm();
        Int acc(0);
        measure_values_bulk(h, level, [&](const Int& rx, const Int& ry, const Rat& nu) {
            if (mod(rx, p).is_zero() && mod(ry, p).is_zero()) return;
            if (!nu.is_integer()) throw domain_error("theta_derivative: non-integral measure");
            if (nu.is_zero()) return;
            // norm of the residue lift, a p-adic unit
            Int nr = rx * rx + Int(F.t) * rx * ry + F.n * ry * ry;
            Int lg = log_unit_lift(C, mod(nb * nr, pwork), pwork);
            acc = mod(acc + nu.num() * lg, pwork);
        });
        out.coeffs[static_cast<size_t>(G.inverse(i))] = mod(-acc, pm);
    }
    return out;
}


// ---------------------------------------------------------------------------
// characters and the derivative identity check

GroupBasis group_basis(const NarrowClassGroup& G) {
    GroupBasis out;
    out.orders = G.structure;
    size_t rk = G.structure.size();
    // brute-force search for generators realizing the invariant factors
    std::vector<long> ord(static_cast<size_t>(G.order));
    for (long i = 0; i < G.order; ++i) {
        long o = 1, x = i;
        while (x != 0) {
            x = G.compose(x, i);
            ++o;
        }
        ord[static_cast<size_t>(i)] = o;
    }
    std::vector<long> gens;
    std::function<bool(size_t)> pick = [&](size_t pos) {
        if (pos == rk) {
            // verify products enumerate the group
            std::vector<bool> seen(static_cast<size_t>(G.order), false);
            std::vector<long> exps(rk, 0);
            long count = 0;
            std::function<void(size_t, long)> enumerate = [&](size_t j, long acc) {
                if (j == rk) {
                    if (!seen[static_cast<size_t>(acc)]) {
                        seen[static_cast<size_t>(acc)] = true;
                        ++count;
                    }
                    return;
                }
                long cur = acc;
                for (long e = 0; e < G.structure[j]; ++e) {
                    enumerate(j + 1, cur);
                    cur = G.compose(cur, gens[j]);
                }
            };
            enumerate(0, 0);
            return count == G.order;
        }
        for (long i = 0; i < G.order; ++i) {
            if (ord[static_cast<size_t>(i)] != G.structure[pos]) continue;
            gens.push_back(i);
            if (pick(pos + 1)) return true;
            gens.pop_back();
        }
        return false;
    };
    if (!pick(0)) throw domain_error("group_basis: no generating tuple found");
    out.gens = gens;
    // decومposition of every element
    out.decomp.assign(static_cast<size_t>(G.order), {});
    std::vector<long> exps(rk, 0);
    std::function<void(size_t, long)> fill = [&](size_t j, long acc) {
        if (j == rk) {
            out.decomp[static_cast<size_t>(acc)] = exps;
            return;
        }
        long cur = acc;
        for (long e = 0; e < G.structure[j]; ++e) {
            exps[j] = e;
            fill(j + 1, cur);
            cur = G.compose(cur, gens[j]);
        }
        exps[j] = 0;
    };
    fill(0, 0);
    return out;
}

CharacterTable::CharacterTable(const NarrowClassGroup& G, const PadicCtx& ctx)
    : G_(&G), ctx_(&ctx), basis_(group_basis(G)) {
    Int p2m1 = ctx.p * ctx.p - Int(1);
    PadicElt g2 = teichmuller_generator(ctx);
    for (long d : basis_.orders) {
        if (!divisible(p2m1, Int(d)))
            throw domain_error("CharacterTable: character order does not divide p^2 - 1");
        roots_.push_back(g2.pow(divexact(p2m1, Int(d))));
    }
    ncars_ = G.order;
    // characters indexed like elements: exponent tuples against the basis
    for (long t = 0; t < ncars_; ++t) char_exp_.push_back(basis_.decomp.empty() ? std::vector<long>{} : std::vector<long>{});
    char_exp_.clear();
    std::vector<long> exps(basis_.orders.size(), 0);
    std::function<void(size_t)> gen = [&](size_t j) {
        if (j == basis_.orders.size()) {
            char_exp_.push_back(exps);
            return;
        }
        for (long e = 0; e < basis_.orders[j]; ++e) {
            exps[j] = e;
            gen(j + 1);
        }
        exps[j] = 0;
    };
    gen(0);
}

PadicElt CharacterTable::value(long t, long i) const {
    PadicElt v = PadicElt::from_int(*ctx_, Int(1));
    const auto& ce = char_exp_[static_cast<size_t>(t)];
    const auto& de = basis_.decomp[static_cast<size_t>(i)];
    for (size_t j = 0; j < ce.size(); ++j) {
        long e = (ce[j] * de[j]) % basis_.orders[j];
        if (e != 0) v = v * roots_[j].pow(Int(e));
    }
    return v;
}

bool CharacterTable::is_odd(long t) const {
    PadicElt v = value(t, G_->conj_class);
    PadicElt minus_one = PadicElt::from_int(*ctx_, Int(-1));
    return agree(v, minus_one, 1);
}

GrossStarkReport gross_stark_residual(const QuadField& F, const NarrowClassGroup& G, const Int& p,
                                      const Int& ell, int m, const ConjugateSet& conj,
                                      const PadicCtx& ctx, MeasureConventions conv,
                                      ZetaCache* cache) {
    ThetaDerivative td = theta_derivative(F, G, p, ell, m, conv, cache);
    CharacterTable chars(G, ctx);
    GrossStarkReport out;
    out.m = m;
    long minval = m;
    for (long t = 0; t < chars.count(); ++t) {
        if (!chars.is_odd(t)) continue;
        // chi(Theta')
        PadicElt chi_theta = PadicElt::zero(ctx, m);
        for (long i = 0; i < G.order; ++i) {
            if (td.coeffs[static_cast<size_t>(i)].is_zero()) continue;
            chi_theta = chi_theta +
                        chars.value(t, i) * PadicElt::from_int(ctx, td.coeffs[static_cast<size_t>(i)]);
        }
        chi_theta = chi_theta + PadicElt::zero(ctx, m);  // known only mod p^m
        // log side: sum over classes chi(b)^{-1} log Norm(conjugate_b)
        PadicElt lside = PadicElt::zero(ctx, ctx.prec);
        for (long i = 0; i < G.order; ++i) {
            PadicElt lg = log_p(conj.values[static_cast<size_t>(i)].norm_to_qp());
            lside = lside + chars.value(t, G.inverse(i)) * lg;
        }
        PadicElt residual = chi_theta + lside;
        GrossStarkReport::Row row;
        row.char_index = t;
        row.theta_val = chi_theta.is_zero() ? chi_theta.abs_prec() : chi_theta.val();
        row.theta_nonzero = !chi_theta.is_zero();
        row.residual_val = residual.is_zero() ? residual.abs_prec() : residual.val();
        minval = std::min(minval, row.residual_val);
        out.rows.push_back(row);
    }
    out.min_residual_val = minval;
    return out;
}

// ---------------------------------------------------------------------------
// ray class data for the conductor-p instance

namespace {

/// Totally positive generator of a narrowly principal fractional ideal given by
/// a Z-basis; Lagrange-reduces the basis, then searches short vectors.
std::optional<QuadElt> tot_pos_generator(const QuadField& F, QuadElt v1, QuadElt v2) {
    Rat target = (v1.x * v2.y - v1.y * v2.x);
    if (target.is_zero()) return std::nullopt;
    Rat nrm_ideal = target.sign() > 0 ? target : -target;  // |det| = fractional norm
    // Lagrange reduction for the trace form T2(x) = Tr(x^2).
    auto T2 = [&](const QuadElt& x) { return F.trace(F.mul(x, x)); };
    auto B2 = [&](const QuadElt& x, const QuadElt& y) { return F.trace(F.mul(x, y)); };
    for (int it = 0; it < 64; ++it) {
        if (T2(v1) > T2(v2)) std::swap(v1, v2);
        Rat mu = B2(v1, v2) / T2(v1);
        // nearest integer
        Int mr = (mu + Rat(1, 2)).floor();
        if (mr.is_zero()) break;
        v2 = F.sub(v2, F.mul_rat(v1, Rat(mr)));
    }
    for (long R = 2; R <= 512; R *= 2) {
        for (long mm = -R; mm <= R; ++mm)
            for (long nn = -R; nn <= R; ++nn) {
                if (mm == 0 && nn == 0) continue;
                if (std::max(std::abs(mm), std::abs(nn)) * 2 <= R) continue;  // covered earlier
                QuadElt g = F.add(F.mul_rat(v1, Rat(mm)), F.mul_rat(v2, Rat(nn)));
                Rat ng = F.norm(g);
                if (!(ng == nrm_ideal || ng == -nrm_ideal)) continue;
                for (int s = 0; s < 2; ++s) {
                    for (long j = -2; j <= 2; ++j) {
                        QuadElt cand = F.mul(g, F.pow(F.eps_plus, j));
                        if (s) cand = F.neg(cand);
                        if (F.is_totally_positive(cand)) return cand;
                    }
                }
            }
    }
    return std::nullopt;
}

/// Z-basis of the fractional ideal A * B^{-1}.
std::pair<QuadElt, QuadElt> product_with_inverse_basis(const QuadField& F, const Ideal& A,
                                                       const Ideal& B) {
    auto [w1, w2] = F.inverse_ideal_basis(B);
    QuadElt Ab{Rat(A.b), Rat(A.c)};
    QuadElt g1 = F.mul_rat(w1, Rat(A.a));
    QuadElt g2 = F.mul_rat(w2, Rat(A.a));
    QuadElt g3 = F.mul(w1, Ab), g4 = F.mul(w2, Ab);
    Int dcom(1);
    for (const QuadElt* g : {&g1, &g2, &g3, &g4})
        dcom = lcm(dcom, lcm(g->x.den(), g->y.den()));
    auto scaled = [&](const QuadElt& g) {
        return std::pair<Int, Int>{(g.x * Rat(dcom)).num(), (g.y * Rat(dcom)).num()};
    };
    std::vector<std::pair<Int, Int>> vs = {scaled(g1), scaled(g2), scaled(g3), scaled(g4)};
    Int c(0), cx(0);
    for (auto& [vx, vy] : vs) {
        if (vy.is_zero()) continue;
        if (c.is_zero()) {
            c = vy;
            cx = vx;
            continue;
        }
        Int u, v;
        Int gg = gcdext(c, vy, u, v);
        cx = u * cx + v * vx;
        c = gg;
    }
    Int a(0);
    for (auto& [vx, vy] : vs) {
        Int r = vx;
        if (!c.is_zero()) r = vx - divexact(vy, c) * cx;
        a = gcd(a, r);
    }
    if (a.is_zero() || c.is_zero())
        throw domain_error("product_with_inverse_basis: degenerate lattice");
    return {QuadElt{Rat(a, dcom), Rat(0)}, QuadElt{Rat(cx, dcom), Rat(c, dcom)}};
}

} // namespace

RayClassData ray_class_data(const QuadField& F, const NarrowClassGroup& G, const Int& p,
                            const Int& ell, MeasureConventions conv, ZetaCache* cache) {
    long pl = p.to_long();
    // residue field F_{p^2} as pairs (x, y) = x + y*omega mod p
    auto res_index = [&](long x, long y) { return x * pl + y; };
    auto res_mul = [&](std::pair<long, long> a, std::pair<long, long> b) {
        // (x1 + y1 w)(x2 + y2 w), w^2 = t w - n
        long t = F.t;
        long nmod = mod(F.n, p).to_long();
        long x = (a.first * b.first % pl - nmod * (a.second * b.second % pl) % pl + pl * pl) % pl;
        long y = (a.first * b.second + a.second * b.first + t * a.second % pl * b.second) % pl;
        return std::make_pair(x, y % pl);
    };
    // subgroup generated by eps_plus mod p
    std::pair<long, long> eps = {mod(F.eps_plus.x.num(), p).to_long(),
                                 mod(F.eps_plus.y.num(), p).to_long()};
    std::vector<std::pair<long, long>> eps_powers;
    {
        std::pair<long, long> cur = {1, 0};
        do {
            eps_powers.push_back(cur);
            cur = res_mul(cur, eps);
        } while (!(cur.first == 1 && cur.second == 0));
    }
    // orbit representatives (lex-min within each orbit)
    std::vector<std::pair<long, long>> reps;
    std::vector<long> rep_slot(static_cast<size_t>(pl * pl), -1);
    for (long x = 0; x < pl; ++x)
        for (long y = 0; y < pl; ++y) {
            if (x == 0 && y == 0) continue;
            if (rep_slot[static_cast<size_t>(res_index(x, y))] >= 0) continue;
            // new orbit
            long slot = static_cast<long>(reps.size());
            reps.push_back({x, y});
            for (const auto& ep : eps_powers) {
                auto z = res_mul({x, y}, ep);
                rep_slot[static_cast<size_t>(res_index(z.first, z.second))] = slot;
            }
        }
    long qsize = static_cast<long>(reps.size());
    // pair group (class index, orbit slot) with multiplication twisted by the
    // totally positive generators of b_i b_j / b_{i o j}
    long h = G.order;
    long N = h * qsize;
    auto pair_index = [&](long i, long s) { return i * qsize + s; };
    // gamma_{ij} residues
    std::vector<std::vector<std::pair<long, long>>> gamma(
        static_cast<size_t>(h), std::vector<std::pair<long, long>>(static_cast<size_t>(h)));
    for (long i = 0; i < h; ++i)
        for (long j = 0; j < h; ++j) {
            long k = G.compose(i, j);
            Ideal prod = F.mul_ideal(G.reps[static_cast<size_t>(i)], G.reps[static_cast<size_t>(j)]);
            auto [b1, b2] = product_with_inverse_basis(F, prod, G.reps[static_cast<size_t>(k)]);
            auto gen = tot_pos_generator(F, b1, b2);
            if (!gen) throw domain_error("ray_class_data: no totally positive generator");
            // residue of gen mod p
            auto lift = [&](const Rat& r) {
                return mulmod(mod(r.num(), p), invmod(mod(r.den(), p), p), p).to_long();
            };
            gamma[static_cast<size_t>(i)][static_cast<size_t>(j)] = {lift(gen->x), lift(gen->y)};
        }
    // multiplication table on pairs
    std::vector<std::vector<long>> table(static_cast<size_t>(N), std::vector<long>(static_cast<size_t>(N)));
    for (long i = 0; i < h; ++i)
        for (long s = 0; s < qsize; ++s)
            for (long j = 0; j < h; ++j)
                for (long u = 0; u < qsize; ++u) {
                    long k = G.compose(i, j);
                    auto prod_res = res_mul(reps[static_cast<size_t>(s)], reps[static_cast<size_t>(u)]);
                    prod_res = res_mul(prod_res, gamma[static_cast<size_t>(i)][static_cast<size_t>(j)]);
                    long slot = rep_slot[static_cast<size_t>(res_index(prod_res.first, prod_res.second))];
                    table[static_cast<size_t>(pair_index(i, s))][static_cast<size_t>(pair_index(j, u))] =
                        pair_index(k, slot);
                }
    // identity of the pair group: (0, slot of 1 mod eps-orbit) must be checked
    long id_pair = -1;
    for (long x = 0; x < N; ++x) {
        bool is_id = true;
        for (long yel = 0; yel < N; ++yel)
            if (table[static_cast<size_t>(x)][static_cast<size_t>(yel)] != yel) {
                is_id = false;
                break;
            }
        if (is_id) {
            id_pair = x;
            break;
        }
    }
    if (id_pair < 0) throw domain_error("ray_class_data: pair group has no identity");
    // abstract structure: invariant-factor decomposition of the table group
    // (reuse the same counting approach as the class group)
    std::vector<long> structure;
    {
        auto pw = [&](long i, long e) {
            long rr = id_pair, base = i;
            while (e > 0) {
                if (e & 1) rr = table[static_cast<size_t>(rr)][static_cast<size_t>(base)];
                base = table[static_cast<size_t>(base)][static_cast<size_t>(base)];
                e >>= 1;
            }
            return rr;
        };
        std::vector<std::pair<long, int>> pps;
        long hh = N;
        for (long q = 2; q * q <= hh; ++q) {
            if (hh % q) continue;
            int v = 0;
            while (hh % q == 0) {
                hh /= q;
                ++v;
            }
            pps.emplace_back(q, v);
        }
        if (hh > 1) pps.emplace_back(hh, 1);
        std::map<long, std::vector<long>> primary;
        for (auto [q, vq] : pps) {
            std::vector<long> tcount{0};
            long qk = 1;
            for (int k2 = 1; k2 <= vq; ++k2) {
                qk *= q;
                long cnt = 0;
                for (long i = 0; i < N; ++i)
                    if (pw(i, qk) == id_pair) ++cnt;
                long lg = 0, cc = cnt;
                while (cc > 1) {
                    cc /= q;
                    ++lg;
                }
                tcount.push_back(lg);
            }
            std::vector<long> fs;
            for (int k2 = 1; k2 < static_cast<int>(tcount.size()); ++k2) {
                long nk = tcount[k2] - tcount[k2 - 1];
                long nxt = (k2 + 1 < static_cast<int>(tcount.size())) ? tcount[k2 + 1] - tcount[k2] : 0;
                for (long c2 = 0; c2 < nk - nxt; ++c2) {
                    long val = 1;
                    for (int e2 = 0; e2 < k2; ++e2) val *= q;
                    fs.push_back(val);
                }
            }
            std::sort(fs.rbegin(), fs.rend());
            primary[q] = fs;
        }
        size_t rk = 0;
        for (auto& [q, fs] : primary) rk = std::max(rk, fs.size());
        structure.assign(rk, 1);
        for (auto& [q, fs] : primary)
            for (size_t i2 = 0; i2 < fs.size(); ++i2) structure[i2] *= fs[i2];
        if (structure.empty()) structure.push_back(1);
    }
    // explicit isomorphism: find generators realizing the structure
    FinAbGroup g;
    g.factors = structure;
    std::vector<long> pair_of(static_cast<size_t>(N), -1);   // abstract index -> pair index
    std::vector<long> abs_of(static_cast<size_t>(N), -1);    // pair index -> abstract index
    {
        auto ordpair = [&](long i) {
            long o = 1, x = i;
            while (x != id_pair) {
                x = table[static_cast<size_t>(x)][static_cast<size_t>(i)];
                ++o;
            }
            return o;
        };
        std::vector<long> gens;
        std::function<bool(size_t)> pick = [&](size_t pos) {
            if (pos == structure.size()) {
                std::fill(pair_of.begin(), pair_of.end(), -1);
                std::fill(abs_of.begin(), abs_of.end(), -1);
                bool ok = true;
                std::vector<long> exps(structure.size(), 0);
                std::function<void(size_t, long)> enumerate = [&](size_t j, long acc) {
                    if (!ok) return;
                    if (j == structure.size()) {
                        FinAbGroup::Elt e(exps.begin(), exps.end());
                        long ai = g.index_of(e);
                        if (abs_of[static_cast<size_t>(acc)] >= 0 || pair_of[static_cast<size_t>(ai)] >= 0)
                            ok = false;
                        else {
                            abs_of[static_cast<size_t>(acc)] = ai;
                            pair_of[static_cast<size_t>(ai)] = acc;
                        }
                        return;
                    }
                    long cur = acc;
                    for (long e = 0; e < structure[j]; ++e) {
                        exps[j] = e;
                        enumerate(j + 1, cur);
                        cur = table[static_cast<size_t>(cur)][static_cast<size_t>(gens[j])];
                    }
                    exps[j] = 0;
                };
                enumerate(0, id_pair);
                return ok;
            }
            for (long i = 0; i < N; ++i) {
                if (ordpair(i) != structure[pos]) continue;
                gens.push_back(i);
                if (pick(pos + 1)) return true;
                gens.pop_back();
            }
            return false;
        };
        if (!pick(0)) throw domain_error("ray_class_data: no abstract isomorphism found");
    }
    RayClassData out;
    out.g = g;
    out.proj.assign(static_cast<size_t>(N), 0);
    for (long ai = 0; ai < N; ++ai) out.proj[static_cast<size_t>(ai)] = pair_of[static_cast<size_t>(ai)] / qsize;
    // conjugation: ray class of a principal (alpha), alpha = 1 mod p, mixed signs
    {
        std::optional<std::pair<long, long>> found;  // (class, slot)
        for (long trial = 1; trial < 2000 && !found; ++trial) {
            for (long xx = -trial; xx <= trial && !found; ++xx) {
                for (long yy = -trial; yy <= trial && !found; ++yy) {
                    if (std::abs(xx) != trial && std::abs(yy) != trial) continue;
                    QuadElt alpha{Rat(Int(1) + p * Int(xx)), Rat(p * Int(yy))};
                    if (F.norm(alpha).is_zero()) continue;
                    int s1 = F.sign_embed1(alpha), s2 = F.sign_embed2(alpha);
                    if (s1 * s2 >= 0) continue;  // need mixed signs
                    Ideal A = F.principal_ideal(alpha);
                    if (!gcd(A.norm(), p * ell).is_one()) continue;
                    long ci = class_of(G, A);
                    // totally positive generator of A * reps[ci]^{-1}
                    auto [b1, b2] = product_with_inverse_basis(F, A, G.reps[static_cast<size_t>(ci)]);
                    auto gen = tot_pos_generator(F, b1, b2);
                    if (!gen) continue;
                    auto liftp = [&](const Rat& r) {
                        return mulmod(mod(r.num(), p), invmod(mod(r.den(), p), p), p).to_long();
                    };
                    long gx = liftp(gen->x), gy = liftp(gen->y);
                    long slot = rep_slot[static_cast<size_t>(res_index(gx, gy))];
                    found = {ci, slot};
                }
            }
        }
        if (!found) throw domain_error("ray_class_data: conjugation element not found");
        out.c = g.from_index(abs_of[static_cast<size_t>(pair_index(found->first, found->second))]);
    }
    // ray Stickelberger at 0: zeta(ray class (i, s)) = sum over the orbit of
    // level-1 measure values of class i
    out.theta_L.assign(static_cast<size_t>(N), Int(0));
    {
        MeasureConventions mc = conv;
        for (long i = 0; i < h; ++i) {
            MeasureHandle hmeas = make_measure(F, G, i, p, ell, mc, cache);
            std::vector<Int> orbit_sum(static_cast<size_t>(qsize), Int(0));
            for (long x = 0; x < pl; ++x)
                for (long y = 0; y < pl; ++y) {
                    if (x == 0 && y == 0) continue;
                    long slot = rep_slot[static_cast<size_t>(res_index(x, y))];
                    orbit_sum[static_cast<size_t>(slot)] =
                        orbit_sum[static_cast<size_t>(slot)] + measure_of(hmeas, Int(x), Int(y), 1);
                }
            for (long s = 0; s < qsize; ++s) {
                // coefficient of (ray class)^{-1}
                long pidx = pair_index(i, s);
                long aidx = abs_of[static_cast<size_t>(pidx)];
                FinAbGroup::Elt inv_elt = g.inv(g.from_index(aidx));
                long coeff_pos = g.index_of(inv_elt);
                out.theta_L[static_cast<size_t>(coeff_pos)] =
                    out.theta_L[static_cast<size_t>(coeff_pos)] + orbit_sum[static_cast<size_t>(s)];
            }
        }
    }
    return out;
}

} // namespace bsu
