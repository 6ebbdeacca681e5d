#include "bsu/classgroup.hpp"

#include <algorithm>
#include <set>

namespace bsu {

bool is_reduced(const QuadField& F, const QForm& f) {
    // |sqrt(D) - 2|a|| < b < sqrt(D): exact integer comparisons via
    // 0 < b, b^2 < D, 2|a| - b < sqrt(D), and 2|a| + b > sqrt(D).
    if (f.b.sign() <= 0) return false;
    if (f.b * f.b >= F.D) return false;
    Int two_a = f.a.abs() + f.a.abs();
    Int d1 = two_a - f.b;
    if (d1.sign() > 0 && d1 * d1 >= F.D) return false;
    Int d2 = two_a + f.b;
    return d2 * d2 > F.D;
}

QForm rho(const QuadField& F, const QForm& f) {
    // rho(a,b,c) = (c, r, (r^2 - D)/(4c)) with r = -b mod 2|c| chosen in the
    // reduction window.
    Int two_c = (f.c + f.c).abs();
    Int r = fdiv_r(-f.b, two_c);
    Int sq = F.D.isqrt();  // floor(sqrt(D)); D is not a square
    if (f.c.abs() <= sq) {
        // largest r < sqrt(D) in the residue class: r += 2|c| * floor((sq - r)/2|c|)
        r = r + two_c * fdiv_q(sq - r, two_c);
    } else {
        // representative in (-|c|, |c|]
        if (r > f.c.abs()) r = r - two_c;
    }
    Int c2 = divexact(r * r - F.D, Int(4) * f.c);
    return {f.c, r, c2};
}

std::vector<QForm> reduced_forms(const QuadField& F) {
    std::vector<QForm> out;
    Int sq = F.D.isqrt();
    for (Int b = fdiv_r(F.D, Int(2)); b <= sq; b += 2) {
        if (b.sign() <= 0) continue;
        Int prod = divexact(b * b - F.D, Int(4));  // = a*c < 0
        // enumerate divisors a of |prod| (both signs), c = prod / a
        Int P = prod.abs();
        for (Int a(1); a * a <= P; a += 1) {
            if (!divisible(P, a)) continue;
            Int c = divexact(P, a);
            for (int sa = -1; sa <= 1; sa += 2) {
                Int aa = sa > 0 ? a : -a;
                Int cc = divexact(prod, aa);
                QForm f1{aa, b, cc};
                if (is_reduced(F, f1) && gcd(gcd(f1.a, f1.b), f1.c).is_one()) out.push_back(f1);
                if (a != c) {
                    QForm f2{cc, b, aa};
                    if (is_reduced(F, f2) && gcd(gcd(f2.a, f2.b), f2.c).is_one()) out.push_back(f2);
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

QForm cycle_key(const QuadField& F, QForm f) {
    // Reduce f by rho-steps until reduced, then walk the full cycle.
    int guard = 0;
    while (!is_reduced(F, f)) {
        f = rho(F, f);
        if (++guard > 100000) throw domain_error("form reduction did not terminate");
    }
    QForm best = f, cur = f;
    do {
        cur = rho(F, cur);
        if (cur < best) best = cur;
        if (++guard > 200000) throw domain_error("form cycle did not close");
    } while (!(cur == f));
    return best;
}

namespace {

/// Oriented form attached to an ideal: N(x*beta + y*alpha)/N(I) with the basis
/// ordered so the pairing (embed1 x embed2) is positively oriented.
QForm form_of_ideal(const QuadField& F, const Ideal& I) {
    // Basis alpha = a, beta = b + c*omega; the order (beta, alpha) is positively
    // oriented for every HNF basis, so the class map is constant on narrow classes.
    QuadElt beta{Rat(I.b), Rat(I.c)};
    Int A = F.norm(beta).num();
    Int B = F.trace(F.mul(beta, F.conj({Rat(I.a), Rat(0)}))).num();
    Int C = (I.a * I.a);
    Int nm = I.norm();
    A = divexact(A, nm);
    B = divexact(B, nm);
    C = divexact(C, nm);
    // content should be 1 for ideals coprime-ish; divide out any residual content
    Int g = gcd(gcd(A, B), C);
    if (!g.is_one()) { A = divexact(A, g); B = divexact(B, g); C = divexact(C, g); }
    return {A, B, C};
}

void group_structure(const std::vector<std::vector<long>>& table, std::vector<long>& structure) {
    long h = static_cast<long>(table.size());
    // order of each element
    auto pw = [&](long i, long e) {
        long r = 0;
        long base = i;
        while (e > 0) {
            if (e & 1) r = table[r][base];
            base = table[base][base];
            e >>= 1;
        }
        return r;
    };
    // primary decomposition by counting q^k-torsion
    std::vector<std::pair<long, int>> prime_powers;
    {
        long hh = h;
        for (long q = 2; q * q <= hh; ++q) {
            if (hh % q != 0) continue;
            int vq = 0;
            while (hh % q == 0) { hh /= q; ++vq; }
            prime_powers.emplace_back(q, vq);
        }
        if (hh > 1) prime_powers.emplace_back(hh, 1);
    }
    std::map<long, std::vector<long>> primary;  // q -> list of cyclic factor sizes q^e
    for (auto [q, vq] : prime_powers) {
        std::vector<long> tcount;  // tcount[k] = log_q #(q^k torsion)
        tcount.push_back(0);
        long qk = 1;
        for (int k = 1; k <= vq; ++k) {
            qk *= q;
            long cnt = 0;
            for (long i = 0; i < h; ++i)
                if (pw(i, qk) == 0) ++cnt;
            long lg = 0, c = cnt;
            while (c > 1) { c /= q; ++lg; }
            tcount.push_back(lg);
        }
        // number of factors of order >= q^k is tcount[k] - tcount[k-1]
        std::vector<long> factors;
        for (int k = 1; k < static_cast<int>(tcount.size()); ++k) {
            long nk = tcount[k] - tcount[k - 1];
            long prev = (k + 1 < static_cast<int>(tcount.size())) ? tcount[k + 1] - tcount[k] : 0;
            long exactly_k = nk - prev;
            for (long i = 0; i < exactly_k; ++i) {
                long val = 1;
                for (int j = 0; j < k; ++j) val *= q;
                factors.push_back(val);
            }
        }
        std::sort(factors.rbegin(), factors.rend());
        primary[q] = factors;
    }
    // merge primary parts into invariant factors (largest first)
    size_t rank = 0;
    for (auto& [q, fs] : primary) rank = std::max(rank, fs.size());
    structure.assign(rank, 1);
    for (auto& [q, fs] : primary)
        for (size_t i = 0; i < fs.size(); ++i) structure[i] *= fs[i];
    if (structure.empty()) structure.push_back(1);
}

} // namespace

long class_of(const NarrowClassGroup& G, const Ideal& I) {
    QForm key = cycle_key(G.F, form_of_ideal(G.F, I));
    for (size_t i = 0; i < G.key_forms.size(); ++i)
        if (G.key_forms[i] == key) return static_cast<long>(i);
    throw domain_error("class_of: form cycle not found (non-fundamental input?)");
}

long NarrowClassGroup::inverse(long i) const {
    for (long j = 0; j < order; ++j)
        if (table[i][j] == 0) return j;
    throw domain_error("class group: no inverse");
}

long NarrowClassGroup::power(long i, long e) const {
    long m = ((e % order) + order) % order;
    long r = 0, base = i;
    while (m > 0) {
        if (m & 1) r = table[r][base];
        base = table[base][base];
        m >>= 1;
    }
    return r;
}

NarrowClassGroup narrow_class_group(const QuadField& F, const Ideal& avoid) {
    NarrowClassGroup G;
    G.F = F;
    // Partition reduced forms into rho-cycles.
    std::vector<QForm> forms = reduced_forms(F);
    std::set<QForm> keys;
    for (const QForm& f : forms) keys.insert(cycle_key(F, f));
    std::vector<QForm> key_list(keys.begin(), keys.end());
    // principal class first, then lex order
    QForm principal = cycle_key(F, QForm{Int(1), Int(F.t == 1 ? 1 : 2), divexact((Int(F.t == 1 ? 1 : 4) - F.D), Int(4))});
    // (for t=1: (1,1,(1-D)/4); for t=0: (1,2,(4-D)/4) both have disc D)
    auto it = std::find(key_list.begin(), key_list.end(), principal);
    if (it == key_list.end()) throw domain_error("principal cycle missing");
    std::rotate(key_list.begin(), it, it + 1);
    std::sort(key_list.begin() + 1, key_list.end());
    G.key_forms = key_list;
    G.order = static_cast<long>(key_list.size());

    // Prime ideal representatives coprime to avoid, by increasing norm then residue.
    Int avoid_norm = avoid.norm();
    G.reps.assign(G.order, Ideal{});
    std::vector<bool> have(G.order, false);
    long found = 0;
    auto try_ideal = [&](const Ideal& P) {
        long idx = 0;
        {
            QForm key = cycle_key(F, form_of_ideal(F, P));
            auto jt = std::find(G.key_forms.begin(), G.key_forms.end(), key);
            if (jt == G.key_forms.end()) throw domain_error("rep class not found");
            idx = static_cast<long>(jt - G.key_forms.begin());
        }
        if (!have[idx]) {
            have[idx] = true;
            G.reps[idx] = P;
            ++found;
        }
    };
    // enumerate prime ideals by norm: split/ramified (norm q) and inert (norm q^2)
    for (Int nrm(2); found < G.order; nrm += 1) {
        if (nrm > Int(100000)) throw domain_error("class representatives not found below norm bound");
        if (nrm.is_probab_prime()) {
            if (gcd(nrm, avoid_norm).is_one()) {
                for (const Ideal& P : F.primes_above(nrm))
                    if (P.is_primitive()) try_ideal(P);
            }
        } else if (nrm.is_perfect_square()) {
            Int q = nrm.isqrt();
            if (q.is_probab_prime() && gcd(q, avoid_norm).is_one()) {
                for (const Ideal& P : F.primes_above(q))
                    if (!P.is_primitive()) try_ideal(P);  // inert (q)
            }
        }
    }

    // Composition table via products of representative ideals.
    G.table.assign(G.order, std::vector<long>(G.order, 0));
    for (long i = 0; i < G.order; ++i)
        for (long j = i; j < G.order; ++j) {
            Ideal prod = F.mul_ideal(G.reps[i], G.reps[j]);
            long k = 0;
            QForm key = cycle_key(F, form_of_ideal(F, prod));
            auto jt = std::find(G.key_forms.begin(), G.key_forms.end(), key);
            if (jt == G.key_forms.end()) throw domain_error("product class not found");
            k = static_cast<long>(jt - G.key_forms.begin());
            G.table[i][j] = G.table[j][i] = k;
        }
    // identity sanity: reps[0] must act trivially
    for (long i = 0; i < G.order; ++i)
        if (G.table[0][i] != i) throw domain_error("class table: identity row broken");

    group_structure(G.table, G.structure);

    // Complex conjugation: the narrow class of (sqrt(D)) (mixed-sign generator).
    G.conj_class = class_of(G, F.principal_ideal(F.sqrtD()));
    if (G.table[G.conj_class][G.conj_class] != 0)
        throw domain_error("conjugation class does not square to identity");
    return G;
}

} // namespace bsu
