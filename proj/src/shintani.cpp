#include "bsu/shintani.hpp"

#include <algorithm>
#include <sstream>

#include "bsu/cache.hpp"

namespace bsu {

std::atomic<unsigned long>& cone_point_visits() {
    static std::atomic<unsigned long> n{0};
    return n;
}
std::atomic<unsigned long>& zeta_evaluations() {
    static std::atomic<unsigned long> n{0};
    return n;
}

namespace {
int g_max_level = 6;
}
int max_congruence_level() { return g_max_level; }
void set_max_congruence_level(int lvl) { g_max_level = lvl; }

Cone shintani_domain_cone(const QuadField& F) { return {F.one(), F.eps_plus}; }

bool cone_contains(const QuadField& F, const Cone& C, const QuadElt& z) {
    auto [x1, x2] = coords_in_basis(z, C.v1, C.v2);
    return x1.sign() > 0 && x2.sign() >= 0;
}

std::vector<Cone> subdivide_at(const QuadField& F, const Cone& C, const QuadElt& w) {
    auto [x1, x2] = coords_in_basis(w, C.v1, C.v2);
    if (x1.sign() <= 0 || x2.sign() <= 0)
        throw domain_error("subdivide_at: ray not interior to the cone");
    return {Cone{C.v1, w}, Cone{w, C.v2}};
}

std::pair<Rat, Rat> coords_in_basis(const QuadElt& target, const QuadElt& e1, const QuadElt& e2) {
    Rat det = e1.x * e2.y - e1.y * e2.x;
    if (det.is_zero()) throw domain_error("coords_in_basis: degenerate basis");
    Rat x = (target.x * e2.y - target.y * e2.x) / det;
    Rat y = (e1.x * target.y - e1.y * target.x) / det;
    return {x, y};
}

std::vector<Cone> unimodular_fan(const QuadField& F, const Cone& C) {
    // Klein sail subdivision in O_F-coordinates. Generators must be primitive
    // integral vectors with positive determinant.
    auto as_ivec = [](const QuadElt& v) {
        if (!v.x.is_integer() || !v.y.is_integer())
            throw domain_error("unimodular_fan: generator not integral");
        Int x = v.x.num(), y = v.y.num();
        Int g = gcd(x, y);
        if (g > Int(1)) { x = divexact(x, g); y = divexact(y, g); }  // same ray
        return std::pair<Int, Int>{x, y};
    };
    auto [ux, uy] = as_ivec(C.v1);
    auto [vx, vy] = as_ivec(C.v2);
    auto det = [](const Int& ax, const Int& ay, const Int& bx, const Int& by) {
        return ax * by - ay * bx;
    };
    Int d = det(ux, uy, vx, vy);
    if (d.sign() < 0) throw domain_error("unimodular_fan: negative orientation");
    std::vector<Cone> fan;
    QuadElt cur{Rat(ux), Rat(uy)};
    QuadElt vlast{Rat(vx), Rat(vy)};
    Int cx = ux, cy = uy;
    int guard = 0;
    while (!(det(cx, cy, vx, vy)).is_one()) {
        if (++guard > 10000) throw domain_error("unimodular_fan: sail did not terminate");
        Int dcv = det(cx, cy, vx, vy);
        // P0 with det(cur, P0) = 1: cx*P0y - cy*P0x = 1
        Int s, t;
        Int g = gcdext(cx, cy, s, t);
        if (!g.is_one()) throw domain_error("unimodular_fan: non-primitive intermediate");
        // cx*s + cy*t = 1 -> take P0 = (-t, s): cx*s - cy*(-t) = 1
        Int px = -t, py = s;
        Int dpv = det(px, py, vx, vy);
        // minimal tt with dpv + tt*dcv > 0
        Int tt = fdiv_q(-dpv, dcv) + Int(1);
        px += tt * cx;
        py += tt * cy;
        QuadElt w{Rat(px), Rat(py)};
        fan.push_back(Cone{cur, w});
        cur = w;
        cx = px;
        cy = py;
    }
    fan.push_back(Cone{cur, vlast});
    return fan;
}

BoxBasis scaled_box(const QuadField& F, const Cone& C, const QuadElt& f1, const QuadElt& f2) {
    auto scale = [&](const QuadElt& v) {
        auto [r1, r2] = coords_in_basis(v, f1, f2);
        Int c = lcm(r1.den(), r2.den());
        return F.mul_rat(v, Rat(c));
    };
    return {scale(C.v1), scale(C.v2)};
}

void for_each_point(const QuadField& F, const BoxBasis& box, const PointLattice& pts,
                    const std::function<void(const Rat&, const Rat&, const QuadElt&)>& cb) {
    // Coordinates of the point lattice relative to the box basis.
    auto g1 = coords_in_basis(pts.f1, box.V1, box.V2);
    auto g2 = coords_in_basis(pts.f2, box.V1, box.V2);
    auto s = coords_in_basis(pts.mu, box.V1, box.V2);
    // Invert [(g1.first g2.first), (g1.second g2.second)] s.t. (a,b) -> coords.
    Rat det = g1.first * g2.second - g1.second * g2.first;
    if (det.is_zero()) throw domain_error("for_each_point: degenerate lattice");
    // a-range from preimages of the closed unit square corners.
    Rat amin, amax;
    bool first = true;
    for (int e1 = 0; e1 <= 1; ++e1)
        for (int e2 = 0; e2 <= 1; ++e2) {
            Rat w1 = Rat(e1) - s.first, w2 = Rat(e2) - s.second;
            Rat a = (w1 * g2.second - w2 * g2.first) / det;
            if (first || a < amin) amin = a;
            if (first || a > amax) amax = a;
            first = false;
        }
    Int alo = amin.floor() - Int(1), ahi = amax.ceil() + Int(1);
    auto& visits = cone_point_visits();
    for (Int a = alo; a <= ahi; a += 1) {
        // x1 = s1 + a*g1.first + b*g2.first in (0,1]
        // x2 = s2 + a*g1.second + b*g2.second in [0,1)
        Rat base1 = s.first + Rat(a) * g1.first;
        Rat base2 = s.second + Rat(a) * g1.second;
        // intersect integer b ranges; track [blo, bhi]
        bool empty = false;
        std::optional<Int> blo, bhi;
        auto apply = [&](const Rat& c, const Rat& base, const Rat& lo, bool lo_strict,
                         const Rat& hi, bool hi_strict) {
            if (empty) return;
            if (c.is_zero()) {
                bool ok_lo = lo_strict ? (base > lo) : (base >= lo);
                bool ok_hi = hi_strict ? (base < hi) : (base <= hi);
                if (!(ok_lo && ok_hi)) empty = true;
                return;
            }
            Rat t1 = (lo - base) / c, t2 = (hi - base) / c;
            bool t1_strict = lo_strict, t2_strict = hi_strict;
            if (c.sign() < 0) {
                std::swap(t1, t2);
                std::swap(t1_strict, t2_strict);
            }
            // b in (t1, t2] with strictness flags
            Int lo_i = t1_strict ? (t1.floor() + Int(1)) : t1.ceil();
            Int hi_i = t2_strict ? (t2.ceil() - Int(1)) : t2.floor();
            if (!blo || lo_i > *blo) blo = lo_i;
            if (!bhi || hi_i < *bhi) bhi = hi_i;
        };
        apply(g2.first, base1, Rat(0), true, Rat(1), false);    // x1 in (0,1]
        apply(g2.second, base2, Rat(0), false, Rat(1), true);   // x2 in [0,1)
        if (empty || !blo || !bhi || *blo > *bhi) continue;
        for (Int b = *blo; b <= *bhi; b += 1) {
            Rat x1 = base1 + Rat(b) * g2.first;
            Rat x2 = base2 + Rat(b) * g2.second;
            QuadElt z = F.add(pts.mu, F.add(F.mul_rat(pts.f1, Rat(a)), F.mul_rat(pts.f2, Rat(b))));
            visits.fetch_add(1, std::memory_order_relaxed);
            cb(x1, x2, z);
        }
    }
}

// ---------------------------------------------------------------------------
// ConeSumExact

namespace {
/// beta-hat_i = B_i / i!, cached.
const std::vector<Rat>& beta_hat(size_t n) {
    static std::vector<Rat> table;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lk(mtx);
    if (table.size() <= n) {
        const auto& B = bernoulli_numbers(n);
        table.clear();
        Rat f(1);
        for (size_t i = 0; i <= n; ++i) {
            if (i > 0) f *= Rat(Int(static_cast<long>(i)));
            table.push_back(B[i] / f);
        }
    }
    return table;
}

/// beta'_j(x) for j = 0..K: convolution of beta-hat with x^e/e!.
std::vector<Rat> beta_prime_vector(const Rat& x, unsigned K) {
    const auto& bh = beta_hat(K);
    std::vector<Rat> xe(K + 1);  // x^e / e!
    xe[0] = Rat(1);
    for (unsigned e = 1; e <= K; ++e) xe[e] = xe[e - 1] * x / Rat(Int(static_cast<long>(e)));
    std::vector<Rat> out(K + 1, Rat(0));
    for (unsigned j = 0; j <= K; ++j) {
        Rat acc(0);
        for (unsigned i = 0; i <= j; ++i) acc += bh[i] * xe[j - i];
        out[j] = acc;
    }
    return out;
}
} // namespace

ConeSumExact::ConeSumExact(const QuadField& F, const BoxBasis& box, unsigned kmax)
    : F_(&F), box_(box), kmax_(kmax) {
    unsigned K = kmax_ + 2;
    T_.assign((K + 1) * (K + 1), Rat(0));
    // powers of the sector data a_m = V_m, b_m = conj(V_m)
    pow_a1_.resize(K + 1);
    pow_a2_.resize(K + 1);
    pow_b1_.resize(K + 1);
    pow_b2_.resize(K + 1);
    pow_a1_[0] = pow_a2_[0] = pow_b1_[0] = pow_b2_[0] = F.one();
    QuadElt b1 = F.conj(box.V1), b2 = F.conj(box.V2);
    for (unsigned i = 1; i <= K; ++i) {
        pow_a1_[i] = F.mul(pow_a1_[i - 1], box.V1);
        pow_a2_[i] = F.mul(pow_a2_[i - 1], box.V2);
        pow_b1_[i] = F.mul(pow_b1_[i - 1], b1);
        pow_b2_[i] = F.mul(pow_b2_[i - 1], b2);
    }
}

void ConeSumExact::add_point(const Rat& x1, const Rat& x2) {
    unsigned K = kmax_ + 2;
    auto v1 = beta_prime_vector(x1, K);
    auto v2 = beta_prime_vector(x2, K);
    for (unsigned j1 = 0; j1 <= K; ++j1)
        for (unsigned j2 = 0; j1 + j2 <= K; ++j2) T(j1, j2) += v1[j1] * v2[j2];
    ++npoints_;
}

Rat ConeSumExact::norm_weighted_value(unsigned k) const {
    // (k!)^2 * rational part of [u^k] sum_{j1+j2=2k+2} T * L1^{j1-1} L2^{j2-1},
    // L_m(u) = V_m + conj(V_m) u.
    unsigned K = 2 * k + 2;
    if (K > kmax_ + 2) throw domain_error("ConeSumExact: k beyond accumulated order");
    const QuadField& F = *F_;
    QuadElt acc{Rat(0), Rat(0)};
    for (unsigned j1 = 0; j1 <= K; ++j1) {
        unsigned j2 = K - j1;
        const Rat& t = T(j1, j2);
        if (t.is_zero()) continue;
        QuadElt bracket{Rat(0), Rat(0)};
        if (j1 >= 1 && j2 >= 1) {
            unsigned e1 = j1 - 1, e2 = j2 - 1;
            unsigned lo = (k > e2) ? k - e2 : 0;
            unsigned hi = std::min(e1, k);
            for (unsigned i = lo; i <= hi; ++i) {
                QuadElt term = F.mul(F.mul(pow_a1_[e1 - i], pow_b1_[i]),
                                     F.mul(pow_a2_[e2 - (k - i)], pow_b2_[k - i]));
                Rat c = Rat(binomial(e1, i) * binomial(e2, k - i));
                bracket = F.add(bracket, F.mul_rat(term, c));
            }
        } else if (j1 == 0) {
            // [u^k] ( L2^{K-1} / L1 )
            unsigned e2 = K - 1;
            QuadElt inva1 = F.inv(box_.V1);
            QuadElt ipow = F.one();
            // i runs over the L2-expansion index; term i uses (-b1)^{k-i} a1^{-(k-i+1)}
            for (unsigned i = 0; i <= std::min(e2, k); ++i) {
                unsigned m = k - i;
                QuadElt t2 = F.mul(pow_a2_[e2 - i], pow_b2_[i]);
                QuadElt t1 = F.mul(pow_b1_[m], F.pow(inva1, static_cast<long>(m + 1)));
                QuadElt term = F.mul(t1, t2);
                Rat c = Rat(binomial(e2, i));
                if (m % 2 == 1) c = -c;
                bracket = F.add(bracket, F.mul_rat(term, c));
            }
        } else {  // j2 == 0
            unsigned e1 = K - 1;
            QuadElt inva2 = F.inv(box_.V2);
            for (unsigned i = 0; i <= std::min(e1, k); ++i) {
                unsigned m = k - i;
                QuadElt t1 = F.mul(pow_a1_[e1 - i], pow_b1_[i]);
                QuadElt t2 = F.mul(pow_b2_[m], F.pow(inva2, static_cast<long>(m + 1)));
                QuadElt term = F.mul(t1, t2);
                Rat c = Rat(binomial(e1, i));
                if (m % 2 == 1) c = -c;
                bracket = F.add(bracket, F.mul_rat(term, c));
            }
        }
        acc = F.add(acc, F.mul_rat(bracket, t));
    }
    // rational part of acc = x + y*omega is x + y*t/2; multiply by (k!)^2
    Rat rp = acc.x + acc.y * Rat(Int(F.t), Int(2));
    Rat kf = Rat(factorial(k));
    return rp * kf * kf;
}

QuadElt ConeSumExact::element_weighted_value(unsigned j) const {
    // (j!/2) * ( [u^0] of sector-1 series + [u^j] of sector-2 series ), where
    // sector 1 uses L_m = V_m + conj(V_m) u and sector 2 swaps the pairs.
    unsigned K = j + 2;
    if (K > kmax_ + 2) throw domain_error("ConeSumExact: moment beyond accumulated order");
    const QuadField& F = *F_;
    QuadElt acc{Rat(0), Rat(0)};
    QuadElt inva1 = F.inv(box_.V1);
    QuadElt inva2 = F.inv(box_.V2);
    QuadElt invb1 = F.inv(F.conj(box_.V1));
    QuadElt invb2 = F.inv(F.conj(box_.V2));
    for (unsigned j1 = 0; j1 <= K; ++j1) {
        unsigned j2 = K - j1;
        const Rat& t = T(j1, j2);
        if (t.is_zero()) continue;
        QuadElt bracket{Rat(0), Rat(0)};
        if (j1 >= 1 && j2 >= 1) {
            // sector 1, [u^0]: a1^{j1-1} a2^{j2-1}; sector 2, [u^j]: degree j1+j2-2=j
            // polynomial in u with leading coefficient a1^{j1-1} a2^{j2-1}.
            QuadElt lead = F.mul(pow_a1_[j1 - 1], pow_a2_[j2 - 1]);
            bracket = F.add(lead, lead);
        } else if (j1 == 0) {
            // sector 1 [u^0]: a2^{K-1} / a1.
            bracket = F.mul(pow_a2_[K - 1], inva1);
            // sector 2 [u^j] of (b2 + a2 u)^{K-1} / (b1 + a1 u):
            for (unsigned i = 0; i <= std::min(K - 1, j); ++i) {
                unsigned m = j - i;
                QuadElt t2 = F.mul(pow_b2_[K - 1 - i], pow_a2_[i]);
                QuadElt t1 = F.mul(pow_a1_[m], F.pow(invb1, static_cast<long>(m + 1)));
                QuadElt term = F.mul(t1, t2);
                Rat c = Rat(binomial(K - 1, i));
                if (m % 2 == 1) c = -c;
                bracket = F.add(bracket, F.mul_rat(term, c));
            }
        } else {  // j2 == 0
            bracket = F.mul(pow_a1_[K - 1], inva2);
            for (unsigned i = 0; i <= std::min(K - 1, j); ++i) {
                unsigned m = j - i;
                QuadElt t1 = F.mul(pow_b1_[K - 1 - i], pow_a1_[i]);
                QuadElt t2 = F.mul(pow_a2_[m], F.pow(invb2, static_cast<long>(m + 1)));
                QuadElt term = F.mul(t1, t2);
                Rat c = Rat(binomial(K - 1, i));
                if (m % 2 == 1) c = -c;
                bracket = F.add(bracket, F.mul_rat(term, c));
            }
        }
        acc = F.add(acc, F.mul_rat(bracket, t));
    }
    Rat jf = Rat(factorial(j)) / Rat(2);
    return F.mul_rat(acc, jf);
}

// ---------------------------------------------------------------------------
// partial zeta

Ideal smoothing_prime(const QuadField& F, const Int& ell, bool other_root) {
    auto primes = F.primes_above(ell);
    std::vector<Ideal> deg1;
    for (const auto& P : primes)
        if (P.is_primitive()) deg1.push_back(P);
    if (deg1.empty())
        throw unsupported_smoothing_error("no degree-1 prime above ell = " + ell.str());
    std::sort(deg1.begin(), deg1.end(), [](const Ideal& A, const Ideal& B) { return A.b < B.b; });
    if (other_root && deg1.size() > 1) return deg1[1];
    return deg1[0];
}

std::vector<Ideal> smoothing_set(const QuadField& F, const Int& ell, bool q_other_root,
                                 int aux_two) {
    std::vector<Ideal> T;
    T.push_back(smoothing_prime(F, ell, q_other_root));
    bool two_inert = F.D.odd() && kronecker(F.D, Int(2)) == -1;
    bool use_two = aux_two < 0 ? two_inert : aux_two > 0;
    if (use_two) {
        if (!two_inert) throw unsupported_smoothing_error("aux smoothing prime (2) must be inert");
        T.push_back(Ideal{Int(2), Int(0), Int(2)});
    }
    return T;
}

std::vector<WeightedLattice> smoothing_lattices(const QuadField& F, const Ideal& b,
                                                const std::vector<Ideal>& smoothing_primes,
                                                bool smooth_by_inverse, unsigned k) {
    auto [e1, e2] = F.inverse_ideal_basis(b);
    std::vector<WeightedLattice> out;
    out.push_back({e1, e2, Rat(1)});
    for (const Ideal& q : smoothing_primes) {
        Int nq = q.norm();
        std::vector<WeightedLattice> next = out;
        for (const auto& piece : out) {
            if (smooth_by_inverse) {
                auto [g1, g2] = F.mul_ideal_lattice(q, piece.f1, piece.f2);
                next.push_back({g1, g2, piece.weight * -Rat(nq)});
            } else {
                // superlattice q^{-1} * piece, weight -Nq^{1+2k}
                auto [w1, w2] = F.inverse_ideal_basis(q);
                // q^{-1} * piece: multiply the piece basis by the lattice of q^{-1}
                // realized as (conj(q)/Nq) * piece
                Ideal conj_q = F.make_ideal(q.a, -(q.b + Int(F.t) * q.c), q.c);
                auto [g1, g2] = F.mul_ideal_lattice(conj_q, piece.f1, piece.f2);
                Rat inv_nq = Rat(Int(1), nq);
                Rat w = -Rat(pow_ui(nq, 1 + 2 * k));
                next.push_back({F.mul_rat(g1, inv_nq), F.mul_rat(g2, inv_nq), piece.weight * w});
            }
        }
        out = std::move(next);
    }
    return out;
}

std::string ZetaQuery::cache_key() const {
    bool two_inert = F->D.odd() && kronecker(F->D, Int(2)) == -1;
    bool use_two = aux_two < 0 ? two_inert : aux_two > 0;
    std::ostringstream os;
    os << "v1|D=" << F->D.str() << "|b=" << class_rep.a.str() << "," << class_rep.b.str() << ","
       << class_rep.c.str() << "|p=" << p.str() << "|l=" << ell.str()
       << "|qr=" << (q_other_root ? 1 : 0) << "|sm=" << (smooth_by_inverse ? "inv" : "dir")
       << "|t2=" << (use_two ? 1 : 0);
    if (congruence) {
        os << "|r=" << congruence->rx.str() << "," << congruence->ry.str()
           << "|n=" << congruence->level;
    }
    os << "|k=" << k;
    return os.str();
}

namespace {

/// Element of the lattice Z f1 + Z f2 congruent to rx + ry*omega mod p^level.
/// Exists and is unique mod p^level * lattice because the lattice is p-locally
/// the full ring of integers.
QuadElt coset_representative(const QuadField& F, const QuadElt& f1, const QuadElt& f2,
                             const Int& rx, const Int& ry, const Int& pk) {
    auto emb = [&](const Rat& r) {
        return mulmod(mod(r.num(), pk), invmod(mod(r.den(), pk), pk), pk);
    };
    Int a = emb(f1.x), b = emb(f2.x), c = emb(f1.y), d = emb(f2.y);
    Int idet = invmod(mod(a * d - b * c, pk), pk);
    Int c1 = mod(idet * (d * rx - b * ry), pk);
    Int c2 = mod(idet * (a * ry - c * rx), pk);
    return F.add(F.mul_rat(f1, Rat(c1)), F.mul_rat(f2, Rat(c2)));
}

Rat zeta_lattice_sum(const QuadField& F, const std::vector<Cone>& cones, const QuadElt& f1,
                     const QuadElt& f2, const QuadElt& mu, unsigned k) {
    Rat total(0);
    for (const Cone& C : cones) {
        BoxBasis box = scaled_box(F, C, f1, f2);
        ConeSumExact acc(F, box, 2 * k);
        for_each_point(F, box, PointLattice{mu, f1, f2},
                       [&](const Rat& x1, const Rat& x2, const QuadElt&) { acc.add_point(x1, x2); });
        total += acc.norm_weighted_value(k);
    }
    return total;
}

Rat partial_zeta_impl(const ZetaQuery& q, bool smoothed, ZetaCache* cache) {
    const QuadField& F = *q.F;
    std::string key;
    if (smoothed && cache) {
        key = q.cache_key();
        if (auto hit = cache->lookup(key)) return *hit;
    }
    zeta_evaluations().fetch_add(1, std::memory_order_relaxed);
    if (q.congruence && q.congruence->level > max_congruence_level())
        throw level_too_deep_error("congruence level beyond configured bound");
    // domain cones
    std::vector<Cone> cones;
    {
        Cone D0 = shintani_domain_cone(F);
        if (q.subdivide_ray) {
            for (const Cone& c : subdivide_at(F, D0, *q.subdivide_ray)) {
                if (q.use_fan)
                    for (const Cone& cc : unimodular_fan(F, c)) cones.push_back(cc);
                else
                    cones.push_back(c);
            }
        } else if (q.use_fan) {
            cones = unimodular_fan(F, D0);
        } else {
            cones.push_back(D0);
        }
    }
    std::vector<WeightedLattice> pieces;
    if (smoothed) {
        pieces = smoothing_lattices(F, q.class_rep, smoothing_set(F, q.ell, q.q_other_root, q.aux_two),
                                    q.smooth_by_inverse, q.k);
    } else {
        auto [e1, e2] = F.inverse_ideal_basis(q.class_rep);
        pieces.push_back({e1, e2, Rat(1)});
    }
    Rat total(0);
    for (const auto& piece : pieces) {
        QuadElt f1 = piece.f1, f2 = piece.f2, mu{Rat(0), Rat(0)};
        if (q.congruence && q.congruence->level > 0) {
            const auto& cg = *q.congruence;
            Int pk = pow_ui(q.p, static_cast<unsigned long>(cg.level));
            mu = coset_representative(F, piece.f1, piece.f2, cg.rx, cg.ry, pk);
            f1 = F.mul_rat(f1, Rat(pk));
            f2 = F.mul_rat(f2, Rat(pk));
        }
        total += piece.weight * zeta_lattice_sum(F, cones, f1, f2, mu, q.k);
    }
    // N(b)^k prefactor
    if (q.k > 0) total *= Rat(pow_ui(q.class_rep.norm(), q.k));
    if (smoothed && cache) cache->store(key, total);
    return total;
}

} // namespace

Rat partial_zeta(const ZetaQuery& q, ZetaCache* cache) { return partial_zeta_impl(q, true, cache); }

Rat partial_zeta_unsmoothed(const ZetaQuery& q) { return partial_zeta_impl(q, false, nullptr); }

} // namespace bsu
