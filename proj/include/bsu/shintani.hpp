#pragma once

#include <atomic>
#include <functional>
#include <optional>
#include <vector>

#include "bsu/bernoulli.hpp"
#include "bsu/classgroup.hpp"
#include "bsu/quadfield.hpp"

namespace bsu {

class ZetaCache;

/// Half-open simplicial cone {x1 v1 + x2 v2 : x1 > 0, x2 >= 0}: the boundary ray
/// through v1 is included, the ray through v2 excluded. Generators are totally
/// positive integral elements.
struct Cone {
    QuadElt v1, v2;
};

/// The fundamental domain for the action of <eps_plus> on the totally positive
/// quadrant: the single cone C(1, eps_plus).
Cone shintani_domain_cone(const QuadField& F);

/// Splits C(v1,v2) at an interior ray: {C(v1,w), C(w,v2)}, an exact partition.
std::vector<Cone> subdivide_at(const QuadField& F, const Cone& C, const QuadElt& w);

/// Partition of the cone into subcones whose generator pairs are Z-bases of O_F
/// (determinant +-1); lattice point enumeration over such cones needs no
/// fundamental-parallelepiped multiplicity.
std::vector<Cone> unimodular_fan(const QuadField& F, const Cone& C);

/// True iff z lies in the half-open cone.
bool cone_contains(const QuadField& F, const Cone& C, const QuadElt& z);

/// Points mu + Z f1 + Z f2.
struct PointLattice {
    QuadElt mu, f1, f2;
};

/// Box spanned by V1, V2 with the cone's half-open convention; V1, V2 are the
/// minimal positive integer multiples of the cone generators lying in the
/// step lattice of the sum being decomposed.
struct BoxBasis {
    QuadElt V1, V2;
};

/// Solve target = x*e1 + y*e2 over Q.
std::pair<Rat, Rat> coords_in_basis(const QuadElt& target, const QuadElt& e1, const QuadElt& e2);

/// Scale cone generators into the lattice Z f1 + Z f2.
BoxBasis scaled_box(const QuadField& F, const Cone& C, const QuadElt& f1, const QuadElt& f2);

/// Enumerates lattice points of `pts` inside the half-open box of `box`,
/// reporting exact box coordinates (x1, x2) and the point itself.
void for_each_point(const QuadField& F, const BoxBasis& box, const PointLattice& pts,
                    const std::function<void(const Rat& x1, const Rat& x2, const QuadElt& z)>& cb);

/// Count of cone/lattice point visits performed (cache instrumentation).
std::atomic<unsigned long>& cone_point_visits();
/// Count of full cone-sum zeta evaluations (cache instrumentation).
std::atomic<unsigned long>& zeta_evaluations();

/// Accumulates Bernoulli data of shifted points of one box and evaluates the
/// analytically continued cone sums: norm-weighted values at nonpositive
/// integers, and element-weighted (x^j) values used as measure moments.
/// All arithmetic exact over Q and Q(sqrt(D)).
class ConeSumExact {
  public:
    /// kmax: largest Bernoulli index needed (j1+j2 <= kmax+2 retained).
    ConeSumExact(const QuadField& F, const BoxBasis& box, unsigned kmax);

    void add_point(const Rat& x1, const Rat& x2);
    long points() const { return npoints_; }

    /// Continued value of sum N(z)^{-s} at s = -k (needs 2k+2 <= kmax+2).
    Rat norm_weighted_value(unsigned k) const;
    /// Continued value of sum z^j N(z)^{-s} at s = 0, an element of F.
    QuadElt element_weighted_value(unsigned j) const;

  private:
    const QuadField* F_;
    BoxBasis box_;
    unsigned kmax_;
    long npoints_ = 0;
    std::vector<Rat> T_;  // T[j1*(K+1)+j2] = sum over points of b'_{j1}(x1) b'_{j2}(x2)
    std::vector<QuadElt> pow_a1_, pow_a2_, pow_b1_, pow_b2_;
    const Rat& T(unsigned j1, unsigned j2) const { return T_[j1 * (kmax_ + 3) + j2]; }
    Rat& T(unsigned j1, unsigned j2) { return T_[j1 * (kmax_ + 3) + j2]; }
};

/// Smoothing prime above ell with residue degree 1. `other_root` selects the
/// conjugate prime when ell splits. Throws unsupported_smoothing_error when ell
/// is inert in F.
Ideal smoothing_prime(const QuadField& F, const Int& ell, bool other_root);

/// A lattice with a multiplicity in a smoothed sum.
struct WeightedLattice {
    QuadElt f1, f2;
    Rat weight;
};

/// The weighted lattices realizing the T-smoothing of the class-b sum.
/// Each smoothing prime q in T contributes the Euler factor (1 - Nq^{1-s}
/// sigma_q^{-1}): the sublattice q * (piece) with weight -Nq per existing
/// piece (divisor orientation, default), or the superlattice q^{-1} * (piece)
/// with weight -Nq^{1+2k}. k matters only for norm-weighted values.
std::vector<WeightedLattice> smoothing_lattices(const QuadField& F, const Ideal& b,
                                                const std::vector<Ideal>& smoothing_primes,
                                                bool smooth_by_inverse, unsigned k);

/// The smoothing set: the degree-1 prime above ell, plus the inert prime (2)
/// when aux_two is on (aux_two < 0 resolves to "on iff 2 is inert in F",
/// the normalization pinned by the reference tables).
std::vector<Ideal> smoothing_set(const QuadField& F, const Int& ell, bool q_other_root,
                                 int aux_two);

/// Congruence restriction: generator = r mod p^level, r given by coordinates
/// (r.x + r.y*omega) with 0 <= r.x, r.y < p^level.
struct Congruence {
    Int rx, ry;
    int level = 0;
};

/// A T-smoothed, congruence-restricted partial zeta query at s = -k.
struct ZetaQuery {
    const QuadField* F = nullptr;
    Ideal class_rep;           // integral ideal b coprime to p*ell, defines the narrow class
    Int p;                     // the inert prime (congruence modulus base)
    Int ell;                   // smoothing rational prime, with a degree-1 prime above
    bool q_other_root = false; // conjugate choice for the smoothing prime
    bool smooth_by_inverse = true;  // divisor orientation: sublattice q*b^{-1} (default) vs q^{-1}*b^{-1}
    int aux_two = -1;          // extra smoothing prime (2): -1 auto (iff 2 inert), 0 off, 1 on
    std::optional<Congruence> congruence;
    unsigned k = 0;            // evaluate at s = -k
    bool use_fan = true;       // evaluate over the unimodular fan (value-invariant)
    std::optional<QuadElt> subdivide_ray;  // extra test subdivision (value-invariant)

    std::string cache_key() const;
};

/// Exact T-smoothed partial zeta value at s = -k. Integer when k = 0 (asserted
/// by callers); exact rational in general. Uses/fills the cache when given.
Rat partial_zeta(const ZetaQuery& q, ZetaCache* cache = nullptr);

/// Unsmoothed variant (no T factor): exact rational, possibly non-integral.
Rat partial_zeta_unsmoothed(const ZetaQuery& q);

/// Maximum congruence level accepted by queries (spec default).
int max_congruence_level();
void set_max_congruence_level(int lvl);

} // namespace bsu
