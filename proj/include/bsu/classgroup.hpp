#pragma once

#include <map>
#include <string>
#include <vector>

#include "bsu/quadfield.hpp"

namespace bsu {

/// Primitive integral binary quadratic form a x^2 + b xy + c y^2 of discriminant D > 0.
struct QForm {
    Int a, b, c;
    friend bool operator==(const QForm& f, const QForm& g) {
        return f.a == g.a && f.b == g.b && f.c == g.c;
    }
    friend bool operator<(const QForm& f, const QForm& g) {
        if (f.a != g.a) return f.a < g.a;
        if (f.b != g.b) return f.b < g.b;
        return f.c < g.c;
    }
    std::string str() const { return "(" + a.str() + "," + b.str() + "," + c.str() + ")"; }
};

/// Narrow class group of a real quadratic field. Classes are indexed by the
/// lexicographically smallest reduced form in their cycle; index 0 is the
/// principal class and the rest follow in lexicographic order of that key form.
struct NarrowClassGroup {
    QuadField F;
    long order = 0;
    std::vector<long> structure;           // invariant factors d1 >= d2 >= ..., di+1 | di
    std::vector<QForm> key_forms;          // canonical cycle representative per class
    std::vector<Ideal> reps;               // prime ideal representative per class
    std::vector<std::vector<long>> table;  // composition table on class indices
    long conj_class = 0;                   // class acting as complex conjugation (see below)

    long compose(long i, long j) const { return table[i][j]; }
    long inverse(long i) const;
    long power(long i, long e) const;
    long identity() const { return 0; }
};

/// Reduced-forms machinery (exposed for tests).
bool is_reduced(const QuadField& F, const QForm& f);
QForm rho(const QuadField& F, const QForm& f);
/// All reduced forms of discriminant D.
std::vector<QForm> reduced_forms(const QuadField& F);
/// Canonical key (lex-smallest reduced form) of the cycle containing f.
QForm cycle_key(const QuadField& F, QForm f);

/// The narrow class of an ideal, as an index into the group's classes.
long class_of(const NarrowClassGroup& G, const Ideal& I);

/// Narrow class group with prime-ideal representatives coprime to `avoid`
/// (representatives are the smallest-norm prime ideals per class, enumerated by
/// increasing norm then residue). The conjugation class is the narrow class of
/// the principal ideal (sqrt(D)); it squares to the identity.
NarrowClassGroup narrow_class_group(const QuadField& F, const Ideal& avoid);

} // namespace bsu
