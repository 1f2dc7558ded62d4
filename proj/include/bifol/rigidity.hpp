#pragma once

#include <vector>

#include "bifol/geometry.hpp"

namespace bifol {

// ---------------------------------------------------------------------------
// The affine model of a torus homeomorphism preserving the linear
// bi-foliation of slopes delta and delta'.  The defining relations
//
//     F2 = delta  F1 + a (y - delta  x) + b
//     F2 = delta' F1 + a'(y - delta' x) + b'
//
// solve to F(x, y) = M (x, y) + translation with
//
//     M = 1/(delta - delta') [[ a delta - a' delta',  a' - a          ],
//                             [ delta delta' (a - a'), delta a' - delta' a ]]
//     translation = (b' - b, delta b' - delta' b) / (delta - delta').
//
// M has eigenvalues a, a' with eigendirections (1, delta), (1, delta').
// ---------------------------------------------------------------------------
class AffineBiFolAutomorphism {
public:
    AffineBiFolAutomorphism(double delta, double delta_prime, double a, double a_prime,
                            double b, double b_prime);

    double delta() const { return delta_; }
    double delta_prime() const { return delta_prime_; }
    double a() const { return a_; }
    double a_prime() const { return a_prime_; }
    double b() const { return b_; }
    double b_prime() const { return b_prime_; }

    const Mat2& matrix() const { return m_; }
    Vec2 translation() const { return translation_; }

    // F1 and F2 from the closed forms.
    Vec2 apply(Vec2 p) const { return m_ * p + translation_; }

    // Composition with another automorphism of the same slope pair.
    AffineBiFolAutomorphism compose(const AffineBiFolAutomorphism& inner) const;

    // true when M has integer entries (tolerance 1e-9) with |det| = 1,
    // i.e. the affine map descends to a torus homeomorphism.
    bool descends_to_torus() const;

private:
    double delta_, delta_prime_, a_, a_prime_, b_, b_prime_;
    Mat2 m_;
    Vec2 translation_;
};

AffineBiFolAutomorphism affine_from_slope_data(double delta, double delta_prime, double a,
                                               double a_prime, double b, double b_prime);

struct RigidityVerdict {
    bool is_identity;          // M = id and translation = 0 within 1e-12
    bool origin_assertion_ok;  // if required and M = id, then (a, a') = (1, 1)
    double matrix_residual;    // max |M - id| entry
    double translation_residual;
};

// Identity-rigidity check: an automorphism fixing the origin and acting
// trivially on H_1 must be the identity; at the affine-model level the
// verdict is simply M = id, translation = 0, together with the structural
// assertion that M = id forces a = a' = 1.
RigidityVerdict rigidity_identity_check(const AffineBiFolAutomorphism& map,
                                        bool require_origin_fixed);

// All A in GL2(Z) with |entries| <= entry_bound such that (1, delta) and
// (1, delta') are eigendirections of A (cross-product residual <= 1e-9).
// Exhaustive; always contains +-identity.  entry_bound is capped at 12.
std::vector<IntMat2> find_affine_symmetries(double delta, double delta_prime,
                                            int entry_bound);

}  // namespace bifol
