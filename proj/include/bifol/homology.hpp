#pragma once

#include <vector>

#include "bifol/foliation.hpp"
#include "bifol/geometry.hpp"
#include "bifol/grid_map.hpp"

namespace bifol {

// Half the flat diameter of T^2: the closing geodesic of a leaf arc has
// length at most this, which is what the cycle error bound rests on.
constexpr double kClosingBound = 0.70710678118654752440;  // sqrt(2)/2

// A projective asymptotic-cycle estimate: the direction of the lifted
// displacement after a long leaf arc, with the rigorous angular bound
// asin(D / |v(T)|) from closing the arc by a minimal geodesic.
struct CycleEstimate {
    HalfLine direction;
    double trace_length;    // T
    double angular_bound;   // radians
    double displacement_norm;

    // Directions at T/4 and T/2 for convergence diagnostics.
    struct Checkpoint {
        double arclength;
        HalfLine direction;
        double angular_bound;
    };
    std::vector<Checkpoint> checkpoints;
};

// Two estimates are compatible when their directions agree within summed
// bounds; that is the only equality notion used downstream.
inline bool cycles_agree(const CycleEstimate& a, const CycleEstimate& b) {
    return angular_distance(a.direction, b.direction) <= a.angular_bound + b.angular_bound;
}

// Estimate the projective asymptotic cycle of the leaf through q.
// Throws inconclusive_cycle_error when T_max <= 10 (the bound would be
// vacuous) or when the lifted displacement stays shorter than twice the
// closing bound: with this budget the leaf is not visibly escaping.
CycleEstimate asymptotic_cycle(const Foliation& foliation, Vec2 q, double T_max,
                               double max_step = 1.0 / 256.0);

// The action of a grid map on H_1(T^2) = Z^2: the integer part of its
// lift, exact by storage.
IntMat2 induced_h1(const GridHomeomorphism& map);

// Image of a half-line under A in GL2(Z); orientation is kept.
HalfLine act_on_halfline(const IntMat2& A, const HalfLine& l);

struct ContinuedFraction {
    std::vector<long long> coefficients;
    bool terminated;  // remainder fell below 1e-12: rational at precision
};

// Standard continued-fraction coefficients of x in (0,1), up to depth.
ContinuedFraction continued_fraction(double x, int depth);

}  // namespace bifol
