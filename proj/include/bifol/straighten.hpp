#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bifol/circle.hpp"
#include "bifol/foliation.hpp"
#include "bifol/geometry.hpp"
#include "bifol/grid_map.hpp"
#include "bifol/homology.hpp"

namespace bifol {

struct StraighteningParams {
    Vec2 basepoint{0.0, 0.0};        // p
    double leaf_budget = 2000.0;     // L: total arclength traced through p
    int grid_resolution = 256;       // N
    double epsilon = 2e-3;           // nearest-approach radius for coverage
    double transversality_threshold = 0.05;

    // Sub-budgets for the invariants feeding the construction.
    long long rotation_iterations = 1000000;   // enclosure length for rho
    long long conjugacy_orbit = 2000000;       // orbit length for h
    int conjugacy_resolution = 1024;
    int first_return_resolution = 512;
    double section_budget = 64.0;              // arclength per return trace
    double cycle_budget = 1000.0;              // T_max for A(F) estimates
    long long minimality_orbit = 20000;
    double minimality_eps = 5e-3;

    int verify_samples = 64;
    std::uint64_t seed = 1;

    enum class Orientation { Both, ForwardOnly, BackwardOnly };
    Orientation trace_orientation = Orientation::Both;
};

// Conjugacy residuals measured by pushing short leaf arcs through phi and
// comparing against straight lines of the target directions.
struct VerifyReport {
    double max_perp_alpha = 0.0;    // deviation of pushed alpha arcs from straightness
    double max_perp_beta = 0.0;
    double max_angle_alpha = 0.0;   // radians, against the alpha target direction
    double max_angle_beta = 0.0;
    double basepoint_residual = 0.0;
    bool h1_identity = false;
    int samples = 0;

    double worst_residual() const {
        return std::max(std::max(max_perp_alpha, max_perp_beta),
                        std::max(max_angle_alpha, max_angle_beta));
    }
};

struct QualityReport {
    double max_extension_gap = 0.0;   // max node distance to the traced leaf
    double basepoint_residual = 0.0;
    bool h1_identity = false;
    double beta_fiber_skew = 0.0;     // max angle of phi(x)-x against d_beta on the leaf
    std::vector<std::string> flags;
    VerifyReport verification;
};

struct StraighteningResult {
    GridHomeomorphism phi;
    HalfLine alpha_target;            // direction of A(F_alpha)
    double alpha_bound;               // its angular bound
    HalfLine beta_target;             // direction of A(F_beta)
    double beta_bound;
    QualityReport quality;
};

// The unique point of the line p + R d_alpha0 reachable from x along
// d_beta: the closed form of the holonomy when beta is linear.  Exact
// 2x2 solve; parallel directions are a transversality error.
Vec2 oblique_projection(Vec2 p, const HalfLine& d_alpha0, const HalfLine& d_beta, Vec2 x);

// Result of straightening a suspension-type beta foliation to a linear one.
struct BetaStraightening {
    GridHomeomorphism phi1;
    HalfLine direction;               // the linear image direction
    RotationEnclosure rho;            // enclosure of the section return map
};

// Straighten beta to the linear foliation of direction (rho, sigma)/|.|,
// where rho is the rotation number of the first-return map on {y = 0} and
// sigma the crossing direction.  beta must be a vertical suspension or
// have leaves transverse to horizontal circles (margin-checked).  The map
// sends the point at parameter t of the beta-leaf through (x, 0) to
// (h(x) + t rho, sigma t), with h the empirical conjugacy of the return
// map; it fixes the origin and induces the identity on H_1.
BetaStraightening straighten_suspension_beta(const Foliation& beta,
                                             const StraighteningParams& params);

// The straightening engine for a pair whose beta is already linear:
//  (a) trace the alpha-leaf through p both ways to the budget and project
//      it onto the line p + R d_alpha0 along d_beta;
//  (b) extend to grid nodes from the nearest traced sample with the
//      first-order local-frame correction (beta flow commutes with phi;
//      the tangential component is scaled by the local image-speed ratio).
// Gaps above epsilon only degrade the quality flags; above 10 epsilon the
// run is refused.
StraighteningResult simultaneous_straighten(const Foliation& alpha, const Foliation& beta,
                                            const StraighteningParams& params);

// Variant taking A(F_alpha) as given (the construction's precondition
// hands it in); used by the pipeline, where naturality pins the pushed
// foliation's cycle to the original one exactly.
StraighteningResult simultaneous_straighten(const Foliation& alpha, const Foliation& beta,
                                            const StraighteningParams& params,
                                            const HalfLine& d_alpha0, double alpha_bound);

// Full pipeline: straighten beta first (identity stage when it is already
// linear), push the pair, run simultaneous_straighten, compose, verify.
StraighteningResult straighten_pipeline(const Foliation& alpha, const Foliation& beta,
                                        const StraighteningParams& params);

// Push short leaf arcs of both foliations through phi, fit lines in the
// cover, and report the worst perpendicular and angular deviations from
// the target directions, plus the basepoint and H_1 checks.  Failures are
// reported, never thrown.
VerifyReport verify_conjugacy(const GridHomeomorphism& phi, const Foliation& alpha,
                              const Foliation& beta, const HalfLine& target_alpha,
                              const HalfLine& target_beta, int n_samples,
                              std::uint64_t seed, Vec2 basepoint = {0.0, 0.0});

}  // namespace bifol
