#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "bifol/errors.hpp"
#include "bifol/geometry.hpp"

namespace bifol {

// ---------------------------------------------------------------------------
// Rotation-number enclosure.
//
// For a monotone degree-one lift F, |F^n(0) - n tau(F)| <= 1, so
// [ (F^n(0)-1)/n , (F^n(0)+1)/n ] is a rigorous interval of width 2/n
// around the translation number tau(F).  The raw displacement F^n(0) is
// stored so that integer lift shifts act exactly on enclosures.
// ---------------------------------------------------------------------------
class RotationEnclosure {
public:
    RotationEnclosure(double displacement, long long n)
        : displacement_(displacement), n_(n) {
        if (n <= 0) throw argument_error("RotationEnclosure: n must be >= 1");
    }

    double lo() const { return (displacement_ - 1.0) / double(n_); }
    double hi() const { return (displacement_ + 1.0) / double(n_); }
    double center() const { return displacement_ / double(n_); }
    double width() const { return hi() - lo(); }
    long long iterations() const { return n_; }
    double displacement() const { return displacement_; }

    bool contains(double tau) const { return lo() <= tau && tau <= hi(); }
    bool overlaps(const RotationEnclosure& o) const {
        return lo() <= o.hi() && o.lo() <= hi();
    }

    // Enclosure of the lift F + d.  Exact: both sides of the shift law
    // compute displacement + n*d with the same rounding.
    RotationEnclosure shifted_by(long long d) const {
        return RotationEnclosure(displacement_ + double(n_ * d), n_);
    }

    // Consistent mod-1 reduction: both endpoints move by the same integer,
    // chosen so the center lands in [0, 1).
    RotationEnclosure reduced() const {
        const double m = std::floor(center());
        return RotationEnclosure(displacement_ - m * double(n_), n_);
    }

    bool operator==(const RotationEnclosure& o) const {
        return displacement_ == o.displacement_ && n_ == o.n_;
    }

private:
    double displacement_;
    long long n_;
};

// ---------------------------------------------------------------------------
// CircleLift: a monotone degree-one lift F of an orientation-preserving
// circle homeomorphism, F(x+1) = F(x) + 1.  Families:
//
//   rotation(theta)          F(x) = x + theta
//   arnold(theta, K)         F(x) = x + theta + (K/2pi) sin(2pi x), |K| < 1
//   from_samples(knots)      piecewise-linear through strictly increasing
//                            knots covering one period (closing knot
//                            (x0+1, y0+1) required)
//   composition              G o H
//   inverse                  F^{-1}, evaluated by bisection to 1e-14
//   shifted                  F + d, d integer (kept structural so that the
//                            lift-shift law tau(F+d) = tau(F) + d holds
//                            exactly on enclosures)
//
// Values are immutable after construction; copies share nodes.
// ---------------------------------------------------------------------------
class CircleLift {
public:
    struct Knot {
        double x;
        double y;
    };

    static CircleLift rotation(double theta);
    static CircleLift arnold(double theta, double K);
    static CircleLift from_samples(std::vector<Knot> knots);
    static CircleLift compose(CircleLift outer, CircleLift inner);

    CircleLift inverse() const;
    CircleLift shifted_by(long long d) const;

    // Evaluate the lift.
    double operator()(double x) const;

    // Derivative bound helpers are deliberately absent: everything
    // downstream consumes only evaluation.

    friend CircleLift operator+(const CircleLift& f, long long d) { return f.shifted_by(d); }

public:
    struct Node;

private:
    explicit CircleLift(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    std::shared_ptr<const Node> node_;

    friend class LiftOps;
};

// Sampled monotone degree-one circle map on uniform knots j/resolution,
// j = 0..resolution (inclusive; last value = first + 1).  Non-decreasing,
// so it can represent the cumulative function of an invariant measure.
class MonotoneCircleMap {
public:
    MonotoneCircleMap(std::vector<double> values_at_knots);

    int resolution() const { return int(values_.size()) - 1; }
    double knot(int j) const { return double(j) / double(resolution()); }
    double value_at_knot(int j) const { return values_[std::size_t(j)]; }

    // Evaluate the degree-one lift extension, linear between knots.
    double operator()(double x) const;

private:
    std::vector<double> values_;
};

// --- Operations ------------------------------------------------------------

// F^n(x) for any integer n; negative n uses numeric inversion (bisection on
// a unit bracket, absolute tolerance 1e-14).
double iterate_lift(const CircleLift& F, long long n, double x);

// Rigorous enclosure of tau(F) from n iterations of the base point 0.
// n <= 0 is an argument error.
RotationEnclosure rotation_number_enclosure(const CircleLift& F, long long n);

struct ConjugacyToRotation {
    MonotoneCircleMap h;  // empirical cumulative function of the orbit
    double rho;           // enclosure center from the same orbit
    RotationEnclosure enclosure;
};

// Empirical-measure conjugacy: h(x) = (1/N) #{0 <= k < N : F^k(0) mod 1 in
// [0, x)} at the knots.  For minimal F, h o f = R_rho o h up to a residual
// that shrinks as N grows (unique ergodicity).  Throws non_minimal_error
// when the empirical measure is degenerate (a single atom carries almost
// all mass).
ConjugacyToRotation conjugacy_to_rotation(const CircleLift& F, long long orbit_length,
                                          int resolution);

// sup over knots of the circle distance |h(f(x)) - h(x) - rho|; the
// quantity the conjugacy contract is stated in.
double conjugacy_residual(const MonotoneCircleMap& h, const CircleLift& F, double rho);

struct MinimalityDiagnostic {
    double max_gap;
    bool pass;
};

// Largest circular gap between the first N orbit points of x0; pass iff
// max_gap <= eps.  A guard for the standing minimality hypothesis, not a
// proof.
MinimalityDiagnostic minimality_density(const CircleLift& F, double x0, long long N,
                                        double eps);

}  // namespace bifol
