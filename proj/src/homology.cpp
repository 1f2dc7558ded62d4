#include "bifol/homology.hpp"

#include <cmath>

#include "bifol/errors.hpp"

namespace bifol {

namespace {

CycleEstimate::Checkpoint checkpoint_at(const LiftedPolyline& line, Vec2 origin, double s) {
    const Vec2 v = line.at_arclength(s) - origin;
    const double n = norm(v);
    if (!(n > 2.0 * kClosingBound))
        throw inconclusive_cycle_error(
            "displacement " + std::to_string(n) + " at arclength " + std::to_string(s) +
            " is within twice the closing bound; leaf not escaping at this budget");
    return {s, HalfLine(v), std::asin(kClosingBound / n)};
}

}  // namespace

CycleEstimate asymptotic_cycle(const Foliation& foliation, Vec2 q, double T_max,
                               double max_step) {
    if (!(T_max > 10.0))
        throw inconclusive_cycle_error("T_max must exceed 10 for a non-vacuous bound");
    const LiftedPolyline line = foliation.trace_leaf(q, T_max, +1, max_step);
    const Vec2 origin = line.start();

    CycleEstimate est{HalfLine({1.0, 0.0}), T_max, 0.0, 0.0, {}};
    est.checkpoints.push_back(checkpoint_at(line, origin, 0.25 * T_max));
    est.checkpoints.push_back(checkpoint_at(line, origin, 0.5 * T_max));

    const Vec2 v = line.at_arclength(T_max) - origin;
    const double n = norm(v);
    if (!(n > 2.0 * kClosingBound))
        throw inconclusive_cycle_error(
            "displacement " + std::to_string(n) + " after arclength " +
            std::to_string(T_max) + " is within twice the closing bound");
    est.direction = HalfLine(v);
    est.displacement_norm = n;
    est.angular_bound = std::asin(kClosingBound / n);
    return est;
}

IntMat2 induced_h1(const GridHomeomorphism& map) { return map.integer_part(); }

HalfLine act_on_halfline(const IntMat2& A, const HalfLine& l) {
    if (std::llabs(A.det()) != 1)
        throw argument_error("act_on_halfline: matrix must be in GL2(Z)");
    return HalfLine(A * l.dir());
}

ContinuedFraction continued_fraction(double x, int depth) {
    if (depth < 1) throw argument_error("continued_fraction: depth must be >= 1");
    if (!(x > 0.0) || !(x < 1.0))
        throw argument_error("continued_fraction: x must lie in (0, 1)");
    ContinuedFraction out{{}, false};
    double r = x;
    for (int k = 0; k < depth; ++k) {
        const double inv = 1.0 / r;
        const double a = std::floor(inv);
        out.coefficients.push_back((long long)a);
        r = inv - a;
        if (r < 1e-12) {
            out.terminated = true;
            break;
        }
    }
    return out;
}

}  // namespace bifol
