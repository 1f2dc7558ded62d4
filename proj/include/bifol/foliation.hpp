#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "bifol/circle.hpp"
#include "bifol/geometry.hpp"
#include "bifol/grid_map.hpp"

namespace bifol {

// A leaf arc lifted to the universal cover R^2: ordered vertices with
// cumulative flat-metric arclength.
class LiftedPolyline {
public:
    LiftedPolyline() = default;

    void append(Vec2 p);
    std::size_t size() const { return pts_.size(); }
    bool empty() const { return pts_.empty(); }
    const Vec2& point(std::size_t k) const { return pts_[k]; }
    double arclength_at(std::size_t k) const { return arc_[k]; }
    const std::vector<Vec2>& points() const { return pts_; }
    const std::vector<double>& arclengths() const { return arc_; }

    Vec2 start() const { return pts_.front(); }
    Vec2 endpoint() const { return pts_.back(); }
    double length() const { return arc_.empty() ? 0.0 : arc_.back(); }

    // Point at a given arclength (linear along segments; clamped to ends).
    Vec2 at_arclength(double s) const;

private:
    std::vector<Vec2> pts_;
    std::vector<double> arc_;
};

// A simple closed curve of the standard transversal family: the circle
// {x = level} (Axis::X) or {y = level} (Axis::Y).
struct Section {
    enum class Axis { X, Y };
    Axis axis = Axis::X;
    double level = 0.0;
};

// ---------------------------------------------------------------------------
// Foliation: an oriented topological foliation of T^2 in one of four
// concrete representations.  Every algorithm downstream consumes only the
// leaf-trace oracle (plus tangents, which are derived from it in closed
// form), so pushforwards stay opaque.
//
//   linear(l)           leaves are straight lines of direction l
//   suspension_h(T)     the leaf through (0, y) runs to (1, T(y)); strips
//                       are crossed by the closed form
//                       ([t], [(1-t) y + t T(y)]), oriented toward +x
//   suspension_v(S)     coordinates swapped, oriented toward +y
//   pushforward(F, psi) leaves are psi-images of the leaves of F; the
//                       inverse of psi is solved at construction
// ---------------------------------------------------------------------------
class Foliation {
public:
    static Foliation linear(HalfLine l);
    static Foliation suspension_h(CircleLift T);
    static Foliation suspension_v(CircleLift S);
    static Foliation pushforward(Foliation base, GridHomeomorphism map);

    // Same leaves, opposite orientation.
    Foliation reversed() const;

    bool is_linear() const;
    bool is_suspension_v() const;
    bool is_pushforward() const;
    bool is_reversed() const;
    std::optional<HalfLine> linear_direction() const;
    const CircleLift* suspension_map() const;  // for suspension_h / suspension_v

    // Follow the oriented leaf through q for flat arclength >= T
    // (sign = -1 follows it backwards).  The polyline starts at the
    // canonical lift of q and has vertex spacing <= max_step (default
    // 1/256); pushforward tracing tightens the base step by the grid
    // map's Lipschitz bound so the image keeps that spacing.
    LiftedPolyline trace_leaf(Vec2 q, double T, int sign = +1,
                              double max_step = 1.0 / 256.0) const;

    // Unit tangent of the leaf through q, oriented.
    Vec2 leaf_tangent(Vec2 q) const;

    // Trace from q until the first transverse crossing of the section
    // (arclength > 0), within the arclength budget.  Returns the crossing
    // point in the cover of the trace and the arclength at which it
    // happens.  Throws non_section_error when the budget runs out.
    struct Crossing {
        Vec2 point;
        double arclength;
    };
    Crossing first_section_crossing(Vec2 q, const Section& section, int sign,
                                    double arc_budget, double max_step = 1.0 / 256.0) const;

public:
    struct Node;

private:
    explicit Foliation(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

// First-return map of the oriented foliation on the section, sampled on a
// uniform grid of `resolution` section points and packaged as a
// piecewise-monotone CircleLift.  The knot values are the lifted
// coordinates of the first crossings, so the winding of the leaf between
// returns is retained in the lift.
//
// Errors: budget exhausted -> non_section_error; non-monotone samples ->
// transversality_error.
CircleLift first_return(const Foliation& foliation, const Section& section,
                        int resolution = 512, double arc_budget = 64.0,
                        double max_step = 1.0 / 256.0);

// min over an NxN sample grid of |sin(angle between the leaf tangents)|.
// 0 when the tangents align somewhere on the grid.
double transversality_margin(const Foliation& alpha, const Foliation& beta, int grid);

// The unique eta with (1-t) eta + t L(eta) = target, t in [0, 1): where
// the suspension leaf at strip parameter t sits relative to its entry
// point.  Strictly increasing and degree one in eta.
double suspension_strip_entry(const CircleLift& lift, double t, double target);

}  // namespace bifol
