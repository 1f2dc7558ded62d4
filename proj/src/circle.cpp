#include "bifol/circle.hpp"

#include <algorithm>
#include <cmath>

namespace bifol {

// ---------------------------------------------------------------------------
// Lift expression nodes
// ---------------------------------------------------------------------------

struct CircleLift::Node {
    enum class Kind { Rotation, Arnold, Samples, Composition, Inverse, Shifted };

    Kind kind;
    double theta = 0.0;
    double K = 0.0;
    std::vector<Knot> knots;             // Samples
    std::shared_ptr<const Node> inner;   // Composition (inner), Inverse, Shifted
    std::shared_ptr<const Node> outer;   // Composition
    long long shift = 0;                 // Shifted
};

namespace {

using Node = CircleLift::Node;

double eval_node(const Node& n, double x);

// Solve F(y) = x on a unit bracket by bisection.  Degree one gives
// F(k) ~ F(0) + k, so k = floor(x - F(0)) brackets the root up to the
// (tiny) deviation of F from exact degree one; the adjustment loops below
// absorb that.
double invert_node(const Node& f, double x) {
    const double f0 = eval_node(f, 0.0);
    double lo = std::floor(x - f0);
    double hi = lo + 1.0;
    int guard = 0;
    while (eval_node(f, lo) > x && guard++ < 4) { lo -= 1.0; hi -= 1.0; }
    while (eval_node(f, hi) < x && guard++ < 8) { lo += 1.0; hi += 1.0; }
    if (eval_node(f, lo) > x || eval_node(f, hi) < x)
        throw computation_error("circle-invert", "failed to bracket preimage");
    for (int it = 0; it < 80 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (eval_node(f, mid) <= x)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double eval_samples(const std::vector<CircleLift::Knot>& knots, double x) {
    const double x0 = knots.front().x;
    const double u = x0 + frac(x - x0);  // representative in [x0, x0+1)
    // Binary search for the segment containing u.
    auto it = std::upper_bound(knots.begin(), knots.end(), u,
                               [](double v, const CircleLift::Knot& k) { return v < k.x; });
    std::size_t j = std::size_t(it - knots.begin());
    if (j == 0) j = 1;                        // u == x0 exactly
    if (j >= knots.size()) j = knots.size() - 1;
    const auto& k0 = knots[j - 1];
    const auto& k1 = knots[j];
    const double t = (u - k0.x) / (k1.x - k0.x);
    const double value = k0.y + t * (k1.y - k0.y);
    const double m = std::nearbyint(x - u);   // integer deck shift
    return value + m;
}

double eval_node(const Node& n, double x) {
    switch (n.kind) {
        case Node::Kind::Rotation:
            return x + n.theta;
        case Node::Kind::Arnold:
            return x + n.theta + (n.K / kTwoPi) * std::sin(kTwoPi * frac(x));
        case Node::Kind::Samples:
            return eval_samples(n.knots, x);
        case Node::Kind::Composition:
            return eval_node(*n.outer, eval_node(*n.inner, x));
        case Node::Kind::Inverse:
            return invert_node(*n.inner, x);
        case Node::Kind::Shifted:
            return eval_node(*n.inner, x) + double(n.shift);
    }
    throw error("unreachable lift kind");
}

}  // namespace

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

CircleLift CircleLift::rotation(double theta) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Rotation;
    n->theta = theta;
    return CircleLift(std::move(n));
}

CircleLift CircleLift::arnold(double theta, double K) {
    if (!(std::abs(K) < 1.0))
        throw argument_error("arnold family requires |K| < 1 for monotonicity");
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Arnold;
    n->theta = theta;
    n->K = K;
    return CircleLift(std::move(n));
}

CircleLift CircleLift::from_samples(std::vector<Knot> knots) {
    if (knots.size() < 2)
        throw argument_error("sampled lift needs at least two knots");
    for (std::size_t i = 1; i < knots.size(); ++i) {
        if (!(knots[i].x > knots[i - 1].x) || !(knots[i].y > knots[i - 1].y))
            throw argument_error("sampled lift knots must be strictly increasing");
    }
    const double span_x = knots.back().x - knots.front().x;
    const double span_y = knots.back().y - knots.front().y;
    if (std::abs(span_x - 1.0) > 1e-12 || std::abs(span_y - 1.0) > 1e-12)
        throw argument_error("sampled lift knots must cover exactly one period "
                             "(closing knot (x0+1, y0+1) required)");
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Samples;
    n->knots = std::move(knots);
    return CircleLift(std::move(n));
}

CircleLift CircleLift::compose(CircleLift outer, CircleLift inner) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Composition;
    n->outer = std::move(outer.node_);
    n->inner = std::move(inner.node_);
    return CircleLift(std::move(n));
}

CircleLift CircleLift::inverse() const {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Inverse;
    n->inner = node_;
    return CircleLift(std::move(n));
}

CircleLift CircleLift::shifted_by(long long d) const {
    if (d == 0) return *this;
    if (node_->kind == Node::Kind::Shifted) {  // flatten chains
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Shifted;
        n->inner = node_->inner;
        n->shift = node_->shift + d;
        return CircleLift(std::move(n));
    }
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Shifted;
    n->inner = node_;
    n->shift = d;
    return CircleLift(std::move(n));
}

double CircleLift::operator()(double x) const { return eval_node(*node_, x); }

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

namespace {

// Peels structural integer shifts: (F + d)^n(x) = F^n(x) + n d.
double iterate_node(const std::shared_ptr<const Node>& node, long long n, double x) {
    if (node->kind == Node::Kind::Shifted)
        return iterate_node(node->inner, n, x) + double(n * node->shift);
    if (n >= 0) {
        double y = x;
        for (long long k = 0; k < n; ++k) y = eval_node(*node, y);
        return y;
    }
    double y = x;
    for (long long k = 0; k < -n; ++k) y = invert_node(*node, y);
    return y;
}

}  // namespace

class LiftOps {
public:
    static const std::shared_ptr<const CircleLift::Node>& node(const CircleLift& f) {
        return f.node_;
    }
};

double iterate_lift(const CircleLift& F, long long n, double x) {
    return iterate_node(LiftOps::node(F), n, x);
}

RotationEnclosure rotation_number_enclosure(const CircleLift& F, long long n) {
    if (n < 1) throw argument_error("rotation_number_enclosure: n must be >= 1");
    return RotationEnclosure(iterate_lift(F, n, 0.0), n);
}

// ---------------------------------------------------------------------------

MonotoneCircleMap::MonotoneCircleMap(std::vector<double> values_at_knots)
    : values_(std::move(values_at_knots)) {
    if (values_.size() < 3)
        throw argument_error("MonotoneCircleMap needs resolution >= 2");
    for (std::size_t i = 1; i < values_.size(); ++i)
        if (values_[i] < values_[i - 1])
            throw argument_error("MonotoneCircleMap values must be non-decreasing");
    if (std::abs(values_.back() - values_.front() - 1.0) > 1e-9)
        throw argument_error("MonotoneCircleMap must satisfy h(x0+1) = h(x0) + 1");
}

double MonotoneCircleMap::operator()(double x) const {
    const double u = frac(x);
    const int res = resolution();
    double t = u * double(res);
    int j = int(std::floor(t));
    if (j < 0) j = 0;
    if (j > res - 1) j = res - 1;
    const double v = values_[std::size_t(j)] +
                     (t - double(j)) * (values_[std::size_t(j) + 1] - values_[std::size_t(j)]);
    return v + std::nearbyint(x - u);
}

ConjugacyToRotation conjugacy_to_rotation(const CircleLift& F, long long orbit_length,
                                          int resolution) {
    if (resolution < 2)
        throw argument_error("conjugacy_to_rotation: resolution must be >= 2");
    if (orbit_length < 8LL * resolution)
        throw argument_error("conjugacy_to_rotation: orbit too short for resolution "
                             "(need N >= 8*resolution; N >= resolution^2 recommended)");

    std::vector<long long> bins(std::size_t(resolution), 0);
    double x = 0.0;
    for (long long k = 0; k < orbit_length; ++k) {
        int b = int(frac(x) * double(resolution));
        if (b >= resolution) b = resolution - 1;
        ++bins[std::size_t(b)];
        x = F(x);
    }

    const long long biggest = *std::max_element(bins.begin(), bins.end());
    if (double(biggest) > 0.9 * double(orbit_length))
        throw non_minimal_error("conjugacy",
                                "empirical measure is degenerate: one atom carries " +
                                    std::to_string(double(biggest) / double(orbit_length)) +
                                    " of the mass");

    std::vector<double> h(std::size_t(resolution) + 1);
    long long prefix = 0;
    h[0] = 0.0;
    for (int j = 0; j < resolution; ++j) {
        prefix += bins[std::size_t(j)];
        h[std::size_t(j) + 1] = double(prefix) / double(orbit_length);
    }

    RotationEnclosure enc(x, orbit_length);  // x = F^N(0) after the loop
    return ConjugacyToRotation{MonotoneCircleMap(std::move(h)), enc.center(), enc};
}

double conjugacy_residual(const MonotoneCircleMap& h, const CircleLift& F, double rho) {
    const int res = h.resolution();
    double worst = 0.0;
    for (int j = 0; j < res; ++j) {
        const double xj = h.knot(j);
        const double r = h(F(xj)) - h(xj) - rho;
        worst = std::max(worst, dist_to_integer(r));
    }
    return worst;
}

MinimalityDiagnostic minimality_density(const CircleLift& F, double x0, long long N,
                                        double eps) {
    if (N < 2) throw argument_error("minimality_density: N must be >= 2");
    std::vector<double> pts;
    pts.reserve(std::size_t(N));
    double x = x0;
    for (long long k = 0; k < N; ++k) {
        pts.push_back(frac(x));
        x = F(x);
    }
    std::sort(pts.begin(), pts.end());
    double max_gap = pts.front() + 1.0 - pts.back();
    for (std::size_t i = 1; i < pts.size(); ++i)
        max_gap = std::max(max_gap, pts[i] - pts[i - 1]);
    return {max_gap, max_gap <= eps};
}

}  // namespace bifol
