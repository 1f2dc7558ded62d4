#include "bifol/foliation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "bifol/errors.hpp"
#include "bifol/parallel.hpp"

namespace bifol {

// ---------------------------------------------------------------------------
// LiftedPolyline
// ---------------------------------------------------------------------------

void LiftedPolyline::append(Vec2 p) {
    if (pts_.empty()) {
        pts_.push_back(p);
        arc_.push_back(0.0);
        return;
    }
    const double seg = norm(p - pts_.back());
    if (seg == 0.0) return;  // keep arclength strictly increasing
    pts_.push_back(p);
    arc_.push_back(arc_.back() + seg);
}

Vec2 LiftedPolyline::at_arclength(double s) const {
    if (pts_.empty()) throw argument_error("at_arclength on empty polyline");
    if (s <= 0.0) return pts_.front();
    if (s >= arc_.back()) return pts_.back();
    const auto it = std::lower_bound(arc_.begin(), arc_.end(), s);
    const std::size_t k = std::size_t(it - arc_.begin());
    if (k == 0) return pts_.front();
    const double t = (s - arc_[k - 1]) / (arc_[k] - arc_[k - 1]);
    return pts_[k - 1] + (pts_[k] - pts_[k - 1]) * t;
}

// ---------------------------------------------------------------------------
// Foliation node
// ---------------------------------------------------------------------------

struct Foliation::Node {
    enum class Kind { Linear, SuspensionH, SuspensionV, Pushforward };

    Kind kind;
    bool reversed = false;
    std::optional<HalfLine> dir;          // Linear
    std::optional<CircleLift> lift;       // suspensions
    std::shared_ptr<const Node> base;     // Pushforward
    std::shared_ptr<const GridHomeomorphism> map;      // Pushforward
    std::shared_ptr<const GridHomeomorphism> inv_map;  // Pushforward
};

// Entry solve for a suspension strip; a unit bracket plus bisection
// suffices because the left side is strictly increasing and degree one.
double suspension_strip_entry(const CircleLift& lift, double t, double target) {
    if (t == 0.0) return target;
    auto g = [&](double eta) { return (1.0 - t) * eta + t * lift(eta); };
    double lo = std::floor(target - g(0.0));
    double hi = lo + 1.0;
    int guard = 0;
    while (g(lo) > target && guard++ < 4) { lo -= 1.0; hi -= 1.0; }
    while (g(hi) < target && guard++ < 8) { lo += 1.0; hi += 1.0; }
    for (int it = 0; it < 80 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) <= target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

using Node = Foliation::Node;

// --- Trace cursors ---------------------------------------------------------

class Cursor {
public:
    virtual ~Cursor() = default;
    virtual Vec2 start() const = 0;
    // Append vertices until out.length() >= target_arc (absolute).
    virtual void extend(LiftedPolyline& out, double target_arc) = 0;
};

class LinearCursor : public Cursor {
public:
    LinearCursor(Vec2 start, Vec2 unit_dir, double max_step)
        : pos_(start), dir_(unit_dir), step_(max_step) {}

    Vec2 start() const override { return pos_; }

    void extend(LiftedPolyline& out, double target_arc) override {
        const double remaining = target_arc - out.length();
        if (remaining <= 0.0) return;
        const int m = std::max(1, int(std::ceil(remaining / step_)));
        const double len = remaining / double(m);
        const Vec2 anchor = pos_;  // no running sum: vertex error stays at ulp scale
        for (int i = 1; i <= m; ++i) {
            pos_ = anchor + dir_ * (len * double(i));
            out.append(pos_);
        }
        // Rounding can leave the target a hair short of reached; one full
        // step settles it rather than chasing sub-ulp remainders.
        int extra = 1;
        while (out.length() < target_arc) {
            pos_ = anchor + dir_ * (len * double(m) + step_ * double(extra++));
            out.append(pos_);
        }
    }

private:
    Vec2 pos_;
    Vec2 dir_;
    double step_;
};

// Walks suspension strips in closed form.  `vertical_` selects whether the
// advance coordinate is y (suspension_v) or x (suspension_h).
class SuspensionCursor : public Cursor {
public:
    SuspensionCursor(const CircleLift& lift, bool vertical, int sign, Vec2 start,
                     double max_step)
        : lift_(lift), inv_(lift.inverse()), vertical_(vertical), sign_(sign),
          step_(max_step) {
        const double a = advance_of(start);
        const double f = fiber_of(start);
        strip_ = std::floor(a);
        if (a == double(strip_))
            eta_ = f;
        else
            eta_ = suspension_strip_entry(lift_, a - double(strip_), f);
        pos_ = start;
    }

    Vec2 start() const override { return pos_; }

    void extend(LiftedPolyline& out, double target_arc) override {
        while (out.length() < target_arc) {
            const double exit_v = lift_(eta_);
            const double t0 = advance_of(pos_) - double(strip_);
            const Vec2 slope = make(1.0, exit_v - eta_);  // per unit t
            const double speed = norm(slope);
            if (sign_ > 0) {
                const double span = 1.0 - t0;
                const int m = std::max(1, int(std::ceil(span * speed / step_)));
                for (int i = 1; i <= m; ++i) {
                    const double t = t0 + span * double(i) / double(m);
                    out.append(point_at(t, exit_v));
                }
                pos_ = make(double(strip_) + 1.0, exit_v);
                strip_ += 1;
                eta_ = exit_v;
            } else {
                const double span = t0;
                const int m = std::max(1, int(std::ceil(span * speed / step_)));
                for (int i = 1; i <= m; ++i) {
                    const double t = t0 - span * double(i) / double(m);
                    out.append(point_at(t, exit_v));
                }
                pos_ = make(double(strip_), eta_);
                strip_ -= 1;
                eta_ = inv_(eta_);
            }
        }
    }

private:
    double advance_of(Vec2 p) const { return vertical_ ? p.y : p.x; }
    double fiber_of(Vec2 p) const { return vertical_ ? p.x : p.y; }
    Vec2 make(double adv, double fib) const {
        return vertical_ ? Vec2{fib, adv} : Vec2{adv, fib};
    }
    Vec2 point_at(double t, double exit_v) const {
        return make(double(strip_) + t, (1.0 - t) * eta_ + t * exit_v);
    }

    CircleLift lift_;
    CircleLift inv_;
    bool vertical_;
    int sign_;
    double step_;
    Vec2 pos_;
    double eta_ = 0.0;     // entry fiber value of the current strip
    long long strip_ = 0;  // advance coordinate spans [strip_, strip_ + 1]
};

class PushforwardCursor : public Cursor {
public:
    PushforwardCursor(std::unique_ptr<Cursor> base, const GridHomeomorphism* map,
                      double inv_lip)
        : base_(std::move(base)), map_(map), inv_lip_(std::max(1e-6, inv_lip)) {
        base_line_.append(base_->start());
        start_ = map_->apply(base_line_.point(0));
        mapped_ = 1;
    }

    Vec2 start() const override { return start_; }

    void extend(LiftedPolyline& out, double target_arc) override {
        int stall_guard = 0;
        while (out.length() < target_arc) {
            const double need = target_arc - out.length();
            const double before = out.length();
            base_->extend(base_line_, base_line_.length() + need * inv_lip_ + 1e-9);
            for (; mapped_ < base_line_.size(); ++mapped_)
                out.append(map_->apply(base_line_.point(mapped_)));
            if (out.length() <= before && ++stall_guard > 64)
                throw computation_error("trace", "pushforward trace made no progress");
        }
    }

private:
    std::unique_ptr<Cursor> base_;
    const GridHomeomorphism* map_;
    double inv_lip_;
    LiftedPolyline base_line_;
    std::size_t mapped_ = 0;
    Vec2 start_;
};

std::unique_ptr<Cursor> make_cursor(const Node& node, Vec2 lift_start, int sign,
                                    double max_step);

// Preimage of a lift point under the stored grid map, polished from the
// sampled-inverse guess.
Vec2 pushforward_base_point(const Node& node, Vec2 q) {
    const Vec2 guess = node.inv_map->apply(q);
    return solve_preimage(*node.map, q, guess, 1e-12);
}

std::unique_ptr<Cursor> make_cursor(const Node& node, Vec2 lift_start, int sign,
                                    double max_step) {
    const int s = node.reversed ? -sign : sign;
    switch (node.kind) {
        case Node::Kind::Linear:
            return std::make_unique<LinearCursor>(lift_start, node.dir->dir() * double(s),
                                                  max_step);
        case Node::Kind::SuspensionH:
            return std::make_unique<SuspensionCursor>(*node.lift, false, s, lift_start,
                                                      max_step);
        case Node::Kind::SuspensionV:
            return std::make_unique<SuspensionCursor>(*node.lift, true, s, lift_start,
                                                      max_step);
        case Node::Kind::Pushforward: {
            const double image_step =
                std::min(max_step, 1.0 / (4.0 * double(node.map->resolution())));
            const double base_step = image_step / node.map->lip_bound();
            const Vec2 xb = pushforward_base_point(node, lift_start);
            auto base = make_cursor(*node.base, xb, s, base_step);
            return std::make_unique<PushforwardCursor>(std::move(base), node.map.get(),
                                                       node.inv_map->lip_bound());
        }
    }
    throw error("unreachable foliation kind");
}

Vec2 tangent_of(const Node& node, Vec2 q, int sign) {
    const int s = node.reversed ? -sign : sign;
    switch (node.kind) {
        case Node::Kind::Linear:
            return node.dir->dir() * double(s);
        case Node::Kind::SuspensionH:
        case Node::Kind::SuspensionV: {
            const bool vertical = node.kind == Node::Kind::SuspensionV;
            const Vec2 p = frac(q);
            const double t0 = vertical ? p.y : p.x;
            const double fib = vertical ? p.x : p.y;
            const double eta = suspension_strip_entry(*node.lift, t0, fib);
            const double delta = (*node.lift)(eta) - eta;
            Vec2 v = vertical ? Vec2{delta, 1.0} : Vec2{1.0, delta};
            const double n = norm(v);
            return v * (double(s) / n);
        }
        case Node::Kind::Pushforward: {
            const Vec2 xb = pushforward_base_point(node, frac(q));
            const Vec2 tb = tangent_of(*node.base, frac(xb), s);
            const Vec2 v = node.map->jacobian(xb) * tb;
            const double n = norm(v);
            if (!(n > 0)) throw computation_error("tangent", "degenerate jacobian");
            return v * (1.0 / n);
        }
    }
    throw error("unreachable foliation kind");
}

}  // namespace

// ---------------------------------------------------------------------------
// Foliation surface
// ---------------------------------------------------------------------------

Foliation Foliation::linear(HalfLine l) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Linear;
    n->dir = l;
    return Foliation(std::move(n));
}

Foliation Foliation::suspension_h(CircleLift T) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::SuspensionH;
    n->lift = std::move(T);
    return Foliation(std::move(n));
}

Foliation Foliation::suspension_v(CircleLift S) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::SuspensionV;
    n->lift = std::move(S);
    return Foliation(std::move(n));
}

Foliation Foliation::pushforward(Foliation base, GridHomeomorphism map) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Pushforward;
    n->base = base.node_;
    n->map = std::make_shared<const GridHomeomorphism>(std::move(map));
    n->inv_map = std::make_shared<const GridHomeomorphism>(grid_invert(*n->map));
    return Foliation(std::move(n));
}

Foliation Foliation::reversed() const {
    auto n = std::make_shared<Node>(*node_);
    n->reversed = !n->reversed;
    return Foliation(std::move(n));
}

bool Foliation::is_linear() const { return node_->kind == Node::Kind::Linear; }
bool Foliation::is_suspension_v() const { return node_->kind == Node::Kind::SuspensionV; }
bool Foliation::is_pushforward() const { return node_->kind == Node::Kind::Pushforward; }
bool Foliation::is_reversed() const { return node_->reversed; }

std::optional<HalfLine> Foliation::linear_direction() const {
    if (!is_linear()) return std::nullopt;
    return node_->reversed ? node_->dir->reversed() : *node_->dir;
}

const CircleLift* Foliation::suspension_map() const {
    if (node_->kind == Node::Kind::SuspensionH || node_->kind == Node::Kind::SuspensionV)
        return &*node_->lift;
    return nullptr;
}

LiftedPolyline Foliation::trace_leaf(Vec2 q, double T, int sign, double max_step) const {
    if (!(T >= 0.0) || !std::isfinite(T))
        throw argument_error("trace_leaf: arclength budget must be finite and >= 0");
    if (!(max_step > 0.0)) throw argument_error("trace_leaf: max_step must be positive");
    auto cursor = make_cursor(*node_, frac(q), sign, max_step);
    LiftedPolyline out;
    out.append(cursor->start());
    if (T > 0.0) cursor->extend(out, T);
    return out;
}

Vec2 Foliation::leaf_tangent(Vec2 q) const { return tangent_of(*node_, q, +1); }

namespace {

// Smallest-t transverse crossing of {coord == level (mod 1)} within the
// segment [a, b], as the segment parameter, or no value.
std::optional<double> segment_crossing(double fa, double fb) {
    const double lo = std::min(fa, fb), hi = std::max(fa, fb);
    double best = 2.0;
    for (long long k = (long long)std::ceil(lo - 1e-12); k <= (long long)std::floor(hi + 1e-12);
         ++k) {
        const double ga = fa - double(k), gb = fb - double(k);
        const bool crossing = (ga < 0.0 && gb >= 0.0) || (ga > 0.0 && gb <= 0.0);
        if (!crossing) continue;
        const double t = ga / (ga - gb);
        if (t > 0.0 && t < best) best = t;
    }
    if (best > 1.0) return std::nullopt;
    return best;
}

}  // namespace

Foliation::Crossing Foliation::first_section_crossing(Vec2 q, const Section& section,
                                                      int sign, double arc_budget,
                                                      double max_step) const {
    auto cursor = make_cursor(*node_, frac(q), sign, max_step);
    LiftedPolyline line;
    line.append(cursor->start());
    const double level = frac(section.level);
    const bool on_x = section.axis == Section::Axis::X;

    std::size_t scanned = 1;
    double target = 0.0;
    double chunk = 1.0;
    while (target < arc_budget) {
        target = std::min(arc_budget, target + chunk);
        chunk *= 2.0;
        cursor->extend(line, target);
        for (; scanned < line.size(); ++scanned) {
            const Vec2 a = line.point(scanned - 1);
            const Vec2 b = line.point(scanned);
            const double fa = (on_x ? a.x : a.y) - level;
            const double fb = (on_x ? b.x : b.y) - level;
            const auto t = segment_crossing(fa, fb);
            if (!t) continue;
            const Vec2 p = a + (b - a) * (*t);
            const double arc = line.arclength_at(scanned - 1) + norm(p - a);
            if (arc <= 1e-9) continue;  // the seed itself sits on the section
            return {p, arc};
        }
    }
    throw non_section_error("no section crossing within arclength budget " +
                            std::to_string(arc_budget));
}

// ---------------------------------------------------------------------------
// First return and transversality
// ---------------------------------------------------------------------------

CircleLift first_return(const Foliation& foliation, const Section& section, int resolution,
                        double arc_budget, double max_step) {
    if (resolution < 2) throw argument_error("first_return: resolution must be >= 2");
    const double level = frac(section.level);
    const bool on_x = section.axis == Section::Axis::X;

    std::vector<double> returns(static_cast<std::size_t>(resolution));
    parallel_for(std::size_t(resolution), [&](std::size_t i) {
        const double s = double(i) / double(resolution);
        const Vec2 seed = on_x ? Vec2{level, s} : Vec2{s, level};
        const auto crossing =
            foliation.first_section_crossing(seed, section, +1, arc_budget, max_step);
        returns[i] = on_x ? crossing.point.y : crossing.point.x;
    });

    std::vector<CircleLift::Knot> knots(std::size_t(resolution) + 1);
    for (int i = 0; i < resolution; ++i)
        knots[std::size_t(i)] = {double(i) / double(resolution), returns[std::size_t(i)]};
    knots[std::size_t(resolution)] = {1.0, returns[0] + 1.0};
    for (int i = 1; i <= resolution; ++i)
        if (!(knots[std::size_t(i)].y > knots[std::size_t(i) - 1].y))
            throw transversality_error(
                "first-return", "return samples are not monotone near section coordinate " +
                                    std::to_string(knots[std::size_t(i)].x));
    return CircleLift::from_samples(std::move(knots));
}

double transversality_margin(const Foliation& alpha, const Foliation& beta, int grid) {
    if (grid < 1) throw argument_error("transversality_margin: grid must be >= 1");
    double margin = 1.0;
    std::vector<double> row_min(std::size_t(grid), 1.0);
    parallel_for(std::size_t(grid), [&](std::size_t j) {
        double m = 1.0;
        for (int i = 0; i < grid; ++i) {
            const Vec2 p{double(i) / grid, double(j) / grid};
            const Vec2 ta = alpha.leaf_tangent(p);
            const Vec2 tb = beta.leaf_tangent(p);
            m = std::min(m, std::abs(cross(ta, tb)));
        }
        row_min[j] = m;
    });
    for (double m : row_min) margin = std::min(margin, m);
    return margin;
}

}  // namespace bifol
