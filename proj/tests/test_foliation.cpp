#include <doctest.h>

#include <cmath>
#include <vector>

#include "bifol/foliation.hpp"
#include "bifol/rng.hpp"

using namespace bifol;

namespace {
const double kSqrt2m1 = std::sqrt(2.0) - 1.0;
}

TEST_CASE("trace_leaf: linear closed form") {
    auto F = Foliation::linear(HalfLine({1.0, 0.0}));
    auto line = F.trace_leaf({0.5, 0.5}, 2.0);
    CHECK(norm(line.endpoint() - Vec2{2.5, 0.5}) <= 1e-12);
    CHECK(line.length() >= 2.0);
    CHECK(norm(line.start() - Vec2{0.5, 0.5}) == 0.0);
}

TEST_CASE("trace_leaf: suspension first strip") {
    const double theta = 0.37;
    auto F = Foliation::suspension_h(CircleLift::rotation(theta));
    for (double y : {0.0, 0.2, 0.77}) {
        auto c = F.first_section_crossing({0.0, y}, {Section::Axis::X, 0.0}, +1, 8.0);
        CHECK(c.point.x == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(c.point.y == doctest::Approx(y + theta).epsilon(1e-12));
    }
}

TEST_CASE("trace_leaf: pushforward is the shear image of the straight leaf") {
    auto psi = sinusoidal_shear(64, 0.1, {1.0, 0.0}, {0.0, 1.0});
    auto base = Foliation::linear(HalfLine({1.0, 0.0}));
    auto F = Foliation::pushforward(base, psi);
    auto line = F.trace_leaf({0.5, 0.5}, 2.0);
    // Every vertex must pull back to the straight horizontal through the
    // preimage of the seed.
    for (std::size_t k = 0; k < line.size(); k += 7) {
        const Vec2 pre = solve_preimage(psi, line.point(k), line.point(k));
        CHECK(std::abs(pre.y - 0.5) <= 1e-12);
    }
}

TEST_CASE("trace_leaf: arclength additivity under restart") {
    auto alpha = Foliation::suspension_h(CircleLift::arnold(0.3, 0.8));
    auto psi = sinusoidal_shear(32, 0.05, {0.8, -0.6}, {1.0, 1.0});
    auto pushed = Foliation::pushforward(Foliation::linear(HalfLine({1.0, kSqrt2m1})), psi);
    for (const auto& F : {alpha, pushed}) {
        auto full = F.trace_leaf({0.25, 0.6}, 5.0);
        auto part1 = F.trace_leaf({0.25, 0.6}, 2.0);
        const Vec2 mid = part1.endpoint();
        const Vec2 deck = mid - frac(mid);
        auto part2 = F.trace_leaf(frac(mid), 5.0 - part1.length());
        const Vec2 glued = part2.endpoint() + deck;
        CHECK(norm(full.at_arclength(part1.length() + part2.length()) - glued) <= 2e-2);
    }
}

TEST_CASE("trace_leaf: leaf disjointness at common vertical crossings") {
    auto F = Foliation::suspension_h(CircleLift::arnold(0.3, 0.8));
    auto l1 = F.trace_leaf({0.0, 0.2}, 12.0);
    auto l2 = F.trace_leaf({0.0, 0.5}, 12.0);
    // suspension traces put vertices exactly on integer verticals
    auto crossings = [](const LiftedPolyline& l) {
        std::vector<double> ys;
        for (std::size_t k = 0; k < l.size(); ++k)
            if (std::abs(l.point(k).x - std::nearbyint(l.point(k).x)) < 1e-12)
                ys.push_back(l.point(k).y);
        return ys;
    };
    const auto y1 = crossings(l1), y2 = crossings(l2);
    const std::size_t n = std::min(y1.size(), y2.size());
    REQUIRE(n >= 6);
    for (std::size_t k = 0; k < n; ++k) CHECK(y1[k] < y2[k]);  // order preserved
}

TEST_CASE("trace_leaf: vertex spacing stays within the tracing step") {
    auto psi = sinusoidal_shear(64, 0.08, {0.8, -0.6}, {1.0, 1.0});
    std::vector<Foliation> fols = {
        Foliation::linear(HalfLine({1.0, kSqrt2m1})),
        Foliation::suspension_h(CircleLift::arnold(0.3, 0.8)),
        Foliation::pushforward(Foliation::linear(HalfLine({1.0, kSqrt2m1})), psi)};
    const double step = 1.0 / 256.0;
    for (const auto& F : fols) {
        auto line = F.trace_leaf({0.3, 0.7}, 3.0, +1, step);
        for (std::size_t k = 1; k < line.size(); ++k) {
            const double seg = line.arclength_at(k) - line.arclength_at(k - 1);
            CHECK(seg > 0.0);  // strictly increasing arclength
            CHECK(seg <= 2.0 * step);
        }
    }
}

TEST_CASE("trace_leaf: reversed orientation retraces backwards") {
    auto F = Foliation::linear(HalfLine({1.0, kSqrt2m1}));
    auto fwd = F.trace_leaf({0.1, 0.1}, 1.0, +1);
    auto bwd = F.reversed().trace_leaf({0.1, 0.1}, 1.0, +1);
    CHECK(norm(fwd.endpoint() + bwd.endpoint() - Vec2{0.2, 0.2}) <= 1e-12);
}

TEST_CASE("first_return: suspension recovers its own map") {
    auto T = CircleLift::arnold(0.3, 0.8);
    auto F = Foliation::suspension_h(T);
    auto P = first_return(F, {Section::Axis::X, 0.0}, 128);
    for (int i = 0; i < 128; ++i) {
        const double s = i / 128.0;
        CHECK(std::abs(P(s) - T(s)) <= 1e-10);
    }
}

TEST_CASE("first_return: linear foliation returns the rotation") {
    const double theta = kSqrt2m1;
    auto F = Foliation::linear(HalfLine({1.0, theta}));
    auto P = first_return(F, {Section::Axis::X, 0.0}, 64);
    for (int i = 0; i < 64; ++i) {
        const double s = i / 64.0;
        CHECK(std::abs(P(s) - (s + theta)) <= 1e-12);
    }
}

TEST_CASE("first_return: pushforward by a map isotopic to the identity "
          "preserves the rotation enclosure") {
    auto T = CircleLift::arnold(0.3, 0.8);
    auto F = Foliation::suspension_h(T);
    auto psi = sinusoidal_shear(64, 0.06, {0.6, 0.8}, {1.0, 1.0});
    auto pushed = Foliation::pushforward(F, psi);
    auto P = first_return(pushed, {Section::Axis::X, 0.0}, 96);
    auto a = rotation_number_enclosure(P, 4000);
    auto b = rotation_number_enclosure(T, 4000);
    CHECK(a.reduced().overlaps(b.reduced()));
}

TEST_CASE("first_return: section tangency makes the samples non-monotone") {
    // x-displacement with y-gradient ~5.6 locally reverses the x-advance
    // of the pushed (1, 0.3) leaves, so first returns to {x = 0} mix
    // branches.
    auto psi = sinusoidal_shear(64, 0.9, {1.0, 0.0}, {0.0, 1.0});
    auto F = Foliation::pushforward(Foliation::linear(HalfLine({1.0, 0.3})), psi);
    CHECK_THROWS_AS(first_return(F, {Section::Axis::X, 0.0}, 64, 32.0),
                    transversality_error);
}

TEST_CASE("first_return: vertical foliation never returns to a vertical section") {
    auto F = Foliation::linear(HalfLine({0.0, 1.0}));
    CHECK_THROWS_AS(first_return(F, {Section::Axis::X, 0.0}, 8, 16.0), non_section_error);
}

TEST_CASE("transversality_margin") {
    auto H = Foliation::linear(HalfLine({1.0, 0.0}));
    auto V = Foliation::linear(HalfLine({0.0, 1.0}));
    CHECK(transversality_margin(H, V, 16) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(transversality_margin(H, H, 16) == doctest::Approx(0.0).epsilon(1e-14));

    // Perturbing one side by a Lipschitz-0.1 shear moves the margin by
    // less than 0.25 (dense sampling as oracle).
    auto A = Foliation::linear(HalfLine({1.0, kSqrt2m1}));
    const double unperturbed = transversality_margin(A, H, 64);
    auto pushed = Foliation::pushforward(H, sinusoidal_shear(64, 0.1 / kTwoPi, {0.0, 1.0},
                                                             {1.0, 0.0}));
    const double perturbed = transversality_margin(A, pushed, 64);
    CHECK(perturbed >= unperturbed - 0.25);
}

TEST_CASE("leaf tangents agree with short-trace chords") {
    auto psi = sinusoidal_shear(64, 0.08, {0.8, -0.6}, {1.0, 1.0});
    std::vector<Foliation> fols = {
        Foliation::linear(HalfLine({1.0, kSqrt2m1})),
        Foliation::suspension_h(CircleLift::arnold(0.3, 0.8)),
        Foliation::suspension_v(CircleLift::rotation(0.3)),
        Foliation::pushforward(Foliation::linear(HalfLine({1.0, kSqrt2m1})), psi)};
    SplitMix64 rng(17);
    for (const auto& F : fols) {
        for (int k = 0; k < 10; ++k) {
            const Vec2 q{rng.unit(), rng.unit()};
            const Vec2 t = F.leaf_tangent(q);
            CHECK(norm(t) == doctest::Approx(1.0).epsilon(1e-12));
            auto arc = F.trace_leaf(q, 1e-3, +1, 1e-4);
            Vec2 chord = arc.endpoint() - arc.start();
            chord = chord * (1.0 / norm(chord));
            // Pushforward tangents are exact for the interpolant at q, but a
            // chord can straddle cell boundaries where the bilinear Jacobian
            // jumps by O(1/N); allow for that.
            CHECK(dot(chord, t) >= 1.0 - 5e-3);
        }
    }
}
