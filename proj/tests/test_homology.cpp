#include <doctest.h>

#include <cmath>

#include "bifol/homology.hpp"

using namespace bifol;

namespace {
const double kSqrt2m1 = std::sqrt(2.0) - 1.0;
const double kGolden = 0.5 * (std::sqrt(5.0) - 1.0);
}

TEST_CASE("asymptotic_cycle: linear foliation recovers its direction exactly") {
    const HalfLine l({1.0, kSqrt2m1});
    auto F = Foliation::linear(l);
    auto est = asymptotic_cycle(F, {0.37, 0.91}, 1000.0);
    CHECK(angular_distance(est.direction, l) <= 1e-12);
    CHECK(est.angular_bound ==
          doctest::Approx(std::asin(kClosingBound / est.displacement_norm)).epsilon(1e-12));
    CHECK(est.angular_bound <= 1e-3);
    CHECK(est.checkpoints.size() == 2);
}

TEST_CASE("asymptotic_cycle: suspension direction matches (1, tau) within bound") {
    auto T = CircleLift::arnold(0.3, 0.8);
    auto F = Foliation::suspension_h(T);
    const double tau = rotation_number_enclosure(T, 200000).center();
    auto est = asymptotic_cycle(F, {0.0, 0.0}, 400.0);
    CHECK(angular_distance(est.direction, HalfLine({1.0, tau})) <= est.angular_bound + 1e-5);
}

TEST_CASE("asymptotic_cycle: base-point independence within summed bounds") {
    auto F = Foliation::suspension_h(CircleLift::arnold(0.3, 0.8));
    auto a = asymptotic_cycle(F, {0.1, 0.9}, 300.0);
    auto b = asymptotic_cycle(F, {0.7, 0.3}, 300.0);
    CHECK(cycles_agree(a, b));
}

TEST_CASE("asymptotic_cycle: small budgets are inconclusive, not wrong") {
    auto F = Foliation::linear(HalfLine({1.0, 0.5}));
    CHECK_THROWS_AS(asymptotic_cycle(F, {0.0, 0.0}, 5.0), inconclusive_cycle_error);
}

TEST_CASE("induced_h1") {
    CHECK(induced_h1(sinusoidal_shear(32, 0.05, {1.0, 0.0}, {0.0, 1.0})).is_identity());
    CHECK(induced_h1(dehn_twist_h(32)) == (IntMat2{1, 1, 0, 1}));
    auto c = grid_compose(dehn_twist_h(32), dehn_twist_h(32));
    CHECK(induced_h1(c) == (IntMat2{1, 1, 0, 1} * IntMat2{1, 1, 0, 1}));
}

TEST_CASE("half-lines are oriented: l and -l are distinct") {
    const HalfLine l({3.0, -2.0});
    CHECK(norm(l.dir()) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(angular_distance(l, l.reversed()) == doctest::Approx(kPi).epsilon(1e-12));
}

TEST_CASE("act_on_halfline") {
    const HalfLine e2({0.0, 1.0});
    CHECK(angular_distance(act_on_halfline(IntMat2{}, e2), e2) == 0.0);

    const IntMat2 twist{1, 1, 0, 1};
    const HalfLine image = act_on_halfline(twist, e2);
    CHECK(angular_distance(image, HalfLine({1.0, 1.0})) <= 1e-15);

    const HalfLine l({3.0, -2.0});
    CHECK(angular_distance(act_on_halfline(twist.inverse(), act_on_halfline(twist, l)), l) <=
          1e-12);
}

TEST_CASE("continued_fraction") {
    auto golden = continued_fraction(kGolden, 10);
    REQUIRE(golden.coefficients.size() == 10);
    for (long long a : golden.coefficients) CHECK(a == 1);
    CHECK_FALSE(golden.terminated);

    auto silver = continued_fraction(kSqrt2m1, 8);
    for (long long a : silver.coefficients) CHECK(a == 2);

    auto third = continued_fraction(1.0 / 3.0, 6);
    REQUIRE(third.coefficients.size() == 1);
    CHECK(third.coefficients[0] == 3);
    CHECK(third.terminated);

    CHECK_THROWS_AS(continued_fraction(0.5, 0), argument_error);
    CHECK_THROWS_AS(continued_fraction(1.5, 3), argument_error);
}

TEST_CASE("naturality: cycle of a pushforward is the H1 image of the cycle") {
    SUBCASE("dehn twist on the vertical foliation") {
        auto V = Foliation::linear(HalfLine({0.0, 1.0}));
        auto twist = dehn_twist_h(64);
        auto pushed = Foliation::pushforward(V, twist);
        auto base = asymptotic_cycle(V, {0.5, 0.5}, 200.0);
        auto image = asymptotic_cycle(pushed, {0.5, 0.5}, 200.0);
        const HalfLine expected = act_on_halfline(induced_h1(twist), base.direction);
        CHECK(angular_distance(image.direction, expected) <=
              image.angular_bound + base.angular_bound);
    }
    SUBCASE("identity-isotopic shear keeps the cycle") {
        auto F = Foliation::suspension_h(CircleLift::arnold(0.3, 0.8));
        auto psi = sinusoidal_shear(64, 0.06, {0.8, -0.6}, {1.0, 1.0});
        auto pushed = Foliation::pushforward(F, psi);
        auto base = asymptotic_cycle(F, {0.25, 0.25}, 250.0);
        auto image = asymptotic_cycle(pushed, {0.25, 0.25}, 250.0);
        CHECK(induced_h1(psi).is_identity());
        CHECK(cycles_agree(base, image));
    }
}

TEST_CASE("overlapping rotation enclosures give agreeing suspension cycles") {
    auto arnold = CircleLift::arnold(0.3, 0.8);
    const double tau = rotation_number_enclosure(arnold, 1000000).center();
    auto rot = CircleLift::rotation(tau);
    CHECK(rotation_number_enclosure(rot, 1000000).overlaps(
        rotation_number_enclosure(arnold, 1000000)));
    auto a = asymptotic_cycle(Foliation::suspension_h(arnold), {0.0, 0.0}, 300.0);
    auto b = asymptotic_cycle(Foliation::suspension_h(rot), {0.0, 0.0}, 300.0);
    CHECK(cycles_agree(a, b));
}

TEST_CASE("dehn twist moves the cycle but not the first return on a "
          "disjoint section") {
    auto V = Foliation::linear(HalfLine({0.0, 1.0}));
    auto twist = dehn_twist_h(64);
    auto pushed = Foliation::pushforward(V, twist);

    auto base_cycle = asymptotic_cycle(V, {0.5, 0.5}, 200.0);
    auto new_cycle = asymptotic_cycle(pushed, {0.5, 0.5}, 200.0);
    CHECK_FALSE(cycles_agree(base_cycle, new_cycle));  // isotopy class changed

    // The twist is the identity near {y = 0}; the return map there is
    // untouched as a circle map.
    const Section s{Section::Axis::Y, 0.0};
    auto p0 = first_return(V, s, 64);
    auto p1 = first_return(pushed, s, 64);
    for (int i = 0; i < 64; ++i) {
        const double x = i / 64.0;
        CHECK(dist_to_integer(p1(x) - p0(x)) <= 1e-9);
    }
    CHECK(rotation_number_enclosure(p0, 512).reduced().overlaps(
        rotation_number_enclosure(p1, 512).reduced()));
}
