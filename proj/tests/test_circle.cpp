#include <doctest.h>

#include <cmath>
#include <vector>

#include "bifol/circle.hpp"
#include "bifol/rng.hpp"

using namespace bifol;

namespace {

// Independent closed-form oracle for the arnold family; deliberately not
// going through CircleLift.
double arnold_oracle(double theta, double K, double x) {
    return x + theta + (K / kTwoPi) * std::sin(kTwoPi * (x - std::floor(x)));
}

// A strictly monotone sampled conjugator g(x) = x + 0.15 sin(2 pi x)/(2 pi)
// on 32 knots, for conjugacy-invariance checks.
CircleLift sampled_conjugator() {
    std::vector<CircleLift::Knot> knots;
    const int m = 32;
    for (int i = 0; i <= m; ++i) {
        const double x = double(i) / m;
        knots.push_back({x, x + 0.15 * std::sin(kTwoPi * x) / kTwoPi});
    }
    return CircleLift::from_samples(knots);
}

const double kGolden = 0.5 * (std::sqrt(5.0) - 1.0);

}  // namespace

TEST_CASE("iterate_lift: rotation closed form") {
    auto F = CircleLift::rotation(0.25);
    CHECK(iterate_lift(F, 4, 0.0) == 1.0);
}

TEST_CASE("iterate_lift: inverse identity on random inputs") {
    SplitMix64 rng(41);
    std::vector<CircleLift> lifts = {CircleLift::rotation(kGolden),
                                     CircleLift::arnold(0.3, 0.8), sampled_conjugator()};
    for (const auto& F : lifts) {
        for (int k = 0; k < 20; ++k) {
            const double x = rng.uniform(-3.0, 3.0);
            CHECK(iterate_lift(F, -1, iterate_lift(F, 1, x)) == doctest::Approx(x).epsilon(1e-12));
        }
    }
}

TEST_CASE("iterate_lift: arnold matches independent composition loop") {
    const double theta = 0.3, K = 0.8;
    auto F = CircleLift::arnold(theta, K);
    double expected = 0.0;
    for (int k = 0; k < 10; ++k) expected = arnold_oracle(theta, K, expected);
    CHECK(iterate_lift(F, 10, 0.0) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("degree one and monotonicity on random x, all families") {
    SplitMix64 rng(7);
    auto g = sampled_conjugator();
    std::vector<CircleLift> lifts = {
        CircleLift::rotation(0.37), CircleLift::arnold(0.3, 0.8), g, g.inverse(),
        CircleLift::compose(CircleLift::arnold(0.1, 0.5), g).shifted_by(2)};
    for (const auto& F : lifts) {
        for (int k = 0; k < 50; ++k) {
            const double x = rng.uniform(-5.0, 5.0);
            CHECK(std::abs(F(x + 1.0) - F(x) - 1.0) <= 1e-12);
            // strict monotonicity: x < y < x+1  =>  F(x) < F(y)
            const double y = x + rng.uniform(1e-6, 1.0 - 1e-6);
            CHECK(F(x) < F(y));
        }
    }
}

TEST_CASE("rotation_number_enclosure: rotation") {
    auto F = CircleLift::rotation(0.25);
    auto enc = rotation_number_enclosure(F, 100);
    CHECK(enc.lo() == doctest::Approx(0.24).epsilon(1e-15));
    CHECK(enc.hi() == doctest::Approx(0.26).epsilon(1e-15));
    CHECK(enc.contains(0.25));
    CHECK(enc.width() == doctest::Approx(2.0 / 100).epsilon(1e-13));
}

TEST_CASE("rotation_number_enclosure: lift-shift law is exact") {
    auto F = CircleLift::arnold(0.3, 0.8);
    for (long long d = -2; d <= 2; ++d) {
        auto G = F + d;
        auto eg = rotation_number_enclosure(G, 1000);
        auto ef = rotation_number_enclosure(F, 1000).shifted_by(d);
        CHECK(eg == ef);
        CHECK(eg.lo() == ef.lo());
        CHECK(eg.hi() == ef.hi());
        // consistent reduction collapses the shift (up to fp rounding of
        // the displacement arithmetic)
        CHECK(std::abs(eg.reduced().center() -
                       rotation_number_enclosure(F, 1000).reduced().center()) <= 1e-12);
    }
}

TEST_CASE("rotation_number_enclosure: arnold long run as its own oracle") {
    auto F = CircleLift::arnold(0.3, 0.8);
    auto enc = rotation_number_enclosure(F, 1000000);
    CHECK(enc.width() == doctest::Approx(2e-6).epsilon(1e-9));
    // Reference value computed by an independent implementation of the
    // same map (frozen).
    CHECK(enc.contains(0.2812983791981258));
}

TEST_CASE("rotation_number_enclosure: rejects n <= 0") {
    auto F = CircleLift::rotation(0.1);
    CHECK_THROWS_AS(rotation_number_enclosure(F, 0), argument_error);
    CHECK_THROWS_AS(rotation_number_enclosure(F, -5), argument_error);
}

TEST_CASE("enclosure nesting: for n | m the m-center lies in the n-enclosure") {
    std::vector<CircleLift> lifts = {CircleLift::rotation(kGolden),
                                     CircleLift::arnold(0.3, 0.8),
                                     CircleLift::arnold(0.71, -0.6)};
    for (const auto& F : lifts) {
        for (long long n : {50LL, 128LL, 400LL}) {
            auto coarse = rotation_number_enclosure(F, n);
            auto fine = rotation_number_enclosure(F, 8 * n);
            CHECK(coarse.contains(fine.center()));
        }
    }
}

TEST_CASE("conjugacy invariance: enclosures of g o F o g^-1 and F overlap") {
    auto g = sampled_conjugator();
    std::vector<CircleLift> lifts = {CircleLift::rotation(kGolden),
                                     CircleLift::arnold(0.3, 0.8)};
    for (const auto& F : lifts) {
        auto conj = CircleLift::compose(CircleLift::compose(g, F), g.inverse());
        for (long long n : {10LL, 100LL, 1000LL}) {
            auto a = rotation_number_enclosure(conj, n);
            auto b = rotation_number_enclosure(F, n);
            CHECK(a.overlaps(b));
        }
    }
}

TEST_CASE("conjugacy_to_rotation: irrational rotation gives h ~ identity") {
    auto F = CircleLift::rotation(kGolden);
    auto res = conjugacy_to_rotation(F, 100000, 128);
    for (int j = 0; j <= 128; ++j) {
        CHECK(std::abs(res.h.value_at_knot(j) - res.h.knot(j)) <= 2.0 * 128 / 100000 + 1e-3);
    }
    CHECK(res.rho == doctest::Approx(kGolden).epsilon(1e-4));
}

TEST_CASE("conjugacy_to_rotation: arnold residual contract") {
    auto F = CircleLift::arnold(0.3, 0.8);
    auto coarse = conjugacy_to_rotation(F, 200000, 256);
    const double r_coarse = conjugacy_residual(coarse.h, F, coarse.rho);
    CHECK(r_coarse <= 5e-3);

    auto fine = conjugacy_to_rotation(F, 1000000, 256);
    const double r_fine = conjugacy_residual(fine.h, F, fine.rho);
    CHECK(r_fine <= r_coarse);

    // h is a monotone degree-one circle map with h(1) - h(0) = 1.
    CHECK(fine.h.value_at_knot(fine.h.resolution()) - fine.h.value_at_knot(0) == 1.0);
    for (int j = 1; j <= fine.h.resolution(); ++j)
        CHECK(fine.h.value_at_knot(j) >= fine.h.value_at_knot(j - 1));
}

TEST_CASE("conjugacy_to_rotation: degenerate orbit is a non-minimality error") {
    auto F = CircleLift::rotation(0.0);  // fixed point at every x
    CHECK_THROWS_AS(conjugacy_to_rotation(F, 10000, 64), non_minimal_error);
}

TEST_CASE("minimality_density") {
    SUBCASE("period-2 rotation fails") {
        auto F = CircleLift::rotation(0.5);
        auto d = minimality_density(F, 0.0, 100, 0.4);
        CHECK(d.max_gap == doctest::Approx(0.5).epsilon(1e-12));
        CHECK_FALSE(d.pass);
    }
    SUBCASE("golden rotation passes") {
        auto F = CircleLift::rotation(kGolden);
        auto d = minimality_density(F, 0.0, 10000, 1e-3);
        CHECK(d.pass);
    }
    SUBCASE("arnold passes") {
        auto F = CircleLift::arnold(0.3, 0.8);
        auto d = minimality_density(F, 0.0, 100000, 1e-3);
        CHECK(d.pass);
    }
    SUBCASE("N < 2 rejected") {
        auto F = CircleLift::rotation(kGolden);
        CHECK_THROWS_AS(minimality_density(F, 0.0, 1, 0.1), argument_error);
    }
}

TEST_CASE("construction errors") {
    CHECK_THROWS_AS(CircleLift::arnold(0.3, 1.0), argument_error);
    CHECK_THROWS_AS(CircleLift::arnold(0.3, -1.2), argument_error);
    // non-monotone samples
    CHECK_THROWS_AS(CircleLift::from_samples({{0.0, 0.0}, {0.5, 0.4}, {0.8, 0.3}, {1.0, 1.0}}),
                    argument_error);
    // period not covered
    CHECK_THROWS_AS(CircleLift::from_samples({{0.0, 0.0}, {0.5, 0.6}}), argument_error);
}

TEST_CASE("rotation number is independent of base point") {
    // The library fixes base point 0; spot-check the independence that
    // makes this harmless.
    auto F = CircleLift::arnold(0.3, 0.8);
    auto enc0 = rotation_number_enclosure(F, 20000);
    SplitMix64 rng(11);
    for (int k = 0; k < 5; ++k) {
        const double x0 = rng.unit();
        const double disp = iterate_lift(F, 20000, x0) - x0;
        RotationEnclosure enc(disp, 20000);
        CHECK(enc.overlaps(enc0));
    }
}
