#include "bifol/rigidity.hpp"

#include <cmath>

#include "bifol/errors.hpp"

namespace bifol {

AffineBiFolAutomorphism::AffineBiFolAutomorphism(double delta, double delta_prime, double a,
                                                 double a_prime, double b, double b_prime)
    : delta_(delta), delta_prime_(delta_prime), a_(a), a_prime_(a_prime), b_(b),
      b_prime_(b_prime) {
    const double gap = delta - delta_prime;
    if (std::abs(gap) <= 1e-12 * std::max(1.0, std::max(std::abs(delta), std::abs(delta_prime))))
        throw argument_error("affine automorphism needs distinct slopes delta != delta'");
    m_ = Mat2{(a * delta - a_prime * delta_prime) / gap, (a_prime - a) / gap,
              delta * delta_prime * (a - a_prime) / gap,
              (delta * a_prime - delta_prime * a) / gap};
    translation_ = Vec2{(b_prime - b) / gap, (delta * b_prime - delta_prime * b) / gap};
}

AffineBiFolAutomorphism affine_from_slope_data(double delta, double delta_prime, double a,
                                               double a_prime, double b, double b_prime) {
    return AffineBiFolAutomorphism(delta, delta_prime, a, a_prime, b, b_prime);
}

AffineBiFolAutomorphism AffineBiFolAutomorphism::compose(
    const AffineBiFolAutomorphism& inner) const {
    // Same slope pair required: the leaf-preservation relations compose
    // with multiplied stretches and pushed offsets.
    if (std::abs(delta_ - inner.delta_) > 1e-12 ||
        std::abs(delta_prime_ - inner.delta_prime_) > 1e-12)
        throw argument_error("composition requires the same slope pair");
    return AffineBiFolAutomorphism(delta_, delta_prime_, a_ * inner.a_, a_prime_ * inner.a_prime_,
                                   a_ * inner.b_ + b_, a_prime_ * inner.b_prime_ + b_prime_);
}

bool AffineBiFolAutomorphism::descends_to_torus() const {
    const double entries[4] = {m_.a, m_.b, m_.c, m_.d};
    for (double e : entries)
        if (std::abs(e - std::nearbyint(e)) > 1e-9) return false;
    const double det = m_.det();
    return std::abs(std::abs(det) - 1.0) <= 1e-9;
}

RigidityVerdict rigidity_identity_check(const AffineBiFolAutomorphism& map,
                                        bool require_origin_fixed) {
    const Mat2& m = map.matrix();
    const double mr = std::max(std::max(std::abs(m.a - 1.0), std::abs(m.d - 1.0)),
                               std::max(std::abs(m.b), std::abs(m.c)));
    const double tr = norm(map.translation());
    const bool identity = mr <= 1e-12 && tr <= 1e-12;

    bool origin_ok = true;
    if (require_origin_fixed && mr <= 1e-12) {
        // From the entries alone: trace M = a + a' and det M = a a', so
        // M = id forces a = a' = 1.
        const double trace = m.a + m.d;
        const double det = m.det();
        const double disc = std::max(0.0, 0.25 * trace * trace - det);
        const double ev1 = 0.5 * trace + std::sqrt(disc);
        const double ev2 = 0.5 * trace - std::sqrt(disc);
        origin_ok = std::abs(ev1 - 1.0) <= 1e-6 && std::abs(ev2 - 1.0) <= 1e-6;
    }
    return {identity, origin_ok, mr, tr};
}

std::vector<IntMat2> find_affine_symmetries(double delta, double delta_prime,
                                            int entry_bound) {
    if (entry_bound < 1 || entry_bound > 12)
        throw argument_error("find_affine_symmetries: entry bound must be in [1, 12]");
    if (delta == delta_prime)
        throw argument_error("find_affine_symmetries: slopes must differ");

    const Vec2 v1 = HalfLine({1.0, delta}).dir();
    const Vec2 v2 = HalfLine({1.0, delta_prime}).dir();

    std::vector<IntMat2> found;
    for (long long a = -entry_bound; a <= entry_bound; ++a)
        for (long long b = -entry_bound; b <= entry_bound; ++b)
            for (long long c = -entry_bound; c <= entry_bound; ++c)
                for (long long d = -entry_bound; d <= entry_bound; ++d) {
                    const IntMat2 m{a, b, c, d};
                    if (std::llabs(m.det()) != 1) continue;
                    if (std::abs(cross(m * v1, v1)) > 1e-9) continue;
                    if (std::abs(cross(m * v2, v2)) > 1e-9) continue;
                    found.push_back(m);
                }
    return found;  // lexicographic in (a, b, c, d) by loop order
}

}  // namespace bifol
