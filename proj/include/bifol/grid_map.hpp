#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "bifol/geometry.hpp"

namespace bifol {

// ---------------------------------------------------------------------------
// GridHomeomorphism: a torus self-map stored as the Z^2-periodic part of a
// lift
//
//     Phi(x) = A x + u(x),   A in GL2(Z),   u(x + e_k) = u(x),
//
// with u sampled on an N x N grid and interpolated bilinearly per cell.
// Deck equivariance Phi(x + e_k) = Phi(x) + A e_k is exact by storage.
// Construction checks local injectivity: the interpolated Jacobian
// determinant must keep one sign across all cell samples.
// ---------------------------------------------------------------------------
class GridHomeomorphism {
public:
    // samples are row-major with x fastest: u[(j * N) + i] = u(i/N, j/N).
    GridHomeomorphism(int resolution, IntMat2 integer_part, std::vector<Vec2> samples);

    static GridHomeomorphism identity(int resolution);
    static GridHomeomorphism translation(int resolution, Vec2 c);
    static GridHomeomorphism affine(int resolution, IntMat2 A);
    static GridHomeomorphism from_function(int resolution, IntMat2 A,
                                           const std::function<Vec2(Vec2)>& periodic_displacement);

    int resolution() const { return n_; }
    const IntMat2& integer_part() const { return a_; }
    Vec2 sample(int i, int j) const { return u_[index(i, j)]; }
    const std::vector<Vec2>& samples() const { return u_; }

    // Periodic displacement, bilinear on cells.
    Vec2 displacement(Vec2 x) const;

    // The lift Phi(x) = A x + u(x).
    Vec2 apply(Vec2 x) const { return a_ * x + displacement(x); }

    // Canonical torus representative of Phi(x).
    Vec2 apply_torus(Vec2 x) const { return frac(apply(x)); }

    // Jacobian of the interpolated lift at x (piecewise bilinear u).
    Mat2 jacobian(Vec2 x) const;

    // Upper bound on the Lipschitz constant of Phi (max cell gradient).
    double lip_bound() const { return lip_; }

    // Largest displacement magnitude over the samples.
    double displacement_sup() const;

    // Resample to a finer grid (bilinear; exact on the interpolant's nodes).
    GridHomeomorphism upsampled(int finer_resolution) const;

    bool operator==(const GridHomeomorphism& o) const;

private:
    std::size_t index(int i, int j) const {
        const int ii = ((i % n_) + n_) % n_;
        const int jj = ((j % n_) + n_) % n_;
        return std::size_t(jj) * std::size_t(n_) + std::size_t(ii);
    }
    void validate_injectivity() const;
    void compute_lip();

    int n_;
    IntMat2 a_;
    std::vector<Vec2> u_;
    double lip_ = 1.0;
};

// Solve Phi(x) = target to absolute tolerance tol, starting from guess.
// Damped fixed-point with the exact integer-part inverse as preconditioner.
Vec2 solve_preimage(const GridHomeomorphism& map, Vec2 target, Vec2 guess,
                    double tol = 1e-12);

// Inverse map, sampled by solving Phi(x) = node per grid node (tolerance
// 1e-12).  Throws not_invertible_error when a per-node solve diverges.
// output_resolution = 0 samples at the map's own resolution; any other
// value samples the same exact interpolant inverse on a different grid.
GridHomeomorphism grid_invert(const GridHomeomorphism& map, int output_resolution = 0);

// Samples of outer o inner; integer parts multiply exactly.  Mixed
// resolutions upsample the coarser operand first (downsampling is
// disallowed).  Interpolation bias is O(N^-2) for smooth inputs.
GridHomeomorphism grid_compose(const GridHomeomorphism& outer, const GridHomeomorphism& inner);

// sup over grid nodes of the torus distance between the two maps' images.
double sup_distance(const GridHomeomorphism& a, const GridHomeomorphism& b);

// --- Named models ----------------------------------------------------------

// Shear-type map: u(x) = amplitude * direction * sin(2 pi (wave . x)).
// direction is unit-normalized, so displacement_sup == amplitude.
GridHomeomorphism sinusoidal_shear(int resolution, double amplitude, Vec2 direction,
                                   Vec2 wave);

// Smooth model of a positive Dehn twist about the horizontal circle
// {y = 1/2}: D(x, y) = (x + s(y), y) with s(y) = y - sin(2 pi y)/(2 pi).
// Integer part [[1,1],[0,1]]; the map is the identity on {y = 0}.
GridHomeomorphism dehn_twist_h(int resolution);

// --- Serialization -----------------------------------------------------------
//
// Binary layout (little-endian):
//   magic "BFGM", u32 version = 1, u32 N, i64 A[4] row-major,
//   then N*N samples row-major (x fastest), each two f64 (ux, uy).
// CSV layout: see save_grid_map_csv; values printed with %.17g, which
// round-trips doubles exactly.

enum class GridFileFormat { Binary, Csv };

void save_grid_map(const std::filesystem::path& path, const GridHomeomorphism& map,
                   GridFileFormat format);
GridHomeomorphism load_grid_map(const std::filesystem::path& path);

}  // namespace bifol
