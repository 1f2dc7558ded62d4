#include "bifol/grid_map.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "bifol/errors.hpp"
#include "bifol/parallel.hpp"

namespace bifol {

namespace {

// Bilinear cell-corner values of the lift Phi on cell (i, j).
struct CellCorners {
    Vec2 v00, v10, v01, v11;
};

}  // namespace

GridHomeomorphism::GridHomeomorphism(int resolution, IntMat2 integer_part,
                                     std::vector<Vec2> samples)
    : n_(resolution), a_(integer_part), u_(std::move(samples)) {
    if (n_ < 2) throw argument_error("GridHomeomorphism: resolution must be >= 2");
    if (std::llabs(a_.det()) != 1)
        throw argument_error("GridHomeomorphism: integer part must be in GL2(Z)");
    if (u_.size() != std::size_t(n_) * std::size_t(n_))
        throw argument_error("GridHomeomorphism: expected N*N displacement samples");
    validate_injectivity();
    compute_lip();
}

void GridHomeomorphism::validate_injectivity() const {
    const double h = 1.0 / double(n_);
    int global_sign = 0;
    for (int j = 0; j < n_; ++j) {
        for (int i = 0; i < n_; ++i) {
            const Vec2 p{double(i) * h, double(j) * h};
            const Vec2 v00 = a_ * p + u_[index(i, j)];
            const Vec2 v10 = a_ * Vec2{p.x + h, p.y} + u_[index(i + 1, j)];
            const Vec2 v01 = a_ * Vec2{p.x, p.y + h} + u_[index(i, j + 1)];
            const Vec2 v11 = a_ * Vec2{p.x + h, p.y + h} + u_[index(i + 1, j + 1)];
            const Vec2 ex0 = v10 - v00, ex1 = v11 - v01;
            const Vec2 ey0 = v01 - v00, ey1 = v11 - v10;
            const double dets[4] = {cross(ex0, ey0), cross(ex0, ey1), cross(ex1, ey0),
                                    cross(ex1, ey1)};
            for (double d : dets) {
                const int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
                if (s == 0)
                    throw argument_error("grid map is not locally injective (vanishing "
                                         "Jacobian sample in cell " + std::to_string(i) + "," +
                                         std::to_string(j) + ")");
                if (global_sign == 0) global_sign = s;
                if (s != global_sign)
                    throw argument_error("grid map is not locally injective (Jacobian "
                                         "sign flip in cell " + std::to_string(i) + "," +
                                         std::to_string(j) + ")");
            }
        }
    }
}

void GridHomeomorphism::compute_lip() {
    const double h = 1.0 / double(n_);
    double worst = 0.0;
    for (int j = 0; j < n_; ++j) {
        for (int i = 0; i < n_; ++i) {
            const Vec2 p{double(i) * h, double(j) * h};
            const Vec2 v00 = a_ * p + u_[index(i, j)];
            const Vec2 v10 = a_ * Vec2{p.x + h, p.y} + u_[index(i + 1, j)];
            const Vec2 v01 = a_ * Vec2{p.x, p.y + h} + u_[index(i, j + 1)];
            const Vec2 v11 = a_ * Vec2{p.x + h, p.y + h} + u_[index(i + 1, j + 1)];
            const double gx = double(n_) * std::max(norm(v10 - v00), norm(v11 - v01));
            const double gy = double(n_) * std::max(norm(v01 - v00), norm(v11 - v10));
            worst = std::max(worst, std::hypot(gx, gy));
        }
    }
    lip_ = std::max(worst, 1e-12);
}

Vec2 GridHomeomorphism::displacement(Vec2 x) const {
    const double sx = frac(x.x) * double(n_);
    const double sy = frac(x.y) * double(n_);
    int i = int(sx), j = int(sy);
    if (i >= n_) i = n_ - 1;  // frac can round up to 1.0 * n
    if (j >= n_) j = n_ - 1;
    const double s = sx - double(i), t = sy - double(j);
    const Vec2 u00 = u_[index(i, j)], u10 = u_[index(i + 1, j)];
    const Vec2 u01 = u_[index(i, j + 1)], u11 = u_[index(i + 1, j + 1)];
    return u00 * ((1 - s) * (1 - t)) + u10 * (s * (1 - t)) + u01 * ((1 - s) * t) +
           u11 * (s * t);
}

Mat2 GridHomeomorphism::jacobian(Vec2 x) const {
    const double sx = frac(x.x) * double(n_);
    const double sy = frac(x.y) * double(n_);
    int i = int(sx), j = int(sy);
    if (i >= n_) i = n_ - 1;
    if (j >= n_) j = n_ - 1;
    const double s = sx - double(i), t = sy - double(j);
    const Vec2 u00 = u_[index(i, j)], u10 = u_[index(i + 1, j)];
    const Vec2 u01 = u_[index(i, j + 1)], u11 = u_[index(i + 1, j + 1)];
    const Vec2 dus = ((u10 - u00) * (1 - t) + (u11 - u01) * t) * double(n_);
    const Vec2 dut = ((u01 - u00) * (1 - s) + (u11 - u10) * s) * double(n_);
    Mat2 ja = a_.to_mat2();
    return {ja.a + dus.x, ja.b + dut.x, ja.c + dus.y, ja.d + dut.y};
}

double GridHomeomorphism::displacement_sup() const {
    double m = 0.0;
    for (const Vec2& u : u_) m = std::max(m, norm(u));
    return m;
}

GridHomeomorphism GridHomeomorphism::identity(int resolution) {
    return GridHomeomorphism(resolution, IntMat2{},
                             std::vector<Vec2>(std::size_t(resolution) * resolution));
}

GridHomeomorphism GridHomeomorphism::translation(int resolution, Vec2 c) {
    return GridHomeomorphism(resolution, IntMat2{},
                             std::vector<Vec2>(std::size_t(resolution) * resolution, c));
}

GridHomeomorphism GridHomeomorphism::affine(int resolution, IntMat2 A) {
    return GridHomeomorphism(resolution, A,
                             std::vector<Vec2>(std::size_t(resolution) * resolution));
}

GridHomeomorphism GridHomeomorphism::from_function(
    int resolution, IntMat2 A, const std::function<Vec2(Vec2)>& periodic_displacement) {
    std::vector<Vec2> u(std::size_t(resolution) * resolution);
    for (int j = 0; j < resolution; ++j)
        for (int i = 0; i < resolution; ++i)
            u[std::size_t(j) * resolution + i] =
                periodic_displacement({double(i) / resolution, double(j) / resolution});
    return GridHomeomorphism(resolution, A, std::move(u));
}

GridHomeomorphism GridHomeomorphism::upsampled(int finer_resolution) const {
    if (finer_resolution == n_) return *this;
    if (finer_resolution < n_)
        throw argument_error("grid maps may only be upsampled, never downsampled");
    std::vector<Vec2> u(std::size_t(finer_resolution) * finer_resolution);
    for (int j = 0; j < finer_resolution; ++j)
        for (int i = 0; i < finer_resolution; ++i)
            u[std::size_t(j) * finer_resolution + i] =
                displacement({double(i) / finer_resolution, double(j) / finer_resolution});
    return GridHomeomorphism(finer_resolution, a_, std::move(u));
}

bool GridHomeomorphism::operator==(const GridHomeomorphism& o) const {
    if (n_ != o.n_ || !(a_ == o.a_)) return false;
    for (std::size_t k = 0; k < u_.size(); ++k)
        if (u_[k].x != o.u_[k].x || u_[k].y != o.u_[k].y) return false;
    return true;
}

// ---------------------------------------------------------------------------

Vec2 solve_preimage(const GridHomeomorphism& map, Vec2 target, Vec2 guess, double tol) {
    const IntMat2 ainv = map.integer_part().inverse();
    Vec2 x = guess;
    Vec2 r = target - map.apply(x);
    double damping = 1.0;
    for (int it = 0; it < 400; ++it) {
        if (norm(r) <= tol) return x;
        // Damped Newton on the interpolated lift; the integer-part inverse
        // is the fallback preconditioner when a cell Jacobian degenerates.
        Vec2 step;
        const Mat2 j = map.jacobian(x);
        if (std::abs(j.det()) > 1e-9)
            step = solve2x2(j, r);
        else
            step = ainv * r;
        const Vec2 candidate = x + step * damping;
        const Vec2 rc = target - map.apply(candidate);
        if (norm(rc) < norm(r)) {
            x = candidate;
            r = rc;
            damping = std::min(1.0, damping * 1.5);
        } else {
            damping *= 0.5;
            if (damping < 1e-10)
                throw not_invertible_error("per-cell solve stalled at residual " +
                                           std::to_string(norm(r)));
        }
    }
    throw not_invertible_error("per-cell solve did not reach tolerance " +
                               std::to_string(tol));
}

GridHomeomorphism grid_invert(const GridHomeomorphism& map, int output_resolution) {
    const int n = output_resolution > 0 ? output_resolution : map.resolution();
    const IntMat2 ainv = map.integer_part().inverse();
    std::vector<Vec2> v(std::size_t(n) * n);
    parallel_for(std::size_t(n), [&](std::size_t jz) {
        const int j = int(jz);
        Vec2 warm{0.0, 0.0};
        bool have_warm = false;
        for (int i = 0; i < n; ++i) {
            const Vec2 node{double(i) / n, double(j) / n};
            Vec2 guess = ainv * node;
            if (have_warm) guess = warm + ainv * Vec2{1.0 / n, 0.0};
            const Vec2 x = solve_preimage(map, node, guess);
            warm = x;
            have_warm = true;
            v[std::size_t(j) * n + i] = x - ainv * node;
        }
    });
    return GridHomeomorphism(n, ainv, std::move(v));
}

GridHomeomorphism grid_compose(const GridHomeomorphism& outer, const GridHomeomorphism& inner) {
    const int n = std::max(outer.resolution(), inner.resolution());
    const GridHomeomorphism& o = outer.resolution() == n ? outer : outer.upsampled(n);
    const GridHomeomorphism& i = inner.resolution() == n ? inner : inner.upsampled(n);
    const IntMat2 a = o.integer_part() * i.integer_part();
    std::vector<Vec2> u(std::size_t(n) * n);
    parallel_for(std::size_t(n), [&](std::size_t jz) {
        const int j = int(jz);
        for (int k = 0; k < n; ++k) {
            const Vec2 node{double(k) / n, double(j) / n};
            u[std::size_t(j) * n + k] = o.apply(i.apply(node)) - a * node;
        }
    });
    return GridHomeomorphism(n, a, std::move(u));
}

double sup_distance(const GridHomeomorphism& a, const GridHomeomorphism& b) {
    const int n = std::max(a.resolution(), b.resolution());
    const GridHomeomorphism& fa = a.resolution() == n ? a : a.upsampled(n);
    const GridHomeomorphism& fb = b.resolution() == n ? b : b.upsampled(n);
    double worst = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const Vec2 node{double(i) / n, double(j) / n};
            worst = std::max(worst, torus_distance(fa.apply(node), fb.apply(node)));
        }
    return worst;
}

// --- Named models ----------------------------------------------------------

GridHomeomorphism sinusoidal_shear(int resolution, double amplitude, Vec2 direction,
                                   Vec2 wave) {
    const double dn = norm(direction);
    if (!(dn > 0)) throw argument_error("sinusoidal_shear: zero direction");
    const Vec2 d = direction * (1.0 / dn);
    return GridHomeomorphism::from_function(resolution, IntMat2{}, [&](Vec2 p) {
        return d * (amplitude * std::sin(kTwoPi * dot(wave, p)));
    });
}

GridHomeomorphism dehn_twist_h(int resolution) {
    return GridHomeomorphism::from_function(resolution, IntMat2{1, 1, 0, 1}, [](Vec2 p) {
        return Vec2{-std::sin(kTwoPi * p.y) / kTwoPi, 0.0};
    });
}

// --- Serialization -----------------------------------------------------------

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) out.push_back(char((v >> (8 * k)) & 0xff));
}
void put_i64(std::string& out, std::int64_t v) {
    const auto u = std::uint64_t(v);
    for (int k = 0; k < 8; ++k) out.push_back(char((u >> (8 * k)) & 0xff));
}
void put_f64(std::string& out, double v) {
    put_i64(out, std::int64_t(std::bit_cast<std::uint64_t>(v)));
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= std::uint32_t(std::uint8_t(in.at(pos++))) << (8 * k);
    return v;
}
std::int64_t get_i64(const std::string& in, std::size_t& pos) {
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= std::uint64_t(std::uint8_t(in.at(pos++))) << (8 * k);
    return std::int64_t(v);
}
double get_f64(const std::string& in, std::size_t& pos) {
    return std::bit_cast<double>(std::uint64_t(get_i64(in, pos)));
}

void write_atomically(const std::filesystem::path& path, const std::string& bytes) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open for writing: " + tmp.string());
        out.write(bytes.data(), std::streamsize(bytes.size()));
        if (!out) throw io_error("short write: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw io_error("rename failed for " + path.string() + ": " + ec.message());
}

constexpr char kMagic[4] = {'B', 'F', 'G', 'M'};
constexpr const char* kCsvMagic = "bifol-grid";

}  // namespace

void save_grid_map(const std::filesystem::path& path, const GridHomeomorphism& map,
                   GridFileFormat format) {
    const int n = map.resolution();
    const IntMat2& a = map.integer_part();
    std::string bytes;
    if (format == GridFileFormat::Binary) {
        bytes.reserve(24 + 32 + std::size_t(n) * n * 16);
        bytes.append(kMagic, 4);
        put_u32(bytes, 1);
        put_u32(bytes, std::uint32_t(n));
        put_i64(bytes, a.a);
        put_i64(bytes, a.b);
        put_i64(bytes, a.c);
        put_i64(bytes, a.d);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const Vec2 u = map.sample(i, j);
                put_f64(bytes, u.x);
                put_f64(bytes, u.y);
            }
    } else {
        char line[128];
        bytes += std::string(kCsvMagic) + ",1\n";
        std::snprintf(line, sizeof line, "%d,%lld,%lld,%lld,%lld\n", n, a.a, a.b, a.c, a.d);
        bytes += line;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const Vec2 u = map.sample(i, j);
                std::snprintf(line, sizeof line, "%d,%d,%.17g,%.17g\n", i, j, u.x, u.y);
                bytes += line;
            }
    }
    write_atomically(path, bytes);
}

GridHomeomorphism load_grid_map(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open grid map file: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0) {
        std::size_t pos = 4;
        try {
            const std::uint32_t version = get_u32(bytes, pos);
            if (version != 1)
                throw io_error("unsupported grid map version in " + path.string());
            const int n = int(get_u32(bytes, pos));
            IntMat2 a;
            a.a = get_i64(bytes, pos);
            a.b = get_i64(bytes, pos);
            a.c = get_i64(bytes, pos);
            a.d = get_i64(bytes, pos);
            std::vector<Vec2> u(std::size_t(n) * n);
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    const double x = get_f64(bytes, pos);
                    const double y = get_f64(bytes, pos);
                    u[std::size_t(j) * n + i] = {x, y};
                }
            return GridHomeomorphism(n, a, std::move(u));
        } catch (const std::out_of_range&) {
            throw io_error("truncated grid map file: " + path.string());
        }
    }

    // CSV
    if (bytes.rfind(kCsvMagic, 0) != 0)
        throw io_error("unrecognized grid map format: " + path.string());
    std::size_t pos = bytes.find('\n');
    if (pos == std::string::npos) throw io_error("truncated csv grid map: " + path.string());
    ++pos;
    int n = 0;
    IntMat2 a;
    {
        const std::size_t eol = bytes.find('\n', pos);
        if (eol == std::string::npos)
            throw io_error("truncated csv grid map: " + path.string());
        if (std::sscanf(bytes.c_str() + pos, "%d,%lld,%lld,%lld,%lld", &n, &a.a, &a.b, &a.c,
                        &a.d) != 5)
            throw io_error("bad csv grid map header: " + path.string());
        pos = eol + 1;
    }
    if (n < 2) throw io_error("bad csv grid map resolution: " + path.string());
    std::vector<Vec2> u(std::size_t(n) * n);
    std::vector<bool> seen(u.size(), false);
    while (pos < bytes.size()) {
        const std::size_t eol = bytes.find('\n', pos);
        const std::string_view line(bytes.c_str() + pos,
                                    (eol == std::string::npos ? bytes.size() : eol) - pos);
        if (!line.empty()) {
            int i = 0, j = 0;
            double x = 0, y = 0;
            if (std::sscanf(std::string(line).c_str(), "%d,%d,%lf,%lf", &i, &j, &x, &y) != 4)
                throw io_error("bad csv grid map row: " + path.string());
            if (i < 0 || i >= n || j < 0 || j >= n)
                throw io_error("csv grid map index out of range: " + path.string());
            u[std::size_t(j) * n + i] = {x, y};
            seen[std::size_t(j) * n + i] = true;
        }
        if (eol == std::string::npos) break;
        pos = eol + 1;
    }
    for (bool s : seen)
        if (!s) throw io_error("csv grid map is missing samples: " + path.string());
    return GridHomeomorphism(n, a, std::move(u));
}

}  // namespace bifol
