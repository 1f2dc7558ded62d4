#include "bifol/cli.hpp"

#include <chrono>
#include <fstream>
#include <map>
#include <set>

#include "bifol/circle.hpp"
#include "bifol/errors.hpp"
#include "bifol/foliation.hpp"
#include "bifol/homology.hpp"
#include "bifol/rigidity.hpp"
#include "bifol/straighten.hpp"

namespace bifol {

using nlohmann::ordered_json;

namespace {

[[noreturn]] void config_error(const std::string& what) {
    throw argument_error("config: " + what);
}

const ordered_json& require(const ordered_json& j, const std::string& key,
                            const std::string& where) {
    const auto it = j.find(key);
    if (it == j.end()) config_error("missing key '" + key + "' in " + where);
    return *it;
}

double num(const ordered_json& j, const std::string& key, const std::string& where) {
    const auto& v = require(j, key, where);
    if (!v.is_number()) config_error("'" + key + "' in " + where + " must be a number");
    return v.get<double>();
}

double num_or(const ordered_json& j, const std::string& key, double fallback) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number()) config_error("'" + key + "' must be a number");
    return it->get<double>();
}

long long integer_or(const ordered_json& j, const std::string& key, long long fallback) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number_integer()) config_error("'" + key + "' must be an integer");
    return it->get<long long>();
}

std::string text(const ordered_json& j, const std::string& key, const std::string& where) {
    const auto& v = require(j, key, where);
    if (!v.is_string()) config_error("'" + key + "' in " + where + " must be a string");
    return v.get<std::string>();
}

Vec2 vec2(const ordered_json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        config_error(where + " must be a [x, y] number pair");
    return {v[0].get<double>(), v[1].get<double>()};
}

// ---------------------------------------------------------------------------
// Object registry: named circle maps, grid maps, foliations,
// bi-foliations with acyclic reference resolution.
// ---------------------------------------------------------------------------

class ObjectBuilder {
public:
    explicit ObjectBuilder(const ordered_json& config) {
        const auto it = config.find("objects");
        if (it != config.end()) {
            if (!it->is_object()) config_error("'objects' must be an object");
            for (const auto& [name, def] : it->items()) defs_[name] = def;
        }
    }

    CircleLift circle_map(const std::string& name) {
        const auto memo = circle_memo_.find(name);
        if (memo != circle_memo_.end()) return memo->second;
        Guard g(*this, name);
        const ordered_json& def = lookup(name, "circle_map");
        const std::string family = text(def, "family", "circle map '" + name + "'");
        CircleLift lift = [&] {
            if (family == "rotation")
                return CircleLift::rotation(num(def, "theta", name));
            if (family == "arnold")
                return CircleLift::arnold(num(def, "theta", name), num(def, "K", name));
            if (family == "samples") {
                const auto& knots = require(def, "knots", name);
                if (!knots.is_array() || knots.size() < 2)
                    config_error("'knots' of '" + name + "' must be an array of pairs");
                std::vector<CircleLift::Knot> parsed;
                for (const auto& k : knots) {
                    const Vec2 v = vec2(k, "knot of '" + name + "'");
                    parsed.push_back({v.x, v.y});
                }
                return CircleLift::from_samples(std::move(parsed));
            }
            if (family == "compose")
                return CircleLift::compose(circle_map(text(def, "outer", name)),
                                           circle_map(text(def, "inner", name)));
            if (family == "inverse") return circle_map(text(def, "of", name)).inverse();
            if (family == "shift")
                return circle_map(text(def, "of", name))
                    .shifted_by(integer_or(def, "d", 0));
            config_error("unknown circle map family '" + family + "'");
        }();
        circle_memo_.emplace(name, lift);
        return lift;
    }

    GridHomeomorphism grid_map(const std::string& name) {
        const auto memo = grid_memo_.find(name);
        if (memo != grid_memo_.end()) return memo->second;
        Guard g(*this, name);
        const ordered_json& def = lookup(name, "grid_map");
        const std::string model = text(def, "model", "grid map '" + name + "'");
        const int n = int(integer_or(def, "resolution", 256));
        GridHomeomorphism map = [&] {
            if (model == "identity") return GridHomeomorphism::identity(n);
            if (model == "translation")
                return GridHomeomorphism::translation(n, vec2(require(def, "offset", name),
                                                              "'offset' of " + name));
            if (model == "affine") {
                const auto& m = require(def, "matrix", name);
                if (!m.is_array() || m.size() != 2) config_error("'matrix' must be 2x2");
                const Vec2 r0 = vec2(m[0], "matrix row"), r1 = vec2(m[1], "matrix row");
                return GridHomeomorphism::affine(
                    n, make_unimodular((long long)r0.x, (long long)r0.y, (long long)r1.x,
                                       (long long)r1.y));
            }
            if (model == "shear")
                return sinusoidal_shear(n, num(def, "amplitude", name),
                                        vec2(require(def, "direction", name), name),
                                        vec2(require(def, "wave", name), name));
            if (model == "dehn_twist") return dehn_twist_h(n);
            if (model == "compose")
                return grid_compose(grid_map(text(def, "outer", name)),
                                    grid_map(text(def, "inner", name)));
            if (model == "invert") return grid_invert(grid_map(text(def, "of", name)));
            if (model == "file") return load_grid_map(text(def, "path", name));
            config_error("unknown grid map model '" + model + "'");
        }();
        grid_memo_.emplace(name, map);
        return map;
    }

    Foliation foliation(const std::string& name) {
        const auto memo = foliation_memo_.find(name);
        if (memo != foliation_memo_.end()) return memo->second;
        Guard g(*this, name);
        const ordered_json& def = lookup(name, "foliation");
        const std::string variant = text(def, "variant", "foliation '" + name + "'");
        Foliation fol = [&] {
            if (variant == "linear") {
                if (def.contains("direction"))
                    return Foliation::linear(
                        HalfLine(vec2(def["direction"], "'direction' of " + name)));
                if (def.contains("slope"))
                    return Foliation::linear(HalfLine::from_slope(num(def, "slope", name)));
                if (def.contains("angle"))
                    return Foliation::linear(HalfLine::from_angle(num(def, "angle", name)));
                config_error("linear foliation '" + name +
                             "' needs 'direction', 'slope' or 'angle'");
            }
            if (variant == "suspension_h")
                return Foliation::suspension_h(circle_map(text(def, "map", name)));
            if (variant == "suspension_v")
                return Foliation::suspension_v(circle_map(text(def, "map", name)));
            if (variant == "pushforward")
                return Foliation::pushforward(foliation(text(def, "base", name)),
                                              grid_map(text(def, "map", name)));
            config_error("unknown foliation variant '" + variant + "'");
        }();
        if (def.value("reversed", false)) fol = fol.reversed();
        foliation_memo_.emplace(name, fol);
        return fol;
    }

    std::pair<Foliation, Foliation> bifoliation(const std::string& name) {
        Guard g(*this, name);
        const ordered_json& def = lookup(name, "bifoliation");
        return {foliation(text(def, "alpha", name)), foliation(text(def, "beta", name))};
    }

private:
    struct Guard {
        Guard(ObjectBuilder& b, const std::string& name) : builder(b), key(name) {
            if (!builder.building_.insert(name).second)
                config_error("cyclic reference through object '" + name + "'");
        }
        ~Guard() { builder.building_.erase(key); }
        ObjectBuilder& builder;
        std::string key;
    };

    const ordered_json& lookup(const std::string& name, const std::string& expected_kind) {
        const auto it = defs_.find(name);
        if (it == defs_.end()) config_error("unknown object '" + name + "'");
        const std::string kind = text(it->second, "kind", "object '" + name + "'");
        if (kind != expected_kind)
            config_error("object '" + name + "' has kind '" + kind + "', expected '" +
                         expected_kind + "'");
        return it->second;
    }

    std::map<std::string, ordered_json> defs_;
    std::map<std::string, CircleLift> circle_memo_;
    std::map<std::string, GridHomeomorphism> grid_memo_;
    std::map<std::string, Foliation> foliation_memo_;
    std::set<std::string> building_;
};

// ---------------------------------------------------------------------------
// json shaping helpers
// ---------------------------------------------------------------------------

ordered_json enclosure_json(const RotationEnclosure& enc) {
    const auto red = enc.reduced();
    return {{"lo", enc.lo()},
            {"hi", enc.hi()},
            {"n", enc.iterations()},
            {"center", enc.center()},
            {"width", enc.width()},
            {"reduced", {{"lo", red.lo()}, {"hi", red.hi()}, {"center", red.center()}}}};
}

ordered_json halfline_json(const HalfLine& l, double bound) {
    return {{"direction", {l.dir().x, l.dir().y}}, {"angle_rad", l.angle()},
            {"bound_rad", bound}};
}

ordered_json verify_json(const VerifyReport& v) {
    return {{"max_perp_alpha", v.max_perp_alpha},
            {"max_perp_beta", v.max_perp_beta},
            {"max_angle_alpha_rad", v.max_angle_alpha},
            {"max_angle_beta_rad", v.max_angle_beta},
            {"basepoint_residual", v.basepoint_residual},
            {"h1_identity", v.h1_identity},
            {"samples", v.samples}};
}

Section section_from(const ordered_json& j) {
    const std::string axis = text(j, "axis", "section");
    if (axis != "x" && axis != "y") config_error("section axis must be 'x' or 'y'");
    return {axis == "x" ? Section::Axis::X : Section::Axis::Y, num_or(j, "level", 0.0)};
}

StraighteningParams straightening_params(const ordered_json& p, std::uint64_t seed) {
    StraighteningParams out;
    out.leaf_budget = num_or(p, "L", out.leaf_budget);
    out.grid_resolution = int(integer_or(p, "N", out.grid_resolution));
    out.epsilon = num_or(p, "epsilon", out.epsilon);
    out.transversality_threshold = num_or(p, "threshold", out.transversality_threshold);
    out.cycle_budget = num_or(p, "cycle_budget", out.cycle_budget);
    out.rotation_iterations = integer_or(p, "rotation_iterations", out.rotation_iterations);
    out.conjugacy_orbit = integer_or(p, "conjugacy_orbit", out.conjugacy_orbit);
    out.conjugacy_resolution =
        int(integer_or(p, "conjugacy_resolution", out.conjugacy_resolution));
    out.first_return_resolution =
        int(integer_or(p, "first_return_resolution", out.first_return_resolution));
    out.section_budget = num_or(p, "section_budget", out.section_budget);
    out.minimality_orbit = integer_or(p, "minimality_orbit", out.minimality_orbit);
    out.minimality_eps = num_or(p, "minimality_eps", out.minimality_eps);
    out.verify_samples = int(integer_or(p, "verify_samples", out.verify_samples));
    if (p.contains("basepoint")) out.basepoint = vec2(p["basepoint"], "'basepoint'");
    out.seed = seed;
    return out;
}

std::pair<Foliation, Foliation> resolve_pair(ObjectBuilder& objects, const ordered_json& p) {
    if (p.contains("pair")) return objects.bifoliation(text(p, "pair", "params"));
    return {objects.foliation(text(p, "alpha", "params")),
            objects.foliation(text(p, "beta", "params"))};
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig
// ---------------------------------------------------------------------------

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file: " + path.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        config_error("parse failure in " + path.string() + ": " + e.what());
    }
    return from_json(std::move(j));
}

RunConfig RunConfig::from_json(ordered_json config) {
    if (!config.is_object()) config_error("top level must be an object");
    const long long version = integer_or(config, "schema_version", -1);
    if (version != 1)
        config_error("unsupported or missing schema_version (expected 1)");
    RunConfig out;
    out.config_ = std::move(config);
    // eager structural validation of all declared objects
    ObjectBuilder builder(out.config_);
    const auto it = out.config_.find("objects");
    if (it != out.config_.end()) {
        for (const auto& [name, def] : it->items()) {
            const std::string kind = text(def, "kind", "object '" + name + "'");
            if (kind == "circle_map")
                builder.circle_map(name);
            else if (kind == "grid_map")
                builder.grid_map(name);
            else if (kind == "foliation")
                builder.foliation(name);
            else if (kind == "bifoliation")
                builder.bifoliation(name);
            else
                config_error("object '" + name + "' has unknown kind '" + kind + "'");
        }
    }
    return out;
}

std::uint64_t RunConfig::seed() const {
    return config_.value("seed", std::uint64_t(1));
}

void RunConfig::override_seed(std::uint64_t seed) { config_["seed"] = seed; }

std::filesystem::path RunConfig::report_path() const {
    std::filesystem::path p =
        config_.contains("output") ? config_["output"].value("report", "report.json")
                                   : "report.json";
    if (p.is_relative() && !out_dir_.empty()) p = out_dir_ / p;
    return p;
}

std::filesystem::path RunConfig::grid_path() const {
    std::filesystem::path p;
    if (config_.contains("output")) p = config_["output"].value("grid", "");
    if (p.empty()) return p;
    if (p.is_relative() && !out_dir_.empty()) p = out_dir_ / p;
    return p;
}

GridFileFormat RunConfig::grid_format() const {
    const std::string f = config_.contains("output")
                              ? config_["output"].value("grid_format", "binary")
                              : "binary";
    if (f == "binary") return GridFileFormat::Binary;
    if (f == "csv") return GridFileFormat::Csv;
    config_error("output.grid_format must be 'binary' or 'csv'");
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

ordered_json Report::to_json() const {
    return {{"schema_version", 1},
            {"command", command},
            {"inputs_digest", inputs_digest},
            {"payload", payload},
            {"quality_flags", quality_flags},
            {"timing_ms", timing_ms}};
}

std::string digest_hex(const ordered_json& value) {
    const std::string dump = value.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

void emit_report(const Report& report, const std::filesystem::path& path) {
    const std::string body = report.to_json().dump(2) + "\n";
    namespace fs = std::filesystem;
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot write report: " + tmp.string());
        out << body;
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw io_error("rename failed for " + path.string() + ": " + ec.message());
    std::fputs(body.c_str(), stdout);
}

void export_grid(const GridHomeomorphism& map, const std::filesystem::path& path,
                 GridFileFormat format) {
    save_grid_map(path, map, format);
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

Report run_command(const RunConfig& config, const std::string& command) {
    const auto started = std::chrono::steady_clock::now();
    const ordered_json& raw = config.raw();
    const ordered_json params = raw.contains("params") ? raw["params"] : ordered_json::object();
    const std::uint64_t seed = config.seed();

    ObjectBuilder objects(raw);
    Report report;
    report.command = command;
    report.inputs_digest = digest_hex({{"command", command},
                                       {"seed", seed},
                                       {"objects", raw.value("objects", ordered_json::object())},
                                       {"params", params}});

    if (command == "rotnum") {
        const auto map = objects.circle_map(text(params, "map", "params"));
        const long long n = integer_or(params, "n", 100000);
        report.payload = {{"enclosure", enclosure_json(rotation_number_enclosure(map, n))}};
    } else if (command == "cycle") {
        const auto fol = objects.foliation(text(params, "foliation", "params"));
        const Vec2 q = params.contains("point") ? vec2(params["point"], "'point'")
                                                : Vec2{0.0, 0.0};
        const auto est = asymptotic_cycle(fol, q, num_or(params, "T_max", 1000.0));
        ordered_json checkpoints = ordered_json::array();
        for (const auto& c : est.checkpoints)
            checkpoints.push_back({{"T", c.arclength},
                                   {"direction", {c.direction.dir().x, c.direction.dir().y}},
                                   {"bound_rad", c.angular_bound}});
        report.payload = {{"direction", halfline_json(est.direction, est.angular_bound)},
                          {"T", est.trace_length},
                          {"displacement_norm", est.displacement_norm},
                          {"checkpoints", checkpoints}};
    } else if (command == "first-return") {
        const auto fol = objects.foliation(text(params, "foliation", "params"));
        const Section section = section_from(require(params, "section", "params"));
        const int resolution = int(integer_or(params, "resolution", 512));
        const double budget = num_or(params, "budget", 64.0);
        const auto ret = first_return(fol, section, resolution, budget);
        const long long n = integer_or(params, "enclosure_n", 100000);
        ordered_json knots = ordered_json::array();
        for (int i = 0; i < resolution; ++i) {
            const double s = double(i) / resolution;
            knots.push_back({s, ret(s)});
        }
        report.payload = {{"section",
                           {{"axis", section.axis == Section::Axis::X ? "x" : "y"},
                            {"level", section.level}}},
                          {"resolution", resolution},
                          {"enclosure", enclosure_json(rotation_number_enclosure(ret, n))},
                          {"knots", knots}};
    } else if (command == "straighten") {
        auto [alpha, beta] = resolve_pair(objects, params);
        const auto sp = straightening_params(params, seed);
        const auto result = straighten_pipeline(alpha, beta, sp);
        report.quality_flags = result.quality.flags;
        report.payload = {{"alpha_target", halfline_json(result.alpha_target, result.alpha_bound)},
                          {"beta_target", halfline_json(result.beta_target, result.beta_bound)},
                          {"max_extension_gap", result.quality.max_extension_gap},
                          {"gap_tolerance_epsilon", sp.epsilon},
                          {"basepoint_residual", result.quality.basepoint_residual},
                          {"basepoint_tolerance", 1e-9},
                          {"h1_identity", result.quality.h1_identity},
                          {"beta_fiber_skew", result.quality.beta_fiber_skew},
                          {"verification", verify_json(result.quality.verification)},
                          {"grid_resolution", result.phi.resolution()}};
        const auto grid_file = config.grid_path();
        if (!grid_file.empty()) {
            export_grid(result.phi, grid_file, config.grid_format());
            report.payload["grid_file"] = grid_file.string();
        }
    } else if (command == "verify") {
        auto [alpha, beta] = resolve_pair(objects, params);
        const auto phi = objects.grid_map(text(params, "phi", "params"));
        const int samples = int(integer_or(params, "n_samples", 64));
        HalfLine ta({1.0, 0.0}), tb({0.0, 1.0});
        double ba = 0.0, bb = 0.0;
        if (params.contains("target_alpha")) {
            ta = HalfLine(vec2(params["target_alpha"], "'target_alpha'"));
        } else {
            const auto est = asymptotic_cycle(alpha, {0, 0}, num_or(params, "T_max", 500.0));
            ta = est.direction;
            ba = est.angular_bound;
        }
        if (params.contains("target_beta")) {
            tb = HalfLine(vec2(params["target_beta"], "'target_beta'"));
        } else {
            const auto est = asymptotic_cycle(beta, {0, 0}, num_or(params, "T_max", 500.0));
            tb = est.direction;
            bb = est.angular_bound;
        }
        Vec2 basepoint{0, 0};
        if (params.contains("basepoint")) basepoint = vec2(params["basepoint"], "'basepoint'");
        const auto v = verify_conjugacy(phi, alpha, beta, ta, tb, samples, seed, basepoint);
        report.payload = {{"alpha_target", halfline_json(ta, ba)},
                          {"beta_target", halfline_json(tb, bb)},
                          {"verification", verify_json(v)}};
    } else if (command == "rigidity") {
        const auto map = affine_from_slope_data(
            num(params, "delta", "params"), num(params, "delta_prime", "params"),
            num_or(params, "a", 1.0), num_or(params, "a_prime", 1.0),
            num_or(params, "b", 0.0), num_or(params, "b_prime", 0.0));
        const auto verdict =
            rigidity_identity_check(map, params.value("require_origin_fixed", true));
        const Mat2& m = map.matrix();
        report.payload = {{"matrix", {{m.a, m.b}, {m.c, m.d}}},
                          {"translation", {map.translation().x, map.translation().y}},
                          {"verdict",
                           {{"is_identity", verdict.is_identity},
                            {"origin_assertion_ok", verdict.origin_assertion_ok},
                            {"matrix_residual", verdict.matrix_residual},
                            {"translation_residual", verdict.translation_residual},
                            {"tolerance", 1e-12}}},
                          {"descends_to_torus", map.descends_to_torus()}};
    } else if (command == "symmetries") {
        const auto found = find_affine_symmetries(num(params, "delta", "params"),
                                                  num(params, "delta_prime", "params"),
                                                  int(integer_or(params, "bound", 3)));
        ordered_json list = ordered_json::array();
        for (const auto& m : found)
            list.push_back({{m.a, m.b}, {m.c, m.d}});
        report.payload = {{"eigen_residual_tolerance", 1e-9},
                          {"count", found.size()},
                          {"matrices", list}};
    } else {
        config_error("unknown command '" + command + "'");
    }

    report.timing_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();
    return report;
}

}  // namespace bifol
