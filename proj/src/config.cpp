#include "mfg/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <toml.hpp>

namespace mfg {

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

const std::vector<std::string> kSections = {"grid",      "cost",       "coupling", "terminal", "initial",
                                            "constants", "tolerances", "solver",   "campaign"};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

toml::table parse_toml(std::string_view text) {
    try {
        return toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "config parse error: " << e.description() << " at " << e.source().begin;
        throw ValidationError(os.str());
    }
}

template <class T>
T get(const toml::table& tbl, std::string_view section, std::string_view key, T fallback) {
    const toml::node_view node = tbl[section][key];
    if (!node) return fallback;
    if constexpr (std::is_same_v<T, double>) {
        if (auto v = node.value<double>()) return *v;
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (auto v = node.value<std::string>()) return *v;
    } else if constexpr (std::is_same_v<T, bool>) {
        if (auto v = node.value<bool>()) return *v;
    } else {
        if (auto v = node.value<std::int64_t>()) return static_cast<T>(*v);
    }
    throw ValidationError("config key " + std::string(section) + "." + std::string(key) + " has the wrong type");
}

template <class T>
std::vector<T> get_list(const toml::table& tbl, std::string_view section, std::string_view key) {
    std::vector<T> out;
    const toml::node_view node = tbl[section][key];
    if (!node) return out;
    const toml::array* arr = node.as_array();
    if (!arr) throw ValidationError("config key " + std::string(section) + "." + std::string(key) + " must be an array");
    for (const auto& el : *arr) {
        std::optional<T> v;
        if constexpr (std::is_floating_point_v<T>) {
            v = el.value<double>();
        } else {
            if (auto i = el.value<std::int64_t>()) {
                if (*i < 0 && std::is_unsigned_v<T>) throw ValidationError(std::string(key) + " entries must be >= 0");
                v = static_cast<T>(*i);
            }
        }
        if (!v) throw ValidationError("config key " + std::string(section) + "." + std::string(key) + " has a bad entry");
        out.push_back(*v);
    }
    return out;
}

Point get_point(const toml::table& tbl, std::string_view section, std::string_view key, Point fallback) {
    const auto vals = get_list<double>(tbl, section, key);
    if (vals.empty()) return fallback;
    if (vals.size() > static_cast<std::size_t>(kMaxDim)) throw ValidationError(std::string(key) + " has too many entries");
    Point p{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < vals.size(); ++i) p[i] = vals[i];
    return p;
}

SpaceFunction expression_from(const toml::table& tbl, std::string_view section, int d, const std::string& fallback) {
    ExpressionParams params;
    params.center = get_point(tbl, section, "center", params.center);
    params.width = get(tbl, section, "width", params.width);
    params.scale = get(tbl, section, "scale", params.scale);
    return make_expression(get(tbl, section, "expression", fallback), d, params);
}

RunningCost cost_from(const toml::table& tbl, const std::string& kind, double alpha, int d) {
    if (kind == "quadratic") {
        QuadraticCost c;
        c.alpha = alpha;
        const auto drift = get_list<double>(tbl, "cost", "drift");
        if (!drift.empty()) {
            if (drift.size() != static_cast<std::size_t>(d)) throw ValidationError("cost.drift needs d entries");
            Vec b{0.0, 0.0, 0.0};
            for (int i = 0; i < d; ++i) b[i] = drift[i];
            c.drift = [b](double, const Point&) { return b; };
        }
        const double offset = get(tbl, "cost", "offset", 0.0);
        if (offset != 0.0) c.offset = [offset](double, const Point&) { return offset; };
        return c;
    }
    GenericCost c;
    c.alpha = alpha;
    const double beta = get(tbl, "cost", "beta", kind == "quartic" ? 0.1 : 1.0);
    if (!(beta >= 0.0)) throw ValidationError("cost.beta must be nonnegative");
    if (kind == "quartic") {
        // (alpha/2)|v|^2 + beta |v|^4
        c.value = [alpha, beta](double, const Point&, std::span<const double> v) {
            double s = 0.0;
            for (double a : v) s += a * a;
            return 0.5 * alpha * s + beta * s * s;
        };
        c.gradient = [alpha, beta](double, const Point&, std::span<const double> v, std::span<double> g) {
            double s = 0.0;
            for (double a : v) s += a * a;
            for (std::size_t i = 0; i < v.size(); ++i) g[i] = alpha * v[i] + 4.0 * beta * s * v[i];
        };
        c.inner_lipschitz = alpha + 12.0 * beta * 9.0;
        return c;
    }
    if (kind == "double_well") {
        // beta sum_i (v_i^2 - 1)^2: not convex; `alpha` is a false declaration used to
        // exercise the axiom checker.
        c.value = [beta](double, const Point&, std::span<const double> v) {
            double s = 0.0;
            for (double a : v) s += beta * (a * a - 1.0) * (a * a - 1.0);
            return s;
        };
        c.gradient = [beta](double, const Point&, std::span<const double> v, std::span<double> g) {
            for (std::size_t i = 0; i < v.size(); ++i) g[i] = 4.0 * beta * v[i] * (v[i] * v[i] - 1.0);
        };
        c.inner_lipschitz = 20.0 * beta + alpha;
        return c;
    }
    throw ValidationError("unknown cost.kind '" + kind + "' (quadratic | quartic | double_well)");
}

Coupling coupling_from(const toml::table& tbl, int d) {
    const std::string kind = get<std::string>(tbl, "coupling", "kind", "local");
    const double scale = get(tbl, "coupling", "scale", 1.0);
    if (!(scale >= 0.0)) throw ValidationError("coupling.scale must be nonnegative");
    if (kind == "local") {
        const std::string fn = get<std::string>(tbl, "coupling", "function", "identity");
        if (fn == "identity") return LocalCoupling{[scale](double m) { return scale * m; }};
        if (fn == "zero") return LocalCoupling{[](double) { return 0.0; }};
        if (fn == "log") return LocalCoupling{[scale](double m) { return scale * std::log(std::max(m, 1e-300)); }};
        throw ValidationError("unknown coupling.function '" + fn + "' (identity | zero | log)");
    }
    if (kind == "nonlocal") {
        const std::string k = get<std::string>(tbl, "coupling", "kernel", "gaussian");
        if (k == "constant") return NonlocalCoupling{[scale](const Point&) { return scale; }};
        if (k == "gaussian") {
            ExpressionParams p;
            p.center = {0.0, 0.0, 0.0};
            p.width = get(tbl, "coupling", "width", 0.1);
            p.scale = scale;
            return NonlocalCoupling{make_expression("gaussian_bump", d, p)};
        }
        throw ValidationError("unknown coupling.kernel '" + k + "' (constant | gaussian)");
    }
    throw ValidationError("unknown coupling.kind '" + kind + "' (local | nonlocal)");
}

void apply_problem_sections(const toml::table& tbl, RunConfig& cfg) {
    cfg.d = get(tbl, "grid", "d", cfg.d);
    cfg.n = get(tbl, "grid", "n", cfg.n);
    cfg.steps = get(tbl, "grid", "steps", cfg.steps);
    cfg.theta = get(tbl, "grid", "theta", cfg.theta);
    cfg.sigma = get(tbl, "grid", "sigma", cfg.sigma);
    if (cfg.d < 1 || cfg.d > kMaxDim) throw ValidationError("grid.d must be in [1, 3]");
    if (cfg.n < 2) throw ValidationError("grid.n must be >= 2");
    if (cfg.steps < 0) throw ValidationError("grid.steps must be >= 0");

    const double alpha = get(tbl, "cost", "alpha", 1.0);
    cfg.cost_kind = get<std::string>(tbl, "cost", "kind", "quadratic");
    ProblemSpec& s = cfg.spec;
    s.alpha = alpha;
    s.running_cost = cost_from(tbl, cfg.cost_kind, alpha, cfg.d);
    s.coupling = coupling_from(tbl, cfg.d);
    s.terminal_cost = expression_from(tbl, "terminal", cfg.d, "zero");
    s.initial_density = expression_from(tbl, "initial", cfg.d, "uniform");
    s.L_ell = get(tbl, "constants", "L_ell", 0.0);
    s.L_f = get(tbl, "constants", "L_f", 0.0);
    s.L_g = get(tbl, "constants", "L_g", 0.0);
    if (tbl["constants"]["M"]) s.control_bound_override = get(tbl, "constants", "M", 0.0);
    s.quadrature_points = get(tbl, "constants", "quadrature_points", s.quadrature_points);
}

}  // namespace

int RunConfig::resolved_steps(int cells, double th) const {
    if (steps > 0 && cells == n && th == theta) return steps;
    return cfl_min_steps(d, cells, th, sigma);
}

Grid RunConfig::grid_for(int cells, int steps_override, double th) const {
    return Grid(d, cells, steps_override > 0 ? steps_override : resolved_steps(cells, th), th, sigma);
}

namespace {

void check_sections(const toml::table& tbl) {
    for (const auto& [key, node] : tbl) {
        const std::string k(key.str());
        if (std::find(kSections.begin(), kSections.end(), k) == kSections.end()) {
            throw ValidationError("unknown config section [" + k + "]");
        }
        if (!node.is_table()) throw ValidationError("config entry '" + k + "' must be a section");
    }
}

}  // namespace

RunConfig parse_config(std::string_view text, const std::string& base_dir) {
    const toml::table local = parse_toml(text);
    check_sections(local);

    RunConfig cfg;
    cfg.text = std::string(text);
    CampaignConfig& c = cfg.campaign;
    c.problem_path = get<std::string>(local, "campaign", "problem", "");
    toml::table tbl;
    if (!c.problem_path.empty()) {
        std::filesystem::path p(c.problem_path);
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        const std::string problem_text = read_file(p.string());
        tbl = parse_toml(problem_text);
        check_sections(tbl);
        cfg.text += "\n# problem: " + p.string() + "\n" + problem_text;
    }
    // Keys of the referencing file override those of the problem file.
    for (const auto& [section, node] : local) {
        if (!tbl.contains(section)) tbl.insert(section, toml::table{});
        toml::table& dst = *tbl[section].as_table();
        for (const auto& [key, value] : *node.as_table()) dst.insert_or_assign(key, value);
    }
    apply_problem_sections(tbl, cfg);

    SolveOptions& o = cfg.solve;
    const std::string damping = get<std::string>(tbl, "solver", "damping", "fictitious");
    if (damping == "fictitious") {
        o.damping = Damping::fictitious();
    } else if (damping == "fixed") {
        o.damping = Damping::fixed(get(tbl, "solver", "omega", 0.5));
    } else if (damping == "plain") {
        o.damping = Damping::plain();
    } else {
        throw ValidationError("unknown solver.damping '" + damping + "' (fictitious | fixed | plain)");
    }
    const std::string init = get<std::string>(tbl, "solver", "init", "uniform");
    if (init == "uniform") {
        o.init = InitKind::Uniform;
    } else if (init == "diffusion_only") {
        o.init = InitKind::DiffusionOnly;
    } else if (init == "random") {
        o.init = InitKind::Random;
    } else {
        throw ValidationError("unknown solver.init '" + init + "' (uniform | diffusion_only | random)");
    }
    o.max_outer = get(tbl, "solver", "max_outer", o.max_outer);
    o.seed = get<std::uint64_t>(tbl, "solver", "seed", 0);
    o.override_cfl = get(tbl, "solver", "override_cfl", false);
    o.tol = get(tbl, "tolerances", "solver", o.tol);
    cfg.hamiltonian_tolerance = get(tbl, "tolerances", "hamiltonian", cfg.hamiltonian_tolerance);
    o.validate();

    c.kind = get<std::string>(tbl, "campaign", "kind", c.kind);
    c.levels = get_list<int>(tbl, "campaign", "levels");
    c.reference = get(tbl, "campaign", "reference", 0);
    c.thetas = get_list<double>(tbl, "campaign", "thetas");
    c.seeds = get_list<std::uint64_t>(tbl, "campaign", "seeds");
    c.magnitudes = get_list<double>(tbl, "campaign", "magnitudes");
    c.samples = get<std::size_t>(tbl, "campaign", "samples", c.samples);
    c.output_dir = get<std::string>(tbl, "campaign", "output", "");
    for (std::size_t i = 1; i < c.levels.size(); ++i) {
        if (c.levels[i] <= c.levels[i - 1]) throw ValidationError("campaign.levels must be strictly increasing");
    }
    if (c.reference > 0) {
        for (int lv : c.levels) {
            if (lv >= c.reference || c.reference % lv != 0) {
                throw ValidationError("campaign.reference must be a strict multiple of every level");
            }
        }
    }
    cfg.hash = fnv1a64(cfg.text);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    const std::string dir = std::filesystem::path(path).parent_path().string();
    return parse_config(read_file(path), dir.empty() ? "." : dir);
}

DiscreteProblem make_problem(const RunConfig& cfg, const Grid& grid) {
    if (!cfg.cost_is_convex()) {
        throw ValidationError("cost.kind '" + cfg.cost_kind + "' is not strongly convex; only check-numham accepts it");
    }
    DiscreteProblem problem(cfg.spec, grid);
    problem.hamiltonian_options().tolerance = cfg.hamiltonian_tolerance;
    return problem;
}

}  // namespace mfg
