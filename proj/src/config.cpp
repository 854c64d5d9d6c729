#include "halfharmonic/config.hpp"

#include "halfharmonic/errors.hpp"
#include "halfharmonic/linops.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <map>
#include <set>

namespace hh {

namespace pt = boost::property_tree;

NoiseSpec NoiseConfig::spec() const {
    NoiseSpec n = default_noise(epsilon, q);
    if (family == "reversed") {
        const double e = epsilon;
        n.profile = [e](double r) { return Vec2{0.0, e * r * r / (1.0 + r * r)}; };
    }
    return n;
}

RunConfig default_config() {
    RunConfig c;
    c.flow.t_end = 30.0;
    c.flow.stride = 200;
    c.flow.keep_states = false;
    return c;
}

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"grid", {"L", "N"}},
        {"verify", {"L", "N"}},
        {"flow", {"dt", "t_end", "scheme", "renormalize", "stride"}},
        {"initial", {"kind", "mu", "xi"}},
        {"noise", {"enabled", "epsilon", "q", "family"}},
        {"gluing", {"t0", "rho", "sigma", "alpha", "dt", "t_end", "outer_L", "outer_N", "include_phi0", "cross_check"}},
        {"output", {"dir", "dump_stride"}},
    };
    return s;
}

template <class T>
T get(const pt::ptree& sec, const std::string& section, const std::string& key, T fallback) {
    const auto v = sec.get_optional<std::string>(key);
    if (!v) return fallback;
    try {
        return sec.get<T>(key);
    } catch (const pt::ptree_error&) {
        throw ConfigError("config: cannot parse " + section + "." + key + " = '" + *v + "'");
    }
}

bool get_bool(const pt::ptree& sec, const std::string& section, const std::string& key, bool fallback) {
    const auto v = sec.get_optional<std::string>(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError("config: " + section + "." + key + " must be a boolean, got '" + *v + "'");
}

}  // namespace

RunConfig parse_config(std::istream& is) {
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    for (const auto& [name, sec] : tree) {
        const auto it = schema().find(name);
        if (it == schema().end()) throw ConfigError("config: unknown section [" + name + "]");
        if (!sec.data().empty()) throw ConfigError("config: key '" + name + "' outside any section");
        for (const auto& [key, val] : sec) {
            if (!it->second.count(key)) throw ConfigError("config: unknown key " + name + "." + key);
            if (!val.empty()) throw ConfigError("config: nested key under " + name + "." + key);
        }
    }
    RunConfig c = default_config();
    const pt::ptree empty;
    auto section = [&](const char* name) -> const pt::ptree& {
        const auto s = tree.get_child_optional(name);
        return s ? *s : empty;
    };
    try {
        const auto& g = section("grid");
        c.grid = make_grid(get<double>(g, "grid", "L", c.grid.L), get<long long>(g, "grid", "N", (long long)c.grid.N));
        const auto& v = section("verify");
        c.verify_grid = make_grid(get<double>(v, "verify", "L", c.verify_grid.L),
                                  get<long long>(v, "verify", "N", (long long)c.verify_grid.N));

        const auto& f = section("flow");
        c.flow.dt = get<double>(f, "flow", "dt", c.flow.dt);
        c.flow.t_end = get<double>(f, "flow", "t_end", c.flow.t_end);
        c.flow.scheme = parse_scheme(get<std::string>(f, "flow", "scheme", to_string(c.flow.scheme)));
        c.flow.renormalize = get_bool(f, "flow", "renormalize", c.flow.renormalize);
        const long long stride = get<long long>(f, "flow", "stride", (long long)c.flow.stride);
        if (stride < 1) throw ConfigError("config: flow.stride must be at least 1");
        c.flow.stride = static_cast<std::size_t>(stride);
        validate(c.flow);

        const auto& in = section("initial");
        const std::string kind = get<std::string>(in, "initial", "kind", "noisy_bubble");
        if (kind == "constant")
            c.initial.kind = InitialKind::constant;
        else if (kind == "bubble")
            c.initial.kind = InitialKind::bubble;
        else if (kind == "noisy_bubble")
            c.initial.kind = InitialKind::noisy_bubble;
        else
            throw ConfigError("config: unknown initial.kind '" + kind + "'");
        c.initial.bubble.mu = get<double>(in, "initial", "mu", 1.0);
        c.initial.bubble.xi = get<double>(in, "initial", "xi", 0.0);
        if (!(c.initial.bubble.mu > 0.0)) throw ConfigError("config: initial.mu must be positive");

        const auto& n = section("noise");
        c.noise.enabled = get_bool(n, "noise", "enabled", c.noise.enabled);
        c.noise.epsilon = get<double>(n, "noise", "epsilon", c.noise.epsilon);
        c.noise.q = get<double>(n, "noise", "q", c.noise.q);
        c.noise.family = get<std::string>(n, "noise", "family", c.noise.family);
        if (c.noise.family != "default" && c.noise.family != "reversed")
            throw ConfigError("config: unknown noise.family '" + c.noise.family + "'");
        if (c.noise.enabled && !(c.noise.epsilon > 0.0)) throw ConfigError("config: noise.epsilon must be positive");

        const auto& gl = section("gluing");
        GluingConfig& G = c.gluing;
        G.t0 = get<double>(gl, "gluing", "t0", G.t0);
        G.rho = get<double>(gl, "gluing", "rho", G.rho);
        G.sigma = get<double>(gl, "gluing", "sigma", G.sigma);
        G.alpha = get<double>(gl, "gluing", "alpha", G.alpha);
        G.dt = get<double>(gl, "gluing", "dt", G.dt);
        G.t_end = get<double>(gl, "gluing", "t_end", G.t_end);
        G.outer_L = get<double>(gl, "gluing", "outer_L", G.outer_L);
        G.outer_N = get<long long>(gl, "gluing", "outer_N", G.outer_N);
        G.include_phi0 = get_bool(gl, "gluing", "include_phi0", G.include_phi0);
        c.cross_check = get_bool(gl, "gluing", "cross_check", c.cross_check);
        validate(G);

        const auto& o = section("output");
        c.out_dir = get<std::string>(o, "output", "dir", c.out_dir);
        const long long ds = get<long long>(o, "output", "dump_stride", 0);
        if (ds < 0) throw ConfigError("config: output.dump_stride must be nonnegative");
        c.dump_stride = static_cast<std::size_t>(ds);
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    return parse_config(is);
}

SphereMapField initial_map(const RunConfig& cfg) {
    const GridSpec& g = cfg.grid;
    if (cfg.initial.kind == InitialKind::constant)
        return SphereMapField(g, std::vector<double>(g.N, omega_infinity.a), std::vector<double>(g.N, omega_infinity.b));
    const LinearizedAt L{cfg.initial.bubble, g};
    const SphereMapField U = L.bubble();
    if (cfg.initial.kind == InitialKind::bubble || !cfg.noise.enabled) return U;
    const NoiseSpec n = cfg.noise.spec();
    const Field2 z = sample2(
        [&n](double x, double& a, double& b) {
            const Vec2 v = n(x);
            a = v.a;
            b = v.b;
        },
        g);
    const TangentField P = project_tangent(L, z);
    const ScalarField a = normal_correction(P);
    std::vector<double> u1(g.N), u2(g.N);
    for (std::size_t i = 0; i < g.N; ++i) {
        u1[i] = (1.0 + a.values[i]) * U.u1[i] + P.v1[i];
        u2[i] = (1.0 + a.values[i]) * U.u2[i] + P.v2[i];
    }
    return SphereMapField(g, std::move(u1), std::move(u2), true);
}

}  // namespace hh
