#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "halfharmonic/config.hpp"
#include "halfharmonic/errors.hpp"

#include <cmath>
#include <sstream>

using namespace hh;

namespace {

RunConfig parse(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

}  // namespace

TEST_CASE("empty config gives the defaults") {
    const RunConfig c = parse("");
    CHECK(c.grid.L == 400.0);
    CHECK(c.grid.N == 65536);
    CHECK(c.verify_grid.L == 200.0);
    CHECK(c.verify_grid.N == 16384);
    CHECK(c.flow.t_end == 30.0);
    CHECK(c.noise.enabled);
    CHECK(c.noise.epsilon == 0.1);
    CHECK(c.gluing.t0 == 10.0);
    CHECK(c.initial.kind == InitialKind::noisy_bubble);
}

TEST_CASE("sections are read") {
    const RunConfig c = parse(
        "[grid]\nL = 50\nN = 1024\n"
        "[flow]\ndt = 0.01\nt_end = 2\nscheme = explicit-pv\nrenormalize = false\nstride = 5\n"
        "[initial]\nkind = bubble\nmu = 0.5\nxi = 1\n"
        "[noise]\nenabled = no\n"
        "[gluing]\nt0 = 5\ncross_check = true\n"
        "[output]\ndir = out\ndump_stride = 3\n");
    CHECK(c.grid.N == 1024);
    CHECK(c.flow.scheme == Scheme::explicit_pv);
    CHECK(!c.flow.renormalize);
    CHECK(c.flow.stride == 5);
    CHECK(c.initial.bubble.mu == 0.5);
    CHECK(!c.noise.enabled);
    CHECK(c.gluing.t0 == 5.0);
    CHECK(c.cross_check);
    CHECK(c.out_dir == "out");
    CHECK(c.dump_stride == 3);
}

TEST_CASE("malformed configs are rejected") {
    CHECK_THROWS_AS(parse("[grid]\nM = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse("[mesh]\nN = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse("[grid]\nN = many\n"), ConfigError);
    CHECK_THROWS_AS(parse("[grid]\nN = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse("[flow]\nscheme = leapfrog\n"), ConfigError);
    CHECK_THROWS_AS(parse("[flow]\nrenormalize = maybe\n"), ConfigError);
    CHECK_THROWS_AS(parse("[flow]\nstride = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse("[initial]\nkind = vortex\n"), ConfigError);
    CHECK_THROWS_AS(parse("[noise]\nepsilon = -1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[gluing]\nrho = -1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[grid\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/run.ini"), ConfigError);
}

TEST_CASE("initial maps lie on the circle") {
    for (const char* kind : {"constant", "bubble", "noisy_bubble"}) {
        const RunConfig c = parse(std::string("[grid]\nL = 50\nN = 512\n[initial]\nkind = ") + kind + "\n");
        const SphereMapField u = initial_map(c);
        for (std::size_t i = 0; i < u.grid.N; ++i)
            CHECK(std::hypot(u.u1[i], u.u2[i]) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("reversed noise flips the sign functional") {
    const RunConfig c = parse("[noise]\nfamily = reversed\n");
    CHECK_THROWS_AS(validate(c.noise.spec()), SignConditionError);
}

TEST_CASE("shipped default config matches the built-in defaults") {
    const RunConfig a = load_config(std::string(SOURCE_DIR) + "/configs/default.ini"), b = default_config();
    CHECK(a.grid == b.grid);
    CHECK(a.verify_grid == b.verify_grid);
    CHECK(a.flow.t_end == b.flow.t_end);
    CHECK(a.flow.stride == b.flow.stride);
    CHECK(a.noise.epsilon == b.noise.epsilon);
    CHECK(a.gluing.outer_N == b.gluing.outer_N);
}
