#include "doctest.h"
#include "msdl/domain.hpp"
#include "msdl/error.hpp"

#include <cmath>

using namespace msdl;

TEST_CASE("build_exhaustion endpoints and geometric middle") {
    auto K0 = AnnularDomain::make(0.6, 1.8);
    auto L = AnnularDomain::make(0.5, 2.0);
    auto e1 = build_exhaustion(K0, L, 1);
    REQUIRE(e1.stages.size() == 2);
    CHECK(e1.stages[0].r_in == 0.6);
    CHECK(e1.stages[1].r_out == 2.0);
    auto e2 = build_exhaustion(K0, L, 2);
    REQUIRE(e2.stages.size() == 3);
    CHECK(e2.stages[1].r_in == doctest::Approx(0.5477225575051661).epsilon(1e-14));
    CHECK(e2.stages[1].r_out == doctest::Approx(1.8973665961010275).epsilon(1e-14));
    for (std::size_t j = 1; j < e2.stages.size(); ++j) CHECK(e2.stages[j].strictly_contains(e2.stages[j - 1]));
    CHECK(std::abs(e2.base_point) > K0.r_in);
    CHECK(std::abs(e2.base_point) < K0.r_out);
}

TEST_CASE("build_exhaustion rejects non-nested input") {
    auto K0 = AnnularDomain::make(0.6, 1.8);
    auto bad = AnnularDomain::make(0.7, 1.7);
    CHECK_THROWS_AS(build_exhaustion(K0, bad, 1), Error);
    try {
        build_exhaustion(K0, bad, 1);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidGeometry);
    }
}

TEST_CASE("urysohn weights") {
    auto g = uniform_grid(1, 3, 3, {});
    // d = p*3 + t; Y = {0}, Z = {8}
    auto phi = urysohn_weights(g, {0}, {8});
    CHECK(phi[0] == 0.0);
    CHECK(phi[8] == 1.0);
    // (p=0.5, t=0.5) is equidistant from (0,0) and (1,1)
    CHECK(phi[4] == doctest::Approx(0.5).epsilon(1e-15));
    for (double v : phi) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK_THROWS_AS(urysohn_weights(g, {1, 2}, {2}), Error);
}

TEST_CASE("urysohn weights are Lipschitz with constant 1/dist(Y,Z)") {
    auto g = uniform_grid(1, 5, 5, {});
    std::vector<int> Y{0, 1, 2}, Z{22, 23, 24};
    auto phi = urysohn_weights(g, Y, Z);
    double dyz = 1e9;
    for (int y : Y)
        for (int z : Z) dyz = std::min(dyz, g.distance(y, z));
    for (int a = 0; a < 25; ++a)
        for (int b = 0; b < 25; ++b)
            CHECK(std::abs(phi[a] - phi[b]) <= 2.0 * g.distance(a, b) / dyz + 1e-12);
}

TEST_CASE("sample_circle") {
    auto dom = AnnularDomain::make(0.5, 2.0);
    auto z = sample_circle(dom, 1.0, 4);
    CHECK(z[0] == cplx(1, 0));
    CHECK(z[1] == cplx(0, 1));
    CHECK(z[2] == cplx(-1, 0));
    CHECK(z[3] == cplx(0, -1));
    auto z8 = sample_circle(dom, 1.0, 8);
    CHECK(std::abs(z8[1] - std::polar(1.0, M_PI / 4)) < 1e-15);
    CHECK_THROWS_AS(sample_circle(dom, 2.0, 2), Error);
    CHECK_THROWS_AS(sample_circle(dom, 3.0, 8), Error);
}

TEST_CASE("grid validation and fixpoints") {
    auto g = uniform_grid(1, 3, 4, {0});
    g.validate();
    CHECK(g.is_fixpoint(g.flat(0, 2)));
    CHECK(g.is_fixpoint(g.flat(1, 0)));
    CHECK_FALSE(g.is_fixpoint(g.flat(1, 1)));
    g.T_chain = {{0, 1}};
    CHECK_THROWS_AS(g.validate(), Error);
}
