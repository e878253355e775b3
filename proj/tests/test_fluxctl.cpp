#include "doctest.h"
#include "msdl/error.hpp"
#include "msdl/fluxctl.hpp"

#include <cmath>
#include <numbers>

using namespace msdl;

namespace {
const AnnularDomain L = AnnularDomain::make(0.5, 2.0);
const AnnularDomain K = AnnularDomain::make(0.7, 1.4);
const double pi = std::numbers::pi;

FluxConfig config() {
    FluxConfig cfg;
    cfg.K = K;
    return cfg;
}

FluxClass cat_flux(double c) { return FluxClass{{{0.0, 0.0, c}}}; }
} // namespace

TEST_CASE("flux pairs") {
    using P = std::vector<std::pair<int, int>>;
    CHECK(flux_pairs(3) == P{{0, 1}, {2, 0}});
    CHECK(flux_pairs(4) == P{{0, 1}, {2, 3}});
    CHECK(flux_pairs(5) == P{{0, 1}, {2, 3}, {4, 0}});
}

TEST_CASE("identity target") {
    auto grid = uniform_grid(1, 1, 3, {});
    std::vector<WeierstrassData> fam(grid.size(), catenoid(L));
    auto C = homology_basis(K);
    auto res = prescribe_flux(grid, fam, current_flux(fam, C), config());
    CHECK(res.ok);
    for (std::size_t d = 0; d < fam.size(); ++d) {
        CHECK(res.points[d].newton_iterations == 0);
        for (int j = 0; j < 3; ++j) CHECK(res.members[d].phi[j].coeffs() == fam[d].phi[j].coeffs());
    }
}

TEST_CASE("catenoid flux doubled linearly in t") {
    auto grid = uniform_grid(1, 1, 5, {});
    std::vector<WeierstrassData> fam(grid.size(), catenoid(L));
    auto target = linear_flux_target(grid, cat_flux(2 * pi), cat_flux(4 * pi));
    auto res = prescribe_flux(grid, fam, target, config());
    CHECK(res.ok);
    auto C = homology_basis(K);
    for (std::size_t d = 0; d < fam.size(); ++d) {
        double t = grid.t_values[grid.t_of(static_cast<int>(d))];
        // independent oracle: trapezoid sum on the unit circle
        const int N = 4096;
        for (int j = 0; j < 3; ++j) {
            cplx s = 0.0;
            for (int q = 0; q < N; ++q) {
                cplx z = std::polar(1.0, 2 * pi * q / N);
                s += res.members[d].phi[j](z) * z * cplx(0, 2 * pi / N);
            }
            double want = j == 2 ? 2 * pi * (1 + t) : 0.0;
            CHECK(std::abs(s.imag() - want) < 1e-6);
            CHECK(std::abs(s.real()) < 1e-9);
        }
        CHECK(res.points[d].conformality < 1e-11);
        (void)C;
    }
    // t = 0 is a fixpoint
    for (int j = 0; j < 3; ++j) CHECK(res.members[0].phi[j].coeffs() == fam[0].phi[j].coeffs());
}

TEST_CASE("inconsistent and discontinuous targets") {
    auto grid = uniform_grid(1, 1, 3, {});
    std::vector<WeierstrassData> fam(grid.size(), catenoid(L));
    auto C = homology_basis(K);
    auto bad = linear_flux_target(grid, cat_flux(3 * pi), cat_flux(4 * pi));
    try {
        prescribe_flux(grid, fam, bad, config());
        FAIL("expected inconsistent-target");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InconsistentTarget);
    }
    auto jumpy = current_flux(fam, C);
    jumpy.per_point[2].per_curve[0][2] += 1.0;
    auto w = validate_flux_target(grid, fam, jumpy, C, 1e-9, 0.5);
    REQUIRE(w.size() == 1);
    CHECK(w[0].find("jumps") != std::string::npos);
}

TEST_CASE("four components and a Q row") {
    auto grid = uniform_grid(1, 2, 3, {0});
    std::vector<WeierstrassData> fam(grid.size(), catenoid4(L));
    FluxClass F0{{{0.0, 0.0, 2 * pi, 0.0}}}, F1{{{0.0, 0.0, 2 * pi, 1.0}}};
    auto target = linear_flux_target(grid, F0, F1);
    for (std::size_t t = 0; t < grid.t_count(); ++t) target.per_point[grid.flat(0, t)] = F0;
    auto res = prescribe_flux(grid, fam, target, config());
    // phi_4 = 0 makes f = g on the pair (3,4), which fails independence
    CHECK_FALSE(res.ok);
    CHECK(res.points[grid.flat(1, 2)].error.find("(2,3) fails independence") != std::string::npos);
    for (std::size_t t = 0; t < grid.t_count(); ++t)
        for (int j = 0; j < 4; ++j) CHECK(res.members[grid.flat(0, t)].phi[j].coeffs() == fam[0].phi[j].coeffs());

    // the catenoid rotated in the (2,4) plane has both pairs independent
    const double c = std::cos(0.3), s = std::sin(0.3);
    auto w = catenoid4(L);
    w.phi[3] = w.phi[1] * s;
    w.phi[1] = w.phi[1] * c;
    std::vector<WeierstrassData> fam2(grid.size(), w);
    FluxClass G0{{{0.0, 0.0, 2 * pi, 0.0}}}, G1{{{0.0, 0.5, 2 * pi, 1.0}}};
    auto target2 = linear_flux_target(grid, G0, G1);
    for (std::size_t t = 0; t < grid.t_count(); ++t) target2.per_point[grid.flat(0, t)] = G0;
    auto res2 = prescribe_flux(grid, fam2, target2, config());
    CHECK(res2.ok);
    auto F = flux(res2.members[grid.flat(1, 2)], homology_basis(K));
    for (int j = 0; j < 4; ++j) CHECK(std::abs(F.per_curve[0][j] - G1.per_curve[0][j]) < 1e-6);
    for (std::size_t t = 0; t < grid.t_count(); ++t)
        for (int j = 0; j < 4; ++j) CHECK(res2.members[grid.flat(0, t)].phi[j].coeffs() == w.phi[j].coeffs());
}
