#include "doctest.h"
#include "msdl/deform.hpp"
#include "msdl/error.hpp"

#include <cmath>
#include <numbers>

using namespace msdl;

namespace {
const AnnularDomain L = AnnularDomain::make(0.5, 2.0);
const AnnularDomain K = AnnularDomain::make(0.7, 1.4);
const double pi = std::numbers::pi;
const cplx I(0, 1);

bool same_data(const WeierstrassData& a, const WeierstrassData& b) {
    if (a.n() != b.n()) return false;
    for (int j = 0; j < a.n(); ++j)
        if (a.phi[j].coeffs() != b.phi[j].coeffs()) return false;
    return true;
}

DeformConfig small_config() {
    DeformConfig cfg;
    cfg.K = K;
    cfg.Lambda = 10.0;
    cfg.eps = 0.1;
    cfg.star_trials = 200;
    return cfg;
}
} // namespace

TEST_CASE("lopez ros identity") {
    auto w = catenoid(L);
    auto r = lopez_ros(w, Laurent::constant(L, 1.0), 0, 1);
    CHECK(same_data(r.data, w));
    CHECK(r.period_residual == 0.0);
}

TEST_CASE("lopez ros constant h") {
    auto w = catenoid(L);
    auto r = lopez_ros(w, Laurent::constant(L, 2.0), 0, 1);
    // psi_1 = (2 z^-2 - 1/2)/2, psi_2 = (i/2)(2 z^-2 + 1/2)
    CHECK(std::abs(r.data.phi[0].coeff(-2) - 1.0) < 1e-15);
    CHECK(std::abs(r.data.phi[0].coeff(0) + 0.25) < 1e-15);
    CHECK(std::abs(r.data.phi[1].coeff(-2) - I) < 1e-15);
    CHECK(std::abs(r.data.phi[1].coeff(0) - 0.25 * I) < 1e-15);
    CHECK(r.data.phi[2].coeffs() == w.phi[2].coeffs());
    auto C = homology_basis(K);
    auto F = flux(r.data, C);
    CHECK(std::abs(F.per_curve[0][0]) < 1e-12);
    CHECK(std::abs(F.per_curve[0][1]) < 1e-12);
    CHECK(std::abs(F.per_curve[0][2] - 2 * pi) < 1e-12);
    CHECK(conformality_residual(r.data) < 1e-12);
}

TEST_CASE("lopez ros inexact periods") {
    auto w = catenoid(L);
    // f = z^-2, so f (1 + c z) adds the residue c
    auto h = Laurent::constant(L, 1.0) + Laurent::monomial(L, 1, 0.1);
    try {
        lopez_ros(w, h, 0, 1);
        FAIL("expected inexact-periods");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InexactPeriods);
    }
    auto r = lopez_ros(w, h, 0, 1, {false, 1e-9, 1e-13});
    CHECK(std::abs(r.period_residual - 2 * pi * 0.1) < 1e-10);
}

TEST_CASE("certify boundary distance clauses") {
    auto w = catenoid(L);
    auto sp = spinor_split(w, 0, 1);
    AnnulusCertificate c;
    c.A = AnnularDomain::make(1.45, 1.95);
    c.lambda = 0.01;
    c.rho = 0.9 / (1.95 * 1.95);
    c.threshold = 2.0 * std::sqrt(2.0) * 10.0 / std::sqrt(c.rho);
    c.lab = build_labyrinth(c.A, c.threshold, c.lambda, 0.2).lab;
    c.sigma = 0.5 / (1.95 * 1.95);
    c.h_required = std::sqrt(2.0) * 2.0 * 10.0 / (c.lambda * c.sigma);

    // h = 1 fails clause (v) only
    AnnulusCertificate c1 = c;
    try {
        certify_boundary_distance(w, 0, 1, sp.f, Laurent::constant(L, 1.0), c1, 200, 7);
        FAIL("expected no-certificate");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoCertificate);
        CHECK(std::string(e.what()).find("v:|h|>h_required") != std::string::npos);
        CHECK(std::string(e.what()).find("varrho") == std::string::npos);
    }
    CHECK(std::abs(c1.h_min - 1.0) < 1e-15);
    CHECK(std::abs(c1.psi_min - 1.0 / (1.95 * 1.95)) < 1e-12);

    // rho above min |Psi| on A
    AnnulusCertificate c2 = c;
    c2.rho = 1.0;
    try {
        certify_boundary_distance(w, 0, 1, sp.f, Laurent::constant(L, 1.0), c2, 200, 7);
        FAIL("expected no-certificate");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoCertificate);
        CHECK(std::string(e.what()).find("varrho") != std::string::npos);
    }

    // a large constant h meets every clause; the bound is then the case-1 value 2 Lambda
    AnnulusCertificate c3 = c;
    double b = certify_boundary_distance(w, 0, 1, sp.f, Laurent::constant(L, 2.0 * c.h_required), c3, 200, 7);
    CHECK(c3.valid);
    CHECK(std::abs(b - 20.0) < 1e-9);
}

TEST_CASE("estimate distance flat metric") {
    Immersion im{flat(L), 1.0, {}};
    double e = estimate_distance(im, 64, 512);
    CHECK(std::abs(e - 0.5) < 0.025);
    double coarse = estimate_distance(im, 32, 256);
    CHECK(e <= coarse * 1.01);
    CHECK_THROWS_AS(estimate_distance(im, 8, 64), Error);
    // catenoid: speed (|z|^-2 + 1)/2 ... integrated radially to the inner circle
    Immersion cat{catenoid(L), 1.0, {}};
    double radial = 0.0;
    for (int i = 0; i < 20000; ++i) {
        double r = 1.0 - (i + 0.5) * 0.5 / 20000;
        radial += induced_speed(cat.data, r) * 0.5 / 20000;
    }
    double ec = estimate_distance(cat, 64, 512);
    CHECK(ec <= radial * 1.01);
    CHECK(ec >= radial * 0.9);
}

TEST_CASE("sup change on K") {
    auto w = catenoid(L);
    CHECK(sup_change_on(w, w, K, 1.0) == 0.0);
    auto w2 = w;
    w2.phi[2] = w2.phi[2] + Laurent::constant(L, 0.01);
    // Re int_1^z 0.01 dz = 0.01 (Re z - 1); the half-shifted node nearest -1.4 sits at angle 0.98 pi
    CHECK(std::abs(sup_change_on(w, w2, K, 1.0, 10, 50) - 0.01 * (1.0 + 1.4 * std::cos(0.02 * pi))) < 1e-12);
}

TEST_CASE("increase distance fixpoints") {
    auto grid = uniform_grid(1, 2, 3, {0, 1});
    std::vector<WeierstrassData> fam(grid.size(), catenoid(L));
    auto res = increase_distance(grid, fam, small_config());
    for (std::size_t d = 0; d < fam.size(); ++d) CHECK(same_data(res.members[d], fam[d]));
    CHECK(res.ok);

    auto g2 = uniform_grid(1, 2, 3, {0});
    auto r2 = increase_distance(g2, fam, small_config());
    for (std::size_t p = 0; p < g2.p_count(); ++p) CHECK(same_data(r2.members[g2.flat(p, 0)], fam[0]));
    for (std::size_t t = 0; t < g2.t_count(); ++t) CHECK(same_data(r2.members[g2.flat(0, t)], fam[0]));
}

TEST_CASE("increase distance certifies the catenoid family") {
    auto grid = uniform_grid(1, 2, 3, {});
    std::vector<WeierstrassData> fam(grid.size(), catenoid(L));
    auto cfg = small_config();
    auto res = increase_distance(grid, fam, cfg);
    auto C = homology_basis(K);
    for (std::size_t d = 0; d < fam.size(); ++d) {
        const auto& pr = res.points[d];
        auto F = flux(res.members[d], C);
        CHECK(std::abs(F.per_curve[0][2] - 2 * pi) < 1e-8);
        CHECK(pr.sup_change_K < 0.1);
        if (pr.gated) {
            CHECK(pr.certified);
            CHECK(pr.cert.certified_bound > 10.0);
        }
    }
}
