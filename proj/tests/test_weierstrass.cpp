#include "doctest.h"
#include "msdl/error.hpp"
#include "msdl/weierstrass.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace msdl;

namespace {
const AnnularDomain A = AnnularDomain::make(0.5, 2.0);
const double pi = std::numbers::pi;
const cplx I(0, 1);

double sup_diff(const Laurent& a, const Laurent& b) {
    double m = 0;
    for (double r : {0.5, 0.8, 1.0, 1.5, 2.0})
        for (int q = 0; q < 64; ++q) {
            cplx z = std::polar(r, 2 * pi * (q + 0.5) / 64);
            m = std::max(m, std::abs(a.eval_unchecked(z) - b.eval_unchecked(z)));
        }
    return m;
}

WeierstrassData spinor_data(std::uint64_t seed) {
    // random spinor pair (f, g) with phi_3 = sqrt(-fg) realised by f = s^2 h, g = -t^2 / h
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    Laurent s(A, 2), t(A, 2);
    for (int k = -2; k <= 2; ++k) {
        s.set(k, {u(rng), u(rng)});
        t.set(k, {u(rng), u(rng)});
    }
    s.set(0, 1.0);
    auto f = product(s, s), g = product(t, t) * cplx(-1);
    auto [pa, pb] = spinor_join(f, g);
    return make_data(A, {pa, pb, product(s, t)});
}
} // namespace

TEST_CASE("conformality residual") {
    CHECK(conformality_residual(catenoid(A)) < 1e-14);
    auto w = make_data(A, {Laurent::constant(A, 1.0), Laurent(A, 0), Laurent(A, 0)});
    CHECK(std::abs(conformality_residual(w) - 1.0) < 1e-15);
    CHECK(conformality_residual(spinor_data(3)) < 1e-12);
}

TEST_CASE("flux") {
    auto C = homology_basis(A);
    auto F = flux(catenoid(A), C);
    REQUIRE(F.per_curve.size() == 1);
    CHECK(std::abs(F.per_curve[0][0]) < 1e-12);
    CHECK(std::abs(F.per_curve[0][1]) < 1e-12);
    CHECK(std::abs(F.per_curve[0][2] - 2 * pi) < 1e-12);

    auto Fz = flux(flat(A), C);
    for (double v : Fz.per_curve[0]) CHECK(std::abs(v) < 1e-13);

    // López-Ros with h = 2 on the first pair: psi1 = (2 z^-2 - 1/2)/2, psi2 = (i/2)(2 z^-2 + 1/2)
    auto w = catenoid(A);
    w.phi[0] = Laurent::from_map(A, {{-2, 1.0}, {0, -0.25}});
    w.phi[1] = Laurent::from_map(A, {{-2, I}, {0, 0.25 * I}});
    auto F2 = flux(w, C);
    CHECK(std::abs(F2.per_curve[0][2] - 2 * pi) < 1e-12);
    CHECK(std::abs(F2.per_curve[0][0]) < 1e-12);

    auto bad = make_data(A, {Laurent::monomial(A, -1), Laurent::monomial(A, -1) * I, Laurent(A, 0)});
    CHECK_THROWS_AS(flux(bad, C), Error);
}

TEST_CASE("integrate immersion") {
    Immersion im{catenoid(A), 1.0, {0.1, -0.2, 0.3}};
    auto u0 = integrate_immersion(im, 1.0);
    for (int j = 0; j < 3; ++j) CHECK(u0[j] == im.base_value[j]);

    // catenoid: u3 = log|z| (Re of int z^-1 dz)
    auto u = integrate_immersion(im, cplx(1.5, 0.4));
    CHECK(std::abs(u[2] - 0.3 - std::log(std::abs(cplx(1.5, 0.4)))) < 1e-12);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> rr(0.55, 1.95), th(-pi, pi);
    for (int k = 0; k < 20; ++k) {
        cplx z = std::polar(rr(rng), th(rng));
        auto a = integrate_immersion(im, z, PathOrder::RadialFirst);
        auto b = integrate_immersion(im, z, PathOrder::AngularFirst);
        for (int j = 0; j < 3; ++j) CHECK(std::abs(a[j] - b[j]) < 1e-9);
        Primitive P(im.data, im.x0, im.base_value);
        auto c = P(z);
        for (int j = 0; j < 3; ++j) CHECK(std::abs(a[j] - c[j]) < 1e-9);
    }
    // full loop displacement is the real period
    auto C = homology_basis(A);
    auto per = periods(catenoid(A), C);
    for (const auto& p : per[0]) CHECK(std::abs(p.real()) < 1e-9);
}

TEST_CASE("spinor split") {
    auto sp = spinor_split(catenoid(A), 0, 1);
    CHECK(sup_diff(sp.f, Laurent::monomial(A, -2)) < 1e-15);
    CHECK(sup_diff(sp.g, Laurent::constant(A, -1.0)) < 1e-15);
    CHECK(sup_diff(sp.Psi, Laurent::monomial(A, -2) * cplx(-1)) < 1e-15);

    for (std::uint64_t seed : {1, 2, 3}) {
        auto w = spinor_data(seed);
        for (auto [a, b] : {std::pair{0, 1}, {1, 2}, {0, 2}}) {
            auto s = spinor_split(w, a, b);
            CHECK(sup_diff(product(s.f, s.g), s.Psi) < 1e-12);
            auto [pa, pb] = spinor_join(s.f, s.g);
            CHECK(sup_diff(pa, w.phi[a]) < 1e-14);
            CHECK(sup_diff(pb, w.phi[b]) < 1e-14);
        }
    }
    auto fs = spinor_split(flat(A), 0, 1);
    CHECK(fs.f.is_constant(2.0));
    CHECK(fs.g.is_zero());
}

TEST_CASE("nonflat and full") {
    auto cat = catenoid(A);
    auto r = is_nonflat(cat);
    CHECK(r.ok);
    CHECK(r.rank == 3);
    // rank witness: values at z = 1 and z = 2
    auto v1 = cat.values(1.0), v2 = cat.values(2.0);
    CHECK(std::abs(v1[0]) < 1e-16);
    CHECK(std::abs(v1[1] - I) < 1e-16);
    CHECK(std::abs(v1[2] - 1.0) < 1e-16);
    CHECK(std::abs(v2[0] - (-0.375)) < 1e-16);
    CHECK(std::abs(v2[1] - 0.625 * I) < 1e-16);
    CHECK(std::abs(v2[2] - 0.5) < 1e-16);

    CHECK_FALSE(is_nonflat(make_data(A, {Laurent::constant(A, 3.0), Laurent::constant(A, 3.0 * I), Laurent(A, 0)})).ok);
    CHECK_FALSE(is_nonflat(make_data(A, {Laurent::monomial(A, 1), Laurent::monomial(A, 1) * I, Laurent(A, 0)})).ok);

    CHECK(is_full(cat));
    CHECK_FALSE(is_full(flat(A)));
    CHECK_FALSE(is_full(catenoid4(A)));

    // scaling invariance of the rank test
    auto sc = cat;
    for (auto& p : sc.phi) p = p * cplx(1e-6, 3e-6);
    CHECK(is_nonflat(sc).rank == 3);
}

TEST_CASE("perturb to full") {
    auto cat = catenoid(A);
    auto same = perturb_to_full(cat, 0.0, 1);
    for (int j = 0; j < 3; ++j)
        for (int k = -cat.phi[j].degree(); k <= cat.phi[j].degree(); ++k)
            CHECK(same.phi[j].coeff(k) == cat.phi[j].coeff(k));

    auto C = homology_basis(A);
    for (auto base : {flat(A), make_data(A, {Laurent::monomial(A, -2), Laurent::monomial(A, -2) * I, Laurent(A, 0)})}) {
        const double delta = 0.1;
        auto out = perturb_to_full(base, delta, 7);
        CHECK(is_full(out));
        for (int j = 0; j < 3; ++j) CHECK(sup_diff(out.phi[j], base.phi[j]) < delta);
        CHECK(conformality_residual(out) < 1e-10);
        auto p0 = periods(base, C), p1 = periods(out, C);
        for (int j = 0; j < 3; ++j) CHECK(std::abs(p0[0][j] - p1[0][j]) < 1e-9);
    }
    auto F0 = flux(cat, C), F1 = flux(perturb_to_full(cat, 1e-3, 3), C);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(F0.per_curve[0][j] - F1.per_curve[0][j]) < 1e-8);
}

TEST_CASE("induced speed") {
    auto cat = catenoid(A);
    CHECK(std::abs(induced_speed(cat, 1.0) - 1.0) < 1e-15);
    auto sc = cat;
    for (auto& p : sc.phi) p = p * cplx(2.5);
    CHECK(std::abs(induced_speed(sc, cplx(0.7, 0.9)) - 2.5 * induced_speed(cat, cplx(0.7, 0.9))) < 1e-13);

    auto w = spinor_data(9);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> rr(0.5, 2.0), th(-pi, pi);
    for (int k = 0; k < 200; ++k) {
        cplx z = std::polar(rr(rng), th(rng));
        double s = induced_speed(w, z);
        double sum = 0;
        for (auto v : w.values(z)) sum += std::norm(v);
        CHECK(std::abs(s * s - sum / 2) <= 1e-14 * sum);
        for (auto [a, b] : {std::pair{0, 1}, {1, 2}, {0, 2}}) {
            auto sp = spinor_split(w, a, b);
            CHECK(s * s >= std::abs(sp.Psi(z)) / 2 - 1e-14);
        }
    }
}

TEST_CASE("select pair") {
    auto cat = catenoid(A);
    auto pc = select_pair({cat});
    REQUIRE(pc.pair_of.size() == 1);
    CHECK(pc.pair_of[0] == std::pair{0, 1});

    std::vector<WeierstrassData> fam(6, cat);
    auto pc2 = select_pair(fam);
    CHECK(pc2.cover.size() == 1);
    CHECK(pc2.cover[0].size() == 6);

    fam.push_back(flat(A));
    CHECK_THROWS_AS(select_pair(fam), Error);
}

TEST_CASE("presets") {
    CHECK(preset("catenoid", A).n() == 3);
    CHECK(preset("catenoid4", A).n() == 4);
    CHECK(preset("flat", A).n() == 3);
    CHECK_THROWS_AS(preset("helicoid", A), Error);
    CHECK_THROWS_AS(make_data(A, {Laurent(A, 0), Laurent(A, 0)}), Error);
}
