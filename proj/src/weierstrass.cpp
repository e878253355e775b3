#include "msdl/weierstrass.hpp"

#include "msdl/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace msdl {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx I(0.0, 1.0);

struct GaussLegendre {
    std::vector<double> x, w;
};

const GaussLegendre& gauss16() {
    static const GaussLegendre gl = [] {
        const int n = 16;
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
        for (int i = 1; i < n; ++i) J(i, i - 1) = J(i - 1, i) = i / std::sqrt(4.0 * i * i - 1.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
        GaussLegendre g;
        for (int i = 0; i < n; ++i) {
            g.x.push_back(es.eigenvalues()(i));
            g.w.push_back(2.0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i));
        }
        return g;
    }();
    return gl;
}

// Re int phi dz along z(s), s in [0,1], composite Gauss-Legendre
template <class Path, class Deriv>
void accumulate(const WeierstrassData& w, Path path, Deriv dpath, int panels, std::vector<double>& out) {
    const auto& gl = gauss16();
    for (int p = 0; p < panels; ++p) {
        double a = static_cast<double>(p) / panels, b = static_cast<double>(p + 1) / panels;
        for (std::size_t q = 0; q < gl.x.size(); ++q) {
            double s = 0.5 * (a + b) + 0.5 * (b - a) * gl.x[q];
            double wq = 0.5 * (b - a) * gl.w[q];
            cplx z = path(s), dz = dpath(s);
            for (int j = 0; j < w.n(); ++j) out[j] += wq * std::real(w.phi[j].eval_unchecked(z) * dz);
        }
    }
}

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
}

} // namespace

int WeierstrassData::degree() const {
    int m = 0;
    for (const auto& f : phi) m = std::max(m, f.degree());
    return m;
}

std::vector<cplx> WeierstrassData::values(cplx z) const {
    std::vector<cplx> v(phi.size());
    for (std::size_t j = 0; j < phi.size(); ++j) v[j] = phi[j].eval_unchecked(z);
    return v;
}

WeierstrassData make_data(const AnnularDomain& dom, std::vector<Laurent> phi) {
    if (phi.size() < 3) throw Error(ErrorKind::InvalidGeometry, "need n >= 3 components");
    for (const auto& f : phi)
        if (f.domain().r_in != dom.r_in || f.domain().r_out != dom.r_out)
            throw Error(ErrorKind::InvalidGeometry, "component domain mismatch");
    return {std::move(phi), dom};
}

WeierstrassData catenoid(const AnnularDomain& dom) {
    return make_data(dom, {Laurent::from_map(dom, {{-2, 0.5}, {0, -0.5}}),
                           Laurent::from_map(dom, {{-2, 0.5 * I}, {0, 0.5 * I}}),
                           Laurent::monomial(dom, -1, 1.0)});
}

WeierstrassData flat(const AnnularDomain& dom) {
    return make_data(dom, {Laurent::constant(dom, 1.0), Laurent::constant(dom, I), Laurent(dom, 0)});
}

WeierstrassData catenoid4(const AnnularDomain& dom) {
    auto w = catenoid(dom);
    w.phi.push_back(Laurent(dom, 0));
    return w;
}

WeierstrassData preset(const std::string& name, const AnnularDomain& dom) {
    if (name == "catenoid") return catenoid(dom);
    if (name == "flat") return flat(dom);
    if (name == "catenoid4") return catenoid4(dom);
    throw Error(ErrorKind::ConfigInvalid, "unknown preset '" + name + "'");
}

double conformality_residual(const WeierstrassData& w, int n_r, int n_theta) {
    const auto& dom = w.domain;
    double sup = 0.0;
    for (int i = 0; i < n_r; ++i) {
        double r = dom.is_disc() ? dom.r_out * (i + 1) / n_r : dom.r_in + dom.width() * i / (n_r - 1);
        std::vector<cplx> acc(n_theta, cplx(0.0));
        for (const auto& f : w.phi) {
            auto v = f.eval_circle(r, n_theta, 0.5);
            for (int j = 0; j < n_theta; ++j) acc[j] += v[j] * v[j];
        }
        for (const auto& a : acc) sup = std::max(sup, std::abs(a));
    }
    return sup;
}

double min_modulus(const WeierstrassData& w, int n_r, int n_theta) {
    const auto& dom = w.domain;
    double mn = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_r; ++i) {
        double r = dom.is_disc() ? dom.r_out * (i + 1) / n_r : dom.r_in + dom.width() * i / (n_r - 1);
        std::vector<double> acc(n_theta, 0.0);
        for (const auto& f : w.phi) {
            auto v = f.eval_circle(r, n_theta, 0.5);
            for (int j = 0; j < n_theta; ++j) acc[j] += std::norm(v[j]);
        }
        for (double a : acc) mn = std::min(mn, std::sqrt(a));
    }
    return mn;
}

std::vector<std::vector<cplx>> periods(const WeierstrassData& w, const HomologyBasis& C) {
    std::vector<std::vector<cplx>> P;
    for (const auto& c : C.curves) {
        std::vector<cplx> row;
        for (const auto& f : w.phi) row.push_back(contour_integral(f, c.radius, contour_nodes_for(f.degree())));
        P.push_back(row);
    }
    return P;
}

double real_period_residual(const WeierstrassData& w, const HomologyBasis& C) {
    double r = 0.0;
    for (const auto& row : periods(w, C))
        for (const auto& p : row) r = std::max(r, std::abs(p.real()));
    return r;
}

FluxClass flux(const WeierstrassData& w, const HomologyBasis& C, double period_tol) {
    FluxClass F;
    for (const auto& row : periods(w, C)) {
        std::vector<double> v;
        for (const auto& p : row) {
            if (std::abs(p.real()) > period_tol) {
                std::ostringstream os;
                os << "real period " << p.real() << " exceeds " << period_tol;
                throw Error(ErrorKind::IllDefinedImmersion, os.str());
            }
            v.push_back(p.imag());
        }
        F.per_curve.push_back(v);
    }
    return F;
}

std::vector<double> integrate_immersion(const Immersion& im, cplx z, PathOrder order) {
    const auto& w = im.data;
    if (!w.domain.contains(z)) throw Error(ErrorKind::InvalidGeometry, "path endpoint outside the domain");
    std::vector<double> out = im.base_value;
    out.resize(w.n(), 0.0);
    if (z == im.x0) return out;
    const double r0 = std::abs(im.x0), r1 = std::abs(z);
    const double a0 = std::arg(im.x0);
    const double da = wrap_angle(std::arg(z) - a0);
    const int panels = std::max(4, w.degree() / 2 + 2);
    auto radial = [&](double angle) {
        if (r1 == r0) return;
        accumulate(
            w, [&](double s) { return std::polar(r0 + (r1 - r0) * s, angle); },
            [&](double) { return std::polar(r1 - r0, angle); }, panels, out);
    };
    auto angular = [&](double r) {
        if (da == 0.0) return;
        accumulate(
            w, [&](double s) { return std::polar(r, a0 + da * s); },
            [&](double s) { return I * da * std::polar(r, a0 + da * s); }, panels, out);
    };
    if (order == PathOrder::RadialFirst) {
        radial(a0);
        angular(r1);
    } else {
        angular(r0);
        radial(a0 + da);
    }
    return out;
}

Primitive::Primitive(const WeierstrassData& w, cplx x0, std::vector<double> base_value)
    : x0_(x0), base_(std::move(base_value)) {
    base_.resize(w.n(), 0.0);
    for (const auto& f : w.phi) {
        Laurent P(f.domain(), f.degree() + 1);
        for (int k = -f.degree(); k <= f.degree(); ++k)
            if (k != -1) P.set(k + 1, f.coeff(k) / double(k + 1));
        res_.push_back(f.coeff(-1));
        P_x0_.push_back(P.eval_unchecked(x0));
        P_.push_back(std::move(P));
    }
}

std::vector<double> Primitive::operator()(cplx z) const {
    std::vector<double> out(base_);
    cplx lg(std::log(std::abs(z) / std::abs(x0_)), wrap_angle(std::arg(z) - std::arg(x0_)));
    for (std::size_t j = 0; j < P_.size(); ++j) out[j] += std::real(P_[j].eval_unchecked(z) - P_x0_[j] + res_[j] * lg);
    return out;
}

std::vector<std::vector<double>> Primitive::on_circle(double r, int N, double phase) const {
    std::vector<std::vector<double>> out(P_.size(), std::vector<double>(N));
    for (std::size_t j = 0; j < P_.size(); ++j) {
        auto v = P_[j].eval_circle(r, N, phase);
        for (int q = 0; q < N; ++q) {
            double ang = 2.0 * kPi * (q + phase) / N;
            cplx lg(std::log(r / std::abs(x0_)), wrap_angle(ang - std::arg(x0_)));
            out[j][q] = base_[j] + std::real(v[q] - P_x0_[j] + res_[j] * lg);
        }
    }
    return out;
}

Spinor spinor_split(const WeierstrassData& w, int a, int b) {
    if (a == b || a < 0 || b < 0 || a >= w.n() || b >= w.n())
        throw Error(ErrorKind::InvalidGeometry, "spinor pair must be two distinct components");
    Spinor s;
    s.f = w.phi[a] - I * w.phi[b];
    s.g = w.phi[a] + I * w.phi[b];
    s.Psi = Laurent(w.domain, 0);
    for (int j = 0; j < w.n(); ++j)
        if (j != a && j != b) s.Psi -= product(w.phi[j], w.phi[j]);
    return s;
}

std::pair<Laurent, Laurent> spinor_join(const Laurent& f, const Laurent& g) {
    return {0.5 * (f + g), (0.5 * I) * (f - g)};
}

std::vector<cplx> rank_sample_points(const AnnularDomain& dom, int count) {
    std::vector<cplx> z;
    const int n_r = 3;
    const int n_a = (count + n_r - 1) / n_r;
    for (int i = 0; i < n_r; ++i) {
        double r = dom.is_disc() ? dom.r_out * (i + 1) / n_r : dom.r_in + dom.width() * i / (n_r - 1);
        for (int k = 0; k < n_a; ++k) z.push_back(std::polar(r, 2.0 * kPi * (k + 0.37 * i + 0.11) / n_a));
    }
    return z;
}

RankResult value_rank(const WeierstrassData& w, double tol) {
    auto pts = rank_sample_points(w.domain, std::max(12, 4 * w.n()));
    Eigen::MatrixXcd M(pts.size(), w.n());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        auto v = w.values(pts[i]);
        for (int j = 0; j < w.n(); ++j) M(i, j) = v[j];
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    RankResult r;
    const auto& s = svd.singularValues();
    for (int i = 0; i < s.size(); ++i) r.singular_values.push_back(s(i));
    for (int i = 0; i < s.size(); ++i)
        if (s(0) > 0.0 && s(i) > tol * s(0)) ++r.rank;
    return r;
}

RankResult is_nonflat(const WeierstrassData& w, double tol) {
    auto r = value_rank(w, tol);
    r.ok = r.rank >= 2;
    return r;
}

bool is_full(const WeierstrassData& w, double tol) {
    return value_rank(w, tol).rank == w.n();
}

double induced_speed(const WeierstrassData& w, cplx z) {
    double s = 0.0;
    for (const auto& f : w.phi) s += std::norm(f.eval_unchecked(z));
    return std::sqrt(s / 2.0);
}

double pair_independence(const WeierstrassData& w, int a, int b) {
    auto s = spinor_split(w, a, b);
    auto pts = rank_sample_points(w.domain, std::max(12, 4 * w.n()));
    Eigen::MatrixXcd M(pts.size(), 2);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        M(i, 0) = s.f.eval_unchecked(pts[i]);
        M(i, 1) = s.g.eval_unchecked(pts[i]);
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    const auto& sv = svd.singularValues();
    return sv(0) > 0.0 ? sv(1) / sv(0) : 0.0;
}

PairCover select_pair(const std::vector<WeierstrassData>& family, double tol) {
    PairCover pc;
    if (family.empty()) return pc;
    const int n = family.front().n();
    std::vector<std::pair<int, int>> candidates;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) candidates.push_back({a, b});
    std::vector<std::vector<bool>> valid(family.size(), std::vector<bool>(candidates.size()));
    for (std::size_t d = 0; d < family.size(); ++d) {
        if (!is_nonflat(family[d]).ok)
            throw Error(ErrorKind::NonflatnessMargin, "family member " + std::to_string(d) + " is flat");
        bool any = false;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            valid[d][c] = pair_independence(family[d], candidates[c].first, candidates[c].second) > tol;
            any = any || valid[d][c];
        }
        if (!any)
            throw Error(ErrorKind::NonflatnessMargin,
                        "no spinor pair independent beyond margin at member " + std::to_string(d));
    }
    pc.pair_of.assign(family.size(), {-1, -1});
    std::vector<bool> assigned(family.size(), false);
    std::size_t left = family.size();
    while (left > 0) {
        std::size_t best = 0, best_count = 0;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            std::size_t cnt = 0;
            for (std::size_t d = 0; d < family.size(); ++d) cnt += (!assigned[d] && valid[d][c]);
            if (cnt > best_count) { best = c; best_count = cnt; }
        }
        std::vector<int> members;
        for (std::size_t d = 0; d < family.size(); ++d)
            if (!assigned[d] && valid[d][best]) {
                assigned[d] = true;
                pc.pair_of[d] = candidates[best];
                members.push_back(static_cast<int>(d));
            }
        left -= members.size();
        pc.pairs.push_back(candidates[best]);
        pc.cover.push_back(members);
    }
    return pc;
}

namespace {

double sup_on_boundary(const Laurent& f) {
    const auto& dom = f.domain();
    int N = 512;
    while (N < 4 * f.degree() + 8) N <<= 1;
    double m = 0.0;
    for (double r : {dom.r_in, dom.r_out}) {
        if (r == 0.0) continue;
        for (const auto& v : f.eval_circle(r, N)) m = std::max(m, std::abs(v));
    }
    return m;
}

cplx residue(const Laurent& f) { return f.coeff(-1); }

} // namespace

WeierstrassData perturb_to_full(const WeierstrassData& w, double delta, std::uint64_t seed, double tol) {
    if (is_full(w, tol)) return w;
    if (w.n() != 3) throw Error(ErrorKind::PerturbationFailed, "general-position perturbation implemented for n = 3");
    const auto& L = w.domain;
    const int max_retries = 8;
    for (int attempt = 0; attempt < max_retries; ++attempt) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(attempt));
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        const double dd = 0.25 * delta * std::pow(0.5, attempt);
        for (auto [a, b, c] : {std::array<int, 3>{0, 1, 2}, {1, 2, 0}, {0, 2, 1}}) {
            auto sp = spinor_split(w, a, b);
            Laurent R(L, 0);
            try {
                R = reciprocal_auto(sp.f, 1e-13, 16, 1024);
            } catch (const Error&) {
                continue;
            }
            // phi_c -> phi_c + dd (eta0 + s e), g -> -phi_c^2 / f; eta0 and e carry no z^-1 term and s
            // cancels the residue change of g, so every period is kept
            Laurent eta0(L, 2);
            for (int k : {-2, 0, 1, 2}) eta0.set(k, cplx(U(rng), U(rng)));
            eta0 *= cplx(1.0 / sup_on_boundary(eta0));
            const Laurent& pc = w.phi[c];
            for (int ke : {1, -2, 2, 0}) {
                Laurent e = Laurent::monomial(L, ke);
                e *= cplx(1.0 / sup_on_boundary(e));
                // 2 res(pc eta R) + dd res(eta^2 R) = 0 with eta = eta0 + s e
                cplx L0 = residue(product(product(pc, eta0), R)), Le = residue(product(product(pc, e), R));
                cplx Q0 = residue(product(product(eta0, eta0), R)), B = residue(product(product(eta0, e), R));
                cplx Qe = residue(product(product(e, e), R));
                cplx qa = dd * Qe, qb = 2.0 * Le + 2.0 * dd * B, qc = 2.0 * L0 + dd * Q0;
                cplx s;
                const double qscale = std::abs(Le) + std::abs(L0) + dd * (std::abs(Q0) + std::abs(B) + std::abs(Qe));
                if (std::abs(qc) <= 1e-15 * qscale || qscale == 0.0) s = 0.0;
                else if (std::abs(qa) < 1e-14 * (std::abs(qb) + std::abs(qc))) {
                    if (std::abs(qb) == 0.0) continue;
                    s = -qc / qb;
                } else {
                    cplx disc = std::sqrt(qb * qb - 4.0 * qa * qc);
                    cplx s1 = (-qb + disc) / (2.0 * qa), s2 = (-qb - disc) / (2.0 * qa);
                    s = std::abs(s1) < std::abs(s2) ? s1 : s2;
                }
                if (!(std::abs(s) <= 4.0)) continue;
                Laurent pc2 = pc + cplx(dd) * (eta0 + s * e);
                Laurent g2 = product(product(pc2, pc2), R) * cplx(-1.0);
                g2.trim(1e-16);
                auto [pa, pb] = spinor_join(sp.f, g2);
                WeierstrassData out = w;
                out.phi[a] = pa;
                out.phi[b] = pb;
                out.phi[c] = pc2;
                double dist = 0.0;
                for (int j = 0; j < 3; ++j) dist = std::max(dist, sup_on_boundary(out.phi[j] - w.phi[j]));
                if (dist < delta && is_full(out, tol)) return out;
            }
        }
    }
    throw Error(ErrorKind::PerturbationFailed, "no full perturbation found within delta");
}

} // namespace msdl
