#include "msdl/spray.hpp"

#include "msdl/error.hpp"
#include "msdl/weierstrass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace msdl {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx I(0.0, 1.0);

int pow2_at_least(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

double circ_dist(double a, double b) {
    double d = std::fmod(std::abs(a - b), 1.0);
    return std::min(d, 1.0 - d);
}

std::vector<double> default_points(int k) {
    std::vector<double> s;
    for (int j = 0; j < 2 * k; ++j) s.push_back(j < k ? j / (2.0 * k) : j / (2.0 * k) - 1.0 / (4.0 * k));
    return s;
}

double sup_on_boundary(const Laurent& f) {
    double m = 0.0;
    const auto& dom = f.domain();
    const int N = std::max(512, pow2_at_least(4 * f.degree() + 8));
    for (double r : {dom.r_in, dom.r_out}) {
        if (r == 0.0) continue;
        for (const auto& v : f.eval_circle(r, N)) m = std::max(m, std::abs(v));
    }
    return m;
}

// max Re G over L, attained on the boundary circles
double max_real_part(const Laurent& G) {
    double m = -std::numeric_limits<double>::infinity();
    const auto& dom = G.domain();
    const int N = std::max(512, pow2_at_least(4 * G.degree() + 8));
    for (double r : {dom.r_in, dom.r_out}) {
        if (r == 0.0) continue;
        for (const auto& v : G.eval_circle(r, N)) m = std::max(m, v.real());
    }
    return m;
}

// node values on one curve used by the period map and Newton
struct CurveData {
    std::vector<cplx> nodes, f, g, w;
    std::vector<std::vector<cplx>> a;
};

int period_nodes(int total_degree) { return std::max(256, pow2_at_least(4 * total_degree + 64)); }

std::vector<CurveData> curve_data(const Laurent& w, const Spray& spray, const Laurent& f, const Laurent& g,
                                  const HomologyBasis& C) {
    int tot = f.degree() + g.degree() + w.degree();
    for (const auto& a : spray.bumps.a) tot += a.degree();
    const int N = period_nodes(tot);
    std::vector<CurveData> out;
    for (const auto& c : C.curves) {
        CurveData d;
        d.nodes = sample_circle(c.radius, N);
        d.f = f.eval_circle(c.radius, N);
        d.g = g.eval_circle(c.radius, N);
        d.w = w.eval_circle(c.radius, N);
        for (const auto& a : spray.bumps.a) d.a.push_back(a.eval_circle(c.radius, N));
        out.push_back(std::move(d));
    }
    return out;
}

// v_zeta and the logarithmic derivative factors d v / d zeta_j / v at the nodes
void spray_values(const Spray& spray, const std::vector<cplx>& zeta, const CurveData& d, std::vector<cplx>& v,
                  std::vector<std::vector<cplx>>& dlog) {
    const std::size_t N = d.nodes.size(), J = zeta.size();
    v.assign(N, cplx(1.0));
    dlog.assign(J, std::vector<cplx>(N));
    if (spray.form == SprayForm::Product) {
        for (std::size_t j = 0; j < J; ++j)
            for (std::size_t q = 0; q < N; ++q) {
                cplx fac = 1.0 + zeta[j] * d.a[j][q];
                v[q] *= fac;
                dlog[j][q] = d.a[j][q] / fac;
            }
    } else {
        std::vector<cplx> G(N, cplx(0.0));
        for (std::size_t j = 0; j < J; ++j)
            for (std::size_t q = 0; q < N; ++q) {
                G[q] += zeta[j] * d.a[j][q];
                dlog[j][q] = d.a[j][q];
            }
        for (std::size_t q = 0; q < N; ++q) v[q] = std::exp(G[q]);
    }
}

Eigen::VectorXcd residual_vec(const std::vector<CurveData>& cd, const Spray& spray, const std::vector<cplx>& zeta,
                              const PeriodTarget& target, Eigen::MatrixXcd* J) {
    const int l = static_cast<int>(cd.size());
    const int nz = static_cast<int>(zeta.size());
    Eigen::VectorXcd F(2 * l);
    if (J) J->resize(2 * l, nz);
    std::vector<cplx> v, fh, gh;
    std::vector<std::vector<cplx>> dlog;
    for (int i = 0; i < l; ++i) {
        const auto& d = cd[i];
        spray_values(spray, zeta, d, v, dlog);
        const std::size_t N = d.nodes.size();
        fh.resize(N);
        gh.resize(N);
        for (std::size_t q = 0; q < N; ++q) {
            cplx h = d.w[q] * v[q];
            fh[q] = d.f[q] * h;
            gh[q] = d.g[q] / h;
        }
        F(2 * i) = contour_integral(d.nodes, fh) - target.per_curve[i][0];
        F(2 * i + 1) = contour_integral(d.nodes, gh) - target.per_curve[i][1];
        if (J) {
            std::vector<cplx> t1(N), t2(N);
            for (int j = 0; j < nz; ++j) {
                for (std::size_t q = 0; q < N; ++q) {
                    t1[q] = fh[q] * dlog[j][q];
                    t2[q] = -gh[q] * dlog[j][q];
                }
                (*J)(2 * i, j) = contour_integral(d.nodes, t1);
                (*J)(2 * i + 1, j) = contour_integral(d.nodes, t2);
            }
        }
    }
    return F;
}

double max_abs(const Eigen::VectorXcd& v) {
    double m = 0.0;
    for (int i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v(i)));
    return m;
}

} // namespace

double PeriodTarget::distance(const PeriodTarget& o) const {
    double m = 0.0;
    for (std::size_t i = 0; i < per_curve.size(); ++i)
        for (int c = 0; c < 2; ++c) m = std::max(m, std::abs(per_curve[i][c] - o.per_curve[i][c]));
    return m;
}

std::string AssembleResult::failed() const {
    std::string s;
    for (const auto& c : clauses)
        if (!c.ok) s += (s.empty() ? "" : ", ") + c.name;
    return s;
}

BasisPoints select_basis_points(const std::vector<Laurent>& f, const std::vector<Laurent>& g, const HomologyBasis& C,
                                const std::vector<double>& s, double margin) {
    BasisPoints bp;
    bp.k = static_cast<int>(s.size()) / 2;
    bp.margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < C.size(); ++i) {
        for (double sj : s) {
            bp.s.push_back(sj);
            bp.curve.push_back(static_cast<int>(i));
        }
    }
    for (std::size_t d = 0; d < f.size(); ++d) {
        for (std::size_t i = 0; i < C.size(); ++i) {
            double best = 0.0;
            for (int j = 0; j < bp.k; ++j) {
                cplx y1 = C.curves[i].at(s[j]), y2 = C.curves[i].at(s[bp.k + j]);
                cplx f1 = f[d].eval_unchecked(y1), g1 = g[d].eval_unchecked(y1);
                cplx f2 = f[d].eval_unchecked(y2), g2 = g[d].eval_unchecked(y2);
                double n1 = std::hypot(std::abs(f1), std::abs(g1)), n2 = std::hypot(std::abs(f2), std::abs(g2));
                double rel = (n1 > 0 && n2 > 0) ? std::abs(f1 * g2 - f2 * g1) / (n1 * n2) : 0.0;
                best = std::max(best, rel);
            }
            if (!(best > margin)) {
                std::ostringstream os;
                os << "no admissible point pair at grid point " << d << " with k = " << bp.k << " (best " << best
                   << ")";
                throw Error(ErrorKind::BasisPointsExhausted, os.str());
            }
            bp.margin = std::min(bp.margin, best);
        }
    }
    return bp;
}

BasisPoints select_basis_points(const std::vector<Laurent>& f, const std::vector<Laurent>& g, const HomologyBasis& C,
                                int k, double margin) {
    return select_basis_points(f, g, C, default_points(k), margin);
}

BumpFamily build_bumps(const HomologyBasis& C, const BasisPoints& points, double tau, int degree,
                       double residual_cap) {
    if (C.size() == 0) throw Error(ErrorKind::InvalidGeometry, "bumps need a homology curve");
    for (std::size_t i = 0; i < points.s.size(); ++i)
        for (std::size_t j = i + 1; j < points.s.size(); ++j)
            if (points.curve[i] == points.curve[j] && !(circ_dist(points.s[i], points.s[j]) > 2.0 * tau)) {
                std::ostringstream os;
                os << "bump supports around s = " << points.s[i] << " and " << points.s[j] << " overlap at tau = "
                   << tau;
                throw Error(ErrorKind::TauTooLarge, os.str());
            }
    BumpFamily b;
    b.C = C;
    b.s = points.s;
    b.curve = points.curve;
    b.tau = tau;
    b.degree = degree;
    const int N = std::max(1024, pow2_at_least(8 * degree + 8));
    for (std::size_t j = 0; j < points.s.size(); ++j) {
        const auto& c = C.curves[points.curve[j]];
        const double r = c.radius;
        // the domain only matters for evaluation checks; the annulus spans the curve
        AnnularDomain dom{r * 0.99, r * 1.01};
        CurveSamples cs;
        cs.nodes = sample_circle(r, N);
        for (int q = 0; q < N; ++q) {
            double s = static_cast<double>(q) / N;
            double d = std::remainder(s - points.s[j], 1.0) / tau;
            cs.values.push_back(std::abs(d) < 1.0 ? std::exp(-1.0 / (1.0 - d * d)) : 0.0);
        }
        b.y.push_back(c.at(points.s[j]));
        auto fit = least_squares_fit(dom, {cs}, degree, 0.0);
        cplx integral = contour_integral(fit.f, r, contour_nodes_for(degree));
        if (std::abs(integral) == 0.0) throw Error(ErrorKind::DegreeExhausted, "bump fit has zero integral");
        Laurent a = fit.f * (1.0 / integral);
        double res = 0.0, leak = 0.0, peak = 0.0;
        auto av = a.eval_circle(r, N);
        for (int q = 0; q < N; ++q) {
            cplx target = cs.values[q] / integral;
            peak = std::max(peak, std::abs(target));
            res = std::max(res, std::abs(av[q] - target));
            double s = static_cast<double>(q) / N;
            if (circ_dist(s, points.s[j]) > tau) leak = std::max(leak, std::abs(av[q]));
        }
        if (res > residual_cap * peak) {
            std::ostringstream os;
            os << "bump fit residual " << res << " above cap " << residual_cap * peak << " at degree " << degree;
            throw Error(ErrorKind::DegreeExhausted, os.str());
        }
        b.a.push_back(std::move(a));
        b.residual.push_back(res);
        b.leakage.push_back(leak);
    }
    return b;
}

Spray make_spray(BumpFamily bumps, SprayForm form, const AnnularDomain& L) {
    Spray s;
    double amax = 0.0;
    for (auto& a : bumps.a) {
        Laurent moved(L, a.degree());
        for (int k = -a.degree(); k <= a.degree(); ++k) moved.set(k, a.coeff(k));
        a = moved;
        amax = std::max(amax, sup_on_boundary(a));
    }
    s.bumps = std::move(bumps);
    s.form = form;
    s.ball_radius = amax > 0.0 ? (form == SprayForm::Product ? 0.5 : 8.0) / amax : 0.0;
    s.zeta.assign(s.bumps.a.size(), cplx(0.0));
    return s;
}

Laurent spray_function(const Spray& spray, const std::vector<cplx>& zeta, double tol) {
    const AnnularDomain& L = spray.bumps.a.empty() ? AnnularDomain{} : spray.bumps.a.front().domain();
    Laurent v = Laurent::constant(L, 1.0);
    if (spray.form == SprayForm::Product) {
        for (std::size_t j = 0; j < zeta.size(); ++j) {
            if (zeta[j] == cplx(0.0)) continue;
            v = product(v, Laurent::constant(L, 1.0) + zeta[j] * spray.bumps.a[j]);
        }
        return v;
    }
    Laurent G(L, 0);
    bool any = false;
    for (std::size_t j = 0; j < zeta.size(); ++j) {
        if (zeta[j] == cplx(0.0)) continue;
        G += zeta[j] * spray.bumps.a[j];
        any = true;
    }
    if (!any) return v;
    double scale = std::exp(max_real_part(G));
    return exp_series_auto(G, tol * scale, std::max(16, 2 * G.degree()), 2048);
}

bool nowhere_vanishing(const Laurent& h) {
    const auto& dom = h.domain();
    const int N = std::max(1024, pow2_at_least(8 * h.degree() + 8));
    double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
    for (int i = 0; i < 9; ++i) {
        double r = dom.is_disc() ? dom.r_out * (i + 1) / 9 : dom.r_in + dom.width() * i / 8;
        for (const auto& v : h.eval_circle(r, N, 0.5)) {
            mn = std::min(mn, std::abs(v));
            mx = std::max(mx, std::abs(v));
        }
    }
    if (!(mn > 1e-14 * mx)) return false;
    int wo = winding_number(h, dom.r_out, N);
    int wi = dom.is_disc() ? 0 : winding_number(h, dom.r_in, N);
    return wo == wi;
}

PeriodTarget period_map(const Laurent& h, const Laurent& f, const Laurent& g, const HomologyBasis& C) {
    if (!nowhere_vanishing(h)) throw Error(ErrorKind::Nonvanishing, "period_map needs a nowhere vanishing h");
    PeriodTarget P;
    const int N = period_nodes(f.degree() + g.degree() + h.degree());
    for (const auto& c : C.curves) {
        auto nodes = sample_circle(c.radius, N);
        auto fv = f.eval_circle(c.radius, N), gv = g.eval_circle(c.radius, N), hv = h.eval_circle(c.radius, N);
        std::vector<cplx> a(N), b(N);
        for (int q = 0; q < N; ++q) {
            a[q] = fv[q] * hv[q];
            b[q] = gv[q] / hv[q];
        }
        P.per_curve.push_back({contour_integral(nodes, a), contour_integral(nodes, b)});
    }
    return P;
}

PeriodTarget period_map_identity(const Laurent& f, const Laurent& g, const HomologyBasis& C) {
    return period_map(Laurent::constant(f.domain(), 1.0), f, g, C);
}

JacobianResult period_jacobian(const Spray& spray, const Laurent& f, const Laurent& g, const HomologyBasis& C) {
    JacobianResult jr;
    auto cd = curve_data(Laurent::constant(f.domain(), 1.0), spray, f, g, C);
    PeriodTarget zero;
    zero.per_curve.assign(C.size(), {cplx(0.0), cplx(0.0)});
    std::vector<cplx> zeta = spray.zeta;
    zeta.resize(spray.bumps.a.size(), cplx(0.0));
    residual_vec(cd, spray, zeta, zero, &jr.J);
    jr.approx = Eigen::MatrixXcd::Zero(jr.J.rows(), jr.J.cols());
    for (std::size_t j = 0; j < spray.bumps.a.size(); ++j) {
        int i = spray.bumps.curve[j];
        cplx y = spray.bumps.y[j];
        jr.approx(2 * i, j) = f.eval_unchecked(y);
        jr.approx(2 * i + 1, j) = -g.eval_unchecked(y);
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(jr.J);
    for (int i = 0; i < svd.singularValues().size(); ++i) jr.singular_values.push_back(svd.singularValues()(i));
    return jr;
}

OkaFit fit_oka_log_target(const AnnularDomain& K, const std::vector<Labyrinth>& labs, const AnnularDomain& L,
                          int degree, double ridge) {
    std::vector<CurveSamples> t;
    const int Nk = std::max(128, pow2_at_least(4 * degree + 64));
    const double kin = std::max(L.r_in, K.r_in * 0.97), kout = std::min(L.r_out, K.r_out * 1.03);
    const int n_rk = 6;
    std::vector<std::size_t> k_idx, o_idx;
    for (int i = 0; i < n_rk; ++i) {
        double r = K.is_disc() ? kout * (i + 1) / n_rk : kin + (kout - kin) * i / (n_rk - 1);
        CurveSamples cs;
        cs.nodes = sample_circle(r, Nk);
        cs.values.assign(Nk, cplx(0.0));
        k_idx.push_back(t.size());
        t.push_back(std::move(cs));
    }
    for (const auto& lab : labs)
        for (auto& rs : omega_samples(lab, 3, Nk, 0.1)) {
            CurveSamples cs;
            cs.nodes = rs.nodes;
            cs.values.assign(cs.nodes.size(), cplx(1.0));
            o_idx.push_back(t.size());
            t.push_back(std::move(cs));
        }
    auto fit = least_squares_fit(L, t, degree, ridge);
    OkaFit out;
    out.H1 = fit.f;
    out.degree = degree;
    for (auto i : k_idx)
        for (auto z : t[i].nodes) out.residual_K = std::max(out.residual_K, std::abs(out.H1.eval_unchecked(z)));
    for (auto i : o_idx)
        for (auto z : t[i].nodes)
            out.residual_Omega = std::max(out.residual_Omega, std::abs(out.H1.eval_unchecked(z) - 1.0));
    out.residual = std::max(out.residual_K, out.residual_Omega);
    return out;
}

Laurent oka_from_fit(const OkaFit& fit, double amplitude) {
    const auto& L = fit.H1.domain();
    if (amplitude == 0.0) return Laurent::constant(L, 1.0);
    Laurent G = fit.H1 * cplx(amplitude);
    double scale = std::exp(std::min(700.0, max_real_part(G)));
    return exp_series_auto(G, 1e-13 * scale, std::max(16, 2 * G.degree()), 2048);
}

double oka_budget(double mu) {
    double lg = std::log(1.0 + 1.0 / mu);
    return std::min(mu / 2.0, lg / 4.0) / lg;
}

OkaResult build_oka_function(const AnnularDomain& K, const std::vector<Labyrinth>& labs, const AnnularDomain& L,
                             double mu, double phi_d, int degree, bool strict) {
    if (!(mu > 0.0 && mu < 1.0)) throw Error(ErrorKind::InvalidGeometry, "mu must lie in (0,1)");
    OkaResult r;
    r.fit = fit_oka_log_target(K, labs, L, degree);
    r.budget = oka_budget(mu);
    r.budget_ok = r.fit.residual < r.budget;
    if (strict && !r.budget_ok) {
        std::ostringstream os;
        os << "Oka log-target residual " << r.fit.residual << " (K " << r.fit.residual_K << ", Omega "
           << r.fit.residual_Omega << ") exceeds budget " << r.budget << " at degree " << degree;
        throw Error(ErrorKind::DegreeExhausted, os.str());
    }
    r.amplitude = phi_d * std::log(1.0 + 1.0 / mu);
    r.h = oka_from_fit(r.fit, r.amplitude);
    return r;
}

SolveResult solve_periods(const Laurent& w, const Spray& spray, const Laurent& f, const Laurent& g,
                          const HomologyBasis& C, const PeriodTarget& target, double tol, int max_iter,
                          int substeps) {
    SolveResult out;
    const std::size_t nz = spray.bumps.a.size();
    out.zeta.assign(nz, cplx(0.0));
    auto cd = curve_data(w, spray, f, g, C);
    Eigen::VectorXcd F = residual_vec(cd, spray, out.zeta, target, nullptr);
    out.residual = max_abs(F);
    out.trace.push_back(out.residual);
    if (out.residual < tol) return out; // includes w == 1 with the target already met
    PeriodTarget start = target;
    {
        Eigen::VectorXcd F0 = F;
        for (std::size_t i = 0; i < target.per_curve.size(); ++i)
            for (int c = 0; c < 2; ++c) start.per_curve[i][c] = target.per_curve[i][c] + F0(2 * i + c);
    }
    substeps = std::max(1, substeps);
    for (int s = 1; s <= substeps; ++s) {
        PeriodTarget T = target;
        double lam = static_cast<double>(s) / substeps;
        for (std::size_t i = 0; i < target.per_curve.size(); ++i)
            for (int c = 0; c < 2; ++c)
                T.per_curve[i][c] = start.per_curve[i][c] + lam * (target.per_curve[i][c] - start.per_curve[i][c]);
        const double stol = s == substeps ? tol : std::max(tol, 1e-10);
        int stall = 0;
        double prev = std::numeric_limits<double>::infinity();
        while (true) {
            Eigen::MatrixXcd J;
            F = residual_vec(cd, spray, out.zeta, T, &J);
            double res = max_abs(F);
            if (res < stol) {
                out.residual = res;
                break;
            }
            if (out.iterations >= max_iter || stall >= 3) {
                std::ostringstream os;
                os << "Newton stalled at residual " << res << " after " << out.iterations << " iterations; trace:";
                for (double t : out.trace) os << ' ' << t;
                throw Error(ErrorKind::NewtonFailed, os.str());
            }
            stall = res > 0.5 * prev ? stall + 1 : 0;
            prev = res;
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
            Eigen::VectorXcd step = svd.solve(F);
            for (std::size_t j = 0; j < nz; ++j) out.zeta[j] -= step(j);
            ++out.iterations;
            double zmax = 0.0;
            for (auto z : out.zeta) zmax = std::max(zmax, std::abs(z));
            F = residual_vec(cd, spray, out.zeta, T, nullptr);
            out.trace.push_back(max_abs(F));
            if (zmax > spray.ball_radius) {
                std::ostringstream os;
                os << "Newton left the spray ball: |zeta| = " << zmax << " > " << spray.ball_radius;
                throw Error(ErrorKind::NewtonFailed, os.str());
            }
        }
    }
    return out;
}

double sup_deviation_on(const Laurent& h, const AnnularDomain& K, int n_r, int n_theta) {
    double sup = 0.0;
    const int N = std::max(n_theta, pow2_at_least(2 * h.degree() + 2));
    for (int i = 0; i < n_r; ++i) {
        double r = K.is_disc() ? K.r_out * (i + 1) / n_r : K.r_in + K.width() * i / (n_r - 1);
        for (const auto& v : h.eval_circle(r, N, 0.5)) sup = std::max(sup, std::abs(v - 1.0));
    }
    return sup;
}

double min_modulus_on(const Laurent& h, const std::vector<Labyrinth>& labs, int n_r, int n_theta) {
    double mn = std::numeric_limits<double>::infinity();
    for (const auto& lab : labs)
        for (const auto& rs : omega_samples(lab, n_r, n_theta, 0.0))
            for (auto z : rs.nodes) mn = std::min(mn, std::abs(h.eval_unchecked(z)));
    return mn;
}

double min_modulus_on(const Laurent& f, const AnnularDomain& A, int n_r, int n_theta) {
    double mn = std::numeric_limits<double>::infinity();
    const int N = std::max(n_theta, pow2_at_least(2 * f.degree() + 2));
    for (int i = 0; i < n_r; ++i) {
        double r = A.r_in + A.width() * i / (n_r - 1);
        for (const auto& v : f.eval_circle(r, N, 0.5)) mn = std::min(mn, std::abs(v));
    }
    return mn;
}

AssembleResult assemble_h(const Laurent& oka, const Spray& spray, const std::vector<cplx>& zeta,
                          const AssembleChecks& checks, bool throw_on_failure) {
    AssembleResult r;
    Laurent v = spray_function(spray, zeta);
    if (oka.is_constant(1.0)) r.h = v;
    else if (v.is_constant(1.0)) r.h = oka;
    else r.h = product(oka, v);

    Clause a{"a:nonvanishing", nowhere_vanishing(r.h), 0.0, 0.0};
    a.value = min_modulus_on(r.h, r.h.domain(), 9, 512);
    r.clauses.push_back(a);

    Clause b{"b:identity", true, 0.0, 0.0};
    if (checks.identity_expected) {
        b.ok = r.h.is_constant(1.0);
        b.value = b.ok ? 0.0 : 1.0;
    }
    r.clauses.push_back(b);

    Clause c{"c:periods", true, 0.0, checks.period_tol};
    if (checks.f && checks.g && a.ok) {
        auto P = period_map(r.h, *checks.f, *checks.g, checks.C);
        auto P1 = period_map_identity(*checks.f, *checks.g, checks.C);
        c.value = P.distance(P1);
        c.ok = c.value < checks.period_tol;
    }
    r.clauses.push_back(c);

    Clause d{"d:K-closeness", true, sup_deviation_on(r.h, checks.K), checks.eps};
    d.ok = d.value < checks.eps;
    r.clauses.push_back(d);

    Clause e{"e:Omega-growth", true, 0.0, 1.0 / checks.eps};
    if (!checks.labs.empty()) {
        e.value = min_modulus_on(r.h, checks.labs);
        e.ok = e.value > 1.0 / checks.eps;
    }
    r.clauses.push_back(e);

    for (const auto& cl : r.clauses) r.ok = r.ok && cl.ok;
    if (!r.ok && throw_on_failure) {
        std::ostringstream os;
        os << "failed clauses:";
        for (const auto& cl : r.clauses)
            if (!cl.ok) os << ' ' << cl.name << " (value " << cl.value << ", bound " << cl.bound << ")";
        throw Error(ErrorKind::HInvalid, os.str());
    }
    return r;
}

} // namespace msdl
