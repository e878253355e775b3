#include "msdl/deform.hpp"

#include "msdl/error.hpp"
#include "msdl/parallel.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <set>
#include <sstream>

namespace msdl {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

int pow2_at_least(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

double min_on_annulus(const Laurent& f, const AnnularDomain& A, int n_r = 9) {
    const int N = std::max(512, pow2_at_least(4 * f.degree() + 8));
    double m = kInf;
    for (int i = 0; i < n_r; ++i) {
        double r = A.r_in + A.width() * i / (n_r - 1);
        for (int ph = 0; ph < 2; ++ph)
            for (const auto& v : f.eval_circle(r, N, 0.5 * ph)) m = std::min(m, std::abs(v));
    }
    return m;
}

int omega_nodes(const Laurent& f) { return std::max(1024, pow2_at_least(4 * f.degree() + 8)); }

double flux_change(const WeierstrassData& a, const WeierstrassData& b) {
    auto C = homology_basis(a.domain);
    auto Pa = periods(a, C), Pb = periods(b, C);
    double m = 0.0;
    for (std::size_t i = 0; i < Pa.size(); ++i)
        for (std::size_t j = 0; j < Pa[i].size(); ++j) m = std::max(m, std::abs(Pa[i][j].imag() - Pb[i][j].imag()));
    return m;
}

// the gap between K and bL on one side, shrunk by the margin, narrowed to the window with the
// largest min |Psi| when Psi nearly vanishes on the whole gap
AnnularDomain choose_host(double lo, double hi, double margin, const std::vector<const Laurent*>& psis) {
    const double gap = hi - lo;
    AnnularDomain full{lo + margin * gap, hi - margin * gap};
    auto psi_min = [&](const AnnularDomain& A) {
        double m = kInf;
        for (auto* p : psis) m = std::min(m, min_on_annulus(*p, A));
        return m;
    };
    double best = psi_min(full);
    double scale = 0.0;
    for (auto* p : psis) scale = std::max(scale, std::abs((*p)(full.core_radius())));
    if (best > 1e-8 * scale) return full;
    AnnularDomain pick = full;
    const double w = 0.5 * full.width();
    for (int k = 0; k <= 4; ++k) {
        AnnularDomain A{full.r_in + k * w / 4, full.r_in + k * w / 4 + w};
        double v = psi_min(A);
        if (v > best) {
            best = v;
            pick = A;
        }
    }
    return pick;
}

} // namespace

LopezRosResult lopez_ros(const WeierstrassData& w, const Laurent& h, int a, int b, const LopezRosOptions& opt) {
    if (h.is_constant(1.0)) return {w, 0.0};
    if (!nowhere_vanishing(h)) throw Error(ErrorKind::Nonvanishing, "lopez_ros needs a nowhere vanishing h");
    auto sp = spinor_split(w, a, b);
    Laurent R = opt.reciprocal ? *opt.reciprocal : reciprocal_auto(h, opt.recip_tol, std::max(16, 2 * h.degree()), 8192);
    Laurent fH = product(sp.f, h), gR = product(sp.g, R);
    fH.trim(1e-17);
    gR.trim(1e-17);
    LopezRosResult out;
    auto C = homology_basis(w.domain);
    for (const auto& c : C.curves) {
        int deg = std::max({fH.degree(), gR.degree(), sp.f.degree(), sp.g.degree()});
        int N = contour_nodes_for(deg);
        out.period_residual = std::max(out.period_residual, std::abs(contour_integral(sp.f - fH, c.radius, N)));
        out.period_residual = std::max(out.period_residual, std::abs(contour_integral(sp.g - gR, c.radius, N)));
    }
    if (opt.require_exact && !(out.period_residual < opt.period_tol)) {
        std::ostringstream os;
        os << "period residual " << out.period_residual << " of (f - fh, g - g/h) exceeds " << opt.period_tol;
        throw Error(ErrorKind::InexactPeriods, os.str());
    }
    auto [pa, pb] = spinor_join(fH, gR);
    out.data = w;
    out.data.phi[a] = std::move(pa);
    out.data.phi[b] = std::move(pb);
    return out;
}

WeierstrassData lopez_ros_step(const WeierstrassData& w, const Laurent& h, int a, int b, const LopezRosOptions& opt) {
    return lopez_ros(w, h, a, b, opt).data;
}

std::string DeformationCertificate::failed() const {
    std::string s;
    for (std::size_t i = 0; i < annuli.size(); ++i)
        for (const auto& c : annuli[i].clauses)
            if (!c.ok) s += (s.empty() ? "" : ", ") + std::string("A") + std::to_string(i) + ":" + c.name;
    return s;
}

double certify_boundary_distance(const WeierstrassData& wt, int a, int b, const Laurent& f, const Laurent& h,
                                 AnnulusCertificate& c, int star_trials, std::uint64_t seed, bool throw_on_failure) {
    auto sp = spinor_split(wt, a, b);
    c.psi_min = min_on_annulus(sp.Psi, c.A);
    c.f_min = min_modulus_on(f, std::vector<Labyrinth>{c.lab}, 3, omega_nodes(f));
    c.h_min = min_modulus_on(h, std::vector<Labyrinth>{c.lab}, 3, omega_nodes(h));
    if (star_trials > 0) {
        try {
            c.star = verify_star(c.lab, c.lambda, c.threshold, star_trials, seed);
        } catch (const Error& e) {
            c.star.violations = std::max(1, c.star.violations);
            c.star.valid = false;
        }
    }
    c.clauses.clear();
    c.clauses.push_back({"varrho:|Psi|>rho", c.psi_min > c.rho, c.psi_min, c.rho});
    c.clauses.push_back({"sigma:|f|>sigma", c.f_min > c.sigma, c.f_min, c.sigma});
    c.clauses.push_back({"v:|h|>h_required", c.h_min > c.h_required, c.h_min, c.h_required});
    c.clauses.push_back({"star:analytic", c.star.analytic_bound >= c.threshold, c.star.analytic_bound, c.threshold});
    c.clauses.push_back({"star:sampled", c.star.violations == 0 && c.star.trials > 0, double(c.star.violations), 0.0});
    c.clauses.push_back({"lambda<delta", c.lab.delta > c.lambda, c.lab.delta, c.lambda});
    c.valid = true;
    for (const auto& cl : c.clauses) c.valid = c.valid && cl.ok;
    // case 1: theta-length > T at speed >= sqrt(|Psi|/2); case 2: an Omega-run > lambda at speed >= |f h|/2
    c.bound = std::min(c.threshold * std::sqrt(c.rho / 2.0), c.lambda * c.sigma * c.h_min / 2.0);
    if (!c.valid && throw_on_failure) {
        std::ostringstream os;
        os << "no certificate:";
        for (const auto& cl : c.clauses)
            if (!cl.ok) os << ' ' << cl.name << " (value " << cl.value << ", bound " << cl.bound << ")";
        throw Error(ErrorKind::NoCertificate, os.str());
    }
    return c.bound;
}

double estimate_distance(const Immersion& im, int n_r, int n_theta) {
    if (n_r < 16 || n_theta < 64) throw Error(ErrorKind::Undersampled, "estimate_distance needs at least 16 x 64");
    const auto& w = im.data;
    const auto& L = w.domain;
    const double dr = L.width() / (n_r - 1);
    auto radius = [&](double i) { return L.r_in + dr * i; };
    auto speed_circle = [&](double r, double phase) {
        std::vector<double> s(n_theta, 0.0);
        for (const auto& f : w.phi) {
            auto v = f.eval_circle(r, n_theta, phase);
            for (int q = 0; q < n_theta; ++q) s[q] += std::norm(v[q]);
        }
        for (auto& x : s) x = std::sqrt(x / 2.0);
        return s;
    };
    // S_ang[i][j]: (r_i, theta_{j+1/2}); S_rad[i][j]: (r_{i+1/2}, theta_j); S_diag[i][j]: (r_{i+1/2}, theta_{j+1/2})
    std::vector<std::vector<double>> S_ang(n_r), S_rad(n_r - 1), S_diag(n_r - 1);
    for (int i = 0; i < n_r; ++i) S_ang[i] = speed_circle(radius(i), 0.5);
    for (int i = 0; i + 1 < n_r; ++i) {
        S_rad[i] = speed_circle(radius(i + 0.5), 0.0);
        S_diag[i] = speed_circle(radius(i + 0.5), 0.5);
    }
    auto node = [&](int i, int j) { return std::polar(radius(i), 2.0 * kPi * j / n_theta); };
    auto id = [&](int i, int j) { return i * n_theta + ((j % n_theta) + n_theta) % n_theta; };
    std::vector<double> dist(static_cast<std::size_t>(n_r) * n_theta, kInf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    const double rx = std::abs(im.x0);
    int i0 = std::clamp(static_cast<int>(std::lround((rx - L.r_in) / dr)), 0, n_r - 1);
    double ang = std::arg(im.x0);
    if (ang < 0) ang += 2.0 * kPi;
    int j0 = static_cast<int>(std::lround(ang / (2.0 * kPi) * n_theta)) % n_theta;
    const double sx = induced_speed(w, im.x0);
    dist[id(i0, j0)] = sx * std::abs(node(i0, j0) - im.x0);
    pq.push({dist[id(i0, j0)], id(i0, j0)});
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        int i = u / n_theta, j = u % n_theta;
        if (i == 0 || i == n_r - 1) return d;
        auto relax = [&](int i2, int j2, double s) {
            int v = id(i2, j2);
            double nd = d + s * std::abs(node(i, j) - node(i2, ((j2 % n_theta) + n_theta) % n_theta));
            if (nd < dist[v]) {
                dist[v] = nd;
                pq.push({nd, v});
            }
        };
        const int jm = (j - 1 + n_theta) % n_theta;
        relax(i, j + 1, S_ang[i][j]);
        relax(i, j - 1, S_ang[i][jm]);
        relax(i + 1, j, S_rad[i][j]);
        relax(i - 1, j, S_rad[i - 1][j]);
        relax(i + 1, j + 1, S_diag[i][j]);
        relax(i + 1, j - 1, S_diag[i][jm]);
        relax(i - 1, j + 1, S_diag[i - 1][j]);
        relax(i - 1, j - 1, S_diag[i - 1][jm]);
    }
    return kInf;
}

double sup_change_on(const WeierstrassData& w_old, const WeierstrassData& w_new, const AnnularDomain& K, cplx x0,
                     int n_r, int n_theta) {
    std::vector<Laurent> diff;
    bool same = true;
    for (int j = 0; j < w_old.n(); ++j) {
        diff.push_back(w_new.phi[j] - w_old.phi[j]);
        same = same && diff.back().is_zero();
    }
    if (same) return 0.0;
    Primitive P(make_data(w_old.domain, diff), x0, {});
    double sup = 0.0;
    for (int i = 0; i < n_r; ++i) {
        double r = n_r == 1 ? K.core_radius() : K.r_in + K.width() * i / (n_r - 1);
        auto u = P.on_circle(r, n_theta, 0.5);
        for (int q = 0; q < n_theta; ++q) {
            double s = 0.0;
            for (const auto& comp : u) s += comp[q] * comp[q];
            sup = std::max(sup, std::sqrt(s));
        }
    }
    return sup;
}

DeformResult increase_distance(const ParameterGrid& grid, const std::vector<WeierstrassData>& family,
                               const DeformConfig& cfg) {
    if (family.size() != grid.size()) throw Error(ErrorKind::InvalidGeometry, "family size does not match the grid");
    DeformResult res;
    res.members = family;
    res.points.resize(family.size());
    if (family.empty()) return res;
    const AnnularDomain L = family.front().domain;
    const AnnularDomain& K = cfg.K;
    if (!L.strictly_contains(K)) throw Error(ErrorKind::InvalidGeometry, "K must lie in the interior of L");
    if (!K.contains(cfg.x0)) throw Error(ErrorKind::OutOfDomain, "base point outside K");

    std::set<int> T(cfg.T.begin(), cfg.T.end());
    if (T.empty())
        for (std::size_t p = 0; p < grid.p_count(); ++p)
            if (!grid.q_mask[p]) T.insert(static_cast<int>(p));
    std::vector<int> fix, gated;
    for (int d = 0; d < static_cast<int>(grid.size()); ++d) {
        res.points[d].d = d;
        if (grid.is_fixpoint(d)) fix.push_back(d);
        else if (T.count(static_cast<int>(grid.p_of(d))) && grid.t_values[grid.t_of(d)] >= cfg.r_cut) {
            gated.push_back(d);
            res.points[d].gated = true;
        }
    }

    auto cover = select_pair(family);
    const int ell = static_cast<int>(cover.pairs.size());
    const HomologyBasis C = homology_basis(K);

    for (int l = 0; l < ell; ++l) {
        StageRecord st;
        st.l = l + 1;
        st.a = cover.pairs[l].first;
        st.b = cover.pairs[l].second;
        st.members = cover.cover[l];
        std::set<int> ups(st.members.begin(), st.members.end());
        std::vector<int> Y = fix, Z;
        for (int d = 0; d < static_cast<int>(grid.size()); ++d)
            if (!ups.count(d) && !grid.is_fixpoint(d)) Y.push_back(d);
        for (int d : gated)
            if (ups.count(d)) Z.push_back(d);
        auto phi = urysohn_weights(grid, Y, Z);
        std::vector<int> active;
        for (int d = 0; d < static_cast<int>(grid.size()); ++d)
            if (phi[d] > 0.0) active.push_back(d);
        if (active.empty()) {
            res.stages.push_back(std::move(st));
            continue;
        }
        const int a = st.a, b = st.b;
        std::vector<Spinor> sp(grid.size());
        std::vector<const Laurent*> psis;
        for (int d : active) {
            sp[d] = spinor_split(res.members[d], a, b);
            psis.push_back(&sp[d].Psi);
        }

        // host annuli between K and bL, labyrinths, and the dichotomy constants
        std::vector<std::pair<double, double>> gaps;
        if (K.r_in > L.r_in) gaps.push_back({L.r_in, K.r_in});
        gaps.push_back({K.r_out, L.r_out});
        std::vector<AnnulusCertificate> templates;
        double h_required = 0.0;
        for (std::size_t g = 0; g < gaps.size(); ++g) {
            AnnulusCertificate ac;
            ac.A = choose_host(gaps[g].first, gaps[g].second, cfg.host_margin, psis);
            double psi_min = kInf;
            for (auto* p : psis) psi_min = std::min(psi_min, min_on_annulus(*p, ac.A));
            ac.rho = cfg.rho_frac * psi_min;
            if (!(ac.rho > 0.0))
                throw Error(ErrorKind::NoCertificate, "Psi vanishes on every host window of stage " + std::to_string(l + 1));
            ac.threshold = 2.0 * std::sqrt(2.0) * cfg.Lambda / std::sqrt(ac.rho);
            int N = 1 + static_cast<int>(std::ceil(ac.threshold / ((kPi - 2.0 * cfg.beta) * ac.A.r_in)));
            double slot = ac.A.width() / (2 * N + 1);
            ac.lambda = cfg.lambda_frac * slot;
            auto built = build_labyrinth(ac.A, ac.threshold, ac.lambda, cfg.beta);
            ac.lab = built.lab;
            try {
                ac.star = verify_star(ac.lab, ac.lambda, ac.threshold, cfg.star_trials,
                                      cfg.seed + 1000 * static_cast<std::uint64_t>(l) + g);
            } catch (const Error& e) {
                ac.star = built.cert;
                ac.star.trials = cfg.star_trials;
                ac.star.violations = std::max(1, ac.star.violations);
                ac.star.valid = false;
                spdlog::warn("stage {} host {}: {}", l + 1, g, e.what());
            }
            double fmin = kInf;
            for (int d : active)
                fmin = std::min(fmin, min_modulus_on(sp[d].f, std::vector<Labyrinth>{ac.lab}, 3, omega_nodes(sp[d].f)));
            ac.sigma = 0.9 * fmin;
            ac.h_required = std::sqrt(2.0) * 2.0 * cfg.Lambda / (ac.lambda * ac.sigma);
            h_required = std::max(h_required, ac.h_required);
            st.hosts.push_back(ac.A);
            st.labs.push_back(ac.lab);
            st.stars.push_back(ac.star);
            spdlog::info("stage {} host A({:.4f},{:.4f}): N={} lambda={:.3g} rho={:.3g} sigma={:.3g} |h| needed {:.3g}",
                         l + 1, ac.A.r_in, ac.A.r_out, ac.lab.N, ac.lambda, ac.rho, ac.sigma, ac.h_required);
            templates.push_back(std::move(ac));
        }
        st.rho = kInf;
        st.sigma = kInf;
        st.lambda = kInf;
        for (const auto& t : templates) {
            st.rho = std::min(st.rho, t.rho);
            st.sigma = std::min(st.sigma, t.sigma);
            st.lambda = std::min(st.lambda, t.lambda);
        }
        st.h_required = h_required;
        st.mu = 1.0 / (1.25 * h_required);
        st.oka = fit_oka_log_target(K, st.labs, L, cfg.oka_degree, cfg.oka_ridge);
        st.oka_budget = oka_budget(st.mu);
        const double kappa_full = std::log(1.0 + 1.0 / st.mu);
        spdlog::info("stage {}: Oka fit residual {:.3g} (K {:.3g}, Omega {:.3g}), budget {:.3g}", l + 1,
                     st.oka.residual, st.oka.residual_K, st.oka.residual_Omega, st.oka_budget);

        // period-dominating spray shared by the stage
        std::vector<Laurent> fs, gs;
        for (int d : active) {
            fs.push_back(sp[d].f);
            gs.push_back(sp[d].g);
        }
        BasisPoints pts;
        for (int k = 1;; k *= 2) {
            try {
                pts = select_basis_points(fs, gs, C, k);
                break;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::BasisPointsExhausted || 2 * k > cfg.k_max) throw;
            }
        }
        Spray spray = make_spray(build_bumps(C, pts, cfg.tau, cfg.bump_degree), SprayForm::Product, L);
        st.jacobian_singular_values = period_jacobian(spray, fs.front(), gs.front(), C).singular_values;

        const double stage_eps = cfg.eps / ell;
        struct Outcome {
            PointRecord rec;
            WeierstrassData data;
            Laurent h;
            bool ok = false;
        };
        auto run_point = [&](int d, double s) {
            Outcome o;
            o.rec = res.points[d];
            o.rec.weight = phi[d];
            o.rec.kappa = s * kappa_full * phi[d];
            try {
                Laurent w = oka_from_fit(st.oka, o.rec.kappa);
                auto target = period_map_identity(sp[d].f, sp[d].g, C);
                auto sol = solve_periods(w, spray, sp[d].f, sp[d].g, C, target, cfg.newton_tol, cfg.max_iter);
                o.rec.newton_iterations = sol.iterations;
                o.rec.newton_residual = sol.residual;
                AssembleChecks chk;
                chk.f = &sp[d].f;
                chk.g = &sp[d].g;
                chk.C = C;
                chk.K = K;
                chk.labs = st.labs;
                chk.eps = cfg.h_eps;
                chk.period_tol = cfg.period_tol;
                chk.identity_expected = phi[d] == 0.0;
                auto ah = assemble_h(w, spray, sol.zeta, chk, false);
                o.rec.h_clauses = ah.clauses;
                o.h = ah.h;
                o.rec.h_dev_K = sup_deviation_on(ah.h, K);
                o.rec.h_min_Omega = min_modulus_on(ah.h, st.labs, 3, omega_nodes(ah.h));
                auto lr = lopez_ros(res.members[d], ah.h, a, b, {true, cfg.period_tol, 1e-13});
                o.rec.period_residual = lr.period_residual;
                o.data = std::move(lr.data);
                o.rec.sup_change_K = sup_change_on(res.members[d], o.data, K, cfg.x0);
                o.rec.touched = true;
                o.ok = o.rec.sup_change_K < stage_eps;
                if (!o.ok) o.rec.error = "sup-change on K above eps/l";
            } catch (const Error& e) {
                o.rec.error = e.what();
                o.ok = false;
            }
            return o;
        };

        // largest global amplitude factor s in (0, 1] meeting the K budgets at the full-weight point
        int rep = active.front();
        for (int d : active)
            if (phi[d] > phi[rep]) rep = d;
        auto feasible = [&](double s) {
            auto o = run_point(rep, s);
            return o.ok && o.rec.h_dev_K < cfg.h_eps;
        };
        double s = 1.0;
        if (!feasible(1.0)) {
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 14; ++it) {
                double mid = 0.5 * (lo + hi);
                (feasible(mid) ? lo : hi) = mid;
            }
            s = lo;
        }

        std::vector<Outcome> outs(grid.size());
        for (int attempt = 0; attempt < 6; ++attempt) {
            parallel_for(static_cast<int>(active.size()), cfg.jobs, [&](int i) {
                int d = active[i];
                outs[d] = run_point(d, s);
            });
            bool all = true;
            for (int d : active) all = all && outs[d].ok;
            if (all || s == 0.0) break;
            s *= 0.5;
        }
        st.scale = s;
        st.eps0 = 0.0;
        spdlog::info("stage {}: amplitude factor s = {:.6g} of kappa {:.4g}", l + 1, s, kappa_full);

        for (int d : active) {
            auto& o = outs[d];
            if (!o.ok) {
                res.ok = false;
                spdlog::warn("stage {} point {}: {}", l + 1, d, o.rec.error);
                o.rec.touched = false;
                st.points.push_back(o.rec);
                res.points[d] = o.rec;
                continue;
            }
            st.eps0 = std::max(st.eps0, o.rec.h_dev_K);
            o.rec.conformality = conformality_residual(o.data);
            o.rec.flux_change = flux_change(res.members[d], o.data);
            if (res.points[d].gated && ups.count(d)) {
                DeformationCertificate cert;
                cert.Lambda = cfg.Lambda;
                cert.eps0 = o.rec.h_dev_K;
                cert.rho = cert.sigma = cert.lambda = cert.h_min_on_Omega = cert.certified_bound = kInf;
                cert.valid = true;
                for (const auto& t : templates) {
                    AnnulusCertificate ac = t;
                    certify_boundary_distance(o.data, a, b, sp[d].f, o.h, ac, 0, 0, false);
                    cert.rho = std::min(cert.rho, ac.rho);
                    cert.sigma = std::min(cert.sigma, ac.sigma);
                    cert.lambda = std::min(cert.lambda, ac.lambda);
                    cert.h_min_on_Omega = std::min(cert.h_min_on_Omega, ac.h_min);
                    cert.certified_bound = std::min(cert.certified_bound, ac.bound);
                    cert.valid = cert.valid && ac.valid;
                    cert.annuli.push_back(std::move(ac));
                }
                cert.star = cert.annuli.front().star;
                o.rec.cert = cert;
                o.rec.certified = cert.valid && cert.certified_bound >= cfg.Lambda;
                if (!o.rec.certified) res.ok = false;
            }
            res.members[d] = std::move(o.data);
            st.points.push_back(o.rec);
            res.points[d] = o.rec;
        }
        res.stages.push_back(std::move(st));
    }
    for (int d : gated)
        if (!res.points[d].certified) res.ok = false;
    return res;
}

} // namespace msdl
