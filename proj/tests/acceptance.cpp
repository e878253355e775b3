// One PASS/FAIL line per acceptance criterion; exit status 1 when any line fails.
#include "msdl/deform.hpp"
#include "msdl/driver.hpp"
#include "msdl/error.hpp"
#include "msdl/labyrinth.hpp"

#include "CLI11.hpp"

#include <spdlog/spdlog.h>

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <numbers>
#include <sstream>

using namespace msdl;

namespace {

const double pi = std::numbers::pi;
const double kNaN = std::numeric_limits<double>::quiet_NaN();
int failures = 0;

void report(int n, const std::string& name, bool ok, const std::string& detail) {
    std::cout << "criterion " << n << " [PRIMARY] " << name << ": " << (ok ? "PASS" : "FAIL") << " (" << detail
              << ")" << std::endl;
    if (!ok) ++failures;
}

std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

bool bit_identical(const WeierstrassData& a, const WeierstrassData& b) {
    if (a.phi.size() != b.phi.size()) return false;
    for (std::size_t k = 0; k < a.phi.size(); ++k) {
        const auto& x = a.phi[k].coeffs();
        const auto& y = b.phi[k].coeffs();
        if (x.size() != y.size() || std::memcmp(x.data(), y.data(), x.size() * sizeof(cplx)) != 0) return false;
    }
    return true;
}

double max_flux_gap(const FluxClass& a, const FluxClass& b) {
    double m = 0.0;
    for (std::size_t c = 0; c < a.per_curve.size(); ++c)
        for (std::size_t k = 0; k < a.per_curve[c].size(); ++k)
            m = std::max(m, std::abs(a.per_curve[c][k] - b.per_curve[c][k]));
    return m;
}

RunConfig demo_config(int jobs) {
    RunConfig c;
    c.halt_on_failure = false;
    c.jobs = jobs;
    return c;
}

// rank of the sample matrix from all 1x1, 2x2 and 3x3 minors, normalised by row norms
int minor_rank(const std::vector<std::vector<cplx>>& rows, double tol) {
    const int m = static_cast<int>(rows.size());
    const int n = static_cast<int>(rows[0].size());
    auto norm = [&](int i) {
        double s = 0.0;
        for (auto v : rows[i]) s += std::norm(v);
        return std::sqrt(s);
    };
    int best = 0;
    for (int size = 1; size <= std::min(3, n); ++size) {
        bool found = false;
        std::vector<bool> rsel(m, false), csel(n, false);
        std::fill(rsel.begin(), rsel.begin() + size, true);
        do {
            std::fill(csel.begin(), csel.end(), false);
            std::fill(csel.begin(), csel.begin() + size, true);
            std::vector<int> rr;
            for (int i = 0; i < m; ++i)
                if (rsel[i]) rr.push_back(i);
            double scale = 1.0;
            for (int i : rr) scale *= norm(i);
            if (scale == 0.0) continue;
            do {
                std::vector<int> cc;
                for (int j = 0; j < n; ++j)
                    if (csel[j]) cc.push_back(j);
                Eigen::MatrixXcd M(size, size);
                for (int a = 0; a < size; ++a)
                    for (int b = 0; b < size; ++b) M(a, b) = rows[rr[a]][cc[b]];
                if (std::abs(M.determinant()) / scale > tol) found = true;
            } while (!found && std::prev_permutation(csel.begin(), csel.end()));
        } while (!found && std::prev_permutation(rsel.begin(), rsel.end()));
        if (!found) break;
        best = size;
    }
    return best;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance checks"};
    int jobs = 1;
    app.add_option("--jobs", jobs, "worker threads");
    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(spdlog::level::err);
    const auto t_start = std::chrono::steady_clock::now();

    const RunConfig cfg = demo_config(jobs);
    const auto grid = make_grid(cfg);
    const auto family0 = make_family(cfg, grid);
    const HomologyBasis C = homology_basis(cfg.K0);

    RunReport demo, demo2, two;
    std::string demo_json, demo2_json;
    try {
        demo = run_homotopy_principle(cfg);
        demo_json = dump_json(report_to_json(demo));
        demo2 = run_homotopy_principle(cfg);
        demo2_json = dump_json(report_to_json(demo2));
        RunConfig c2 = cfg;
        c2.J = 2;
        c2.eps = {0.1, 0.04};
        two = run_homotopy_principle(c2);
    } catch (const std::exception& e) {
        std::cout << "acceptance: run failed: " << e.what() << std::endl;
        return 1;
    }
    const auto& s1 = demo.stages.at(0);

    // 1
    {
        double worst = 0.0;
        int stages = 0;
        for (const auto* r : {&demo, &two})
            for (const auto& s : r->stages) {
                ++stages;
                for (const auto& p : s.points) worst = std::max(worst, p.conformality);
            }
        for (const auto& w : two.members) worst = std::max(worst, conformality_residual(w, 64, 256));
        report(1, "conformality", stages == 3 && worst < 1e-10,
               "max sup|sum phi^2| " + fmt_num(worst) + " over " + std::to_string(stages) + " stages");
    }
    // 2
    {
        double worst = 0.0;
        for (std::size_t d = 0; d < grid.size(); ++d)
            worst = std::max(worst, max_flux_gap(flux(demo.members[d], C), flux(family0[d], C)));
        report(2, "flux invariance", worst < 1e-8,
               "max |Flux(out) - Flux(in)| " + fmt_num(worst) + " on " + std::to_string(grid.size()) + " points");
    }
    // 3
    {
        const AnnularDomain K = s1.K_prev;
        std::vector<cplx> zs;
        for (int i = 0; i < 10; ++i)
            for (int q = 0; q < 50; ++q)
                zs.push_back(std::polar(K.r_in + (K.r_out - K.r_in) * i / 9.0, 2 * pi * (q + 0.25) / 50));
        double worst = 0.0;
        for (std::size_t d = 0; d < grid.size(); ++d) {
            if (bit_identical(demo.members[d], family0[d])) continue;
            Immersion a{family0[d], cfg.x0, {}}, b{demo.members[d], cfg.x0, {}};
            for (auto z : zs) {
                auto ua = integrate_immersion(a, z), ub = integrate_immersion(b, z);
                for (std::size_t k = 0; k < ua.size(); ++k) worst = std::max(worst, std::abs(ua[k] - ub[k]));
            }
        }
        report(3, "approximation on K", worst < s1.eps,
               "max sup-change " + fmt_num(worst) + " at 500 samples vs eps " + fmt_num(s1.eps));
    }
    // 4
    {
        int rows = 0;
        bool same = two.stages.size() == 2;
        for (std::size_t d = 0; d < grid.size(); ++d)
            if (grid.is_fixpoint(static_cast<int>(d))) {
                ++rows;
                same = same && bit_identical(two.members[d], family0[d]);
            }
        report(4, "fixpoint exactness", same,
               std::to_string(rows) + " Q and t=0 members compared bitwise after J=2");
    }
    // 5
    {
        int gated = 0, certified = 0;
        double min_bound = kNaN, min_est = kNaN;
        for (const auto& p : s1.points) {
            if (!p.gated) continue;
            ++gated;
            if (p.certified && p.certified_bound >= s1.Lambda) ++certified;
            min_bound = std::isnan(min_bound) ? p.certified_bound : std::min(min_bound, p.certified_bound);
            min_est = std::isnan(min_est) ? p.distance_estimate : std::min(min_est, p.distance_estimate);
        }
        report(5, "distance certification", gated > 0 && certified == gated && min_est >= 0.9 * s1.Lambda,
               std::to_string(certified) + "/" + std::to_string(gated) + " gated certified, min bound " +
                   fmt_num(min_bound) + ", min estimate " + fmt_num(min_est) + " vs " + fmt_num(0.9 * s1.Lambda));
    }
    // 6
    {
        double worst = 0.0;
        int iters = 0, touched = 0;
        std::string err;
        for (const auto& p : s1.points) {
            if (p.weight == 0.0) continue;
            ++touched;
            worst = std::max(worst, p.period_residual);
            iters = std::max(iters, p.newton_iterations);
            if (!p.error.empty() && err.empty()) err = "; " + p.error;
        }
        report(6, "period exactness", touched > 0 && err.empty() && worst < 1e-9 && iters <= 10,
               "max period residual " + fmt_num(worst) + ", max Newton iterations " + std::to_string(iters) + err);
    }
    // 7
    {
        double dev = 0.0, hmin = kNaN;
        int zero = 0;
        bool unchanged = true;
        for (const auto& p : s1.points) {
            if (p.weight == 0.0) {
                ++zero;
                unchanged = unchanged && bit_identical(demo.members[p.d], family0[p.d]);
                continue;
            }
            dev = std::max(dev, p.h_dev_K);
            hmin = std::isnan(hmin) ? p.h_min_Omega : std::min(hmin, p.h_min_Omega);
        }
        const double e = cfg.h_eps;
        report(7, "Oka clauses", dev < e && hmin > 1.0 / e && unchanged,
               "max |h-1| on K " + fmt_num(dev) + " vs " + fmt_num(e) + ", min |h| on Omega " + fmt_num(hmin) +
                   " vs " + fmt_num(1.0 / e) + ", " + std::to_string(zero) + " weight-zero members " +
                   (unchanged ? "unchanged" : "CHANGED"));
    }
    // 8
    {
        RunConfig c = cfg;
        c.Q = {};
        c.flux.enabled = true;
        c.flux.from = {{0.0, 0.0, 2 * pi}};
        c.flux.to = {{0.0, 0.0, 4 * pi}};
        c.run_deform = false;
        double ferr = 0.0, rper = 0.0;
        std::string err;
        try {
            auto r = run_homotopy_principle(c);
            const auto g = make_grid(c);
            for (const auto& p : r.stages.at(0).points) {
                ferr = std::max(ferr, p.flux_error);
                rper = std::max(rper, p.real_period);
                const double want = 2 * pi * (1 + p.t);
                ferr = std::max(ferr, std::abs(flux(r.members[p.d], C).per_curve[0][2] - want));
                if (!p.error.empty() && err.empty()) err = "; " + p.error;
            }
        } catch (const std::exception& ex) {
            err = std::string("; ") + ex.what();
        }
        report(8, "flux prescription", err.empty() && ferr < 1e-6 && rper < 1e-9,
               "max flux error " + fmt_num(ferr) + ", max Re period " + fmt_num(rper) + err);
    }
    // 9
    {
        bool ok = true;
        std::string detail;
        const double Lambda = cfg.Lambda_unit;
        int idx = 0;
        for (auto A : {AnnularDomain::make(0.51, 0.69), AnnularDomain::make(1.43, 1.97), AnnularDomain::make(1.4, 1.8)}) {
            const double lambda = 0.6 * A.r_in * 0.01;
            const double T = 2 * std::sqrt(2.0) * Lambda;
            auto b = build_labyrinth(A, T, lambda, 0.1);
            auto st = verify_star(b.lab, lambda, T, 1000, cfg.seed + idx++);
            const bool good = b.cert.analytic_bound >= T && st.violations == 0 && st.valid;
            ok = ok && good;
            detail += (detail.empty() ? "" : "; ") + std::string("A(") + fmt_num(A.r_in) + "," + fmt_num(A.r_out) +
                      ") N=" + std::to_string(b.lab.N) + " bound " + fmt_num(b.cert.analytic_bound) + " vs " +
                      fmt_num(T) + ", " + std::to_string(st.violations) + "/" + std::to_string(st.trials) +
                      " violations";
        }
        report(9, "star certificate", ok, detail);
    }
    // 10
    {
        const AnnularDomain L = cfg.L;
        double res_err = 0.0;
        bool rank_ok = true;
        std::string ranks;
        struct Expect {
            std::string name;
            std::vector<cplx> residues;
        };
        for (const auto& e : {Expect{"catenoid", {0.0, 0.0, 1.0}}, Expect{"flat", {0.0, 0.0, 0.0}},
                              Expect{"catenoid4", {0.0, 0.0, 1.0, 0.0}}}) {
            auto w = preset(e.name, L);
            for (std::size_t k = 0; k < w.phi.size(); ++k) {
                const cplx want = cplx(0.0, 2 * pi) * e.residues[k];
                for (double r : {0.75, 1.0, 1.5}) {
                    const cplx got = contour_integral(w.phi[k], r, contour_nodes_for(w.phi[k].degree()));
                    res_err = std::max(res_err, std::abs(got - want) / std::max(1.0, std::abs(want)));
                }
            }
            std::vector<std::vector<cplx>> rows;
            for (auto z : rank_sample_points(L, 12)) {
                std::vector<cplx> row;
                for (const auto& f : w.phi) row.push_back(f(z));
                rows.push_back(row);
            }
            const int exhaustive = minor_rank(rows, 1e-8);
            const int claimed = std::min(3, value_rank(w).rank);
            rank_ok = rank_ok && exhaustive == claimed;
            ranks += " " + e.name + " " + std::to_string(claimed) + "/" + std::to_string(exhaustive);
        }
        const double est = estimate_distance(Immersion{flat(L), cfg.x0, {}}, 64, 512);
        const double geo = 0.5; // unit-speed radial segment from |z| = 1 to the inner circle
        const double rel = std::abs(est - geo) / geo;
        report(10, "oracle equivalence", res_err < 1e-12 && rank_ok && rel < 0.05,
               "residue rel error " + fmt_num(res_err) + ", ranks (claimed/minors)" + ranks +
                   ", flat geodesic " + fmt_num(est) + " vs " + fmt_num(geo));
    }
    // 11
    report(11, "determinism", demo_json == demo2_json && !demo_json.empty(),
           "two demo reports of " + std::to_string(demo_json.size()) + " bytes " +
               (demo_json == demo2_json ? "identical" : "differ"));

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    std::cout << "acceptance: " << 11 - failures << "/11 passed in " << fmt_num(secs) << " s" << std::endl;
    return failures == 0 ? 0 : 1;
}
