#include "msdl/fluxctl.hpp"

#include "msdl/deform.hpp"
#include "msdl/error.hpp"
#include "msdl/parallel.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace msdl {

namespace {

const cplx I(0.0, 1.0);

double flux_distance(const WeierstrassData& w, const FluxClass& F, const HomologyBasis& C) {
    auto P = periods(w, C);
    double m = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i)
        for (std::size_t j = 0; j < P[i].size(); ++j) m = std::max(m, std::abs(P[i][j] - I * F.per_curve[i][j]));
    return m;
}

double class_distance(const FluxClass& a, const FluxClass& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.per_curve.size(); ++i)
        for (std::size_t j = 0; j < a.per_curve[i].size(); ++j)
            m = std::max(m, std::abs(a.per_curve[i][j] - b.per_curve[i][j]));
    return m;
}

Spray pair_spray(const Laurent& f, const Laurent& g, const HomologyBasis& C, const FluxConfig& cfg) {
    for (int k = cfg.k_start;; k *= 2) {
        try {
            auto pts = select_basis_points({f}, {g}, C, k);
            return make_spray(build_bumps(C, pts, cfg.tau, cfg.bump_degree), SprayForm::Exponential, f.domain());
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::BasisPointsExhausted || 2 * k > cfg.k_max) throw;
        }
    }
}

} // namespace

FluxHomotopy linear_flux_target(const ParameterGrid& grid, const FluxClass& F0, const FluxClass& F1) {
    FluxHomotopy H;
    for (std::size_t p = 0; p < grid.p_count(); ++p)
        for (std::size_t t = 0; t < grid.t_count(); ++t) {
            double s = grid.t_values[t];
            FluxClass F = F0;
            for (std::size_t i = 0; i < F.per_curve.size(); ++i)
                for (std::size_t j = 0; j < F.per_curve[i].size(); ++j)
                    F.per_curve[i][j] = (1.0 - s) * F0.per_curve[i][j] + s * F1.per_curve[i][j];
            H.per_point.push_back(std::move(F));
        }
    return H;
}

FluxHomotopy current_flux(const std::vector<WeierstrassData>& family, const HomologyBasis& C) {
    FluxHomotopy H;
    for (const auto& w : family) H.per_point.push_back(flux(w, C));
    return H;
}

std::vector<std::pair<int, int>> flux_pairs(int n) {
    std::vector<std::pair<int, int>> out;
    for (int a = 0; a + 1 < n; a += 2) out.push_back({a, a + 1});
    if (n % 2 == 1 && n > 1) out.push_back({n - 1, 0});
    return out;
}

std::vector<std::string> validate_flux_target(const ParameterGrid& grid, const std::vector<WeierstrassData>& family,
                                              const FluxHomotopy& target, const HomologyBasis& C, double tol,
                                              double jump) {
    if (target.per_point.size() != grid.size() || family.size() != grid.size())
        throw Error(ErrorKind::InconsistentTarget, "flux target size does not match the grid");
    for (std::size_t d = 0; d < grid.size(); ++d) {
        const auto& F = target.per_point[d];
        if (F.per_curve.size() != C.size())
            throw Error(ErrorKind::InconsistentTarget, "flux target at " + std::to_string(d) + " has wrong curve count");
        for (const auto& row : F.per_curve)
            if (static_cast<int>(row.size()) != family[d].n())
                throw Error(ErrorKind::InconsistentTarget, "flux target at " + std::to_string(d) + " has wrong dimension");
        if (!grid.is_fixpoint(static_cast<int>(d))) continue;
        double dist = class_distance(F, flux(family[d], C, tol));
        if (!(dist < tol)) {
            std::ostringstream os;
            os << "target differs from the flux at fixpoint " << d << " by " << dist;
            throw Error(ErrorKind::InconsistentTarget, os.str());
        }
    }
    std::vector<std::string> warnings;
    for (std::size_t p = 0; p < grid.p_count(); ++p)
        for (std::size_t t = 0; t + 1 < grid.t_count(); ++t) {
            double j = class_distance(target.per_point[grid.flat(p, t)], target.per_point[grid.flat(p, t + 1)]);
            if (j > jump) {
                std::ostringstream os;
                os << "flux target jumps by " << j << " between t=" << grid.t_values[t] << " and t="
                   << grid.t_values[t + 1] << " at p=" << p;
                warnings.push_back(os.str());
            }
        }
    return warnings;
}

namespace {

// pair sweeps towards one target; throws on Newton failure or cycling
WeierstrassData sweep_to(const WeierstrassData& w0, const FluxClass& target, const HomologyBasis& C,
                         const FluxConfig& cfg, FluxPointRecord& rec, double tol) {
    WeierstrassData w = w0;
    const auto pairs = flux_pairs(w.n());
    double res = flux_distance(w, target, C);
    std::vector<double> trace{res};
    for (int sweep = 0; res >= tol && sweep < cfg.max_sweeps; ++sweep) {
        ++rec.sweeps;
        for (auto [a, b] : pairs) {
            auto sp = spinor_split(w, a, b);
            if (pair_independence(w, a, b) <= cfg.independence_tol)
                throw Error(ErrorKind::NonflatnessMargin, "component pair (" + std::to_string(a) + "," +
                                                              std::to_string(b) + ") fails independence");
            PeriodTarget T;
            for (std::size_t i = 0; i < C.size(); ++i) {
                cplx Pa = I * target.per_curve[i][a], Pb = I * target.per_curve[i][b];
                T.per_curve.push_back({Pa - I * Pb, Pa + I * Pb});
            }
            if (period_map_identity(sp.f, sp.g, C).distance(T) < cfg.newton_tol) continue;
            Spray spray = pair_spray(sp.f, sp.g, C, cfg);
            auto sol = solve_periods(Laurent::constant(w.domain, 1.0), spray, sp.f, sp.g, C, T, cfg.newton_tol,
                                     cfg.max_iter, cfg.substeps);
            rec.newton_iterations += sol.iterations;
            Laurent h = spray_function(spray, sol.zeta, 1e-15);
            std::vector<cplx> neg(sol.zeta.size());
            for (std::size_t j = 0; j < neg.size(); ++j) neg[j] = -sol.zeta[j];
            Laurent R = spray_function(spray, neg, 1e-15);
            LopezRosOptions opt{false, cfg.period_tol, 1e-13, &R};
            w = lopez_ros(w, h, a, b, opt).data;
        }
        res = flux_distance(w, target, C);
        trace.push_back(res);
        // cycling: no decrease over three sweeps
        if (trace.size() >= 4 && trace.back() >= trace[trace.size() - 4]) break;
    }
    if (!(res < tol)) {
        std::ostringstream os;
        os << "period residual " << res << " after " << rec.sweeps << " sweeps; trace:";
        for (double t : trace) os << ' ' << t;
        throw Error(ErrorKind::FluxUnreachable, os.str());
    }
    return w;
}

FluxClass blend(const FluxClass& a, const FluxClass& b, double s) {
    FluxClass F = a;
    for (std::size_t i = 0; i < F.per_curve.size(); ++i)
        for (std::size_t j = 0; j < F.per_curve[i].size(); ++j)
            F.per_curve[i][j] = (1.0 - s) * a.per_curve[i][j] + s * b.per_curve[i][j];
    return F;
}

} // namespace

WeierstrassData prescribe_flux_point(const WeierstrassData& w0, const FluxClass& target, const HomologyBasis& C,
                                     const FluxConfig& cfg, FluxPointRecord& rec) {
    // continuation in the target: each accepted step rebuilds the sprays around the current data
    WeierstrassData w = w0;
    FluxClass start = flux(w0, C, cfg.period_tol);
    double done = 0.0, step = 1.0;
    std::string last;
    for (int tries = 0; tries < cfg.max_steps; ++tries) {
        double next = std::min(1.0, done + step);
        const bool final = next == 1.0;
        try {
            w = sweep_to(w, final ? target : blend(start, target, next), C, cfg, rec,
                         final ? cfg.flux_tol * 1e-2 : cfg.flux_tol);
            done = next;
            ++rec.steps;
            if (final) return w;
            step = std::min(1.0, 2.0 * step);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NewtonFailed && e.kind() != ErrorKind::FluxUnreachable &&
                e.kind() != ErrorKind::DegreeExhausted)
                throw;
            last = e.what();
            step *= 0.5;
        }
    }
    std::ostringstream os;
    os << "reached " << done << " of the target path in " << rec.steps << " steps; last failure: " << last;
    throw Error(ErrorKind::FluxUnreachable, os.str());
}

FluxResult prescribe_flux(const ParameterGrid& grid, const std::vector<WeierstrassData>& family,
                          const FluxHomotopy& target, const FluxConfig& cfg) {
    FluxResult out;
    out.members = family;
    out.points.resize(family.size());
    if (family.empty()) return out;
    const HomologyBasis C = homology_basis(cfg.K);
    out.warnings = validate_flux_target(grid, family, target, C, cfg.period_tol, cfg.continuity_jump);
    for (const auto& s : out.warnings) spdlog::warn("{}", s);

    parallel_for(static_cast<int>(family.size()), cfg.jobs, [&](int d) {
        auto& rec = out.points[d];
        rec.d = d;
        if (!grid.is_fixpoint(d)) {
            try {
                out.members[d] = prescribe_flux_point(family[d], target.per_point[d], C, cfg, rec);
                rec.touched = true;
            } catch (const Error& e) {
                rec.error = e.what();
            }
        }
        const auto& w = out.members[d];
        auto P = periods(w, C);
        rec.achieved.clear();
        for (const auto& v : P.front()) rec.achieved.push_back(v.imag());
        double fe = 0.0, re = 0.0;
        for (std::size_t i = 0; i < P.size(); ++i)
            for (std::size_t j = 0; j < P[i].size(); ++j) {
                fe = std::max(fe, std::abs(P[i][j].imag() - target.per_point[d].per_curve[i][j]));
                re = std::max(re, std::abs(P[i][j].real()));
            }
        rec.flux_error = fe;
        rec.real_period = re;
        rec.sup_change_K = rec.touched ? sup_change_on(family[d], w, cfg.K, cfg.x0) : 0.0;
        rec.conformality = rec.touched ? conformality_residual(w) : 0.0;
    });
    for (const auto& rec : out.points) {
        if (!rec.error.empty()) {
            out.ok = false;
            spdlog::warn("flux point {}: {}", rec.d, rec.error);
        }
        if (!(rec.flux_error < cfg.flux_tol) || !(rec.real_period < cfg.period_tol)) out.ok = false;
        if (rec.sup_change_K >= cfg.eps)
            spdlog::info("flux point {}: sup-change on K {:.4g} exceeds eps {:.4g}", rec.d, rec.sup_change_K, cfg.eps);
    }
    return out;
}

} // namespace msdl
