#include "msdl/driver.hpp"

#include "msdl/error.hpp"
#include "msdl/parallel.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace msdl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::ConfigInvalid, what); }

void check_keys(const ojson& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) bad(where + " must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k)) bad("unknown key '" + where + (where.empty() ? "" : ".") + k + "'");
}

template <class T>
void get(const ojson& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        bad("key '" + where + "." + key + "' has the wrong type");
    }
}

AnnularDomain annulus_from(const ojson& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        bad(where + " must be [r_in, r_out]");
    return {j[0].get<double>(), j[1].get<double>()};
}

ojson annulus_json(const AnnularDomain& A) { return ojson::array({A.r_in, A.r_out}); }

bool same_data(const WeierstrassData& a, const WeierstrassData& b) {
    if (a.n() != b.n()) return false;
    for (int j = 0; j < a.n(); ++j)
        if (a.phi[j].coeffs() != b.phi[j].coeffs()) return false;
    return true;
}

FluxClass flux_of(const WeierstrassData& w, const HomologyBasis& C) {
    FluxClass F;
    for (const auto& row : periods(w, C)) {
        std::vector<double> v;
        for (const auto& p : row) v.push_back(p.imag());
        F.per_curve.push_back(v);
    }
    return F;
}

double real_period_max(const WeierstrassData& w, const HomologyBasis& C) {
    double m = 0.0;
    for (const auto& row : periods(w, C))
        for (const auto& p : row) m = std::max(m, std::abs(p.real()));
    return m;
}

double class_gap(const FluxClass& a, const FluxClass& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.per_curve.size(); ++i)
        for (std::size_t k = 0; k < a.per_curve[i].size(); ++k)
            m = std::max(m, std::abs(a.per_curve[i][k] - b.per_curve[i][k]));
    return m;
}

void emit(std::ostringstream& os, const ojson& j, int indent) {
    const std::string pad(indent + 2, ' '), end(indent, ' ');
    switch (j.type()) {
    case ojson::value_t::object: {
        if (j.empty()) {
            os << "{}";
            return;
        }
        os << "{\n";
        bool first = true;
        for (const auto& [k, v] : j.items()) {
            if (!first) os << ",\n";
            first = false;
            os << pad << ojson(k).dump() << ": ";
            emit(os, v, indent + 2);
        }
        os << '\n' << end << '}';
        return;
    }
    case ojson::value_t::array: {
        if (j.empty()) {
            os << "[]";
            return;
        }
        bool scalars = true;
        for (const auto& v : j) scalars = scalars && v.is_primitive();
        if (scalars) {
            os << '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) os << ", ";
                emit(os, j[i], indent);
            }
            os << ']';
            return;
        }
        os << "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) os << ",\n";
            os << pad;
            emit(os, j[i], indent + 2);
        }
        os << '\n' << end << ']';
        return;
    }
    case ojson::value_t::number_float: {
        double x = j.get<double>();
        if (!std::isfinite(x)) {
            os << "null";
            return;
        }
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        std::string s(buf);
        // keep it a float on re-parse
        if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
        os << s;
        return;
    }
    default:
        os << j.dump();
    }
}

double num_or_nan(const ojson& j) { return j.is_null() ? kNaN : j.get<double>(); }

} // namespace

RunConfig parse_config(const ojson& j) {
    RunConfig c;
    check_keys(j, "", {"schema_version", "domain", "family", "grid", "stages", "flux", "tolerances", "deform",
                       "estimate", "steps", "seed", "jobs"});
    get(j, "schema_version", c.schema_version, "");
    if (c.schema_version != 1) bad("schema_version must be 1");
    if (j.contains("domain")) {
        const auto& d = j["domain"];
        check_keys(d, "domain", {"L", "K0", "x0"});
        if (d.contains("L")) c.L = annulus_from(d["L"], "domain.L");
        if (d.contains("K0")) c.K0 = annulus_from(d["K0"], "domain.K0");
        if (d.contains("x0")) {
            const auto& x = d["x0"];
            if (!x.is_array() || x.size() != 2) bad("domain.x0 must be [re, im]");
            c.x0 = {x[0].get<double>(), x[1].get<double>()};
        }
    }
    if (j.contains("family")) {
        const auto& f = j["family"];
        check_keys(f, "family", {"preset", "amp"});
        get(f, "preset", c.preset, "family");
        get(f, "amp", c.family_amp, "family");
    }
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        check_keys(g, "grid", {"dims", "n", "nt", "Q"});
        get(g, "dims", c.grid_dims, "grid");
        get(g, "n", c.grid_n, "grid");
        get(g, "nt", c.grid_nt, "grid");
        get(g, "Q", c.Q, "grid");
    }
    if (j.contains("stages")) {
        const auto& s = j["stages"];
        check_keys(s, "stages", {"J", "Lambda_unit", "eps", "halt_on_failure"});
        get(s, "J", c.J, "stages");
        get(s, "Lambda_unit", c.Lambda_unit, "stages");
        get(s, "eps", c.eps, "stages");
        get(s, "halt_on_failure", c.halt_on_failure, "stages");
    }
    if (j.contains("flux")) {
        const auto& f = j["flux"];
        check_keys(f, "flux", {"enabled", "from", "to"});
        get(f, "enabled", c.flux.enabled, "flux");
        get(f, "from", c.flux.from, "flux");
        get(f, "to", c.flux.to, "flux");
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        check_keys(t, "tolerances", {"null_tol", "period_tol", "newton_tol", "flux_tol"});
        get(t, "null_tol", c.null_tol, "tolerances");
        get(t, "period_tol", c.period_tol, "tolerances");
        get(t, "newton_tol", c.newton_tol, "tolerances");
        get(t, "flux_tol", c.flux_tol, "tolerances");
    }
    if (j.contains("deform")) {
        const auto& d = j["deform"];
        check_keys(d, "deform", {"max_iter", "oka_degree", "bump_degree", "tau", "beta", "lambda_frac", "rho_frac",
                                 "h_eps", "star_trials"});
        get(d, "max_iter", c.max_iter, "deform");
        get(d, "oka_degree", c.oka_degree, "deform");
        get(d, "bump_degree", c.bump_degree, "deform");
        get(d, "tau", c.tau, "deform");
        get(d, "beta", c.beta, "deform");
        get(d, "lambda_frac", c.lambda_frac, "deform");
        get(d, "rho_frac", c.rho_frac, "deform");
        get(d, "h_eps", c.h_eps, "deform");
        get(d, "star_trials", c.star_trials, "deform");
    }
    if (j.contains("estimate")) {
        const auto& e = j["estimate"];
        check_keys(e, "estimate", {"n_r", "n_theta"});
        get(e, "n_r", c.estimate_nr, "estimate");
        get(e, "n_theta", c.estimate_ntheta, "estimate");
    }
    if (j.contains("steps")) {
        const auto& s = j["steps"];
        check_keys(s, "steps", {"flux", "deform"});
        get(s, "flux", c.run_flux, "steps");
        get(s, "deform", c.run_deform, "steps");
    }
    get(j, "seed", c.seed, "");
    get(j, "jobs", c.jobs, "");
    validate_config(c);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open config '" + path + "'");
    ojson j;
    try {
        j = ojson::parse(in);
    } catch (const nlohmann::json::exception& e) {
        bad("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

ojson config_to_json(const RunConfig& c) {
    ojson j;
    j["schema_version"] = c.schema_version;
    j["domain"] = {{"L", annulus_json(c.L)}, {"K0", annulus_json(c.K0)}, {"x0", {c.x0.real(), c.x0.imag()}}};
    j["family"] = {{"preset", c.preset}, {"amp", c.family_amp}};
    j["grid"] = {{"dims", c.grid_dims}, {"n", c.grid_n}, {"nt", c.grid_nt}, {"Q", c.Q}};
    j["stages"] = {{"J", c.J}, {"Lambda_unit", c.Lambda_unit}, {"eps", c.eps}, {"halt_on_failure", c.halt_on_failure}};
    j["flux"] = {{"enabled", c.flux.enabled}, {"from", c.flux.from}, {"to", c.flux.to}};
    j["tolerances"] = {{"null_tol", c.null_tol},
                       {"period_tol", c.period_tol},
                       {"newton_tol", c.newton_tol},
                       {"flux_tol", c.flux_tol}};
    j["deform"] = {{"max_iter", c.max_iter},       {"oka_degree", c.oka_degree}, {"bump_degree", c.bump_degree},
                   {"tau", c.tau},                 {"beta", c.beta},             {"lambda_frac", c.lambda_frac},
                   {"rho_frac", c.rho_frac},       {"h_eps", c.h_eps},           {"star_trials", c.star_trials}};
    j["estimate"] = {{"n_r", c.estimate_nr}, {"n_theta", c.estimate_ntheta}};
    j["steps"] = {{"flux", c.run_flux}, {"deform", c.run_deform}};
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    return j;
}

void validate_config(const RunConfig& c) {
    if (c.schema_version != 1) bad("schema_version must be 1");
    if (!(c.L.r_in > 0.0) || !(c.L.r_out > c.L.r_in)) bad("domain.L must satisfy 0 < r_in < r_out");
    if (!(c.K0.r_out > c.K0.r_in) || !c.L.strictly_contains(c.K0)) bad("domain.K0 must lie inside domain.L");
    if (!c.K0.contains(c.x0)) bad("domain.x0 must lie in domain.K0");
    if (c.preset != "catenoid" && c.preset != "flat" && c.preset != "catenoid4") bad("family.preset unknown");
    if (!std::isfinite(c.family_amp) || c.family_amp <= -1.0) bad("family.amp must exceed -1");
    if (c.grid_dims < 0 || c.grid_dims > 3 || c.grid_n < 1 || c.grid_nt < 2) bad("grid sizes out of range");
    const int np = static_cast<int>(std::pow(c.grid_n, c.grid_dims));
    for (int q : c.Q)
        if (q < 0 || q >= np) bad("grid.Q index " + std::to_string(q) + " out of range");
    if (c.J < 0) bad("stages.J must be >= 0");
    if (static_cast<int>(c.eps.size()) != c.J) bad("stages.eps must list one value per stage");
    for (int j = 0; j < c.J; ++j) {
        if (!(c.eps[j] > 0.0)) bad("stages.eps values must be positive");
        if (j > 0 && !(c.eps[j] < c.eps[j - 1] / 2.0))
            bad("stages.eps violates eps_j < eps_{j-1}/2 at j = " + std::to_string(j + 1));
    }
    if (!(c.Lambda_unit > 0.0)) bad("stages.Lambda_unit must be positive");
    for (double t : {c.null_tol, c.period_tol, c.newton_tol, c.flux_tol, c.tau, c.beta, c.lambda_frac, c.rho_frac,
                     c.h_eps})
        if (!(t > 0.0)) bad("tolerances and deform parameters must be positive");
    if (c.lambda_frac >= 1.0 || c.rho_frac >= 1.0) bad("deform.lambda_frac and deform.rho_frac must be below 1");
    if (c.estimate_nr < 16 || c.estimate_ntheta < 64) bad("estimate resolution must be at least 16 x 64");
    if (c.max_iter < 1 || c.oka_degree < 1 || c.bump_degree < 1 || c.star_trials < 1) bad("deform counts must be >= 1");
    if (c.jobs < 1) bad("jobs must be >= 1");
    if (c.flux.enabled) {
        const int n = c.preset == "catenoid4" ? 4 : 3;
        auto shape_ok = [&](const std::vector<std::vector<double>>& F) {
            return F.size() == 1 && static_cast<int>(F[0].size()) == n;
        };
        if (!c.flux.from.empty() && !shape_ok(c.flux.from)) bad("flux.from must be [[" + std::to_string(n) + " values]]");
        if (!shape_ok(c.flux.to)) bad("flux.to must be [[" + std::to_string(n) + " values]]");
    }
}

ParameterGrid make_grid(const RunConfig& cfg) { return uniform_grid(cfg.grid_dims, cfg.grid_n, cfg.grid_nt, cfg.Q); }

std::vector<WeierstrassData> make_family(const RunConfig& cfg, const ParameterGrid& grid) {
    const auto base = preset(cfg.preset, cfg.L);
    std::vector<WeierstrassData> fam;
    for (int d = 0; d < static_cast<int>(grid.size()); ++d) {
        const auto& p = grid.points[grid.p_of(d)];
        double s = 1.0 + cfg.family_amp * (p.empty() ? 0.0 : p[0]) * grid.t_values[grid.t_of(d)];
        auto w = base;
        if (s != 1.0)
            for (auto& f : w.phi) f *= s;
        fam.push_back(std::move(w));
    }
    return fam;
}

RunReport run_homotopy_principle(const RunConfig& cfg) {
    validate_config(cfg);
    RunReport rep;
    rep.config = config_to_json(cfg);
    const auto grid = make_grid(cfg);
    const auto family0 = make_family(cfg, grid);
    rep.members = family0;
    if (cfg.J == 0) return rep;
    const auto ex = build_exhaustion(cfg.K0, cfg.L, cfg.J);
    const HomologyBasis C = homology_basis(cfg.K0);

    FluxHomotopy target = current_flux(family0, C);
    const bool do_flux = cfg.flux.enabled && cfg.run_flux;
    if (do_flux) {
        FluxClass to{cfg.flux.to};
        for (int d = 0; d < static_cast<int>(grid.size()); ++d) {
            if (grid.q_mask[grid.p_of(d)]) continue;
            const double t = grid.t_values[grid.t_of(d)];
            FluxClass from = cfg.flux.from.empty() ? target.per_point[grid.flat(grid.p_of(d), 0)] : FluxClass{cfg.flux.from};
            FluxClass F = from;
            for (std::size_t k = 0; k < F.per_curve[0].size(); ++k)
                F.per_curve[0][k] = (1.0 - t) * from.per_curve[0][k] + t * to.per_curve[0][k];
            target.per_point[d] = F;
        }
    }

    for (int j = 1; j <= cfg.J; ++j) {
        StageReport st;
        st.j = j;
        st.Lambda = j * cfg.Lambda_unit;
        st.eps = cfg.eps[j - 1];
        st.r_cut = 1.0 / (j + 1);
        st.K_prev = ex.stages[j - 1];
        st.K = ex.stages[j];
        st.points.resize(grid.size());
        for (int d = 0; d < static_cast<int>(grid.size()); ++d) {
            auto& pr = st.points[d];
            pr.d = d;
            pr.p = grid.points[grid.p_of(d)];
            pr.t = grid.t_values[grid.t_of(d)];
            pr.fixpoint = grid.is_fixpoint(d);
            pr.distance_estimate = kNaN;
        }

        if (do_flux) {
            FluxConfig fc;
            fc.K = st.K_prev;
            fc.x0 = cfg.x0;
            fc.eps = st.eps;
            fc.period_tol = cfg.period_tol;
            fc.flux_tol = cfg.flux_tol;
            fc.newton_tol = cfg.newton_tol;
            fc.tau = cfg.tau;
            fc.bump_degree = cfg.bump_degree;
            fc.jobs = cfg.jobs;
            auto fr = prescribe_flux(grid, rep.members, target, fc);
            for (const auto& w : fr.warnings) st.diagnostics.push_back("flux: " + w);
            for (int d = 0; d < static_cast<int>(grid.size()); ++d) {
                st.points[d].sup_change_flux = fr.points[d].sup_change_K;
                if (!fr.points[d].error.empty()) st.points[d].error = "flux: " + fr.points[d].error;
            }
            rep.members = std::move(fr.members);
        }

        if (cfg.run_deform) {
            DeformConfig dc;
            dc.K = st.K_prev;
            dc.x0 = cfg.x0;
            dc.Lambda = st.Lambda;
            dc.eps = st.eps;
            dc.r_cut = st.r_cut;
            dc.T = grid.T_chain[std::min<std::size_t>(j - 1, grid.T_chain.size() - 1)];
            dc.h_eps = cfg.h_eps;
            dc.beta = cfg.beta;
            dc.lambda_frac = cfg.lambda_frac;
            dc.rho_frac = cfg.rho_frac;
            dc.oka_degree = cfg.oka_degree;
            dc.bump_degree = cfg.bump_degree;
            dc.tau = cfg.tau;
            dc.newton_tol = cfg.newton_tol;
            dc.max_iter = cfg.max_iter;
            dc.period_tol = cfg.period_tol;
            dc.star_trials = cfg.star_trials;
            dc.seed = cfg.seed + 7919ull * j;
            dc.jobs = cfg.jobs;
            auto dr = increase_distance(grid, rep.members, dc);
            st.cover_size = static_cast<int>(dr.stages.size());
            for (const auto& s : dr.stages) {
                st.oka_residual = std::max(st.oka_residual, s.oka.residual);
                st.oka_budget = s.oka_budget;
                st.h_required = std::max(st.h_required, s.h_required);
                st.scale = s.scale;
            }
            for (int d = 0; d < static_cast<int>(grid.size()); ++d) {
                const auto& q = dr.points[d];
                auto& pr = st.points[d];
                pr.gated = q.gated;
                pr.weight = q.weight;
                pr.kappa = q.kappa;
                pr.newton_iterations = q.newton_iterations;
                pr.newton_residual = q.newton_residual;
                pr.period_residual = q.period_residual;
                pr.h_dev_K = q.h_dev_K;
                pr.h_min_Omega = q.h_min_Omega;
                pr.sup_change_deform = q.sup_change_K;
                pr.certified = q.certified;
                pr.certified_bound = q.gated ? q.cert.certified_bound : 0.0;
                pr.rho = q.cert.rho;
                pr.sigma = q.cert.sigma;
                pr.lambda = q.cert.lambda;
                pr.h_min = q.cert.h_min_on_Omega;
                pr.failed_clauses = q.cert.failed();
                if (!q.error.empty()) pr.error += (pr.error.empty() ? "" : "; ") + std::string("deform: ") + q.error;
            }
            rep.members = std::move(dr.members);
        }

        parallel_for(static_cast<int>(grid.size()), cfg.jobs, [&](int d) {
            auto& pr = st.points[d];
            const auto& w = rep.members[d];
            pr.conformality = conformality_residual(w);
            pr.real_period = real_period_max(w, C);
            auto F = flux_of(w, C);
            pr.flux = F.per_curve[0];
            pr.flux_error = class_gap(F, target.per_point[d]);
            if (pr.gated && cfg.run_deform) pr.distance_estimate =
                estimate_distance(Immersion{w, cfg.x0, {}}, cfg.estimate_nr, cfg.estimate_ntheta);
        });

        for (auto& pr : st.points) {
            const int d = pr.d;
            auto note = [&](char letter, const std::string& what) {
                std::ostringstream os;
                os << "(" << letter << "_" << j << ") grid point " << d << ": " << what;
                st.diagnostics.push_back(os.str());
            };
            pr.A = !pr.fixpoint || same_data(rep.members[d], family0[d]);
            if (!pr.A) note('A', "fixpoint changed");
            pr.B = pr.error.empty() && pr.sup_change_deform < st.eps;
            if (!pr.B) {
                std::ostringstream os;
                os << "sup-change on K " << pr.sup_change_deform << " vs eps " << st.eps;
                if (!pr.error.empty()) os << "; " << pr.error;
                note('B', os.str());
            }
            pr.C = !(pr.gated && cfg.run_deform) || (pr.certified && pr.certified_bound >= st.Lambda);
            if (!pr.C) {
                std::ostringstream os;
                os << "certified bound " << pr.certified_bound << " < Lambda " << st.Lambda;
                if (!pr.failed_clauses.empty()) os << " (failed: " << pr.failed_clauses << ")";
                note('C', os.str());
            }
            pr.E = pr.flux_error < cfg.flux_tol && pr.real_period < cfg.period_tol;
            if (!pr.E) {
                std::ostringstream os;
                os << "flux error " << pr.flux_error << ", real period " << pr.real_period;
                note('E', os.str());
            }
            st.A = st.A && pr.A;
            st.B = st.B && pr.B;
            st.C = st.C && pr.C;
            st.E = st.E && pr.E;
        }
        st.D = j == 1 || cfg.eps[j - 1] < cfg.eps[j - 2] / 2.0;
        const bool stage_ok = st.A && st.B && st.C && st.D && st.E;
        spdlog::info("stage {}: A={} B={} C={} D={} E={}", j, st.A, st.B, st.C, st.D, st.E);
        rep.ok = rep.ok && stage_ok;
        rep.stages.push_back(std::move(st));
        if (!stage_ok && cfg.halt_on_failure) {
            rep.halted = rep.stages.back().diagnostics.empty() ? "stage " + std::to_string(j) + " failed"
                                                              : rep.stages.back().diagnostics.front();
            spdlog::error("halting: {}", rep.halted);
            break;
        }
    }
    return rep;
}

ojson report_to_json(const RunReport& r) {
    ojson j;
    j["schema_version"] = 1;
    j["config"] = r.config;
    j["ok"] = r.ok;
    j["halted"] = r.halted;
    j["stages"] = ojson::array();
    for (const auto& s : r.stages) {
        ojson js;
        js["j"] = s.j;
        js["Lambda"] = s.Lambda;
        js["eps"] = s.eps;
        js["r_cut"] = s.r_cut;
        js["K_prev"] = annulus_json(s.K_prev);
        js["K"] = annulus_json(s.K);
        js["cover_size"] = s.cover_size;
        js["oka_residual"] = s.oka_residual;
        js["oka_budget"] = s.oka_budget;
        js["h_required"] = s.h_required;
        js["scale"] = s.scale;
        js["conditions"] = {{"A", s.A}, {"B", s.B}, {"C", s.C}, {"D", s.D}, {"E", s.E}};
        js["diagnostics"] = s.diagnostics;
        js["points"] = ojson::array();
        for (const auto& p : s.points) {
            ojson jp;
            jp["d"] = p.d;
            jp["p"] = p.p;
            jp["t"] = p.t;
            jp["fixpoint"] = p.fixpoint;
            jp["gated"] = p.gated;
            jp["weight"] = p.weight;
            jp["kappa"] = p.kappa;
            jp["newton_iterations"] = p.newton_iterations;
            jp["newton_residual"] = p.newton_residual;
            jp["period_residual"] = p.period_residual;
            jp["h_dev_K"] = p.h_dev_K;
            jp["h_min_Omega"] = p.h_min_Omega;
            jp["sup_change_flux"] = p.sup_change_flux;
            jp["sup_change_deform"] = p.sup_change_deform;
            jp["conformality"] = p.conformality;
            jp["real_period"] = p.real_period;
            jp["flux"] = p.flux;
            jp["flux_error"] = p.flux_error;
            jp["certified"] = p.certified;
            jp["certified_bound"] = p.certified_bound;
            jp["rho"] = p.rho;
            jp["sigma"] = p.sigma;
            jp["lambda"] = p.lambda;
            jp["h_min"] = p.h_min;
            jp["failed_clauses"] = p.failed_clauses;
            jp["distance_estimate"] = p.distance_estimate;
            jp["conditions"] = {{"A", p.A}, {"B", p.B}, {"C", p.C}, {"E", p.E}};
            jp["error"] = p.error;
            js["points"].push_back(std::move(jp));
        }
        j["stages"].push_back(std::move(js));
    }
    return j;
}

RunReport report_from_json(const ojson& j) {
    RunReport r;
    r.config = j.at("config");
    r.ok = j.at("ok").get<bool>();
    r.halted = j.at("halted").get<std::string>();
    for (const auto& js : j.at("stages")) {
        StageReport s;
        s.j = js.at("j").get<int>();
        s.Lambda = js.at("Lambda").get<double>();
        s.eps = js.at("eps").get<double>();
        s.r_cut = js.at("r_cut").get<double>();
        s.K_prev = annulus_from(js.at("K_prev"), "K_prev");
        s.K = annulus_from(js.at("K"), "K");
        s.cover_size = js.at("cover_size").get<int>();
        s.oka_residual = num_or_nan(js.at("oka_residual"));
        s.oka_budget = num_or_nan(js.at("oka_budget"));
        s.h_required = num_or_nan(js.at("h_required"));
        s.scale = num_or_nan(js.at("scale"));
        const auto& c = js.at("conditions");
        s.A = c.at("A").get<bool>();
        s.B = c.at("B").get<bool>();
        s.C = c.at("C").get<bool>();
        s.D = c.at("D").get<bool>();
        s.E = c.at("E").get<bool>();
        s.diagnostics = js.at("diagnostics").get<std::vector<std::string>>();
        for (const auto& jp : js.at("points")) {
            PointReport p;
            p.d = jp.at("d").get<int>();
            p.p = jp.at("p").get<std::vector<double>>();
            p.t = jp.at("t").get<double>();
            p.fixpoint = jp.at("fixpoint").get<bool>();
            p.gated = jp.at("gated").get<bool>();
            p.weight = num_or_nan(jp.at("weight"));
            p.kappa = num_or_nan(jp.at("kappa"));
            p.newton_iterations = jp.at("newton_iterations").get<int>();
            p.newton_residual = num_or_nan(jp.at("newton_residual"));
            p.period_residual = num_or_nan(jp.at("period_residual"));
            p.h_dev_K = num_or_nan(jp.at("h_dev_K"));
            p.h_min_Omega = num_or_nan(jp.at("h_min_Omega"));
            p.sup_change_flux = num_or_nan(jp.at("sup_change_flux"));
            p.sup_change_deform = num_or_nan(jp.at("sup_change_deform"));
            p.conformality = num_or_nan(jp.at("conformality"));
            p.real_period = num_or_nan(jp.at("real_period"));
            for (const auto& v : jp.at("flux")) p.flux.push_back(num_or_nan(v));
            p.flux_error = num_or_nan(jp.at("flux_error"));
            p.certified = jp.at("certified").get<bool>();
            p.certified_bound = num_or_nan(jp.at("certified_bound"));
            p.rho = num_or_nan(jp.at("rho"));
            p.sigma = num_or_nan(jp.at("sigma"));
            p.lambda = num_or_nan(jp.at("lambda"));
            p.h_min = num_or_nan(jp.at("h_min"));
            p.failed_clauses = jp.at("failed_clauses").get<std::string>();
            p.distance_estimate = num_or_nan(jp.at("distance_estimate"));
            const auto& pc = jp.at("conditions");
            p.A = pc.at("A").get<bool>();
            p.B = pc.at("B").get<bool>();
            p.C = pc.at("C").get<bool>();
            p.E = pc.at("E").get<bool>();
            p.error = jp.at("error").get<std::string>();
            s.points.push_back(std::move(p));
        }
        r.stages.push_back(std::move(s));
    }
    return r;
}

std::string dump_json(const ojson& j) {
    std::ostringstream os;
    emit(os, j, 0);
    os << '\n';
    return os.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::error_code ec;
    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent, ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
    out << text;
    if (!out) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

void export_report(const RunReport& r, const std::string& dir) {
    write_text(dir + "/report.json", dump_json(report_to_json(r)));
    auto g17 = [](double x) {
        if (!std::isfinite(x)) return std::string();
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    std::ostringstream fl, di;
    fl << "stage,d,t,component,flux,flux_error\n";
    di << "stage,d,t,gated,certified,certified_bound,distance_estimate\n";
    for (const auto& s : r.stages)
        for (const auto& p : s.points) {
            for (std::size_t k = 0; k < p.flux.size(); ++k)
                fl << s.j << ',' << p.d << ',' << g17(p.t) << ',' << k + 1 << ',' << g17(p.flux[k]) << ','
                   << g17(p.flux_error) << '\n';
            di << s.j << ',' << p.d << ',' << g17(p.t) << ',' << p.gated << ',' << p.certified << ','
               << g17(p.certified_bound) << ',' << g17(p.distance_estimate) << '\n';
        }
    write_text(dir + "/flux.csv", fl.str());
    write_text(dir + "/distance.csv", di.str());
    export_coefficients(r.members, dir + "/coefficients.csv");
}

void export_coefficients(const std::vector<WeierstrassData>& members, const std::string& path) {
    std::ostringstream os;
    os << "d,component,k,re,im\n";
    char buf[96];
    for (std::size_t d = 0; d < members.size(); ++d)
        for (int c = 0; c < members[d].n(); ++c) {
            const auto& f = members[d].phi[c];
            for (int k = -f.degree(); k <= f.degree(); ++k) {
                cplx v = f.coeff(k);
                if (v == cplx(0.0)) continue;
                std::snprintf(buf, sizeof buf, "%.17g,%.17g", v.real(), v.imag());
                os << d << ',' << c + 1 << ',' << k << ',' << buf << '\n';
            }
        }
    write_text(path, os.str());
}

std::vector<WeierstrassData> load_coefficients(const std::string& path, const AnnularDomain& L) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<std::map<int, cplx>>> raw;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string f[5];
        for (auto& x : f)
            if (!std::getline(ls, x, ',')) throw Error(ErrorKind::Io, path + ":" + std::to_string(lineno) + ": bad row");
        std::size_t d = std::stoul(f[0]), c = std::stoul(f[1]);
        if (c < 1) throw Error(ErrorKind::Io, path + ":" + std::to_string(lineno) + ": component must be >= 1");
        if (raw.size() <= d) raw.resize(d + 1);
        if (raw[d].size() < c) raw[d].resize(c);
        raw[d][c - 1][std::stoi(f[2])] = {std::stod(f[3]), std::stod(f[4])};
    }
    std::vector<WeierstrassData> out;
    for (auto& comps : raw) {
        std::vector<Laurent> phi;
        for (auto& m : comps) phi.push_back(Laurent::from_map(L, m));
        out.push_back(make_data(L, std::move(phi)));
    }
    return out;
}

MeshStats export_mesh(const Immersion& im, int n_r, int n_theta, const std::string& path) {
    if (n_r < 8 || n_theta < 32) throw Error(ErrorKind::Undersampled, "mesh resolution must be at least 8 x 32");
    const auto& L = im.data.domain;
    Primitive P(im.data, im.x0, im.base_value);
    const int n = im.data.n();
    std::vector<std::vector<std::vector<double>>> rings;
    for (int i = 0; i < n_r; ++i) rings.push_back(P.on_circle(L.r_in + L.width() * i / (n_r - 1), n_theta, 0.0));
    std::ostringstream os, side;
    char buf[128];
    side << "i,j";
    for (int c = 0; c < n; ++c) side << ",u" << c + 1;
    side << '\n';
    for (int i = 0; i < n_r; ++i)
        for (int q = 0; q < n_theta; ++q) {
            double v[3] = {0.0, 0.0, 0.0};
            for (int c = 0; c < std::min(n, 3); ++c) v[c] = rings[i][c][q];
            std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v[0], v[1], v[2]);
            os << buf;
            if (n > 3) {
                side << i << ',' << q;
                for (int c = 0; c < n; ++c) {
                    std::snprintf(buf, sizeof buf, ",%.17g", rings[i][c][q]);
                    side << buf;
                }
                side << '\n';
            }
        }
    MeshStats st;
    st.vertices = n_r * n_theta;
    for (int i = 0; i + 1 < n_r; ++i)
        for (int q = 0; q < n_theta; ++q) {
            int a = i * n_theta + q + 1, b = i * n_theta + (q + 1) % n_theta + 1;
            int c = a + n_theta, d = b + n_theta;
            os << "f " << a << ' ' << b << ' ' << d << '\n' << "f " << a << ' ' << d << ' ' << c << '\n';
            st.faces += 2;
        }
    write_text(path, os.str());
    if (n > 3) {
        write_text(path + ".csv", side.str());
        st.sidecar = true;
    }
    return st;
}

VerifyResult verify_report(const ojson& report, const std::vector<WeierstrassData>& members) {
    VerifyResult vr;
    auto add = [&](const std::string& name, bool ok, double value, double bound) {
        vr.checks.push_back({name, ok, value, bound});
        vr.ok = vr.ok && ok;
    };
    const RunConfig cfg = parse_config(report.at("config"));
    const auto r = report_from_json(report);
    if (r.stages.empty()) {
        add("stages", true, 0.0, 0.0);
        return vr;
    }
    const auto& st = r.stages.back();
    add("member count", members.size() == st.points.size(), double(members.size()), double(st.points.size()));
    if (members.size() != st.points.size()) return vr;
    const HomologyBasis C = homology_basis(cfg.K0);
    for (const auto& p : st.points) {
        const auto& w = members[p.d];
        const std::string at = "d=" + std::to_string(p.d) + " ";
        double conf = conformality_residual(w);
        add(at + "conformality", conf < cfg.null_tol, conf, cfg.null_tol);
        double rp = real_period_max(w, C);
        add(at + "real periods", rp < cfg.period_tol, rp, cfg.period_tol);
        auto F = flux_of(w, C);
        double gap = 0.0;
        for (std::size_t k = 0; k < F.per_curve[0].size() && k < p.flux.size(); ++k)
            gap = std::max(gap, std::abs(F.per_curve[0][k] - p.flux[k]));
        add(at + "flux matches report", gap < 1e-9, gap, 1e-9);
        if (p.certified) {
            double need = std::sqrt(2.0) * 2.0 * st.Lambda / (p.lambda * p.sigma);
            add(at + "clause (v)", p.h_min > need, p.h_min, need);
            add(at + "bound >= Lambda", p.certified_bound >= st.Lambda, p.certified_bound, st.Lambda);
            double est = estimate_distance(Immersion{w, cfg.x0, {}}, cfg.estimate_nr, cfg.estimate_ntheta);
            add(at + "estimate >= 0.9 bound", est >= 0.9 * p.certified_bound, est, 0.9 * p.certified_bound);
        }
    }
    return vr;
}

} // namespace msdl
